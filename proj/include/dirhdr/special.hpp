#pragma once

namespace dirhdr {

//! Modified Bessel function of the first kind I_p(z), real order p >= -1,
//! z >= 0. Power series for z <= 15, asymptotic expansion beyond; accurate to
//! ~1e-12 relative for z <= 50. For large z the linear value overflows — use
//! log_bessel_i (every production caller with kappa = 1/h^2 does).
double bessel_i(double p, double z);

//! log I_p(z), overflow-safe for z up to ~1e12 scale. Direct log of the power
//! series for z <= 50, asymptotic log form beyond (valid for z >> p^2, which
//! covers every order the estimator uses).
double log_bessel_i(double p, double z);

//! Gamma function for p > 0 (Lanczos approximation, ~1e-13 relative).
double gamma_fn(double p);

} // namespace dirhdr
