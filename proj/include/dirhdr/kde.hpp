#pragma once

#include <cstddef>
#include <vector>

#include "dirhdr/geometry.hpp"
#include "dirhdr/rng.hpp"

namespace dirhdr {

//! The directional kernel density estimator
//!   f_n(x) = (1/n) Σ_i C_q(1/h²) · exp{ xᵀX_i / h² },
//! evaluated everywhere in the overflow-safe factored form
//!   (e^{log C + κ}/n) Σ_i exp{κ (xᵀX_i − 1)},  κ = 1/h².
struct KdeEstimate {
    std::vector<UnitVector> sample;
    double h = 1.0;
    int q = 1;
    double kappa = 1.0;      //!< 1/h²
    double log_norm = 0.0;   //!< log C_q(κ) + κ (never overflows)
    double scale = 0.0;      //!< e^{log_norm} / n
    PackedPoints packed;

    KdeEstimate(std::vector<UnitVector> pts, double bandwidth);
    std::size_t n() const { return sample.size(); }
};

//! Density at one point (strictly positive in exact arithmetic; far tails may
//! underflow to 0 in the linear form — kde_log_eval never does).
double kde_eval(const KdeEstimate& est, const UnitVector& x);

//! log f_n(x) via log-sum-exp; finite for every x, any h in [1e-3, 1e3].
double kde_log_eval(const KdeEstimate& est, const UnitVector& x);

//! Per-grid-point densities; OpenMP-parallel over grid points and identical
//! to pointwise kde_eval calls.
std::vector<double> kde_eval_grid(const KdeEstimate& est, const EvalGrid& grid);

//! Densities at an arbitrary point pack (same kernel as kde_eval_grid).
std::vector<double> kde_eval_points(const KdeEstimate& est, const PackedPoints& pts);

//! Leave-one-out estimator f_n^{-i}(X_i): direct sum over j != i, so it is
//! bit-identical to rebuilding the estimate without X_i.
double kde_loo_eval(const KdeEstimate& est, std::size_t i);

//! log f_n^{-i}(X_i) via log-sum-exp (used by likelihood cross-validation).
double kde_loo_log_eval(const KdeEstimate& est, std::size_t i);

namespace serial {
//! Reference implementation: plain loop over grid points, no OpenMP.
std::vector<double> kde_eval_grid(const KdeEstimate& est, const EvalGrid& grid);
} // namespace serial

//! Smoothed bootstrap: n i.i.d. draws from the estimated density f_n (pick a
//! sample point uniformly, then draw from the vMF kernel centered there).
std::vector<UnitVector> sample_from_kde(const KdeEstimate& est, std::size_t n, RandomStream& rng);

namespace detail {
//! dots[e*n + i] = <eval_e, sample_i>; parallel over eval points. The matrix
//! is bandwidth-free, which lets selectors scan candidate h without
//! recomputing inner products (common random numbers preserved).
void pairwise_dots(const PackedPoints& eval, const PackedPoints& sample, std::vector<double>& dots);

//! out[e] = scale * Σ_i exp(kappa*(dots[e*n+i]-1)); same arithmetic as the
//! fused kde_eval path, value-identical to building a KdeEstimate.
void eval_from_dots(const std::vector<double>& dots, std::size_t n_eval, std::size_t n_sample,
                    double kappa, double scale, std::vector<double>& out);
} // namespace detail

} // namespace dirhdr
