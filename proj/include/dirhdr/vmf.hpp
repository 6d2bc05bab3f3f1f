#pragma once

#include <string>
#include <vector>

#include "dirhdr/geometry.hpp"
#include "dirhdr/rng.hpp"

namespace dirhdr {

//! log of the vMF normalizing constant C_q(kappa) =
//! kappa^{(q-1)/2} / ((2 pi)^{(q+1)/2} I_{(q-1)/2}(kappa)), overflow-safe for
//! any kappa >= 0 (kappa = 0 gives the uniform density's constant).
double log_cq(int q, double kappa);

//! von Mises(-Fisher) component on S^q.
struct VonMisesFisher {
    UnitVector mu;
    double kappa = 1.0;

    VonMisesFisher(UnitVector mean, double concentration);
    int q() const { return mu.q; }
    //! log C_q(kappa) + kappa * x.mu
    double log_density(const UnitVector& x) const;
    double density(const UnitVector& x) const;
};

//! Finite vMF mixture; also the representation of every benchmark truth.
struct MixtureModel {
    std::vector<VonMisesFisher> components;
    std::vector<double> weights;

    MixtureModel(std::vector<VonMisesFisher> comps, std::vector<double> w);
    int q() const { return components.front().q(); }
    double density(const UnitVector& x) const;
    //! Densities at all grid points (OpenMP-parallel hot path).
    std::vector<double> eval_grid(const EvalGrid& grid) const;
};

namespace serial {
//! Reference implementation: plain pointwise loop, no OpenMP pragma.
std::vector<double> mixture_eval_grid(const MixtureModel& model, const EvalGrid& grid);
} // namespace serial

//! Exact i.i.d. draws: Best–Fisher rejection on the circle, inverse-CDF
//! tangent decomposition on the sphere. kappa = 0 yields the uniform law.
std::vector<UnitVector> sample_vmf(const VonMisesFisher& model, std::size_t n, RandomStream& rng);

//! Component picked by weight, then sample_vmf. A single-component mixture
//! consumes the same random stream as sample_vmf (bit-identical draws).
std::vector<UnitVector> sample_mixture(const MixtureModel& model, std::size_t n, RandomStream& rng);

//! Benchmark catalog entries "S1".."S9" (spherical vMF mixtures).
MixtureModel load_benchmark(const std::string& name);
bool is_benchmark_name(const std::string& name);

//! Parse a mixture config file:
//!   q = 1|2
//!   component angle=<rad> kappa=<k> weight=<w>          (q=1)
//!   component lonlat=<lon_deg>,<lat_deg> kappa=.. weight=..  (q=2)
//!   component xyz=<x>,<y>[,<z>] kappa=.. weight=..
//! '#' starts a comment. Weights must sum to 1 within 1e-9 (then normalized).
MixtureModel parse_mixture_config(const std::string& path);
MixtureModel parse_mixture_config_text(const std::string& text, const std::string& origin);

//! Mean resultant length |sum x_i| / n.
double resultant_length(const std::vector<UnitVector>& sample);

//! A_q(kappa): mean resultant of a vMF — I_1/I_0 on the circle,
//! coth(kappa) - 1/kappa on the sphere. Strictly increasing.
double a_ratio(int q, double kappa);

//! Maximum-likelihood concentration: solve A_q(kappa) = rbar on [1e-8, 1e6].
//! rbar ~ 0 throws UniformDataError; rbar >= 1 - 1e-10 throws NumericError
//! (point mass).
double ml_kappa(int q, double rbar);

} // namespace dirhdr
