#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dirhdr/geometry.hpp"
#include "dirhdr/vmf.hpp"

namespace dirhdr {

//! Shared knobs for the searching selectors (h1, h3, h4, h5, h6). Zero-valued
//! fields mean "use the selector's own default".
struct SelectorConfig {
    double search_lo = 0.0;      //!< lower end of the bandwidth search interval
    double search_hi = 0.0;      //!< upper end
    int search_grid = 0;         //!< log-spaced coarse candidates (default 24, min 8)
    double golden_tol = 0.0;     //!< refinement tolerance in log-bandwidth units
    int bootstrap_b = 0;         //!< resamples for h1 (default 200 on S¹, 50 on S²)
    std::string pilot;           //!< pilot selector id ("h2".."h7") for h1/h6
    double pilot_h = 0.0;        //!< explicit pilot bandwidth (overrides `pilot`)
    double tau = 0.5;            //!< HDR level (h1 only)
    std::uint64_t seed = 1;      //!< master seed for bootstrap resampling
    int grid_resolution = 0;     //!< internal evaluation grid (default 512 S¹ / 128 S²,
                                 //!< 1024 S¹ / 256 S² for the integral-based selectors)
};

//! Scalar search outcome: argmin plus the evaluated (h, objective) trace.
struct MinimizeResult {
    double h = 0.0;
    double value = 0.0;
    bool boundary_hit = false;  //!< argmin landed on a search-interval edge
    std::vector<std::pair<double, double>> trace;
    std::vector<std::string> warnings;
};

struct SearchConfig {
    double lo = 0.0;
    double hi = 0.0;
    int grid_points = 24;
    double golden_tol = 1e-4;
};

//! Coarse log-grid scan followed by golden-section refinement around the best
//! candidate. Ties break toward the smallest bandwidth; non-finite objective
//! values are skipped with a warning (error if nothing is finite). `batch`,
//! when given, evaluates the whole candidate list at once — used by h1 to
//! reuse per-resample work across candidates.
MinimizeResult minimize_scalar(
    const std::function<double(double)>& objective, const SearchConfig& config,
    const std::function<std::vector<double>(const std::vector<double>&)>& batch = {});

//! What a selector returns: the bandwidth, the objective trace when the
//! selector searches, and any warnings (boundary hits, degenerate pilots).
struct SelectorResult {
    std::string selector;
    double h = 0.0;
    double objective = 0.0;
    bool searched = false;
    bool boundary_hit = false;
    std::vector<std::pair<double, double>> trace;
    std::vector<std::string> warnings;
};

//! An EM mixture fit with its model-choice score.
struct MixtureFit {
    MixtureModel model;
    int k = 1;
    double loglik = 0.0;
    double aic = 0.0;  //!< -2 loglik + 2 (3k - 1)
};

//! Bootstrap bandwidth for HDR estimation: resample the pilot density, rebuild
//! the HDR at each candidate bandwidth, and minimize the mean Hausdorff
//! distance to the pilot's fixed reference boundary. Resamples are drawn once
//! and reused across candidates (common random numbers); replicates whose
//! region degenerates score the sphere diameter 2.
SelectorResult h1_bootstrap_hausdorff(const std::vector<UnitVector>& sample,
                                      const SelectorConfig& config);

//! Circle reference-density bandwidth assuming a single von Mises law:
//! [4 sqrt(pi) I0(k)^2 / (3 k^2 I2(2k) n)]^{1/5} with k fitted by ML.
double h2_vm_reference(const std::vector<UnitVector>& sample);

//! EM fit of a von Mises mixture on the circle; best AIC over k in
//! [k_min, k_max] (k capped at n/10), `restarts` deterministic seedings each.
MixtureFit em_fit_vm_mixture(const std::vector<UnitVector>& sample, int k_min = 1, int k_max = 5,
                             int restarts = 5, int max_iter = 500, double tol = 1e-8);

//! Integral of the squared second derivative of a circular density, by dense
//! central differences (2^14 grid) — the curvature term of the AMISE risk.
double second_derivative_energy(const MixtureModel& model, int grid_points = 16384);

//! Circle AMISE bandwidth: minimize the asymptotic MISE risk
//!   (1/16)[1 - I2(v)/I0(v)]^2 * R(f'') + I0(2v) / (2 n pi I0(v)^2),  v = 1/h^2,
//! with the curvature R(f'') read off an AIC-best EM mixture fit.
SelectorResult h3_amise_mixture(const std::vector<UnitVector>& sample,
                                const SelectorConfig& config);

//! Least-squares cross-validation: maximize 2/n sum_i f^{-i}(X_i) - int f^2.
SelectorResult h4_lscv(const std::vector<UnitVector>& sample, const SelectorConfig& config);

//! Likelihood cross-validation: maximize sum_i log f^{-i}(X_i).
SelectorResult h5_lcv(const std::vector<UnitVector>& sample, const SelectorConfig& config);

//! Smoothed-bootstrap MISE on the circle, computed exactly by quadrature:
//! E_B f* = K_h (*) f_g and n Var_B f* = K_h^2 (*) f_g - (K_h (*) f_g)^2, so no
//! resampling noise enters the objective. Pilot g defaults to h2.
SelectorResult h6_bootstrap_mise(const std::vector<UnitVector>& sample,
                                 const SelectorConfig& config);

//! Rule-of-thumb bandwidth for a single fitted vMF reference:
//! S¹ [4 sqrt(pi) I0^2 / (k (I1(2k) + 3k I2(2k)) n)]^{1/5},
//! S² [8 sinh^2 k / (k ((1+4k^2) sinh 2k - 2k cosh 2k) n)]^{1/6}.
double h7_rule_of_thumb(const std::vector<UnitVector>& sample);

//! Dispatch by selector id "h1".."h7".
SelectorResult select_bandwidth(const std::string& selector, const std::vector<UnitVector>& sample,
                                const SelectorConfig& config);

//! The valid selector ids, in order.
const std::vector<std::string>& selector_ids();

} // namespace dirhdr
