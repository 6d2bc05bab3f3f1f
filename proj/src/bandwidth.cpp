#include "dirhdr/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "dirhdr/errors.hpp"
#include "dirhdr/fastexp.hpp"
#include "dirhdr/kde.hpp"
#include "dirhdr/levelset.hpp"
#include "dirhdr/rng.hpp"
#include "dirhdr/setdist.hpp"
#include "dirhdr/special.hpp"

namespace dirhdr {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kDefaultLo = 0.02;
constexpr double kDefaultHi = 8.0;

int sample_dim(const std::vector<UnitVector>& sample) {
    if (sample.empty()) throw ValidationError("bandwidth selection: empty sample");
    return sample.front().q;
}

void require_circle(const std::vector<UnitVector>& sample, const char* who) {
    if (sample_dim(sample) != 1)
        throw ValidationError(std::string(who) + " is defined on the circle only");
}

//! Fitted concentration for the single-vMF reference selectors.
double fitted_kappa(const std::vector<UnitVector>& sample) {
    return ml_kappa(sample_dim(sample), resultant_length(sample));
}

double log_sum_exp2(double a, double b) {
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

} // namespace

MinimizeResult minimize_scalar(
    const std::function<double(double)>& objective, const SearchConfig& config,
    const std::function<std::vector<double>(const std::vector<double>&)>& batch) {
    if (!objective) throw ValidationError("minimize_scalar: null objective");
    if (!(config.lo > 0.0) || !(config.hi > config.lo) || !std::isfinite(config.hi))
        throw ValidationError("minimize_scalar: need 0 < lo < hi");
    if (config.grid_points < 8)
        throw ValidationError("minimize_scalar: need at least 8 grid candidates");
    if (!(config.golden_tol > 0.0))
        throw ValidationError("minimize_scalar: refinement tolerance must be positive");

    MinimizeResult result;
    const int G = config.grid_points;
    const double la = std::log(config.lo);
    const double lb = std::log(config.hi);
    std::vector<double> hs(static_cast<std::size_t>(G));
    for (int i = 0; i < G; ++i)
        hs[static_cast<std::size_t>(i)] = std::exp(la + (lb - la) * i / (G - 1));
    hs.front() = config.lo;
    hs.back() = config.hi;

    std::vector<double> values;
    if (batch) {
        values = batch(hs);
        if (values.size() != hs.size())
            throw NumericError("minimize_scalar: batch objective returned wrong count");
    } else {
        values.reserve(hs.size());
        for (double h : hs) values.push_back(objective(h));
    }
    std::size_t skipped = 0;
    int best = -1;
    for (int i = 0; i < G; ++i) {
        const double v = values[static_cast<std::size_t>(i)];
        result.trace.emplace_back(hs[static_cast<std::size_t>(i)], v);
        if (!std::isfinite(v)) {
            ++skipped;
            continue;
        }
        if (best < 0 || v < values[static_cast<std::size_t>(best)]) best = i;
    }
    if (skipped > 0)
        result.warnings.push_back(std::to_string(skipped) +
                                  " candidate(s) with non-finite objective were skipped");
    if (best < 0) throw NumericError("minimize_scalar: objective non-finite on the whole grid");

    // Golden-section refinement in log-bandwidth between the best candidate's
    // neighbors; ties keep the smaller bandwidth.
    double a = std::log(hs[static_cast<std::size_t>(std::max(0, best - 1))]);
    double b = std::log(hs[static_cast<std::size_t>(std::min(G - 1, best + 1))]);
    auto eval_log = [&](double x) {
        const double h = std::exp(x);
        const double v = objective(h);
        result.trace.emplace_back(h, v);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    constexpr double kInvPhi = 0.61803398874989484820;
    constexpr double kInvPhi2 = 0.38196601125010515180;
    if (b - a > config.golden_tol) {
        double x1 = a + kInvPhi2 * (b - a);
        double x2 = a + kInvPhi * (b - a);
        double f1 = eval_log(x1);
        double f2 = eval_log(x2);
        for (int it = 0; it < 80 && b - a > config.golden_tol; ++it) {
            if (f1 <= f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = a + kInvPhi2 * (b - a);
                f1 = eval_log(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + kInvPhi * (b - a);
                f2 = eval_log(x2);
            }
        }
    }

    // The winner is the best point ever evaluated; equal values go to the
    // smallest bandwidth, so a flat objective returns the first grid candidate.
    result.h = 0.0;
    result.value = std::numeric_limits<double>::infinity();
    for (const auto& [h, v] : result.trace) {
        if (!std::isfinite(v)) continue;
        if (v < result.value || (v == result.value && h < result.h)) {
            result.value = v;
            result.h = h;
        }
    }
    const double rel_edge = 1e-12 * config.hi;
    if (std::abs(result.h - config.lo) <= rel_edge || std::abs(result.h - config.hi) <= rel_edge) {
        result.boundary_hit = true;
        result.warnings.push_back("selected bandwidth sits on the search-interval edge");
    }
    return result;
}

// ---------------------------------------------------------------------------
// Closed-form reference selectors
// ---------------------------------------------------------------------------

double h2_vm_reference(const std::vector<UnitVector>& sample) {
    require_circle(sample, "h2");
    const double kappa = fitted_kappa(sample);
    const double n = static_cast<double>(sample.size());
    // [4 sqrt(pi) I0(k)^2 / (3 k^2 I2(2k) n)]^{1/5}, all in log space so large
    // concentrations cannot overflow the Bessel terms.
    const double log_num = std::log(4.0) + 0.5 * std::log(kPi) + 2.0 * log_bessel_i(0, kappa);
    const double log_den =
        std::log(3.0) + 2.0 * std::log(kappa) + log_bessel_i(2, 2.0 * kappa) + std::log(n);
    return std::exp(0.2 * (log_num - log_den));
}

double h7_rule_of_thumb(const std::vector<UnitVector>& sample) {
    const int q = sample_dim(sample);
    const double kappa = fitted_kappa(sample);
    const double n = static_cast<double>(sample.size());
    if (q == 1) {
        // [4 sqrt(pi) I0(k)^2 / (k (I1(2k) + 3k I2(2k)) n)]^{1/5}
        const double log_num = std::log(4.0) + 0.5 * std::log(kPi) + 2.0 * log_bessel_i(0, kappa);
        const double log_mix = log_sum_exp2(log_bessel_i(1, 2.0 * kappa),
                                            std::log(3.0 * kappa) + log_bessel_i(2, 2.0 * kappa));
        const double log_den = std::log(kappa) + log_mix + std::log(n);
        return std::exp(0.2 * (log_num - log_den));
    }
    // [8 sinh^2 k / (k ((1+4k^2) sinh 2k - 2k cosh 2k) n)]^{1/6}
    double log_sinh2;    // log sinh^2(k)
    double log_bracket;  // log((1+4k^2) sinh 2k - 2k cosh 2k)
    if (kappa < 1e-3) {
        // Series for the bracket, (16/3)k^3 + (64/15)k^5, to dodge the
        // catastrophic cancellation of the direct form near uniformity.
        log_sinh2 = 2.0 * std::log(std::sinh(kappa));
        log_bracket = std::log((16.0 / 3.0) * std::pow(kappa, 3) + (64.0 / 15.0) * std::pow(kappa, 5));
    } else if (kappa <= 30.0) {
        log_sinh2 = 2.0 * std::log(std::sinh(kappa));
        log_bracket = std::log((1.0 + 4.0 * kappa * kappa) * std::sinh(2.0 * kappa) -
                               2.0 * kappa * std::cosh(2.0 * kappa));
    } else {
        // sinh/cosh in log space; the e^{-4k} corrections are below 1e-52.
        log_sinh2 = 2.0 * (kappa - std::log(2.0) + std::log1p(-std::exp(-2.0 * kappa)));
        log_bracket = 2.0 * kappa - std::log(2.0) +
                      std::log1p(4.0 * kappa * kappa - 2.0 * kappa);
    }
    const double log_h6th =
        std::log(8.0) + log_sinh2 - std::log(kappa) - log_bracket - std::log(n);
    return std::exp(log_h6th / 6.0);
}

// ---------------------------------------------------------------------------
// EM mixture fit and the AMISE selector
// ---------------------------------------------------------------------------

namespace {

struct EmRun {
    std::vector<double> w, kappa, mu_cos, mu_sin;
    double loglik = -std::numeric_limits<double>::infinity();
    bool converged = false;
};

EmRun run_em(const std::vector<double>& cx, const std::vector<double>& cy,
             const std::vector<std::size_t>& sorted_idx, int k, int restart, int restarts,
             int max_iter, double tol) {
    const std::size_t n = cx.size();
    EmRun run;
    run.w.assign(static_cast<std::size_t>(k), 1.0 / k);
    run.kappa.assign(static_cast<std::size_t>(k), 2.0);
    run.mu_cos.resize(static_cast<std::size_t>(k));
    run.mu_sin.resize(static_cast<std::size_t>(k));
    // Deterministic seeding: means at staggered quantiles of the angular order,
    // shifted per restart.
    for (int j = 0; j < k; ++j) {
        const std::size_t pos =
            ((2 * static_cast<std::size_t>(j) + 1) * n / (2 * static_cast<std::size_t>(k)) +
             static_cast<std::size_t>(restart) * n /
                 (static_cast<std::size_t>(restarts) * static_cast<std::size_t>(k))) %
            n;
        const std::size_t i = sorted_idx[pos];
        run.mu_cos[static_cast<std::size_t>(j)] = cx[i];
        run.mu_sin[static_cast<std::size_t>(j)] = cy[i];
    }

    std::vector<double> log_c(static_cast<std::size_t>(k));
    std::vector<double> resp(static_cast<std::size_t>(k));
    std::vector<double> nk(static_cast<std::size_t>(k));
    std::vector<double> sc(static_cast<std::size_t>(k));
    std::vector<double> ss(static_cast<std::size_t>(k));
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iter; ++iter) {
        for (int j = 0; j < k; ++j)
            log_c[static_cast<std::size_t>(j)] = log_cq(1, run.kappa[static_cast<std::size_t>(j)]);
        std::fill(nk.begin(), nk.end(), 0.0);
        std::fill(sc.begin(), sc.end(), 0.0);
        std::fill(ss.begin(), ss.end(), 0.0);
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double m = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                const double t = run.mu_cos[ju] * cx[i] + run.mu_sin[ju] * cy[i];
                resp[ju] = std::log(run.w[ju]) + log_c[ju] + run.kappa[ju] * t;
                m = std::max(m, resp[ju]);
            }
            double z = 0.0;
            for (int j = 0; j < k; ++j) z += std::exp(resp[static_cast<std::size_t>(j)] - m);
            ll += m + std::log(z);
            for (int j = 0; j < k; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                const double g = std::exp(resp[ju] - m) / z;
                nk[ju] += g;
                sc[ju] += g * cx[i];
                ss[ju] += g * cy[i];
            }
        }
        for (int j = 0; j < k; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            if (nk[ju] < 1e-8 * static_cast<double>(n)) return run;  // dead component
            run.w[ju] = nk[ju] / static_cast<double>(n);
            const double r = std::hypot(sc[ju], ss[ju]);
            run.mu_cos[ju] = sc[ju] / r;
            run.mu_sin[ju] = ss[ju] / r;
            const double rbar = std::clamp(r / nk[ju], 1e-6, 1.0 - 1e-9);
            run.kappa[ju] = std::clamp(ml_kappa(1, rbar), 1e-6, 1e4);
        }
        run.loglik = ll;
        if (std::abs(ll - prev_ll) < tol) {
            run.converged = true;
            break;
        }
        prev_ll = ll;
    }
    return run;
}

} // namespace

MixtureFit em_fit_vm_mixture(const std::vector<UnitVector>& sample, int k_min, int k_max,
                             int restarts, int max_iter, double tol) {
    require_circle(sample, "EM mixture fit");
    const std::size_t n = sample.size();
    if (n < 2) throw ValidationError("EM mixture fit: need at least 2 points");
    if (k_min < 1 || k_max < k_min) throw ValidationError("EM mixture fit: bad component range");
    if (restarts < 1 || max_iter < 1 || !(tol > 0.0))
        throw ValidationError("EM mixture fit: bad iteration controls");
    int k_hi = std::min(k_max, std::max(1, static_cast<int>(n / 10)));
    const int k_lo = std::min(k_min, k_hi);
    k_hi = std::max(k_hi, k_lo);

    std::vector<double> cx(n), cy(n), angle(n);
    for (std::size_t i = 0; i < n; ++i) {
        cx[i] = sample[i].x();
        cy[i] = sample[i].y();
        angle[i] = unit_to_angle(sample[i]);
    }
    std::vector<std::size_t> sorted_idx(n);
    std::iota(sorted_idx.begin(), sorted_idx.end(), std::size_t{0});
    std::sort(sorted_idx.begin(), sorted_idx.end(),
              [&](std::size_t a, std::size_t b) { return angle[a] < angle[b]; });

    bool have_best = false;
    EmRun best_run;
    int best_k = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    for (int k = k_lo; k <= k_hi; ++k) {
        for (int r = 0; r < restarts; ++r) {
            EmRun run = run_em(cx, cy, sorted_idx, k, r, restarts, max_iter, tol);
            if (!run.converged) continue;
            const double aic = -2.0 * run.loglik + 2.0 * (3.0 * k - 1.0);
            if (aic < best_aic) {
                best_aic = aic;
                best_run = std::move(run);
                best_k = k;
                have_best = true;
            }
        }
    }
    if (!have_best)
        throw NumericError("EM mixture fit: no run converged for any component count");

    std::vector<VonMisesFisher> comps;
    std::vector<double> weights = best_run.w;
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (int j = 0; j < best_k; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        weights[ju] /= wsum;
        comps.emplace_back(UnitVector(best_run.mu_cos[ju], best_run.mu_sin[ju]),
                           best_run.kappa[ju]);
    }
    MixtureFit fit{MixtureModel(std::move(comps), std::move(weights)), best_k, best_run.loglik,
                   best_aic};
    return fit;
}

double second_derivative_energy(const MixtureModel& model, int grid_points) {
    if (model.q() != 1)
        throw ValidationError("second_derivative_energy is defined on the circle only");
    if (grid_points < 64) throw ValidationError("second_derivative_energy: grid too coarse");
    const auto G = static_cast<std::size_t>(grid_points);
    const double step = kTwoPi / static_cast<double>(G);
    std::vector<double> f(G);
    for (std::size_t j = 0; j < G; ++j)
        f[j] = model.density(angle_to_unit(step * static_cast<double>(j)));
    double acc = 0.0;
    for (std::size_t j = 0; j < G; ++j) {
        const double up = f[(j + 1) % G];
        const double dn = f[(j + G - 1) % G];
        const double d2 = (up - 2.0 * f[j] + dn) / (step * step);
        acc += d2 * d2;
    }
    return acc * step;
}

namespace {

SearchConfig make_search(const SelectorConfig& cfg, double def_lo, double def_hi,
                         double def_tol) {
    SearchConfig sc;
    sc.lo = cfg.search_lo > 0.0 ? cfg.search_lo : def_lo;
    sc.hi = cfg.search_hi > 0.0 ? cfg.search_hi : def_hi;
    sc.grid_points = cfg.search_grid > 0 ? cfg.search_grid : 24;
    sc.golden_tol = cfg.golden_tol > 0.0 ? cfg.golden_tol : def_tol;
    return sc;
}

SelectorResult finish_search(std::string id, MinimizeResult mr) {
    SelectorResult out;
    out.selector = std::move(id);
    out.h = mr.h;
    out.objective = mr.value;
    out.searched = true;
    out.boundary_hit = mr.boundary_hit;
    out.trace = std::move(mr.trace);
    out.warnings.insert(out.warnings.end(), mr.warnings.begin(), mr.warnings.end());
    return out;
}

int default_integral_resolution(int q) { return q == 1 ? 1024 : 256; }

} // namespace

SelectorResult h3_amise_mixture(const std::vector<UnitVector>& sample,
                                const SelectorConfig& config) {
    require_circle(sample, "h3");
    const double n = static_cast<double>(sample.size());
    const MixtureFit fit = em_fit_vm_mixture(sample);
    const double curvature = second_derivative_energy(fit.model);
    auto objective = [&](double h) {
        const double nu = 1.0 / (h * h);
        const double li0 = log_bessel_i(0, nu);
        const double ratio = std::exp(log_bessel_i(2, nu) - li0);
        const double bias = 0.0625 * (1.0 - ratio) * (1.0 - ratio) * curvature;
        const double var = std::exp(log_bessel_i(0, 2.0 * nu) - std::log(2.0 * n * kPi) - 2.0 * li0);
        return bias + var;
    };
    return finish_search("h3",
                         minimize_scalar(objective, make_search(config, kDefaultLo, kDefaultHi, 1e-4)));
}

SelectorResult h4_lscv(const std::vector<UnitVector>& sample, const SelectorConfig& config) {
    const int q = sample_dim(sample);
    if (sample.size() < 2) throw ValidationError("h4: need at least 2 points");
    const int res =
        config.grid_resolution > 0 ? config.grid_resolution : default_integral_resolution(q);
    const EvalGrid grid = make_grid(q, res);
    const double n = static_cast<double>(sample.size());
    auto objective = [&](double h) {
        const KdeEstimate est(sample, h);
        double loo = 0.0;
        for (std::size_t i = 0; i < est.n(); ++i) loo += kde_loo_eval(est, i);
        const std::vector<double> v = kde_eval_grid(est, grid);
        double isq = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) isq += grid.quad_weights[j] * v[j] * v[j];
        return -(2.0 / n * loo - isq);  // minimize the negated CV score
    };
    return finish_search("h4",
                         minimize_scalar(objective, make_search(config, kDefaultLo, kDefaultHi, 1e-4)));
}

SelectorResult h5_lcv(const std::vector<UnitVector>& sample, const SelectorConfig& config) {
    if (sample.size() < 2) throw ValidationError("h5: need at least 2 points");
    sample_dim(sample);
    auto objective = [&](double h) {
        const KdeEstimate est(sample, h);
        double acc = 0.0;
        for (std::size_t i = 0; i < est.n(); ++i) acc += kde_loo_log_eval(est, i);
        return -acc;
    };
    return finish_search("h5",
                         minimize_scalar(objective, make_search(config, kDefaultLo, kDefaultHi, 1e-4)));
}

namespace {

double resolve_pilot_bandwidth(const std::vector<UnitVector>& sample, const SelectorConfig& cfg,
                               const std::string& default_id,
                               const std::vector<std::string>& forbidden) {
    if (cfg.pilot_h > 0.0) {
        if (!std::isfinite(cfg.pilot_h)) throw ValidationError("pilot bandwidth must be finite");
        return cfg.pilot_h;
    }
    const std::string id = cfg.pilot.empty() ? default_id : cfg.pilot;
    for (const std::string& f : forbidden)
        if (id == f)
            throw ValidationError("selector " + f + " cannot serve as its own pilot chain");
    SelectorConfig pilot_cfg;
    pilot_cfg.seed = cfg.seed;
    pilot_cfg.tau = cfg.tau;
    return select_bandwidth(id, sample, pilot_cfg).h;
}

} // namespace

SelectorResult h6_bootstrap_mise(const std::vector<UnitVector>& sample,
                                 const SelectorConfig& config) {
    require_circle(sample, "h6");
    const std::size_t n = sample.size();
    if (n < 2) throw ValidationError("h6: need at least 2 points");
    const int res = config.grid_resolution > 0 ? config.grid_resolution : 1024;
    const EvalGrid grid = make_grid(1, res);
    const auto G = static_cast<std::size_t>(grid.size());
    const double step = kTwoPi / static_cast<double>(G);

    const double pilot = resolve_pilot_bandwidth(sample, config, "h2", {"h1", "h6"});
    const std::vector<double> fg = kde_eval_grid(KdeEstimate(sample, pilot), grid);

    std::vector<double> cos_gap(G);  // cos(d * step) - 1, the kernel's argument
    for (std::size_t d = 0; d < G; ++d)
        cos_gap[d] = std::cos(step * static_cast<double>(d)) - 1.0;

    std::vector<double> k1(G), k2(G);
    auto objective = [&](double h) {
        const double kappa = 1.0 / (h * h);
        const double log_norm = log_cq(1, kappa) + kappa;
        const double c1 = std::exp(log_norm);
        const double c2 = std::exp(2.0 * log_norm);
        for (std::size_t d = 0; d < G; ++d) {
            k1[d] = c1 * fast_exp(kappa * cos_gap[d]);
            k2[d] = c2 * fast_exp(2.0 * kappa * cos_gap[d]);
        }
        // Circulant quadrature convolutions: (K (*) f_g)(theta_j) and the same
        // with the squared kernel.
        double obj = 0.0;
        for (std::size_t j = 0; j < G; ++j) {
            double s1 = 0.0;
            double s2 = 0.0;
            for (std::size_t d = 0; d < G; ++d) {
                const std::size_t gap = j >= d ? j - d : d - j;
                s1 += k1[gap] * fg[d];
                s2 += k2[gap] * fg[d];
            }
            const double conv1 = step * s1;
            const double conv2 = step * s2;
            const double bias = conv1 - fg[j];
            const double var = std::max(0.0, conv2 - conv1 * conv1) / static_cast<double>(n);
            obj += step * (bias * bias + var);
        }
        return obj;
    };
    SelectorResult out = finish_search(
        "h6", minimize_scalar(objective, make_search(config, kDefaultLo, kDefaultHi, 1e-4)));
    return out;
}

SelectorResult h1_bootstrap_hausdorff(const std::vector<UnitVector>& sample,
                                      const SelectorConfig& config) {
    const int q = sample_dim(sample);
    const std::size_t n = sample.size();
    if (n < 50)
        throw ValidationError("h1: needs at least 50 points (smaller samples make the pilot "
                              "reference unreliable)");
    if (!(config.tau > 0.0 && config.tau < 1.0))
        throw ValidationError("h1: tau must lie strictly inside (0, 1)");

    const int res = config.grid_resolution > 0 ? config.grid_resolution : (q == 1 ? 512 : 128);
    auto grid = std::make_shared<const EvalGrid>(make_grid(q, res));
    const std::size_t E = grid->size();

    const double pilot = resolve_pilot_bandwidth(sample, config, q == 1 ? "h3" : "h5", {"h1"});
    const KdeEstimate pilot_est(sample, pilot);

    // The reference boundary is fixed once, from the pilot estimate: threshold
    // over the original sample's pilot density values, region on the internal
    // grid. Bootstrap regions use the same grid and linear crossing
    // interpolation, so discretization bias largely cancels in the objective.
    const double t_ref =
        threshold_from_values(kde_eval_points(pilot_est, pilot_est.packed), config.tau);
    const Region ref_region = level_set_fixed(grid, kde_eval_grid(pilot_est, *grid), t_ref);
    BoundarySet ref_boundary;
    bool ref_ok = true;
    try {
        ref_boundary = extract_boundary(ref_region);
    } catch (const EmptyBoundaryError&) {
        ref_ok = false;
    }

    SearchConfig sc = make_search(config, pilot / 8.0, 8.0 * pilot, 0.02);

    if (!ref_ok) {
        // Oversmoothed (or vanished) pilot region: every candidate scores the
        // penalty, so the search degenerates to the tie-break rule.
        MinimizeResult mr = minimize_scalar([](double) { return 2.0; }, sc);
        SelectorResult out = finish_search("h1", std::move(mr));
        out.warnings.push_back(
            "pilot reference boundary is degenerate; every candidate scored the penalty 2");
        return out;
    }

    const int B = config.bootstrap_b > 0 ? config.bootstrap_b : (q == 1 ? 200 : 50);
    RandomStream master(config.seed);
    std::vector<PackedPoints> resamples;
    resamples.reserve(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
        RandomStream sub = master.substream(static_cast<std::uint64_t>(b));
        resamples.emplace_back(sample_from_kde(pilot_est, n, sub));
    }

    // Inner products are bandwidth-free: computed once per resample and reused
    // for every candidate h (and identically recomputed during refinement), so
    // the whole search runs on common random numbers.
    std::vector<double> dots_self(n * n);
    std::vector<double> dots_grid(E * n);
    std::vector<double> v_self(n);
    std::vector<double> v_grid(E);
    auto replicate_error = [&](double h) {
        const double kappa = 1.0 / (h * h);
        const double scale = std::exp(log_cq(q, kappa) + kappa) / static_cast<double>(n);
        detail::eval_from_dots(dots_self, n, n, kappa, scale, v_self);
        const double t = threshold_from_values(v_self, config.tau);
        detail::eval_from_dots(dots_grid, E, n, kappa, scale, v_grid);
        const Region region = level_set_fixed(grid, v_grid, t);
        try {
            return hausdorff_distance(extract_boundary(region), ref_boundary);
        } catch (const EmptyBoundaryError&) {
            return 2.0;
        }
    };
    auto batch = [&](const std::vector<double>& hs) {
        std::vector<double> sums(hs.size(), 0.0);
        for (int b = 0; b < B; ++b) {
            const PackedPoints& rs = resamples[static_cast<std::size_t>(b)];
            detail::pairwise_dots(rs, rs, dots_self);
            detail::pairwise_dots(grid->packed, rs, dots_grid);
            for (std::size_t i = 0; i < hs.size(); ++i) sums[i] += replicate_error(hs[i]);
        }
        for (double& s : sums) s /= static_cast<double>(B);
        return sums;
    };
    auto objective = [&](double h) { return batch({h}).front(); };

    return finish_search("h1", minimize_scalar(objective, sc, batch));
}

SelectorResult select_bandwidth(const std::string& selector, const std::vector<UnitVector>& sample,
                                const SelectorConfig& config) {
    auto closed_form = [&](double h) {
        SelectorResult out;
        out.selector = selector;
        out.h = h;
        return out;
    };
    if (selector == "h1") return h1_bootstrap_hausdorff(sample, config);
    if (selector == "h2") return closed_form(h2_vm_reference(sample));
    if (selector == "h3") return h3_amise_mixture(sample, config);
    if (selector == "h4") return h4_lscv(sample, config);
    if (selector == "h5") return h5_lcv(sample, config);
    if (selector == "h6") return h6_bootstrap_mise(sample, config);
    if (selector == "h7") return closed_form(h7_rule_of_thumb(sample));
    throw ValidationError("unknown selector '" + selector + "' (valid: h1..h7)");
}

const std::vector<std::string>& selector_ids() {
    static const std::vector<std::string> ids{"h1", "h2", "h3", "h4", "h5", "h6", "h7"};
    return ids;
}

} // namespace dirhdr
