#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dirhdr/bandwidth.hpp"
#include "dirhdr/errors.hpp"
#include "dirhdr/kde.hpp"
#include "dirhdr/rng.hpp"
#include "dirhdr/special.hpp"
#include "dirhdr/vmf.hpp"

#include "support/test_oracles.hpp"

using namespace dirhdr;

namespace {
constexpr double kPi = 3.14159265358979323846;

//! n points engineered so the fitted ML concentration is exactly `kappa`:
//! half the points at +alpha, half at -alpha with cos(alpha) = A_q(kappa).
std::vector<UnitVector> circle_sample_with_kappa(double kappa, std::size_t n) {
    const double alpha = std::acos(a_ratio(1, kappa));
    std::vector<UnitVector> pts;
    for (std::size_t i = 0; i < n / 2; ++i) pts.push_back(angle_to_unit(alpha));
    for (std::size_t i = n / 2; i < n; ++i) pts.push_back(angle_to_unit(-alpha));
    return pts;
}

std::vector<UnitVector> sphere_sample_with_kappa(double kappa, std::size_t n) {
    const double c = a_ratio(2, kappa);
    const double s = std::sqrt(1.0 - c * c);
    std::vector<UnitVector> pts;
    for (std::size_t i = 0; i < n / 2; ++i) pts.push_back(UnitVector(s, 0.0, c));
    for (std::size_t i = n / 2; i < n; ++i) pts.push_back(UnitVector(-s, 0.0, c));
    return pts;
}

std::vector<UnitVector> vm_sample(std::size_t n, std::uint64_t seed, double kappa = 2.0) {
    RandomStream rng(seed);
    return sample_vmf(VonMisesFisher(angle_to_unit(1.0), kappa), n, rng);
}
} // namespace

TEST_CASE("reference-density selectors hit their closed forms") {
    // Engineered samples with fitted kappa exactly 1, n = 100. Values frozen
    // from a multiprecision evaluation of the closed forms.
    const auto circle = circle_sample_with_kappa(1.0, 100);
    CHECK(h2_vm_reference(circle) == doctest::Approx(0.55981935694142853666).epsilon(1e-9));
    CHECK(h7_rule_of_thumb(circle) == doctest::Approx(0.49942820233227394629).epsilon(1e-9));
    const auto sphere = sphere_sample_with_kappa(1.0, 100);
    CHECK(h7_rule_of_thumb(sphere) == doctest::Approx(0.4673050252569457364).epsilon(1e-9));
}

TEST_CASE("closed forms scale with sample size as n^(-1/5) and n^(-1/6)") {
    const auto c100 = circle_sample_with_kappa(1.0, 100);
    const auto c3200 = circle_sample_with_kappa(1.0, 3200);
    const double ratio_c = h2_vm_reference(c3200) / h2_vm_reference(c100);
    CHECK(ratio_c == doctest::Approx(std::pow(32.0, -0.2)).epsilon(1e-10));
    const auto s100 = sphere_sample_with_kappa(1.0, 100);
    const auto s6400 = sphere_sample_with_kappa(1.0, 6400);
    const double ratio_s = h7_rule_of_thumb(s6400) / h7_rule_of_thumb(s100);
    CHECK(ratio_s == doctest::Approx(std::pow(64.0, -1.0 / 6.0)).epsilon(1e-10));
}

TEST_CASE("sphere rule of thumb is continuous across its small kappa branch") {
    // The bracket term switches to a series near kappa = 1e-3; the selected
    // bandwidth must not jump across the switch. The bandwidth itself varies
    // like kappa^(-1/3) here, so straddle the switch tightly: across this
    // interval the genuine variation is ~7e-6 relative and any larger
    // difference is branch disagreement.
    const auto lo = sphere_sample_with_kappa(1e-3 * (1.0 - 1e-5), 1000);
    const auto hi = sphere_sample_with_kappa(1e-3 * (1.0 + 1e-5), 1000);
    const double a = h7_rule_of_thumb(lo);
    const double b = h7_rule_of_thumb(hi);
    CHECK(std::isfinite(a));
    CHECK(std::isfinite(b));
    CHECK(a == doctest::Approx(b).epsilon(1e-4));
    // Large-kappa log-space branch stays finite where sinh overflows.
    const auto tight = sphere_sample_with_kappa(400.0, 1000);
    const double t = h7_rule_of_thumb(tight);
    CHECK(std::isfinite(t));
    CHECK(t > 0.0);
    CHECK(t < 0.2);
}

TEST_CASE("uniform-ish data raises UniformDataError through the selectors") {
    // Four points at the compass directions: resultant length ~ 0.
    std::vector<UnitVector> pts;
    for (int k = 0; k < 4; ++k)
        for (int r = 0; r < 5; ++r) pts.push_back(angle_to_unit(k * kPi / 2.0));
    CHECK_THROWS_AS(h2_vm_reference(pts), UniformDataError);
    CHECK_THROWS_AS(h7_rule_of_thumb(pts), UniformDataError);
}

TEST_CASE("minimize_scalar: flat, monotone, and quadratic objectives") {
    SearchConfig cfg;
    cfg.lo = 0.1;
    cfg.hi = 2.0;
    // Flat: every candidate ties; the tie breaks to the smallest h.
    const MinimizeResult flat = minimize_scalar([](double) { return 1.0; }, cfg);
    CHECK(flat.h == 0.1);
    CHECK(flat.boundary_hit);
    // Monotone decreasing: argmin is exactly the upper end, flagged.
    const MinimizeResult mono = minimize_scalar([](double h) { return -h; }, cfg);
    CHECK(mono.h == 2.0);
    CHECK(mono.boundary_hit);
    CHECK(!mono.warnings.empty());
    // Smooth interior minimum at h = 0.5.
    const MinimizeResult quad = minimize_scalar(
        [](double h) {
            const double d = std::log(h) - std::log(0.5);
            return d * d;
        },
        cfg);
    CHECK(quad.h == doctest::Approx(0.5).epsilon(1e-3));
    CHECK_FALSE(quad.boundary_hit);
    // The reported value is the minimum over the whole trace.
    double best = 1e300;
    for (const auto& [h, v] : quad.trace) best = std::min(best, v);
    CHECK(quad.value == best);
}

TEST_CASE("minimize_scalar input validation and non-finite handling") {
    SearchConfig bad;
    bad.lo = 1.0;
    bad.hi = 0.5;
    CHECK_THROWS_AS(minimize_scalar([](double h) { return h; }, bad), ValidationError);
    SearchConfig cfg;
    cfg.lo = 0.1;
    cfg.hi = 1.0;
    // Objective finite only in a subinterval: the scan skips the rest.
    const MinimizeResult r = minimize_scalar(
        [](double h) { return h < 0.3 ? std::nan("") : (h - 0.5) * (h - 0.5); }, cfg);
    CHECK(r.h == doctest::Approx(0.5).epsilon(5e-2));
    CHECK(!r.warnings.empty());
    // Nothing finite at all.
    CHECK_THROWS_AS(minimize_scalar([](double) { return std::nan(""); }, cfg), NumericError);
}

TEST_CASE("batch evaluation matches pointwise evaluation") {
    SearchConfig cfg;
    cfg.lo = 0.05;
    cfg.hi = 1.0;
    auto f = [](double h) { return (std::log(h) + 1.0) * (std::log(h) + 1.0); };
    auto fb = [&f](const std::vector<double>& hs) {
        std::vector<double> out;
        for (double h : hs) out.push_back(f(h));
        return out;
    };
    const MinimizeResult a = minimize_scalar(f, cfg);
    const MinimizeResult b = minimize_scalar(f, cfg, fb);
    CHECK(a.h == b.h);
    CHECK(a.value == b.value);
}

TEST_CASE("cross validation objectives are wired to the definitions") {
    const auto pts = vm_sample(120, 31);
    SelectorConfig cfg;
    cfg.grid_resolution = 512;

    const SelectorResult r5 = h5_lcv(pts, cfg);
    CHECK(r5.searched);
    const KdeEstimate est5(pts, r5.h);
    double ll = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) ll += kde_loo_log_eval(est5, i);
    CHECK(r5.objective == doctest::Approx(-ll).epsilon(1e-10));

    const SelectorResult r4 = h4_lscv(pts, cfg);
    const KdeEstimate est4(pts, r4.h);
    double loo_sum = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) loo_sum += kde_loo_eval(est4, i);
    const EvalGrid g = make_grid(1, 512);
    const auto vals = kde_eval_grid(est4, g);
    double int_f2 = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) int_f2 += g.quad_weights[i] * vals[i] * vals[i];
    const double lscv = 2.0 / pts.size() * loo_sum - int_f2;
    CHECK(r4.objective == doctest::Approx(-lscv).epsilon(1e-8));
}

TEST_CASE("searching selectors return the argmin of their own trace") {
    const auto pts = vm_sample(150, 32);
    SelectorConfig cfg;
    for (const std::string& id : {"h4", "h5"}) {
        const SelectorResult r = select_bandwidth(id, pts, cfg);
        REQUIRE(!r.trace.empty());
        double best = 1e300, best_h = 0.0;
        for (const auto& [h, v] : r.trace) {
            if (v < best || (v == best && h < best_h)) {
                best = v;
                best_h = h;
            }
        }
        CHECK(r.h == best_h);
        CHECK(r.objective == best);
        CHECK(r.h > 0.0);
        CHECK(r.h < 8.0);
    }
}

TEST_CASE("cross validation lands near the MISE-optimal scale") {
    // For n = 500 von Mises data the reasonable bandwidths sit around h2;
    // CV selectors should agree within a factor of ~2.
    const auto pts = vm_sample(500, 33);
    SelectorConfig cfg;
    const double ref = h2_vm_reference(pts);
    for (const std::string& id : {"h3", "h4", "h5", "h6"}) {
        const SelectorResult r = select_bandwidth(id, pts, cfg);
        CHECK(r.h > ref / 3.0);
        CHECK(r.h < ref * 3.0);
    }
}

TEST_CASE("EM mixture fit recovers a separated two component mixture") {
    RandomStream rng(34);
    const MixtureModel truth(
        {VonMisesFisher(angle_to_unit(0.5), 8.0), VonMisesFisher(angle_to_unit(3.5), 8.0)},
        {0.5, 0.5});
    const auto pts = sample_mixture(truth, 600, rng);
    const MixtureFit fit = em_fit_vm_mixture(pts);
    CHECK(fit.k == 2);
    CHECK(fit.aic == doctest::Approx(-2.0 * fit.loglik + 2.0 * (3.0 * fit.k - 1.0)).epsilon(1e-12));
    // Means near 0.5 and 3.5 (either order).
    std::vector<double> means;
    for (const auto& c : fit.model.components) means.push_back(unit_to_angle(c.mu));
    std::sort(means.begin(), means.end());
    CHECK(std::abs(std::remainder(means[0] - 0.5, 2.0 * kPi)) < 0.15);
    CHECK(std::abs(std::remainder(means[1] - 3.5, 2.0 * kPi)) < 0.15);
    // The fit log-likelihood beats the single-component fit.
    const MixtureFit k1 = em_fit_vm_mixture(pts, 1, 1);
    CHECK(fit.loglik > k1.loglik);
    CHECK(fit.aic < k1.aic);
}

TEST_CASE("EM input validation") {
    CHECK_THROWS_AS(em_fit_vm_mixture({}), ValidationError);
    const auto sphere = sphere_sample_with_kappa(1.0, 40);
    CHECK_THROWS_AS(em_fit_vm_mixture(sphere), ValidationError);
}

TEST_CASE("second derivative energy matches the analytic curvature") {
    // f = C e^{k cos t}: f'' = (k^2 sin^2 t - k cos t) f. Integrate f''^2 by
    // quadrature on the analytic form and compare.
    const double kappa = 2.0;
    const MixtureModel m({VonMisesFisher(angle_to_unit(0.0), kappa)}, {1.0});
    const double got = second_derivative_energy(m);
    const double c = 1.0 / (2.0 * kPi * oracle::bessel_i_series(0.0, kappa));
    const double ref = oracle::simpson(
        [&](double t) {
            const double f = c * std::exp(kappa * std::cos(t));
            const double d2 = (kappa * kappa * std::sin(t) * std::sin(t) -
                               kappa * std::cos(t)) * f;
            return d2 * d2;
        },
        0.0, 2.0 * kPi, 20000);
    CHECK(got == doctest::Approx(ref).epsilon(1e-5));
}

TEST_CASE("bootstrap MISE selector is deterministic and honors its pilot") {
    const auto pts = vm_sample(200, 35);
    SelectorConfig cfg;
    const SelectorResult a = h6_bootstrap_mise(pts, cfg);
    const SelectorResult b = h6_bootstrap_mise(pts, cfg);
    CHECK(a.h == b.h);
    CHECK(a.objective == b.objective);
    CHECK(a.searched);
    CHECK(std::isfinite(a.objective));
    // An explicit pilot bandwidth changes the objective surface.
    SelectorConfig with_pilot = cfg;
    with_pilot.pilot_h = 0.8;
    const SelectorResult c = h6_bootstrap_mise(pts, with_pilot);
    CHECK(std::isfinite(c.h));
    CHECK(c.objective != a.objective);
    // Sphere data is rejected (the circulant quadrature is circle-only).
    const auto sphere = sphere_sample_with_kappa(2.0, 100);
    CHECK_THROWS_AS(h6_bootstrap_mise(sphere, cfg), ValidationError);
}

TEST_CASE("bootstrap HDR selector: determinism and validation") {
    const auto pts = vm_sample(120, 36);
    SelectorConfig cfg;
    cfg.bootstrap_b = 24;
    cfg.search_grid = 10;
    cfg.golden_tol = 0.05;
    cfg.seed = 7;
    const SelectorResult a = h1_bootstrap_hausdorff(pts, cfg);
    const SelectorResult b = h1_bootstrap_hausdorff(pts, cfg);
    CHECK(a.h == b.h);
    CHECK(a.objective == b.objective);
    CHECK(a.searched);
    CHECK(a.h > 0.0);
    CHECK(std::isfinite(a.objective));
    CHECK(a.objective >= 0.0);
    CHECK(a.objective <= 2.0);

    // Fewer than 50 points is a usage error.
    const auto tiny = vm_sample(30, 37);
    CHECK_THROWS_AS(h1_bootstrap_hausdorff(tiny, cfg), ValidationError);
    // h1 cannot be its own pilot.
    SelectorConfig self = cfg;
    self.pilot = "h1";
    CHECK_THROWS_AS(h1_bootstrap_hausdorff(pts, self), ValidationError);
    // tau outside (0,1).
    SelectorConfig bad_tau = cfg;
    bad_tau.tau = 1.5;
    CHECK_THROWS_AS(h1_bootstrap_hausdorff(pts, bad_tau), ValidationError);
}

TEST_CASE("bootstrap HDR selector responds to the seed but stays in range") {
    const auto pts = vm_sample(150, 38, 4.0);
    SelectorConfig cfg;
    cfg.bootstrap_b = 16;
    cfg.search_grid = 10;
    cfg.golden_tol = 0.05;
    cfg.seed = 1;
    const SelectorResult a = h1_bootstrap_hausdorff(pts, cfg);
    cfg.seed = 2;
    const SelectorResult c = h1_bootstrap_hausdorff(pts, cfg);
    // Different resamples, same order of magnitude.
    CHECK(a.h / c.h > 0.2);
    CHECK(a.h / c.h < 5.0);
}

TEST_CASE("selector dispatch and ids") {
    const auto& ids = selector_ids();
    REQUIRE(ids.size() == 7);
    CHECK(ids.front() == "h1");
    CHECK(ids.back() == "h7");
    const auto pts = vm_sample(100, 39);
    SelectorConfig cfg;
    cfg.bootstrap_b = 12;
    cfg.search_grid = 8;
    cfg.golden_tol = 0.1;
    for (const std::string& id : ids) {
        const SelectorResult r = select_bandwidth(id, pts, cfg);
        CHECK(r.selector == id);
        CHECK(r.h > 0.0);
        CHECK(std::isfinite(r.h));
        const bool closed_form = (id == "h2" || id == "h7");
        CHECK(r.searched == !closed_form);
    }
    CHECK_THROWS_AS(select_bandwidth("h8", pts, cfg), ValidationError);
    CHECK_THROWS_AS(select_bandwidth("", pts, cfg), ValidationError);
}

TEST_CASE("circle selectors are exactly invariant under quarter turns") {
    // (x, y) -> (-y, x) is an exact floating point rotation; resultants and
    // pairwise dot products are bit-identical, so h2/h5/h7 must match bitwise.
    const auto pts = vm_sample(180, 40);
    std::vector<UnitVector> rot;
    for (const UnitVector& u : pts) rot.push_back(UnitVector(-u.c[1], u.c[0]));
    CHECK(h2_vm_reference(pts) == h2_vm_reference(rot));
    CHECK(h7_rule_of_thumb(pts) == h7_rule_of_thumb(rot));
    SelectorConfig cfg;
    const SelectorResult a = h5_lcv(pts, cfg);
    const SelectorResult b = h5_lcv(rot, cfg);
    CHECK(a.h == b.h);
}

TEST_CASE("sphere selectors are invariant under axis swaps") {
    RandomStream rng(41);
    const auto pts = sample_mixture(load_benchmark("S5"), 300, rng);
    std::vector<UnitVector> rot;
    for (const UnitVector& u : pts) rot.push_back(UnitVector(u.c[2], u.c[1], -u.c[0]));
    CHECK(h7_rule_of_thumb(pts) == doctest::Approx(h7_rule_of_thumb(rot)).epsilon(1e-12));
    SelectorConfig cfg;
    const SelectorResult a = h5_lcv(pts, cfg);
    const SelectorResult b = h5_lcv(rot, cfg);
    CHECK(a.h == doctest::Approx(b.h).epsilon(1e-3));
}

TEST_CASE("explicit search intervals are honored") {
    const auto pts = vm_sample(100, 42);
    SelectorConfig cfg;
    cfg.search_lo = 0.3;
    cfg.search_hi = 0.6;
    const SelectorResult r = h5_lcv(pts, cfg);
    CHECK(r.h >= 0.3);
    CHECK(r.h <= 0.6);
    for (const auto& [h, v] : r.trace) {
        CHECK(h >= 0.3 - 1e-12);
        CHECK(h <= 0.6 + 1e-12);
    }
}
