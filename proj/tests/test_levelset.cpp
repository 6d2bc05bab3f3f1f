#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dirhdr/errors.hpp"
#include "dirhdr/kde.hpp"
#include "dirhdr/levelset.hpp"
#include "dirhdr/rng.hpp"
#include "dirhdr/vmf.hpp"

#include "support/test_oracles.hpp"

using namespace dirhdr;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::shared_ptr<const EvalGrid> grid_of(int q, int res) {
    return std::make_shared<const EvalGrid>(make_grid(q, res));
}
} // namespace

TEST_CASE("threshold order statistic semantics") {
    // j = floor(tau*m) clamped to [1, m]; value is the j-th smallest.
    std::vector<double> v = {5.0, 1.0, 4.0, 2.0, 3.0};
    CHECK(threshold_from_values(v, 0.5) == 2.0);   // j = floor(2.5) = 2
    CHECK(threshold_from_values(v, 0.2) == 1.0);   // j = 1
    CHECK(threshold_from_values(v, 0.8) == 4.0);   // j = 4
    CHECK(threshold_from_values(v, 0.999) == 4.0); // j = floor(4.995) = 4
    CHECK(threshold_from_values(v, 0.05) == 1.0);  // j = floor(0.25) -> clamp 1
    CHECK_THROWS_AS(threshold_from_values(v, 0.0), ValidationError);
    CHECK_THROWS_AS(threshold_from_values(v, 1.0), ValidationError);
    CHECK_THROWS_AS(threshold_from_values({}, 0.5), ValidationError);
    std::vector<double> bad = {1.0, std::nan("")};
    CHECK_THROWS_AS(threshold_from_values(bad, 0.5), NumericError);
}

TEST_CASE("default pseudo sample size") {
    CHECK(default_pseudo_n(100) == 10000);
    CHECK(default_pseudo_n(999) == 10000);
    CHECK(default_pseudo_n(2000) == 20000);
}

TEST_CASE("estimate_threshold sample mode matches a direct computation") {
    RandomStream rng(21);
    const auto pts = sample_vmf(VonMisesFisher(angle_to_unit(0.0), 2.0), 400, rng);
    const KdeEstimate est(pts, 0.3);
    const ThresholdEstimate t = estimate_threshold(est, 0.5);
    std::vector<double> vals;
    for (const UnitVector& p : pts) vals.push_back(kde_eval(est, p));
    CHECK(t.value == doctest::Approx(threshold_from_values(vals, 0.5)).epsilon(1e-13));
    CHECK(t.tau == 0.5);
    CHECK(t.source == ThresholdMode::sample_values);
}

TEST_CASE("estimate_threshold pseudo mode is deterministic and close to sample mode") {
    RandomStream rng(22);
    const auto pts = sample_vmf(VonMisesFisher(angle_to_unit(0.0), 2.0), 500, rng);
    const KdeEstimate est(pts, 0.3);
    RandomStream r1(5), r2(5);
    const ThresholdEstimate a =
        estimate_threshold(est, 0.5, ThresholdMode::pseudo_sample, 0, &r1);
    const ThresholdEstimate b =
        estimate_threshold(est, 0.5, ThresholdMode::pseudo_sample, 0, &r2);
    CHECK(a.value == b.value);
    CHECK(a.pseudo_n == default_pseudo_n(500));
    const ThresholdEstimate s = estimate_threshold(est, 0.5);
    CHECK(a.value == doctest::Approx(s.value).epsilon(0.08));
    // Pseudo mode without a stream is a usage error.
    CHECK_THROWS_AS(estimate_threshold(est, 0.5, ThresholdMode::pseudo_sample), ValidationError);
}

TEST_CASE("truth threshold and region for a single von Mises on the circle") {
    // Frozen truth for kappa=2, tau=0.5: the HDR is mode +- a with
    // a = 0.52966318368066978203 and density threshold 0.39222641329556037076.
    const MixtureModel m({VonMisesFisher(angle_to_unit(1.0), 2.0)}, {1.0});
    const double t = truth_threshold(m, 0.5, 8192);
    CHECK(t == doctest::Approx(0.39222641329556037076).epsilon(5e-4));
    // The sort-accumulate threshold is quantized at the truth resolution, so
    // endpoint accuracy tracks that resolution rather than the region grid.
    const Region r = truth_hdr_region(m, 0.5, grid_of(1, 1024), 65536);
    REQUIRE(r.arcs.size() == 1);
    const double a = 0.52966318368066978203;
    CHECK(r.arcs[0].start == doctest::Approx(1.0 - a).epsilon(3e-4));
    CHECK(r.arcs[0].end == doctest::Approx(1.0 + a).epsilon(3e-4));
    CHECK(r.measure() == doctest::Approx(2.0 * a).epsilon(3e-4));
    // Probability content of the truth region is 1 - tau by construction.
    const double p = region_probability(r, [&m](const UnitVector& x) { return m.density(x); });
    CHECK(p == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("arcs wrap cleanly when the region crosses angle zero") {
    const MixtureModel m({VonMisesFisher(angle_to_unit(0.0), 2.0)}, {1.0});
    const Region r = truth_hdr_region(m, 0.5, grid_of(1, 1024), 65536);
    REQUIRE(r.arcs.size() == 1);
    const double a = 0.52966318368066978203;
    CHECK(r.arcs[0].start == doctest::Approx(2.0 * kPi - a).epsilon(3e-4));
    CHECK(r.arcs[0].end == doctest::Approx(2.0 * kPi + a).epsilon(3e-4));
    CHECK(r.contains(angle_to_unit(0.0)));
    CHECK(r.contains(angle_to_unit(-0.3)));
    CHECK(r.contains(angle_to_unit(0.3)));
    CHECK_FALSE(r.contains(angle_to_unit(kPi)));
}

TEST_CASE("multimodal circle regions split into the right number of arcs") {
    // Four equal, well-separated modes; at tau=0.8 each keeps a tight arc.
    std::vector<VonMisesFisher> comps;
    for (int k = 0; k < 4; ++k) comps.emplace_back(angle_to_unit(k * kPi / 2.0), 12.0);
    const MixtureModel m(comps, std::vector<double>(4, 0.25));
    const Region r = truth_hdr_region(m, 0.8, grid_of(1, 2048));
    CHECK(r.arcs.size() == 4);
    CHECK(count_components(r) == 4);
    // At tau=0.2 with kappa this tight the modes are still separate.
    const Region r2 = truth_hdr_region(m, 0.2, grid_of(1, 2048));
    CHECK(count_components(r2) == 4);
}

TEST_CASE("empty and full circle regions") {
    const auto g = grid_of(1, 256);
    std::vector<double> vals(g->points.size(), 1.0);
    const Region full = level_set_fixed(g, vals, 0.5);
    CHECK(full.full);
    CHECK_FALSE(full.empty());
    CHECK(full.measure() == doctest::Approx(2.0 * kPi));
    CHECK(count_components(full) == 1);
    CHECK(full.contains(angle_to_unit(2.2)));

    const Region empty = level_set_fixed(g, vals, 2.0);
    CHECK(empty.empty());
    CHECK(empty.measure() == 0.0);
    CHECK(count_components(empty) == 0);
    CHECK_FALSE(empty.contains(angle_to_unit(2.2)));

    CHECK_THROWS_AS(extract_boundary(full), EmptyBoundaryError);
    CHECK_THROWS_AS(extract_boundary(empty), EmptyBoundaryError);
    // EmptyBoundaryError is a DegenerateRegionError.
    CHECK_THROWS_AS(extract_boundary(empty), DegenerateRegionError);
}

TEST_CASE("level_set_fixed validates inputs") {
    const auto g = grid_of(1, 64);
    std::vector<double> vals(10, 1.0);
    CHECK_THROWS_AS(level_set_fixed(g, vals, 0.5), ValidationError);
    std::vector<double> ok(g->points.size(), 1.0);
    CHECK_THROWS_AS(level_set_fixed(g, ok, std::nan("")), NumericError);
    CHECK_THROWS_AS(level_set_fixed(nullptr, ok, 0.5), ValidationError);
}

TEST_CASE("spherical cap level set: geometry, measure, probability") {
    // vMF at the north pole, kappa=10, tau=0.5. The truth HDR is the cap
    // z >= z_c with z_c = log(cosh 10)/10.
    const MixtureModel m({VonMisesFisher(UnitVector(0.0, 0.0, 1.0), 10.0)}, {1.0});
    const double z_c = std::log(std::cosh(10.0)) / 10.0;
    const auto g = grid_of(2, 256);
    const Region r = truth_hdr_region(m, 0.5, g);
    CHECK_FALSE(r.empty());
    CHECK_FALSE(r.full);
    CHECK(count_components(r) == 1);
    // Cap area 2 pi (1 - z_c).
    CHECK(r.measure() == doctest::Approx(2.0 * kPi * (1.0 - z_c)).epsilon(0.02));
    // Every interpolated boundary point sits near the cap edge.
    const BoundarySet b = extract_boundary(r);
    REQUIRE(b.points.size() > 50);
    for (const UnitVector& p : b.points) CHECK(p.c[2] == doctest::Approx(z_c).epsilon(0.01));
    // Probability content.
    const double p = region_probability(r, [&m](const UnitVector& x) { return m.density(x); });
    CHECK(p == doctest::Approx(0.5).epsilon(0.02));
    RandomStream rng(33);
    const auto draws = sample_mixture(m, 40000, rng);
    const double pmc = region_probability_mc(r, draws);
    CHECK(pmc == doctest::Approx(0.5).epsilon(0.03));
    // The polylines form one closed loop around the cap.
    REQUIRE(r.polylines.size() >= 1);
    std::size_t closed = 0;
    for (std::size_t i = 0; i < r.polylines.size(); ++i)
        if (r.polyline_closed[i]) ++closed;
    CHECK(closed == r.polylines.size());
}

TEST_CASE("two antipodal caps produce two components") {
    const MixtureModel m(
        {VonMisesFisher(UnitVector(0.0, 0.0, 1.0), 20.0),
         VonMisesFisher(UnitVector(0.0, 0.0, -1.0), 20.0)},
        {0.5, 0.5});
    const Region r = truth_hdr_region(m, 0.5, grid_of(2, 192));
    CHECK(count_components(r) == 2);
    CHECK(r.contains(UnitVector(0.0, 0.0, 1.0)));
    CHECK(r.contains(UnitVector(0.0, 0.0, -1.0)));
    CHECK_FALSE(r.contains(UnitVector(1.0, 0.0, 0.0)));
}

TEST_CASE("regions are nested across tau") {
    RandomStream rng(44);
    const auto pts = sample_mixture(load_benchmark("S2"), 800, rng);
    const KdeEstimate est(pts, 0.35);
    const auto g = grid_of(2, 128);
    const auto vals = kde_eval_grid(est, *g);
    const Region r2 = level_set_fixed(g, vals, threshold_from_values(kde_eval_points(est, est.packed), 0.2));
    const Region r5 = level_set_fixed(g, vals, threshold_from_values(kde_eval_points(est, est.packed), 0.5));
    const Region r8 = level_set_fixed(g, vals, threshold_from_values(kde_eval_points(est, est.packed), 0.8));
    REQUIRE(r2.mask.size() == r5.mask.size());
    for (std::size_t i = 0; i < r5.mask.size(); ++i) {
        if (r8.mask[i]) CHECK(r5.mask[i]);
        if (r5.mask[i]) CHECK(r2.mask[i]);
    }
    CHECK(r2.measure() >= r5.measure());
    CHECK(r5.measure() >= r8.measure());
}

TEST_CASE("hdr_region ties the pieces together on the circle") {
    RandomStream rng(55);
    const auto pts = sample_vmf(VonMisesFisher(angle_to_unit(1.0), 2.0), 2000, rng);
    const KdeEstimate est(pts, 0.25);
    const Region r = hdr_region(est, 0.5, grid_of(1, 1024));
    REQUIRE(r.arcs.size() >= 1);
    // Compare to the analytic truth region loosely (n is finite).
    const double a = 0.52966318368066978203;
    double lo = r.arcs.front().start, hi = r.arcs.back().end;
    CHECK(std::abs(std::remainder(lo - (1.0 - a), 2.0 * kPi)) < 0.25);
    CHECK(std::abs(std::remainder(hi - (1.0 + a), 2.0 * kPi)) < 0.25);
}

TEST_CASE("region csv round trip on the circle") {
    const MixtureModel m({VonMisesFisher(angle_to_unit(1.0), 2.0)}, {1.0});
    const Region r = truth_hdr_region(m, 0.5, grid_of(1, 512));
    const std::string path = (std::filesystem::temp_directory_path() / "arcs_t.csv").string();
    write_region_csv(r, path);
    const BoundarySet b = read_boundary_file(path);
    CHECK(b.q == 1);
    REQUIRE(b.points.size() == 2 * r.arcs.size());
    // The loaded endpoints coincide with the arc endpoints.
    const UnitVector e0 = angle_to_unit(r.arcs[0].start);
    const UnitVector e1 = angle_to_unit(r.arcs[0].end);
    CHECK(chord_distance(b.points[0], e0) < 1e-12);
    CHECK(chord_distance(b.points[1], e1) < 1e-12);
    std::filesystem::remove(path);
}

TEST_CASE("geojson round trip on the sphere") {
    const MixtureModel m({VonMisesFisher(UnitVector(0.0, 0.0, 1.0), 10.0)}, {1.0});
    const Region r = truth_hdr_region(m, 0.5, grid_of(2, 128));
    const auto dir = std::filesystem::temp_directory_path();
    const std::string path = (dir / "boundary_t.geojson").string();
    write_boundary_geojson(r, path, 0.5);
    const BoundarySet b = read_boundary_file(path);
    CHECK(b.q == 2);
    CHECK(b.points.size() >= r.boundary_points.size());
    // Every loaded vertex matches some original boundary vertex closely.
    for (std::size_t i = 0; i < b.points.size(); i += 11) {
        double best = 1e300;
        for (const UnitVector& p : r.boundary_points)
            best = std::min(best, chord_distance(b.points[i], p));
        CHECK(best < 1e-9);
    }
    std::filesystem::remove(path);
}

TEST_CASE("mask csv has one row per cell") {
    const MixtureModel m({VonMisesFisher(UnitVector(0.0, 0.0, 1.0), 5.0)}, {1.0});
    const auto g = grid_of(2, 64);
    const Region r = truth_hdr_region(m, 0.5, g);
    const auto dir = std::filesystem::temp_directory_path();
    const std::string path = (dir / "mask_t.csv").string();
    write_mask_csv(r, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "lon_idx,lat_idx,lon_deg,lat_deg,inside");
    std::size_t rows = 0, inside = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        if (line.back() == '1') ++inside;
    }
    CHECK(rows == g->points.size());
    std::size_t mask_inside = 0;
    for (auto v : r.mask) mask_inside += v;
    CHECK(inside == mask_inside);
    std::filesystem::remove(path);
}

TEST_CASE("read_boundary_file rejects junk") {
    const auto dir = std::filesystem::temp_directory_path();
    const std::string path = (dir / "junk_t.csv").string();
    {
        std::ofstream out(path);
        out << "start_rad,end_rad\n";
    }
    CHECK_THROWS_AS(read_boundary_file(path), EmptySetError);
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK_THROWS_AS(read_boundary_file(path), ValidationError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_boundary_file((dir / "no_such_file_t.csv").string()), ValidationError);
}
