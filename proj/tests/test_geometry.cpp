#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "dirhdr/errors.hpp"
#include "dirhdr/geometry.hpp"
#include "dirhdr/rng.hpp"

using namespace dirhdr;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("unit vector construction normalizes and validates") {
    UnitVector u(0.9, 1.2);  // norm 1.5: modest deviation, renormalized
    CHECK(u.q == 1);
    CHECK(u.c[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(u.c[1] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(u.c[2] == 0.0);

    UnitVector v(0.5, 1.0, 1.0);  // norm 1.5
    CHECK(v.q == 2);
    CHECK(v.c[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    CHECK_THROWS_AS(UnitVector(0.0, 0.0), ValidationError);
    CHECK_THROWS_AS(UnitVector(0.0, 0.0, 0.0), ValidationError);
    // Norm far outside [1/2, 2] is not a direction.
    CHECK_THROWS_AS(UnitVector(3.0, 4.0), ValidationError);
    CHECK_THROWS_AS(UnitVector(0.1, 0.2), ValidationError);
    const double nan = std::nan("");
    CHECK_THROWS_AS(UnitVector(nan, 1.0), ValidationError);
}

TEST_CASE("angle round trips on the circle") {
    for (double theta : {0.0, 0.5, 1.0, 2.0, kPi, 4.0, 6.2, -1.0, -kPi}) {
        const UnitVector u = angle_to_unit(theta);
        const double back = unit_to_angle(u);
        // Both map to the same direction; compare on the circle.
        const double diff = std::remainder(back - theta, 2.0 * kPi);
        CHECK(std::abs(diff) < 1e-12);
        CHECK(back >= 0.0);
        CHECK(back < 2.0 * kPi);
    }
}

TEST_CASE("lonlat round trips on the sphere") {
    RandomStream rng(7);
    for (int i = 0; i < 200; ++i) {
        const double lon = 360.0 * rng.uniform() - 180.0;
        const double lat = 178.0 * rng.uniform() - 89.0;
        const UnitVector u = lonlat_to_unit(lon, lat);
        const auto [lon2, lat2] = unit_to_lonlat(u);
        const double dlon = std::remainder(lon2 - lon, 360.0);
        CHECK(std::abs(dlon) < 1e-10);
        CHECK(lat2 == doctest::Approx(lat).epsilon(1e-10));
    }
    // Poles: longitude is arbitrary but latitude must be exact.
    const auto [lonp, latp] = unit_to_lonlat(UnitVector(0.0, 0.0, 1.0));
    CHECK(latp == doctest::Approx(90.0));
    (void)lonp;
}

TEST_CASE("chord distance basics") {
    const UnitVector a = angle_to_unit(0.0);
    const UnitVector b = angle_to_unit(kPi);
    CHECK(chord_distance(a, a) == 0.0);
    CHECK(chord_distance(a, b) == doctest::Approx(2.0).epsilon(1e-12));
    const UnitVector c = angle_to_unit(kPi / 2.0);
    CHECK(chord_distance(a, c) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(chord_distance(a, c) == chord_distance(c, a));

    const UnitVector s1(0.0, 0.0, 1.0);
    const UnitVector s2(0.0, 0.0, -1.0);
    CHECK(chord_distance(s1, s2) <= 2.0);
    CHECK_THROWS_AS(chord_distance(a, s1), ValidationError);
}

TEST_CASE("circle grid layout and quadrature weights") {
    const EvalGrid g = make_grid(1, 64);
    CHECK(g.q == 1);
    CHECK(g.points.size() == 64);
    CHECK(g.angles.size() == 64);
    double wsum = 0.0;
    for (double w : g.quad_weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0 * kPi).epsilon(1e-14));
    // Uniform spacing.
    const double step = 2.0 * kPi / 64.0;
    for (std::size_t i = 0; i < 64; ++i) {
        CHECK(g.angles[i] == doctest::Approx(i * step).epsilon(1e-13));
        CHECK(g.quad_weights[i] == doctest::Approx(step).epsilon(1e-13));
    }
}

TEST_CASE("sphere grid weights sum to the surface area exactly") {
    for (int res : {16, 32, 64, 128}) {
        const EvalGrid g = make_grid(2, res);
        CHECK(g.points.size() == static_cast<std::size_t>(res) * (res / 2));
        double wsum = 0.0;
        for (double w : g.quad_weights) wsum += w;
        // The colatitude rule is constructed so that a constant integrates to
        // the exact sphere area.
        CHECK(wsum == doctest::Approx(4.0 * kPi).epsilon(1e-13));
        CHECK(g.surface_measure() == doctest::Approx(4.0 * kPi).epsilon(1e-13));
    }
}

TEST_CASE("sphere grid quadrature integrates smooth functions accurately") {
    const EvalGrid g = make_grid(2, 64);
    // Int over S^2 of z^2 dA = 4*pi/3; Int of exp(z) dA = 4*pi*sinh(1).
    double int_z2 = 0.0, int_expz = 0.0;
    for (std::size_t i = 0; i < g.points.size(); ++i) {
        const double z = g.points[i].c[2];
        int_z2 += g.quad_weights[i] * z * z;
        int_expz += g.quad_weights[i] * std::exp(z);
    }
    CHECK(int_z2 == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-10));
    CHECK(int_expz == doctest::Approx(4.0 * kPi * std::sinh(1.0)).epsilon(1e-10));
}

TEST_CASE("grid indexing and cell lookup agree") {
    const EvalGrid g = make_grid(2, 32);
    for (std::size_t i = 0; i < g.points.size(); ++i) {
        CHECK(g.cell_of(g.points[i]) == i);
    }
    const EvalGrid c = make_grid(1, 48);
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        CHECK(c.cell_of(c.points[i]) == i);
    }
}

TEST_CASE("sphere grid neighbors are symmetric and wrap in longitude") {
    const EvalGrid g = make_grid(2, 16);
    const std::size_t n = g.points.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : g.neighbors(i)) {
            CHECK(j < n);
            const auto back = g.neighbors(j);
            CHECK(std::find(back.begin(), back.end(), i) != back.end());
        }
    }
    // First cell of a row and last cell of the same row are neighbors (wrap).
    const auto nb0 = g.neighbors(g.index_of(0, 0));
    CHECK(std::find(nb0.begin(), nb0.end(), g.index_of(0, 15)) != nb0.end());
}

TEST_CASE("grid resolution validation") {
    CHECK_THROWS_AS(make_grid(1, 4), ValidationError);
    CHECK_THROWS_AS(make_grid(2, 7), ValidationError);
    CHECK_THROWS_AS(make_grid(3, 64), ValidationError);
}

TEST_CASE("packed points match their sources") {
    RandomStream rng(3);
    std::vector<UnitVector> pts;
    for (int i = 0; i < 50; ++i) pts.push_back(angle_to_unit(2.0 * kPi * rng.uniform()));
    const PackedPoints pk(pts);
    CHECK(pk.size() == 50);
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(pk.x[i] == pts[i].c[0]);
        CHECK(pk.y[i] == pts[i].c[1]);
        CHECK(pk.z[i] == pts[i].c[2]);
    }
}

TEST_CASE("random substreams are deterministic and position independent") {
    RandomStream a(42);
    RandomStream b(42);
    // Draw different amounts from the parents, then derive the same substream.
    (void)a.uniform();
    (void)b.uniform();
    (void)b.uniform();
    (void)b.uniform();
    RandomStream sa = a.substream(5);
    RandomStream sb = b.substream(5);
    for (int i = 0; i < 16; ++i) CHECK(sa.raw() == sb.raw());

    // Distinct indices give distinct streams.
    RandomStream s0 = a.substream(0);
    RandomStream s1 = a.substream(1);
    bool any_diff = false;
    for (int i = 0; i < 8; ++i) any_diff |= (s0.raw() != s1.raw());
    CHECK(any_diff);
}

TEST_CASE("uniform samples stay inside the half open interval") {
    RandomStream rng(11);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = rng.uniform_pos();
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}
