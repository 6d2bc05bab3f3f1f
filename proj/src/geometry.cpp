#include "dirhdr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dirhdr {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_finite_norm(double n2) {
    if (!std::isfinite(n2) || n2 <= 0.0) {
        throw ValidationError("UnitVector: coordinates must be finite and nonzero");
    }
    // Accept modest deviations (file ingest renormalizes elsewhere with its
    // own tolerance); reject garbage that is clearly not a direction.
    if (n2 < 0.25 || n2 > 4.0) {
        throw ValidationError("UnitVector: norm too far from 1 to be a direction");
    }
}

} // namespace

UnitVector::UnitVector(double x, double y) : q(1) {
    const double n2 = x * x + y * y;
    check_finite_norm(n2);
    const double inv = 1.0 / std::sqrt(n2);
    c = {x * inv, y * inv, 0.0};
}

UnitVector::UnitVector(double x, double y, double z) : q(2) {
    const double n2 = x * x + y * y + z * z;
    check_finite_norm(n2);
    const double inv = 1.0 / std::sqrt(n2);
    c = {x * inv, y * inv, z * inv};
}

double dot(const UnitVector& a, const UnitVector& b) {
    if (a.q != b.q) throw ValidationError("dot: dimension mismatch");
    return a.c[0] * b.c[0] + a.c[1] * b.c[1] + a.c[2] * b.c[2];
}

double dot_clamped(const UnitVector& a, const UnitVector& b) {
    return std::clamp(dot(a, b), -1.0, 1.0);
}

double chord_distance(const UnitVector& a, const UnitVector& b) {
    if (a.q != b.q) throw ValidationError("chord_distance: dimension mismatch");
    // Ambient difference norm rather than sqrt(2(1-dot)): identical points give
    // exactly 0 and symmetry is exact, which the metric axioms rely on.
    const double dx = a.c[0] - b.c[0];
    const double dy = a.c[1] - b.c[1];
    const double dz = a.c[2] - b.c[2];
    return std::min(2.0, std::sqrt(dx * dx + dy * dy + dz * dz));
}

UnitVector angle_to_unit(double theta) {
    if (!std::isfinite(theta)) throw ValidationError("angle_to_unit: non-finite angle");
    return UnitVector(std::cos(theta), std::sin(theta));
}

double unit_to_angle(const UnitVector& u) {
    if (u.q != 1) throw ValidationError("unit_to_angle: expected a circle point");
    double a = std::atan2(u.y(), u.x());
    if (a < 0.0) a += kTwoPi;
    if (a >= kTwoPi) a = 0.0;
    return a;
}

UnitVector lonlat_to_unit(double lon_deg, double lat_deg) {
    if (!std::isfinite(lon_deg) || !std::isfinite(lat_deg)) {
        throw ValidationError("lonlat_to_unit: non-finite coordinate");
    }
    if (lat_deg < -90.0 || lat_deg > 90.0) {
        throw ValidationError("lonlat_to_unit: latitude outside [-90, 90]");
    }
    const double lon = lon_deg * kPi / 180.0;
    const double lat = lat_deg * kPi / 180.0;
    const double cl = std::cos(lat);
    return UnitVector(cl * std::cos(lon), cl * std::sin(lon), std::sin(lat));
}

std::array<double, 2> unit_to_lonlat(const UnitVector& u) {
    if (u.q != 2) throw ValidationError("unit_to_lonlat: expected a sphere point");
    double lon = std::atan2(u.y(), u.x()) * 180.0 / kPi;
    if (lon >= 180.0) lon -= 360.0;
    if (lon < -180.0) lon += 360.0;
    const double lat = std::asin(std::clamp(u.z(), -1.0, 1.0)) * 180.0 / kPi;
    return {lon, lat};
}

PackedPoints::PackedPoints(const std::vector<UnitVector>& pts) {
    q = pts.empty() ? 1 : pts.front().q;
    x.reserve(pts.size());
    y.reserve(pts.size());
    z.reserve(pts.size());
    for (const auto& p : pts) {
        if (p.q != q) throw ValidationError("PackedPoints: mixed dimensions");
        x.push_back(p.x());
        y.push_back(p.y());
        z.push_back(p.z());
    }
}

namespace {

//! Fejér-1 weights on colatitude midpoint nodes θ_k = (2k+1)π/(2M):
//! Σ_k w_k g(cos θ_k) ≈ ∫_{-1}^{1} g(x) dx, exact for polynomial degree < M.
std::vector<double> fejer1_weights(int M) {
    std::vector<double> w(M);
    for (int k = 0; k < M; ++k) {
        const double theta = (2.0 * k + 1.0) * kPi / (2.0 * M);
        double s = 0.0;
        for (int m = 1; m <= M / 2; ++m) {
            s += std::cos(2.0 * m * theta) / (4.0 * m * m - 1.0);
        }
        w[k] = (2.0 / M) * (1.0 - 2.0 * s);
    }
    return w;
}

} // namespace

EvalGrid make_grid(int q, int resolution) {
    if (q != 1 && q != 2) throw ValidationError("make_grid: q must be 1 or 2");
    if (resolution < 8) throw ValidationError("make_grid: resolution must be >= 8");
    EvalGrid g;
    g.q = q;
    if (q == 1) {
        g.res_lon = resolution;
        g.points.reserve(resolution);
        g.angles.reserve(resolution);
        const double w = kTwoPi / resolution;
        for (int j = 0; j < resolution; ++j) {
            const double theta = kTwoPi * j / resolution;
            g.angles.push_back(theta);
            g.points.push_back(angle_to_unit(theta));
        }
        g.quad_weights.assign(resolution, w);
    } else {
        if (resolution % 2 != 0) throw ValidationError("make_grid: sphere resolution must be even");
        const int R = resolution;
        const int M = resolution / 2;
        g.res_lon = R;
        g.res_lat = M;
        const double dlon = kTwoPi / R;
        const double dlat = kPi / M;
        g.lons.reserve(R);
        for (int j = 0; j < R; ++j) g.lons.push_back(-kPi + (j + 0.5) * dlon);
        g.lats.reserve(M);
        for (int i = 0; i < M; ++i) g.lats.push_back(-kPi / 2.0 + (i + 0.5) * dlat);
        const std::vector<double> wlat = fejer1_weights(M);
        g.points.reserve(static_cast<std::size_t>(R) * M);
        g.quad_weights.reserve(static_cast<std::size_t>(R) * M);
        for (int i = 0; i < M; ++i) {
            const double cl = std::cos(g.lats[i]);
            const double sl = std::sin(g.lats[i]);
            // Row i has colatitude π/2 - lat = (2(M-1-i)+1)π/(2M); Fejér
            // weights are symmetric in the row order, index directly.
            const double wrow = wlat[M - 1 - i] * dlon;
            for (int j = 0; j < R; ++j) {
                g.points.emplace_back(cl * std::cos(g.lons[j]), cl * std::sin(g.lons[j]), sl);
                g.quad_weights.push_back(wrow);
            }
        }
    }
    g.packed = PackedPoints(g.points);
    return g;
}

std::vector<std::size_t> EvalGrid::neighbors(std::size_t i) const {
    std::vector<std::size_t> out;
    if (q == 1) {
        const std::size_t n = points.size();
        out.push_back((i + 1) % n);
        out.push_back((i + n - 1) % n);
        return out;
    }
    const int R = res_lon;
    const int M = res_lat;
    const int row = static_cast<int>(i) / R;
    const int col = static_cast<int>(i) % R;
    out.push_back(index_of(row, (col + 1) % R));
    out.push_back(index_of(row, (col + R - 1) % R));
    if (row + 1 < M) out.push_back(index_of(row + 1, col));
    if (row - 1 >= 0) out.push_back(index_of(row - 1, col));
    // Across-the-pole stitching: the meridian continues into the cell half a
    // turn away on the same row.
    if (row == 0) out.push_back(index_of(0, (col + R / 2) % R));
    if (row == M - 1) out.push_back(index_of(M - 1, (col + R / 2) % R));
    return out;
}

std::size_t EvalGrid::cell_of(const UnitVector& u) const {
    if (u.q != q) throw ValidationError("cell_of: dimension mismatch");
    if (q == 1) {
        const double theta = unit_to_angle(u);
        const double step = kTwoPi / res_lon;
        // Points sit at j*step; assign to the nearest one.
        auto j = static_cast<long>(std::floor(theta / step + 0.5));
        return static_cast<std::size_t>(((j % res_lon) + res_lon) % res_lon);
    }
    const int R = res_lon;
    const int M = res_lat;
    double lon = std::atan2(u.y(), u.x());
    const double lat = std::asin(std::clamp(u.z(), -1.0, 1.0));
    const double dlon = kTwoPi / R;
    const double dlat = kPi / M;
    long col = static_cast<long>(std::floor((lon + kPi) / dlon));
    col = ((col % R) + R) % R;
    long row = static_cast<long>(std::floor((lat + kPi / 2.0) / dlat));
    row = std::clamp<long>(row, 0, M - 1);
    return index_of(static_cast<int>(row), static_cast<int>(col));
}

double EvalGrid::surface_measure() const { return q == 1 ? kTwoPi : 2.0 * kTwoPi; }

} // namespace dirhdr
