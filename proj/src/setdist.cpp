#include "dirhdr/setdist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dirhdr/errors.hpp"

namespace dirhdr {

namespace {

inline double squared_chord(const UnitVector& a, const UnitVector& b) {
    const double dx = a.c[0] - b.c[0];
    const double dy = a.c[1] - b.c[1];
    const double dz = a.c[2] - b.c[2];
    return dx * dx + dy * dy + dz * dz;
}

void check_pair(const std::vector<UnitVector>& a, const std::vector<UnitVector>& b) {
    if (a.empty() || b.empty()) throw EmptySetError("set distance on an empty point set");
    if (a.front().q != b.front().q)
        throw ValidationError("set distance: point sets live on different spheres");
}

//! max over rows of a of the squared nearest-neighbor distance into b. A row
//! whose running minimum drops to the current best can no longer raise the
//! maximum, so its scan stops early; the pruning never changes the result.
template <bool Parallel>
double directed_sq(const std::vector<UnitVector>& a, const std::vector<UnitVector>& b) {
    const auto na = static_cast<std::ptrdiff_t>(a.size());
    double best = 0.0;
#pragma omp parallel for reduction(max : best) schedule(static) if (Parallel)
    for (std::ptrdiff_t i = 0; i < na; ++i) {
        double row = std::numeric_limits<double>::infinity();
        for (const UnitVector& y : b) {
            const double d = squared_chord(a[static_cast<std::size_t>(i)], y);
            if (d < row) {
                row = d;
                if (row <= best) break;
            }
        }
        if (row > best) best = row;
    }
    return best;
}

inline double finish_distance(double squared) {
    return std::min(2.0, std::sqrt(squared));
}

} // namespace

double hausdorff_distance(const std::vector<UnitVector>& a, const std::vector<UnitVector>& b) {
    check_pair(a, b);
    return finish_distance(std::max(directed_sq<true>(a, b), directed_sq<true>(b, a)));
}

double hausdorff_distance(const BoundarySet& a, const BoundarySet& b) {
    if (a.q != b.q) throw ValidationError("hausdorff_distance: boundary sets on different spheres");
    return hausdorff_distance(a.points, b.points);
}

double min_set_distance(const std::vector<UnitVector>& a, const std::vector<UnitVector>& b) {
    check_pair(a, b);
    double best = std::numeric_limits<double>::infinity();
    for (const UnitVector& x : a) {
        for (const UnitVector& y : b) {
            const double d = squared_chord(x, y);
            if (d < best) best = d;
        }
        if (best == 0.0) break;
    }
    return finish_distance(best);
}

double min_set_distance(const BoundarySet& a, const BoundarySet& b) {
    if (a.q != b.q) throw ValidationError("min_set_distance: boundary sets on different spheres");
    return min_set_distance(a.points, b.points);
}

double hdr_error(const Region& truth, const Region& estimate) {
    const BoundarySet tb = extract_boundary(truth);
    const BoundarySet eb = extract_boundary(estimate);
    return hausdorff_distance(tb, eb);
}

double hdr_error(const BoundarySet& truth, const BoundarySet& estimate) {
    return hausdorff_distance(truth, estimate);
}

namespace serial {

double hausdorff_distance(const std::vector<UnitVector>& a, const std::vector<UnitVector>& b) {
    check_pair(a, b);
    return finish_distance(std::max(directed_sq<false>(a, b), directed_sq<false>(b, a)));
}

} // namespace serial

} // namespace dirhdr
