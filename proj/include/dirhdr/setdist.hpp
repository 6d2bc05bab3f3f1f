#pragma once

#include <vector>

#include "dirhdr/geometry.hpp"
#include "dirhdr/levelset.hpp"

namespace dirhdr {

//! Hausdorff distance between two finite point sets under the chord metric:
//! max over both sets of the farthest nearest-neighbor distance. Exact brute
//! force with early-exit row pruning; OpenMP-parallel over rows, identical in
//! value to the serial reference.
double hausdorff_distance(const std::vector<UnitVector>& a, const std::vector<UnitVector>& b);
double hausdorff_distance(const BoundarySet& a, const BoundarySet& b);

//! Minimum pairwise chord distance; 0 when the sets intersect.
double min_set_distance(const std::vector<UnitVector>& a, const std::vector<UnitVector>& b);
double min_set_distance(const BoundarySet& a, const BoundarySet& b);

//! Estimation error of a region against the reference region: Hausdorff
//! distance between their boundaries. Throws DegenerateRegionError (via
//! boundary extraction) when either region is empty or covers everything.
double hdr_error(const Region& truth, const Region& estimate);
double hdr_error(const BoundarySet& truth, const BoundarySet& estimate);

namespace serial {
//! Reference implementation: plain row loop, no OpenMP pragma.
double hausdorff_distance(const std::vector<UnitVector>& a, const std::vector<UnitVector>& b);
} // namespace serial

} // namespace dirhdr
