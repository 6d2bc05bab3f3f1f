#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "dirhdr/errors.hpp"

namespace dirhdr {

//! A point on the unit circle (q=1) or unit sphere (q=2), stored as ambient
//! coordinates in R^{q+1}. Coordinates are normalized on construction; inputs
//! far from unit norm are rejected.
struct UnitVector {
    std::array<double, 3> c{0.0, 0.0, 0.0};
    int q = 1;

    UnitVector() = default;
    UnitVector(double x, double y);            //!< q=1
    UnitVector(double x, double y, double z);  //!< q=2

    double x() const { return c[0]; }
    double y() const { return c[1]; }
    double z() const { return c[2]; }
    int dim() const { return q + 1; }
};

//! Inner product of two points on the same sphere.
double dot(const UnitVector& a, const UnitVector& b);

//! Inner product clamped to [-1, 1] (absorbs rounding before acos/sqrt).
double dot_clamped(const UnitVector& a, const UnitVector& b);

//! Ambient (chord) distance |a - b| = sqrt(2(1 - a.b)); the metric used by
//! all set distances. Computed as the coordinate-difference norm so identical
//! points give exactly 0; capped at its theoretical maximum 2.
double chord_distance(const UnitVector& a, const UnitVector& b);

UnitVector angle_to_unit(double theta);
//! Angle of a circle point in [0, 2*pi).
double unit_to_angle(const UnitVector& u);

//! Geographic embedding; lon/lat in degrees, lat in [-90, 90].
UnitVector lonlat_to_unit(double lon_deg, double lat_deg);
//! Inverse embedding; lon in [-180, 180), lat in [-90, 90].
std::array<double, 2> unit_to_lonlat(const UnitVector& u);

//! Structure-of-arrays coordinate pack for hot kernel loops.
struct PackedPoints {
    std::vector<double> x, y, z;
    int q = 1;

    PackedPoints() = default;
    explicit PackedPoints(const std::vector<UnitVector>& pts);
    std::size_t size() const { return x.size(); }
};

//! Evaluation grid over S^q with quadrature weights and an implicit
//! rectangular adjacency (ring on the circle; 4-neighbor lon-lat with
//! longitude wraparound and pole stitching on the sphere).
//!
//! The sphere layout is cell-centered equiangular: res_lon columns by
//! res_lon/2 rows, row-major (index = row*res_lon + col), latitudes at
//! -pi/2 + (i+1/2)*Δ. Latitude weights follow the Fejér-1 rule in colatitude
//! (the cell centers are exactly its abscissae), which keeps Σw = 4π to
//! machine precision and makes quadrature of smooth densities spectrally
//! accurate — the naive cos(lat)ΔΔ weights miss the surface area by O(Δ²).
struct EvalGrid {
    int q = 1;
    int res_lon = 0;            //!< S¹: point count; S²: columns
    int res_lat = 0;            //!< S²: rows (= res_lon/2); 0 for S¹
    std::vector<UnitVector> points;
    std::vector<double> quad_weights;
    std::vector<double> angles;  //!< S¹ only: point angles
    std::vector<double> lons;    //!< S² only: column longitudes (radians)
    std::vector<double> lats;    //!< S² only: row latitudes (radians)
    PackedPoints packed;

    std::size_t size() const { return points.size(); }

    //! Neighbor indices of grid point i (2 on S¹; 4 on S², 5 on pole rows
    //! where the across-the-pole cell is stitched in). Symmetric.
    std::vector<std::size_t> neighbors(std::size_t i) const;

    //! S² helpers: row-major index mapping.
    std::size_t index_of(int row, int col) const { return static_cast<std::size_t>(row) * res_lon + col; }

    //! Index of the cell containing a point (nearest cell center in lon/lat).
    std::size_t cell_of(const UnitVector& u) const;

    double surface_measure() const;
};

//! Build the evaluation grid: `resolution` equally spaced angles on S¹;
//! resolution x (resolution/2) cells on S². resolution must be >= 8 and, for
//! S², even.
EvalGrid make_grid(int q, int resolution);

} // namespace dirhdr
