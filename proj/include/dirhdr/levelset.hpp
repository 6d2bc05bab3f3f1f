#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dirhdr/geometry.hpp"
#include "dirhdr/kde.hpp"
#include "dirhdr/rng.hpp"
#include "dirhdr/vmf.hpp"

namespace dirhdr {

//! How the HDR threshold f̂_τ is formed: order statistic of the estimated
//! density over the sample itself, or over N fresh draws from the estimate.
enum class ThresholdMode { sample_values, pseudo_sample };

struct ThresholdEstimate {
    double tau = 0.5;
    double value = 0.0;
    ThresholdMode source = ThresholdMode::sample_values;
    std::size_t pseudo_n = 0;  //!< draws used in pseudo-sample mode
};

//! j-th smallest of `values` with j = floor(tau*m) clamped to [1, m]; the
//! τ-quantile order statistic the HDR threshold is built on.
double threshold_from_values(std::vector<double> values, double tau);

//! Default pseudo-sample size max(10n, 1e4).
std::size_t default_pseudo_n(std::size_t n);

ThresholdEstimate estimate_threshold(const KdeEstimate& est, double tau,
                                     ThresholdMode mode = ThresholdMode::sample_values,
                                     std::size_t pseudo_n = 0, RandomStream* rng = nullptr);

//! Circle arc [start, end) with start in [0, 2π), start < end <= start + 2π;
//! an arc with end > 2π wraps through 0. The full circle is [0, 2π).
struct Arc {
    double start = 0.0;
    double end = 0.0;
    double length() const { return end - start; }
};

//! A super-level set {f >= t}: sorted disjoint arcs on the circle; grid mask,
//! interpolated boundary crossings, and chained polylines on the sphere.
struct Region {
    int q = 1;
    double threshold = 0.0;
    bool full = false;

    std::vector<Arc> arcs;  //!< q=1

    std::shared_ptr<const EvalGrid> grid;  //!< q=2
    std::vector<std::uint8_t> mask;
    std::vector<UnitVector> boundary_points;
    std::vector<std::vector<UnitVector>> polylines;
    std::vector<std::uint8_t> polyline_closed;

    bool empty() const;
    //! Total arc length (q=1) or masked quadrature weight (q=2).
    double measure() const;
    bool contains(const UnitVector& x) const;
};

struct BoundarySet {
    int q = 1;
    std::vector<UnitVector> points;
};

//! Level set of a density given its values on a grid. For q=1 a pointwise
//! evaluator may be supplied; arc endpoints are then refined by bisection on
//! f - t to 1e-10 angular tolerance (otherwise linear interpolation).
Region level_set_fixed(std::shared_ptr<const EvalGrid> grid, const std::vector<double>& values,
                       double t, const std::function<double(double)>& f_angle = {});

//! HDR of a KDE: level_set_fixed at the estimated threshold.
Region hdr_region(const KdeEstimate& est, double tau, std::shared_ptr<const EvalGrid> grid,
                  ThresholdMode mode = ThresholdMode::sample_values,
                  std::size_t pseudo_n = 0, RandomStream* rng = nullptr);

//! Truth threshold f_τ by dense-grid quadrature: sort cells by density,
//! accumulate weight until mass 1-τ is reached, return the crossing density.
double truth_threshold(const MixtureModel& model, double tau, int resolution);

//! HDR of an analytic mixture: truth threshold at `truth_resolution`
//! (default 1024 on S¹, 1024x512 on S²), region built on `grid`.
Region truth_hdr_region(const MixtureModel& model, double tau,
                        std::shared_ptr<const EvalGrid> grid, int truth_resolution = 0);

//! Arc endpoints (q=1) or all interpolated edge crossings (q=2).
//! Throws EmptyBoundaryError when the region is empty or full.
BoundarySet extract_boundary(const Region& region);

//! Number of maximal connected pieces (0 for empty; 1 for full).
std::size_t count_components(const Region& region);

//! P(X in region) for X ~ density: Simpson quadrature over arcs (q=1) or
//! masked grid quadrature (q=2).
double region_probability(const Region& region, const std::function<double(const UnitVector&)>& density);
//! Same, with density values already evaluated on the region's grid (q=2).
double region_probability(const Region& region, const std::vector<double>& grid_values);
//! Monte Carlo variant: fraction of draws falling inside the region.
double region_probability_mc(const Region& region, const std::vector<UnitVector>& draws);

//! File exports. Arcs: CSV "start_rad,end_rad". Sphere boundaries:
//! GeoJSON-like feature collection of LineStrings in lon/lat degrees.
//! Mask raster: CSV "lon_idx,lat_idx,lon_deg,lat_deg,inside".
void write_region_csv(const Region& region, const std::string& path);
void write_boundary_geojson(const Region& region, const std::string& path, double tau);
void write_mask_csv(const Region& region, const std::string& path);

//! Load an exported boundary file back as a point set: arcs CSV gives the
//! endpoints (q=1), GeoJSON gives the polyline vertices (q=2).
BoundarySet read_boundary_file(const std::string& path);

} // namespace dirhdr
