#include "dirhdr/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "dirhdr/errors.hpp"

namespace dirhdr {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double reduce_angle(double theta) {
    double r = std::fmod(theta, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

} // namespace

double threshold_from_values(std::vector<double> values, double tau) {
    if (values.empty()) throw ValidationError("threshold_from_values: empty value set");
    if (!(tau > 0.0 && tau < 1.0))
        throw ValidationError("threshold_from_values: tau must lie strictly inside (0, 1)");
    for (double v : values)
        if (!std::isfinite(v)) throw NumericError("threshold_from_values: non-finite density value");
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    auto j = static_cast<std::size_t>(std::floor(tau * static_cast<double>(m)));
    if (j < 1) j = 1;
    if (j > m) j = m;
    return values[j - 1];
}

std::size_t default_pseudo_n(std::size_t n) {
    return std::max<std::size_t>(10 * n, 10000);
}

ThresholdEstimate estimate_threshold(const KdeEstimate& est, double tau, ThresholdMode mode,
                                     std::size_t pseudo_n, RandomStream* rng) {
    ThresholdEstimate out;
    out.tau = tau;
    out.source = mode;
    if (mode == ThresholdMode::sample_values) {
        out.value = threshold_from_values(kde_eval_points(est, est.packed), tau);
        return out;
    }
    if (rng == nullptr)
        throw ValidationError("estimate_threshold: pseudo-sample mode needs a random stream");
    const std::size_t N = pseudo_n > 0 ? pseudo_n : default_pseudo_n(est.n());
    const std::vector<UnitVector> draws = sample_from_kde(est, N, *rng);
    out.pseudo_n = N;
    out.value = threshold_from_values(kde_eval_points(est, PackedPoints(draws)), tau);
    return out;
}

bool Region::empty() const {
    if (full) return false;
    if (q == 1) return arcs.empty();
    for (std::uint8_t m : mask)
        if (m) return false;
    return true;
}

double Region::measure() const {
    if (q == 1) {
        double total = 0.0;
        for (const Arc& a : arcs) total += a.length();
        return total;
    }
    if (!grid) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) total += grid->quad_weights[i];
    return total;
}

bool Region::contains(const UnitVector& x) const {
    if (q != x.q) throw ValidationError("Region::contains: dimension mismatch");
    if (full) return true;
    if (q == 1) {
        const double theta = unit_to_angle(x);
        for (const Arc& a : arcs) {
            if (theta >= a.start && theta < a.end) return true;
            const double wrapped = theta + kTwoPi;
            if (wrapped >= a.start && wrapped < a.end) return true;
        }
        return false;
    }
    if (!grid) return false;
    return mask[grid->cell_of(x)] != 0;
}

namespace {

//! Refine a sign change of f - t bracketed by [lo, hi] (f(lo)-t and f(hi)-t of
//! opposite strict/weak signs) to 1e-10 in angle.
double bisect_crossing(const std::function<double(double)>& f, double t, double lo, double hi,
                       bool lo_inside) {
    for (int it = 0; it < 64 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        const bool mid_inside = f(mid) >= t;
        if (mid_inside == lo_inside)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

Region circle_level_set(std::shared_ptr<const EvalGrid> grid, const std::vector<double>& values,
                        double t, const std::function<double(double)>& f_angle) {
    Region region;
    region.q = 1;
    region.threshold = t;
    region.grid = std::move(grid);

    const EvalGrid& g = *region.grid;
    const std::size_t n = g.size();
    std::vector<std::uint8_t> inside(n);
    std::size_t n_in = 0;
    for (std::size_t i = 0; i < n; ++i) {
        inside[i] = values[i] >= t ? 1 : 0;
        n_in += inside[i];
    }
    if (n_in == n) {
        region.full = true;
        region.arcs.push_back(Arc{0.0, kTwoPi});
        return region;
    }
    if (n_in == 0) return region;

    struct Event {
        double angle;
        bool entering;  //!< crossing from outside to inside as angle grows
    };
    std::vector<Event> events;
    const double step = kTwoPi / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        if (inside[i] == inside[j]) continue;
        const double lo = g.angles[i];
        const double hi = g.angles[i] + step;  // equals angles[j] modulo 2*pi
        double crossing;
        if (f_angle) {
            crossing = bisect_crossing(f_angle, t, lo, hi, inside[i] != 0);
        } else {
            const double s = (values[i] - t) / (values[i] - values[j]);
            crossing = lo + s * step;
        }
        events.push_back(Event{reduce_angle(crossing), inside[j] != 0});
    }
    std::sort(events.begin(), events.end(),
              [](const Event& a, const Event& b) { return a.angle < b.angle; });

    // Crossings alternate entering/leaving around the circle; rotate so the
    // list starts with an entering one, then pair them up in order.
    std::size_t first_enter = events.size();
    for (std::size_t i = 0; i < events.size(); ++i)
        if (events[i].entering) {
            first_enter = i;
            break;
        }
    if (first_enter == events.size() || events.size() % 2 != 0)
        throw NumericError("circle_level_set: boundary crossings failed to alternate");
    std::rotate(events.begin(), events.begin() + static_cast<std::ptrdiff_t>(first_enter),
                events.end());
    for (std::size_t k = 0; k + 1 < events.size(); k += 2) {
        if (!events[k].entering || events[k + 1].entering)
            throw NumericError("circle_level_set: boundary crossings failed to alternate");
        double start = events[k].angle;
        double end = events[k + 1].angle;
        if (end <= start) end += kTwoPi;  // the arc through 0
        region.arcs.push_back(Arc{start, end});
    }
    std::sort(region.arcs.begin(), region.arcs.end(),
              [](const Arc& a, const Arc& b) { return a.start < b.start; });
    return region;
}

//! Square-grid marching squares on the lon-lat raster. Squares sit between
//! adjacent latitude rows (longitude wraps); contours ending at the first or
//! last row stay open there, which is correct for caps enclosing a pole.
Region sphere_level_set(std::shared_ptr<const EvalGrid> grid, const std::vector<double>& values,
                        double t) {
    Region region;
    region.q = 2;
    region.threshold = t;
    region.grid = std::move(grid);

    const EvalGrid& g = *region.grid;
    const int R = g.res_lon;
    const int M = g.res_lat;
    const std::size_t n = g.size();
    region.mask.assign(n, 0);
    std::size_t n_in = 0;
    for (std::size_t i = 0; i < n; ++i) {
        region.mask[i] = values[i] >= t ? 1 : 0;
        n_in += region.mask[i];
    }
    if (n_in == n) {
        region.full = true;
        return region;
    }
    if (n_in == 0) return region;

    auto interpolate = [&](std::size_t a, std::size_t b) {
        const double s = (values[a] - t) / (values[a] - values[b]);
        const UnitVector& A = g.points[a];
        const UnitVector& B = g.points[b];
        return UnitVector((1.0 - s) * A.x() + s * B.x(), (1.0 - s) * A.y() + s * B.y(),
                          (1.0 - s) * A.z() + s * B.z());
    };

    // Crossing points, indexed per raster edge. Horizontal edge (i, j) joins
    // cell (i, j) to (i, j+1 mod R); vertical edge (i, j) joins (i, j) to
    // (i+1, j).
    std::vector<int> hcross(static_cast<std::size_t>(M) * R, -1);
    std::vector<int> vcross(static_cast<std::size_t>(M - 1) * R, -1);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < R; ++j) {
            const std::size_t a = g.index_of(i, j);
            const std::size_t b = g.index_of(i, (j + 1) % R);
            if (region.mask[a] != region.mask[b]) {
                hcross[static_cast<std::size_t>(i) * R + j] =
                    static_cast<int>(region.boundary_points.size());
                region.boundary_points.push_back(interpolate(a, b));
            }
        }
    for (int i = 0; i + 1 < M; ++i)
        for (int j = 0; j < R; ++j) {
            const std::size_t a = g.index_of(i, j);
            const std::size_t b = g.index_of(i + 1, j);
            if (region.mask[a] != region.mask[b]) {
                vcross[static_cast<std::size_t>(i) * R + j] =
                    static_cast<int>(region.boundary_points.size());
                region.boundary_points.push_back(interpolate(a, b));
            }
        }
    if (region.boundary_points.empty()) return region;

    // Each crossing joins at most two contour segments; link them square by
    // square, resolving the two-diagonal ambiguity with the center average.
    std::vector<std::array<int, 2>> links(region.boundary_points.size(), {-1, -1});
    auto add_link = [&](int a, int b) {
        auto& la = links[static_cast<std::size_t>(a)];
        auto& lb = links[static_cast<std::size_t>(b)];
        (la[0] < 0 ? la[0] : la[1]) = b;
        (lb[0] < 0 ? lb[0] : lb[1]) = a;
    };
    for (int i = 0; i + 1 < M; ++i)
        for (int j = 0; j < R; ++j) {
            const int jr = (j + 1) % R;
            const std::size_t a = g.index_of(i, j);       // bottom-left
            const std::size_t b = g.index_of(i, jr);      // bottom-right
            const std::size_t c = g.index_of(i + 1, jr);  // top-right
            const std::size_t d = g.index_of(i + 1, j);   // top-left
            const int bottom = hcross[static_cast<std::size_t>(i) * R + j];
            const int top = hcross[(static_cast<std::size_t>(i) + 1) * R + j];
            const int left = vcross[static_cast<std::size_t>(i) * R + j];
            const int right = vcross[static_cast<std::size_t>(i) * R + jr];
            const int crossed[4] = {bottom, right, top, left};
            int found[4];
            int n_crossed = 0;
            for (int e : crossed)
                if (e >= 0) found[n_crossed++] = e;
            if (n_crossed == 0) continue;
            if (n_crossed == 2) {
                add_link(found[0], found[1]);
                continue;
            }
            // Both diagonals: join around the corners cut off by the contour.
            const bool center_inside =
                0.25 * (values[a] + values[b] + values[c] + values[d]) >= t;
            const bool a_inside = region.mask[a] != 0;
            if (a_inside == center_inside) {
                // The contour cuts off b and d: (bottom,right) and (top,left).
                add_link(bottom, right);
                add_link(top, left);
            } else {
                // The contour cuts off a and c: (bottom,left) and (right,top).
                add_link(bottom, left);
                add_link(right, top);
            }
        }

    // Chain the segments: open polylines first (ends on the pole-most rows),
    // then closed loops.
    const auto degree = [&](std::size_t v) {
        return (links[v][0] >= 0 ? 1 : 0) + (links[v][1] >= 0 ? 1 : 0);
    };
    std::vector<std::uint8_t> used(region.boundary_points.size(), 0);
    auto walk = [&](std::size_t start) {
        std::vector<UnitVector> line;
        line.push_back(region.boundary_points[start]);
        used[start] = 1;
        int prev = -1;
        int cur = static_cast<int>(start);
        bool closed = false;
        for (;;) {
            int next = -1;
            for (int cand : links[static_cast<std::size_t>(cur)])
                if (cand >= 0 && cand != prev) {
                    next = cand;
                    break;
                }
            if (next < 0) break;
            if (next == static_cast<int>(start)) {
                closed = true;
                break;
            }
            line.push_back(region.boundary_points[static_cast<std::size_t>(next)]);
            used[static_cast<std::size_t>(next)] = 1;
            prev = cur;
            cur = next;
        }
        region.polylines.push_back(std::move(line));
        region.polyline_closed.push_back(closed ? 1 : 0);
    };
    for (std::size_t v = 0; v < links.size(); ++v)
        if (!used[v] && degree(v) == 1) walk(v);
    for (std::size_t v = 0; v < links.size(); ++v)
        if (!used[v] && degree(v) == 2) walk(v);
    return region;
}

} // namespace

Region level_set_fixed(std::shared_ptr<const EvalGrid> grid, const std::vector<double>& values,
                       double t, const std::function<double(double)>& f_angle) {
    if (!grid) throw ValidationError("level_set_fixed: null grid");
    if (values.size() != grid->size())
        throw ValidationError("level_set_fixed: value count does not match the grid");
    if (!std::isfinite(t)) throw NumericError("level_set_fixed: non-finite threshold");
    if (grid->q == 1) return circle_level_set(std::move(grid), values, t, f_angle);
    return sphere_level_set(std::move(grid), values, t);
}

Region hdr_region(const KdeEstimate& est, double tau, std::shared_ptr<const EvalGrid> grid,
                  ThresholdMode mode, std::size_t pseudo_n, RandomStream* rng) {
    if (!grid) throw ValidationError("hdr_region: null grid");
    if (grid->q != est.q) throw ValidationError("hdr_region: grid/sample dimension mismatch");
    const ThresholdEstimate thr = estimate_threshold(est, tau, mode, pseudo_n, rng);
    const std::vector<double> values = kde_eval_grid(est, *grid);
    std::function<double(double)> f_angle;
    if (est.q == 1)
        f_angle = [&est](double theta) { return kde_eval(est, angle_to_unit(theta)); };
    return level_set_fixed(std::move(grid), values, thr.value, f_angle);
}

double truth_threshold(const MixtureModel& model, double tau, int resolution) {
    if (!(tau > 0.0 && tau < 1.0))
        throw ValidationError("truth_threshold: tau must lie strictly inside (0, 1)");
    const EvalGrid g = make_grid(model.q(), resolution);
    const std::vector<double> values = model.eval_grid(g);
    std::vector<std::size_t> order(g.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    const double target = 1.0 - tau;
    double mass = 0.0;
    for (std::size_t idx : order) {
        mass += g.quad_weights[idx] * values[idx];
        if (mass >= target) return values[idx];
    }
    return values[order.back()];
}

Region truth_hdr_region(const MixtureModel& model, double tau,
                        std::shared_ptr<const EvalGrid> grid, int truth_resolution) {
    if (!grid) throw ValidationError("truth_hdr_region: null grid");
    if (grid->q != model.q())
        throw ValidationError("truth_hdr_region: grid/model dimension mismatch");
    if (truth_resolution == 0) truth_resolution = 1024;
    const double t = truth_threshold(model, tau, truth_resolution);
    const std::vector<double> values = model.eval_grid(*grid);
    std::function<double(double)> f_angle;
    if (model.q() == 1)
        f_angle = [&model](double theta) { return model.density(angle_to_unit(theta)); };
    return level_set_fixed(std::move(grid), values, t, f_angle);
}

BoundarySet extract_boundary(const Region& region) {
    if (region.full) throw EmptyBoundaryError("boundary of the full sphere is empty");
    if (region.empty()) throw EmptyBoundaryError("boundary of an empty region");
    BoundarySet out;
    out.q = region.q;
    if (region.q == 1) {
        for (const Arc& a : region.arcs) {
            out.points.push_back(angle_to_unit(reduce_angle(a.start)));
            out.points.push_back(angle_to_unit(reduce_angle(a.end)));
        }
    } else {
        out.points = region.boundary_points;
        if (out.points.empty())
            throw EmptyBoundaryError("region has no grid-resolvable boundary");
    }
    return out;
}

std::size_t count_components(const Region& region) {
    if (region.empty()) return 0;
    if (region.full) return 1;
    if (region.q == 1) return region.arcs.size();

    const EvalGrid& g = *region.grid;
    std::vector<std::size_t> parent(g.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    };
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!region.mask[i]) continue;
        for (std::size_t nb : g.neighbors(i)) {
            if (!region.mask[nb]) continue;
            const std::size_t ra = find(i);
            const std::size_t rb = find(nb);
            if (ra != rb) parent[rb] = ra;
        }
    }
    std::size_t count = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (region.mask[i] && find(i) == i) ++count;
    return count;
}

double region_probability(const Region& region,
                          const std::function<double(const UnitVector&)>& density) {
    if (!density) throw ValidationError("region_probability: null density");
    if (region.q == 1) {
        double total = 0.0;
        for (const Arc& a : region.arcs) {
            const double len = a.length();
            if (len <= 0.0) continue;
            auto panels = static_cast<std::size_t>(std::ceil(len / kTwoPi * 4096.0));
            if (panels < 16) panels = 16;
            if (panels % 2 != 0) ++panels;
            const double h = len / static_cast<double>(panels);
            double acc = density(angle_to_unit(a.start)) + density(angle_to_unit(a.end));
            for (std::size_t k = 1; k < panels; ++k) {
                const double theta = a.start + h * static_cast<double>(k);
                acc += (k % 2 == 1 ? 4.0 : 2.0) * density(angle_to_unit(theta));
            }
            total += acc * h / 3.0;
        }
        return total;
    }
    if (!region.grid) throw ValidationError("region_probability: region has no grid");
    double total = 0.0;
    const EvalGrid& g = *region.grid;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (region.mask[i]) total += g.quad_weights[i] * density(g.points[i]);
    return total;
}

double region_probability(const Region& region, const std::vector<double>& grid_values) {
    if (!region.grid) throw ValidationError("region_probability: region has no grid");
    const EvalGrid& g = *region.grid;
    if (grid_values.size() != g.size())
        throw ValidationError("region_probability: value count does not match the grid");
    double total = 0.0;
    if (region.q == 1) {
        for (std::size_t i = 0; i < g.size(); ++i)
            if (region.contains(g.points[i])) total += g.quad_weights[i] * grid_values[i];
        return total;
    }
    for (std::size_t i = 0; i < g.size(); ++i)
        if (region.mask[i]) total += g.quad_weights[i] * grid_values[i];
    return total;
}

double region_probability_mc(const Region& region, const std::vector<UnitVector>& draws) {
    if (draws.empty()) throw ValidationError("region_probability_mc: no draws");
    std::size_t inside = 0;
    for (const UnitVector& x : draws)
        if (region.contains(x)) ++inside;
    return static_cast<double>(inside) / static_cast<double>(draws.size());
}

void write_region_csv(const Region& region, const std::string& path) {
    if (region.q != 1)
        throw ValidationError("write_region_csv: arc export is defined on the circle only");
    std::ofstream out(path);
    if (!out) throw ValidationError("write_region_csv: cannot open " + path);
    out << "start_rad,end_rad\n";
    char buf[80];
    for (const Arc& a : region.arcs) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", a.start, a.end);
        out << buf;
    }
    if (!out) throw ValidationError("write_region_csv: write failed for " + path);
}

void write_boundary_geojson(const Region& region, const std::string& path, double tau) {
    if (region.q != 2)
        throw ValidationError("write_boundary_geojson: polyline export is defined on the sphere only");
    nlohmann::ordered_json features = nlohmann::ordered_json::array();
    for (std::size_t p = 0; p < region.polylines.size(); ++p) {
        nlohmann::ordered_json coords = nlohmann::ordered_json::array();
        auto push_vertex = [&](const UnitVector& v) {
            const std::array<double, 2> ll = unit_to_lonlat(v);
            coords.push_back({ll[0], ll[1]});
        };
        for (const UnitVector& v : region.polylines[p]) push_vertex(v);
        if (region.polyline_closed[p] && !region.polylines[p].empty())
            push_vertex(region.polylines[p].front());
        nlohmann::ordered_json feature = {
            {"type", "Feature"},
            {"properties",
             {{"tau", tau}, {"threshold", region.threshold}, {"closed", region.polyline_closed[p] != 0}}},
            {"geometry", {{"type", "LineString"}, {"coordinates", std::move(coords)}}}};
        features.push_back(std::move(feature));
    }
    nlohmann::ordered_json doc = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
    std::ofstream out(path);
    if (!out) throw ValidationError("write_boundary_geojson: cannot open " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw ValidationError("write_boundary_geojson: write failed for " + path);
}

void write_mask_csv(const Region& region, const std::string& path) {
    if (region.q != 2)
        throw ValidationError("write_mask_csv: raster export is defined on the sphere only");
    if (!region.grid) throw ValidationError("write_mask_csv: region has no grid");
    std::ofstream out(path);
    if (!out) throw ValidationError("write_mask_csv: cannot open " + path);
    out << "lon_idx,lat_idx,lon_deg,lat_deg,inside\n";
    const EvalGrid& g = *region.grid;
    constexpr double kRadToDeg = 57.295779513082320877;
    char buf[96];
    for (int i = 0; i < g.res_lat; ++i)
        for (int j = 0; j < g.res_lon; ++j) {
            const std::size_t idx = g.index_of(i, j);
            std::snprintf(buf, sizeof buf, "%d,%d,%.10g,%.10g,%d\n", j, i, g.lons[j] * kRadToDeg,
                          g.lats[i] * kRadToDeg, region.mask[idx] ? 1 : 0);
            out << buf;
        }
    if (!out) throw ValidationError("write_mask_csv: write failed for " + path);
}

BoundarySet read_boundary_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("read_boundary_file: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        throw ValidationError("read_boundary_file: " + path + " is empty");

    BoundarySet out;
    if (text[first] == '{') {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("read_boundary_file: " + path + ": " + e.what());
        }
        out.q = 2;
        if (!doc.contains("features") || !doc["features"].is_array())
            throw ValidationError("read_boundary_file: " + path + ": no feature list");
        for (const auto& feature : doc["features"]) {
            if (!feature.contains("geometry")) continue;
            const auto& geom = feature["geometry"];
            if (!geom.contains("coordinates")) continue;
            for (const auto& pair : geom["coordinates"]) {
                if (!pair.is_array() || pair.size() < 2)
                    throw ValidationError("read_boundary_file: " + path + ": malformed coordinate");
                out.points.push_back(lonlat_to_unit(pair[0].get<double>(), pair[1].get<double>()));
            }
        }
    } else {
        out.q = 1;
        std::istringstream lines(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(lines, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (lineno == 1 && line.find("start_rad") != std::string::npos) continue;
            double a = 0.0;
            double b = 0.0;
            if (std::sscanf(line.c_str(), "%lf,%lf", &a, &b) != 2)
                throw ValidationError("read_boundary_file: " + path + ":" + std::to_string(lineno) +
                                      ": expected 'start_rad,end_rad'");
            out.points.push_back(angle_to_unit(reduce_angle(a)));
            out.points.push_back(angle_to_unit(reduce_angle(b)));
        }
    }
    if (out.points.empty())
        throw EmptySetError("read_boundary_file: " + path + " contains no boundary points");
    return out;
}

} // namespace dirhdr
