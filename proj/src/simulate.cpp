#include "dirhdr/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "dirhdr/bandwidth.hpp"
#include "dirhdr/errors.hpp"
#include "dirhdr/kde.hpp"
#include "dirhdr/levelset.hpp"
#include "dirhdr/rng.hpp"
#include "dirhdr/setdist.hpp"
#include "dirhdr/vmf.hpp"

namespace dirhdr {

namespace {

std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t comma = s.find(',', start);
        const std::string item =
            trim(comma == std::string::npos ? s.substr(start) : s.substr(start, comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_double(const std::string& s, const std::string& context) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw ValidationError("");
        return v;
    } catch (const std::exception&) {
        throw ValidationError(context + ": not a number: '" + s + "'");
    }
}

long long parse_int(const std::string& s, const std::string& context) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw ValidationError("");
        return v;
    } catch (const std::exception&) {
        throw ValidationError(context + ": not an integer: '" + s + "'");
    }
}

} // namespace

ExperimentPlan parse_plan_text(const std::string& text, const std::string& origin) {
    ExperimentPlan plan;
    bool saw_models = false, saw_sizes = false, saw_taus = false, saw_selectors = false,
         saw_replicates = false;
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) throw ValidationError(where + ": empty value for '" + key + "'");

        if (key == "models") {
            plan.models = split_list(value);
            saw_models = true;
        } else if (key == "sample_sizes") {
            plan.sample_sizes.clear();
            for (const std::string& item : split_list(value)) {
                const long long n = parse_int(item, where);
                if (n < 2) throw ValidationError(where + ": sample size must be at least 2");
                plan.sample_sizes.push_back(static_cast<std::size_t>(n));
            }
            saw_sizes = true;
        } else if (key == "taus") {
            plan.taus.clear();
            for (const std::string& item : split_list(value)) {
                const double t = parse_double(item, where);
                if (!(t > 0.0 && t < 1.0))
                    throw ValidationError(where + ": tau must lie strictly inside (0, 1)");
                plan.taus.push_back(t);
            }
            saw_taus = true;
        } else if (key == "selectors") {
            plan.selectors = split_list(value);
            for (const std::string& s : plan.selectors) {
                const auto& ids = selector_ids();
                if (std::find(ids.begin(), ids.end(), s) == ids.end())
                    throw ValidationError(where + ": unknown selector '" + s + "'");
            }
            saw_selectors = true;
        } else if (key == "replicates") {
            const long long m = parse_int(value, where);
            if (m < 1) throw ValidationError(where + ": replicates must be at least 1");
            plan.replicates = static_cast<int>(m);
            saw_replicates = true;
        } else if (key == "seed") {
            plan.seed = static_cast<std::uint64_t>(parse_int(value, where));
        } else if (key == "grid_resolution") {
            plan.grid_resolution = static_cast<int>(parse_int(value, where));
        } else if (key == "truth_resolution") {
            plan.truth_resolution = static_cast<int>(parse_int(value, where));
        } else if (key == "bootstrap_b") {
            plan.bootstrap_b = static_cast<int>(parse_int(value, where));
        } else if (key == "pilot") {
            plan.pilot = value;
        } else if (key == "pilot_h") {
            plan.pilot_h = parse_double(value, where);
        } else if (key == "search_grid") {
            plan.search_grid = static_cast<int>(parse_int(value, where));
        } else if (key == "golden_tol") {
            plan.golden_tol = parse_double(value, where);
        } else if (key == "search_lo") {
            plan.search_lo = parse_double(value, where);
        } else if (key == "search_hi") {
            plan.search_hi = parse_double(value, where);
        } else if (key == "selector_grid") {
            plan.selector_grid = static_cast<int>(parse_int(value, where));
        } else {
            throw ValidationError(where + ": unknown plan key '" + key + "'");
        }
    }
    if (!saw_models || !saw_sizes || !saw_taus || !saw_selectors || !saw_replicates)
        throw ValidationError(origin +
                              ": plan needs models, sample_sizes, taus, selectors, replicates");
    if (plan.models.empty() || plan.sample_sizes.empty() || plan.taus.empty() ||
        plan.selectors.empty())
        throw ValidationError(origin + ": plan lists must be nonempty");
    return plan;
}

ExperimentPlan parse_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("parse_plan: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_plan_text(ss.str(), path);
}

bool ErrorTable::excess_degenerate(double fraction) const {
    for (const CellResult& cell : cells) {
        if (cell.errors.empty()) continue;
        const double frac =
            static_cast<double>(cell.degenerate_count) / static_cast<double>(cell.errors.size());
        if (frac > fraction) return true;
    }
    return false;
}

namespace {

MixtureModel load_model(const std::string& name) {
    if (is_benchmark_name(name)) return load_benchmark(name);
    return parse_mixture_config(name);
}

void finalize_cell(CellResult& cell) {
    const auto m = static_cast<double>(cell.errors.size());
    double mean = 0.0;
    for (double e : cell.errors) mean += e;
    mean /= m;
    double ssq = 0.0;
    for (double e : cell.errors) ssq += (e - mean) * (e - mean);
    cell.mean = mean;
    cell.sd = cell.errors.size() > 1 ? std::sqrt(ssq / (m - 1.0)) : 0.0;
    cell.degenerate_count = 0;
    for (std::uint8_t d : cell.degenerate) cell.degenerate_count += d;
}

//! Offset separating sampling substreams from selector-seed substreams in the
//! master stream's index space.
constexpr std::uint64_t kSelectorSeedOffset = 1ULL << 40;

} // namespace

ErrorTable run_experiment(const ExperimentPlan& plan) {
    if (plan.models.empty() || plan.sample_sizes.empty() || plan.taus.empty() ||
        plan.selectors.empty())
        throw ValidationError("run_experiment: plan lists must be nonempty");
    if (plan.replicates < 1) throw ValidationError("run_experiment: replicates must be >= 1");
    for (double t : plan.taus)
        if (!(t > 0.0 && t < 1.0))
            throw ValidationError("run_experiment: tau must lie strictly inside (0, 1)");
    for (const std::string& s : plan.selectors) {
        const auto& ids = selector_ids();
        if (std::find(ids.begin(), ids.end(), s) == ids.end())
            throw ValidationError("run_experiment: unknown selector '" + s + "'");
        if (s == "h1")
            for (std::size_t n : plan.sample_sizes)
                if (n < 50)
                    throw ValidationError(
                        "run_experiment: selector h1 needs sample sizes of at least 50");
    }

    const std::size_t n_models = plan.models.size();
    const std::size_t n_sizes = plan.sample_sizes.size();
    const std::size_t n_taus = plan.taus.size();
    const std::size_t n_sel = plan.selectors.size();
    const auto M = static_cast<std::size_t>(plan.replicates);

    ErrorTable table;
    table.plan = plan;
    table.cells.resize(n_models * n_sizes * n_taus * n_sel);
    auto cell_at = [&](std::size_t mi, std::size_t ni, std::size_t ti,
                       std::size_t si) -> CellResult& {
        return table.cells[((mi * n_sizes + ni) * n_taus + ti) * n_sel + si];
    };

    const RandomStream master(plan.seed);
    for (std::size_t mi = 0; mi < n_models; ++mi) {
        const MixtureModel model = load_model(plan.models[mi]);
        const int q = model.q();
        const int res = plan.grid_resolution > 0 ? plan.grid_resolution : (q == 1 ? 512 : 256);
        auto grid = std::make_shared<const EvalGrid>(make_grid(q, res));
        std::function<double(double)> truth_angle_density;
        if (q == 1)
            truth_angle_density = [&model](double theta) {
                return model.density(angle_to_unit(theta));
            };

        // Reference boundaries, one per tau, shared by every replicate.
        std::vector<BoundarySet> truth_boundaries;
        const std::vector<double> truth_values = model.eval_grid(*grid);
        for (std::size_t ti = 0; ti < n_taus; ++ti) {
            const int tres = plan.truth_resolution > 0 ? plan.truth_resolution : 1024;
            const double t = truth_threshold(model, plan.taus[ti], tres);
            const Region region = level_set_fixed(grid, truth_values, t, truth_angle_density);
            try {
                truth_boundaries.push_back(extract_boundary(region));
            } catch (const EmptyBoundaryError&) {
                throw DegenerateRegionError("run_experiment: reference HDR of " + plan.models[mi] +
                                            " at tau=" + std::to_string(plan.taus[ti]) +
                                            " has no boundary at this grid resolution");
            }
        }

        for (std::size_t ni = 0; ni < n_sizes; ++ni) {
            const std::size_t n = plan.sample_sizes[ni];
            for (std::size_t rep = 0; rep < M; ++rep) {
                const std::uint64_t flat = (mi * n_sizes + ni) * M + rep;
                RandomStream sample_stream = master.substream(flat);
                const std::vector<UnitVector> sample = sample_mixture(model, n, sample_stream);
                const std::uint64_t selector_seed =
                    master.substream(kSelectorSeedOffset + flat).seed();

                for (std::size_t si = 0; si < n_sel; ++si) {
                    const std::string& selector = plan.selectors[si];
                    SelectorConfig cfg;
                    cfg.seed = selector_seed;
                    cfg.bootstrap_b = plan.bootstrap_b;
                    cfg.pilot = plan.pilot;
                    cfg.pilot_h = plan.pilot_h;
                    cfg.search_grid = plan.search_grid;
                    cfg.golden_tol = plan.golden_tol;
                    cfg.search_lo = plan.search_lo;
                    cfg.search_hi = plan.search_hi;
                    cfg.grid_resolution = plan.selector_grid;

                    // h1's objective depends on tau; the others select once
                    // per sample and reuse the bandwidth for every tau.
                    double shared_h = 0.0;
                    std::unique_ptr<KdeEstimate> shared_est;
                    std::vector<double> shared_self, shared_grid_vals;
                    if (selector != "h1") {
                        shared_h = select_bandwidth(selector, sample, cfg).h;
                        shared_est = std::make_unique<KdeEstimate>(sample, shared_h);
                        shared_self = kde_eval_points(*shared_est, shared_est->packed);
                        shared_grid_vals = kde_eval_grid(*shared_est, *grid);
                    }

                    for (std::size_t ti = 0; ti < n_taus; ++ti) {
                        const double tau = plan.taus[ti];
                        CellResult& cell = cell_at(mi, ni, ti, si);
                        if (cell.errors.empty()) {
                            cell.model = plan.models[mi];
                            cell.selector = selector;
                            cell.n = n;
                            cell.tau = tau;
                            cell.errors.assign(M, 0.0);
                            cell.degenerate.assign(M, 0);
                        }

                        const KdeEstimate* est = shared_est.get();
                        std::unique_ptr<KdeEstimate> own_est;
                        const std::vector<double>* self_vals = &shared_self;
                        const std::vector<double>* grid_vals = &shared_grid_vals;
                        std::vector<double> own_self, own_grid;
                        if (selector == "h1") {
                            cfg.tau = tau;
                            const double h = h1_bootstrap_hausdorff(sample, cfg).h;
                            own_est = std::make_unique<KdeEstimate>(sample, h);
                            est = own_est.get();
                            own_self = kde_eval_points(*est, est->packed);
                            own_grid = kde_eval_grid(*est, *grid);
                            self_vals = &own_self;
                            grid_vals = &own_grid;
                        }

                        const double thr = threshold_from_values(*self_vals, tau);
                        std::function<double(double)> est_angle_density;
                        if (q == 1)
                            est_angle_density = [est](double theta) {
                                return kde_eval(*est, angle_to_unit(theta));
                            };
                        const Region region =
                            level_set_fixed(grid, *grid_vals, thr, est_angle_density);
                        double err = 2.0;
                        bool degen = false;
                        try {
                            err = hausdorff_distance(extract_boundary(region),
                                                     truth_boundaries[ti]);
                        } catch (const EmptyBoundaryError&) {
                            degen = true;
                        }
                        cell.errors[rep] = err;
                        cell.degenerate[rep] = degen ? 1 : 0;
                    }
                }
            }
        }
    }
    for (CellResult& cell : table.cells) finalize_cell(cell);
    return table;
}

namespace {

std::vector<const CellResult*> sorted_cells(const ErrorTable& table) {
    std::vector<const CellResult*> order;
    order.reserve(table.cells.size());
    for (const CellResult& c : table.cells) order.push_back(&c);
    std::sort(order.begin(), order.end(), [](const CellResult* a, const CellResult* b) {
        if (a->model != b->model) return a->model < b->model;
        if (a->tau != b->tau) return a->tau < b->tau;
        if (a->n != b->n) return a->n < b->n;
        return a->selector < b->selector;
    });
    return order;
}

std::string cell_label(const CellResult& c) {
    char tau_buf[32];
    std::snprintf(tau_buf, sizeof tau_buf, "%g", c.tau);
    return c.model + "|" + c.selector + "|" + std::to_string(c.n) + "|" + tau_buf;
}

} // namespace

void write_summary_csv(const ErrorTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("write_summary_csv: cannot open " + path);
    out << "model,selector,n,tau,replicates,mean,sd,degenerate_count\n";
    char buf[160];
    for (const CellResult* c : sorted_cells(table)) {
        std::snprintf(buf, sizeof buf, "%s,%s,%zu,%g,%zu,%.17g,%.17g,%zu\n", c->model.c_str(),
                      c->selector.c_str(), c->n, c->tau, c->errors.size(), c->mean, c->sd,
                      c->degenerate_count);
        out << buf;
    }
    if (!out) throw ValidationError("write_summary_csv: write failed for " + path);
}

void write_raw_errors_csv(const ErrorTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("write_raw_errors_csv: cannot open " + path);
    const std::vector<const CellResult*> order = sorted_cells(table);
    for (std::size_t i = 0; i < order.size(); ++i)
        out << (i ? "," : "") << cell_label(*order[i]);
    out << "\n";
    std::size_t rows = 0;
    for (const CellResult* c : order) rows = std::max(rows, c->errors.size());
    char buf[40];
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            if (i) out << ",";
            if (r < order[i]->errors.size()) {
                std::snprintf(buf, sizeof buf, "%.17g", order[i]->errors[r]);
                out << buf;
            }
        }
        out << "\n";
    }
    if (!out) throw ValidationError("write_raw_errors_csv: write failed for " + path);
}

std::string summarize_text(const ErrorTable& table) {
    std::ostringstream out;
    out << "seed=" << table.plan.seed << " replicates=" << table.plan.replicates << "\n";
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-12s %-8s %8s %6s %6s %10s %10s %6s\n", "model", "selector",
                  "n", "tau", "reps", "mean", "sd", "degen");
    out << buf;
    for (const CellResult* c : sorted_cells(table)) {
        std::snprintf(buf, sizeof buf, "%-12s %-8s %8zu %6g %6zu %10.4f %10.4f %6zu\n",
                      c->model.c_str(), c->selector.c_str(), c->n, c->tau, c->errors.size(),
                      c->mean, c->sd, c->degenerate_count);
        out << buf;
    }
    return out.str();
}

} // namespace dirhdr
