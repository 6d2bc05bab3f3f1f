//! Command-line front end: ingest-check, select, hdr, distance, simulate.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dirhdr/bandwidth.hpp"
#include "dirhdr/dataset.hpp"
#include "dirhdr/errors.hpp"
#include "dirhdr/kde.hpp"
#include "dirhdr/levelset.hpp"
#include "dirhdr/rng.hpp"
#include "dirhdr/setdist.hpp"
#include "dirhdr/simulate.hpp"
#include "dirhdr/vmf.hpp"

namespace fs = std::filesystem;
using namespace dirhdr;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 1;
    bool seed_given = false;
    int grid_resolution = 0;
    std::string format;
    std::string out_dir = ".";
};

struct SelectorOpts {
    std::string selector;
    double tau = std::numeric_limits<double>::quiet_NaN();
    std::string pilot;
    double pilot_h = 0.0;
    int bootstrap_b = 0;
    double search_lo = 0.0;
    double search_hi = 0.0;
    int search_grid = 0;
    double golden_tol = 0.0;
};

Dataset load_dataset(const std::string& path, const GlobalOpts& g) {
    if (g.format.empty())
        throw ValidationError("--format is required (angles-rad, angles-deg, lonlat-deg, xyz)");
    return ingest(path, parse_data_format(g.format));
}

fs::path ensure_out_dir(const GlobalOpts& g) {
    fs::path dir(g.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output directory " + dir.string());
    return dir;
}

SelectorConfig make_selector_config(const GlobalOpts& g, const SelectorOpts& s) {
    SelectorConfig cfg;
    cfg.seed = g.seed;
    cfg.grid_resolution = g.grid_resolution;
    cfg.pilot = s.pilot;
    cfg.pilot_h = s.pilot_h;
    cfg.bootstrap_b = s.bootstrap_b;
    cfg.search_lo = s.search_lo;
    cfg.search_hi = s.search_hi;
    cfg.search_grid = s.search_grid;
    cfg.golden_tol = s.golden_tol;
    if (std::isfinite(s.tau)) {
        if (!(s.tau > 0.0 && s.tau < 1.0))
            throw ValidationError("--tau must lie strictly inside (0, 1)");
        cfg.tau = s.tau;
    }
    return cfg;
}

std::string format_tau(double tau) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", tau);
    return buf;
}

void write_trace_csv(const SelectorResult& result, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path.string());
    out << "h,objective\n";
    char buf[80];
    for (const auto& [h, v] : result.trace) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", h, v);
        out << buf;
    }
}

// ---------------------------------------------------------------------------

int cmd_ingest_check(const GlobalOpts& g, const std::string& data_path) {
    const Dataset ds = load_dataset(data_path, g);
    std::cout << "seed=" << g.seed << "\n"
              << "file=" << ds.path << " format=" << data_format_name(ds.format)
              << " q=" << ds.q << " points=" << ds.points.size() << " rows=" << ds.rows_total
              << " skipped=" << ds.rows_skipped << "\n";
    if (!ds.skipped_log.empty()) {
        std::cout << "skipped rows:\n";
        for (const std::string& s : ds.skipped_log) std::cout << "  " << s << "\n";
    }
    return 0;
}

int cmd_select(const GlobalOpts& g, const SelectorOpts& s, const std::string& data_path) {
    const Dataset ds = load_dataset(data_path, g);
    if (s.selector == "h1" && !std::isfinite(s.tau))
        throw ValidationError("selector h1 requires --tau");
    const SelectorConfig cfg = make_selector_config(g, s);
    const SelectorResult result = select_bandwidth(s.selector, ds.points, cfg);
    char buf[160];
    std::snprintf(buf, sizeof buf, "selector=%s h=%.12g seed=%llu n=%zu q=%d\n",
                  result.selector.c_str(), result.h,
                  static_cast<unsigned long long>(g.seed), ds.points.size(), ds.q);
    std::cout << buf;
    if (result.searched) {
        std::snprintf(buf, sizeof buf, "objective=%.12g\n", result.objective);
        std::cout << buf;
        const fs::path trace = ensure_out_dir(g) / (result.selector + "_trace.csv");
        write_trace_csv(result, trace);
        std::cout << "trace=" << trace.string() << "\n";
    }
    for (const std::string& w : result.warnings) std::cout << "warning: " << w << "\n";
    return 0;
}

int cmd_hdr(const GlobalOpts& g, const SelectorOpts& s, const std::string& data_path,
            std::vector<double> taus, double fixed_h, const std::string& threshold_mode,
            std::size_t pseudo_n) {
    const Dataset ds = load_dataset(data_path, g);
    if (ds.points.size() < 10)
        throw ValidationError("hdr: needs at least 10 points to summarize");
    if (taus.empty()) throw ValidationError("hdr: at least one --tau is required");
    for (double t : taus)
        if (!(t > 0.0 && t < 1.0))
            throw ValidationError("hdr: tau must lie strictly inside (0, 1)");
    if (fixed_h <= 0.0 && s.selector.empty())
        throw ValidationError("hdr: give --selector or --bandwidth");
    ThresholdMode mode;
    if (threshold_mode == "sample")
        mode = ThresholdMode::sample_values;
    else if (threshold_mode == "pseudo")
        mode = ThresholdMode::pseudo_sample;
    else
        throw ValidationError("hdr: --threshold-mode must be 'sample' or 'pseudo'");

    const int q = ds.q;
    const int res = g.grid_resolution > 0 ? g.grid_resolution : (q == 1 ? 512 : 256);
    auto grid = std::make_shared<const EvalGrid>(make_grid(q, res));
    const fs::path dir = ensure_out_dir(g);

    // h1 re-selects per tau (its risk depends on the level); everything else
    // picks one bandwidth for the whole run.
    double shared_h = fixed_h;
    std::vector<std::string> select_warnings;
    if (fixed_h <= 0.0 && s.selector != "h1") {
        SelectorOpts so = s;
        so.tau = taus.front();
        const SelectorResult r = select_bandwidth(s.selector, ds.points, make_selector_config(g, so));
        shared_h = r.h;
        select_warnings = r.warnings;
    }

    std::ofstream summary(dir / "hdr_summary.csv");
    if (!summary) throw ValidationError("cannot open " + (dir / "hdr_summary.csv").string());
    summary << "tau,selector,h,threshold,components,prob_content,n,seed\n";

    std::cout << "seed=" << g.seed << " n=" << ds.points.size() << " q=" << q
              << " grid=" << res << " threshold_mode=" << threshold_mode << "\n";
    for (const std::string& w : select_warnings) std::cout << "warning: " << w << "\n";

    RandomStream rng(g.seed);
    std::size_t degenerate = 0;
    char buf[240];
    for (std::size_t ti = 0; ti < taus.size(); ++ti) {
        const double tau = taus[ti];
        double h = shared_h;
        if (fixed_h <= 0.0 && s.selector == "h1") {
            SelectorOpts so = s;
            so.tau = tau;
            const SelectorResult r =
                select_bandwidth("h1", ds.points, make_selector_config(g, so));
            h = r.h;
            for (const std::string& w : r.warnings) std::cout << "warning: " << w << "\n";
        }
        const KdeEstimate est(ds.points, h);
        RandomStream tau_rng = rng.substream(ti);
        const ThresholdEstimate thr = estimate_threshold(est, tau, mode, pseudo_n, &tau_rng);
        const std::vector<double> grid_vals = kde_eval_grid(est, *grid);
        std::function<double(double)> refiner;
        if (q == 1)
            refiner = [&est](double theta) { return kde_eval(est, angle_to_unit(theta)); };
        const Region region = level_set_fixed(grid, grid_vals, thr.value, refiner);
        const std::size_t comps = count_components(region);
        const double prob = region_probability(region, grid_vals);
        if (region.empty() || region.full) ++degenerate;

        const std::string tag = format_tau(tau);
        if (q == 1) {
            write_region_csv(region, (dir / ("region_tau" + tag + ".csv")).string());
        } else {
            write_boundary_geojson(region, (dir / ("boundary_tau" + tag + ".geojson")).string(),
                                   tau);
            write_mask_csv(region, (dir / ("mask_tau" + tag + ".csv")).string());
        }
        const std::string sel_name = fixed_h > 0.0 ? "fixed" : s.selector;
        std::snprintf(buf, sizeof buf, "%g,%s,%.17g,%.17g,%zu,%.17g,%zu,%llu\n", tau,
                      sel_name.c_str(), h, thr.value, comps, prob, ds.points.size(),
                      static_cast<unsigned long long>(g.seed));
        summary << buf;
        std::snprintf(buf, sizeof buf,
                      "tau=%g h=%.6g threshold=%.6g components=%zu prob_content=%.4f\n", tau, h,
                      thr.value, comps, prob);
        std::cout << buf;
    }
    std::cout << "summary=" << (dir / "hdr_summary.csv").string() << "\n";
    if (degenerate == taus.size())
        throw DegenerateRegionError("hdr: every requested level produced an empty or full region");
    if (degenerate > 0)
        std::cout << "warning: " << degenerate << " of " << taus.size()
                  << " levels produced an empty or full region\n";
    return 0;
}

int cmd_distance(const GlobalOpts& g, const std::vector<std::string>& files) {
    if (files.size() < 2) throw ValidationError("distance: need at least two boundary files");
    std::vector<BoundarySet> sets;
    sets.reserve(files.size());
    for (const std::string& f : files) sets.push_back(read_boundary_file(f));
    for (std::size_t i = 1; i < sets.size(); ++i)
        if (sets[i].q != sets[0].q)
            throw ValidationError("distance: boundary files live on different spheres");
    const fs::path dir = ensure_out_dir(g);
    char buf[160];
    std::cout << "seed=" << g.seed << " files=" << files.size() << " q=" << sets[0].q << "\n";

    if (files.size() == 2) {
        const double dh = hausdorff_distance(sets[0], sets[1]);
        const double de = min_set_distance(sets[0], sets[1]);
        std::snprintf(buf, sizeof buf, "hausdorff=%.12g min_euclidean=%.12g\n", dh, de);
        std::cout << buf;
        std::ofstream out(dir / "distance.csv");
        if (!out) throw ValidationError("cannot open " + (dir / "distance.csv").string());
        out << "hausdorff,min_euclidean\n";
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", dh, de);
        out << buf;
        return 0;
    }

    // Matrix mode: pairwise symmetric matrices with a zero diagonal.
    const std::size_t K = sets.size();
    std::vector<double> dh(K * K, 0.0), de(K * K, 0.0);
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = i + 1; j < K; ++j) {
            dh[i * K + j] = dh[j * K + i] = hausdorff_distance(sets[i], sets[j]);
            de[i * K + j] = de[j * K + i] = min_set_distance(sets[i], sets[j]);
        }
    auto write_matrix = [&](const std::vector<double>& m, const fs::path& path) {
        std::ofstream out(path);
        if (!out) throw ValidationError("cannot open " + path.string());
        out << "file";
        for (const std::string& f : files) out << "," << fs::path(f).filename().string();
        out << "\n";
        for (std::size_t i = 0; i < K; ++i) {
            out << fs::path(files[i]).filename().string();
            for (std::size_t j = 0; j < K; ++j) {
                std::snprintf(buf, sizeof buf, ",%.17g", m[i * K + j]);
                out << buf;
            }
            out << "\n";
        }
    };
    write_matrix(dh, dir / "hausdorff_matrix.csv");
    write_matrix(de, dir / "min_matrix.csv");
    std::cout << "wrote " << K << "x" << K << " matrices to " << dir.string() << "\n";
    return 0;
}

int cmd_simulate(const GlobalOpts& g, const std::string& plan_path) {
    ExperimentPlan plan = parse_plan(plan_path);
    if (g.seed_given) plan.seed = g.seed;
    if (g.grid_resolution > 0) plan.grid_resolution = g.grid_resolution;
    const ErrorTable table = run_experiment(plan);
    const fs::path dir = ensure_out_dir(g);
    write_summary_csv(table, (dir / "summary.csv").string());
    write_raw_errors_csv(table, (dir / "raw_errors.csv").string());
    std::cout << summarize_text(table);
    std::cout << "summary=" << (dir / "summary.csv").string()
              << " raw=" << (dir / "raw_errors.csv").string() << "\n";
    if (table.excess_degenerate(0.2)) {
        std::cout << "error: some cell exceeded 20% degenerate replicates\n";
        throw DegenerateRegionError("simulate: some cell exceeded 20% degenerate replicates");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Highest density regions for directional data (circle and sphere)"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--seed", g.seed, "Random seed (printed in every summary)");
    app.add_option("--grid-resolution", g.grid_resolution,
                   "Evaluation grid resolution (default 512 circle / 256 sphere)");
    app.add_option("--format", g.format, "Data format: angles-rad, angles-deg, lonlat-deg, xyz");
    app.add_option("--out-dir", g.out_dir, "Directory for output files (default: .)");

    std::string data_path, plan_path, threshold_mode = "sample";
    std::vector<std::string> distance_files;
    std::vector<double> taus;
    double fixed_h = 0.0;
    std::size_t pseudo_n = 0;
    SelectorOpts sel;

    CLI::App* c_ingest = app.add_subcommand("ingest-check", "Parse a data file and report");
    c_ingest->add_option("data", data_path, "Point data file")->required();

    CLI::App* c_select = app.add_subcommand("select", "Select a bandwidth");
    c_select->add_option("data", data_path, "Point data file")->required();
    c_select->add_option("--selector", sel.selector, "Selector id h1..h7")->required();
    c_select->add_option("--tau", sel.tau, "HDR level for h1");
    c_select->add_option("--pilot", sel.pilot, "Pilot selector id");
    c_select->add_option("--pilot-h", sel.pilot_h, "Explicit pilot bandwidth");
    c_select->add_option("--bootstrap-b", sel.bootstrap_b, "Bootstrap resamples (h1)");
    c_select->add_option("--search-lo", sel.search_lo, "Search interval lower end");
    c_select->add_option("--search-hi", sel.search_hi, "Search interval upper end");
    c_select->add_option("--search-grid", sel.search_grid, "Coarse candidate count");
    c_select->add_option("--golden-tol", sel.golden_tol, "Refinement tolerance");

    CLI::App* c_hdr = app.add_subcommand("hdr", "Estimate highest density regions");
    c_hdr->add_option("data", data_path, "Point data file")->required();
    c_hdr->add_option("--tau", taus, "HDR levels (repeatable)")->required()->expected(-1);
    c_hdr->add_option("--selector", sel.selector, "Selector id h1..h7");
    c_hdr->add_option("--bandwidth", fixed_h, "Fixed bandwidth (skip selection)");
    c_hdr->add_option("--threshold-mode", threshold_mode, "sample | pseudo");
    c_hdr->add_option("--pseudo-n", pseudo_n, "Pseudo-sample draws (default max(10n,1e4))");
    c_hdr->add_option("--pilot", sel.pilot, "Pilot selector id");
    c_hdr->add_option("--pilot-h", sel.pilot_h, "Explicit pilot bandwidth");
    c_hdr->add_option("--bootstrap-b", sel.bootstrap_b, "Bootstrap resamples (h1)");
    c_hdr->add_option("--search-lo", sel.search_lo, "Search interval lower end");
    c_hdr->add_option("--search-hi", sel.search_hi, "Search interval upper end");
    c_hdr->add_option("--search-grid", sel.search_grid, "Coarse candidate count");
    c_hdr->add_option("--golden-tol", sel.golden_tol, "Refinement tolerance");

    CLI::App* c_dist = app.add_subcommand("distance", "Distances between exported boundaries");
    c_dist->add_option("files", distance_files, "Boundary files (2 for a pair, more for matrices)")
        ->required()
        ->expected(-1);

    CLI::App* c_sim = app.add_subcommand("simulate", "Run a replicated experiment plan");
    c_sim->add_option("plan", plan_path, "Plan file (key = value)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    g.seed_given = app.count("--seed") > 0;

    try {
        if (c_ingest->parsed()) return cmd_ingest_check(g, data_path);
        if (c_select->parsed()) return cmd_select(g, sel, data_path);
        if (c_hdr->parsed())
            return cmd_hdr(g, sel, data_path, taus, fixed_h, threshold_mode, pseudo_n);
        if (c_dist->parsed()) return cmd_distance(g, distance_files);
        if (c_sim->parsed()) return cmd_simulate(g, plan_path);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const DegenerateRegionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
