#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dirhdr {

//! A replicated experiment: every (model, n, tau, selector) cell is run for
//! `replicates` seeded repetitions and scored by the Hausdorff distance
//! between estimated and reference HDR boundaries.
struct ExperimentPlan {
    std::vector<std::string> models;     //!< catalog names ("S1".."S9") or mixture files
    std::vector<std::size_t> sample_sizes;
    std::vector<double> taus;
    std::vector<std::string> selectors;  //!< "h1".."h7"
    int replicates = 1;
    std::uint64_t seed = 1;
    int grid_resolution = 0;    //!< estimation grid (default 512 S¹ / 256 S²)
    int truth_resolution = 0;   //!< reference-threshold grid (default 1024)
    int bootstrap_b = 0;        //!< h1 resample count override
    std::string pilot;          //!< pilot selector override (h1/h6)
    double pilot_h = 0.0;       //!< explicit pilot bandwidth override
    int search_grid = 0;        //!< coarse search candidates override
    double golden_tol = 0.0;    //!< refinement tolerance override
    double search_lo = 0.0;     //!< search interval override
    double search_hi = 0.0;
    int selector_grid = 0;      //!< internal selector grid override (h1)
};

//! Parse a key=value plan file ('#' comments, comma-separated lists). Keys
//! mirror the ExperimentPlan fields; models/sample_sizes/taus/selectors/
//! replicates are required.
ExperimentPlan parse_plan(const std::string& path);
ExperimentPlan parse_plan_text(const std::string& text, const std::string& origin);

//! One (model, selector, n, tau) cell with its raw per-replicate errors.
struct CellResult {
    std::string model;
    std::string selector;
    std::size_t n = 0;
    double tau = 0.5;
    std::vector<double> errors;            //!< one per replicate, in [0, 2]
    std::vector<std::uint8_t> degenerate;  //!< replicate scored the penalty 2
    double mean = 0.0;
    double sd = 0.0;  //!< sample standard deviation (0 when replicates < 2)
    std::size_t degenerate_count = 0;
};

struct ErrorTable {
    ExperimentPlan plan;
    std::vector<CellResult> cells;

    //! True when some cell had more than `fraction` degenerate replicates
    //! (the CLI turns this into a nonzero exit).
    bool excess_degenerate(double fraction = 0.2) const;
};

//! Run the plan. Deterministic for a fixed seed: replicate r of (model, n)
//! draws from a substream keyed by the replicate's flat index, shared across
//! taus and selectors so every selector sees the same samples. Replicates
//! whose estimated region has no boundary record the penalty 2 and a flag.
ErrorTable run_experiment(const ExperimentPlan& plan);

//! Summary rows "model,selector,n,tau,replicates,mean,sd,degenerate_count",
//! sorted by (model, tau, n, selector).
void write_summary_csv(const ErrorTable& table, const std::string& path);

//! Raw replicate errors in wide form (one column per cell, header
//! "model|selector|n|tau") for external violin plotting.
void write_raw_errors_csv(const ErrorTable& table, const std::string& path);

//! Human-readable table for terminal output; includes the master seed.
std::string summarize_text(const ErrorTable& table);

} // namespace dirhdr
