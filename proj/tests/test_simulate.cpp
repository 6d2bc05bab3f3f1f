#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dirhdr/errors.hpp"
#include "dirhdr/simulate.hpp"

using namespace dirhdr;

namespace {
ExperimentPlan tiny_plan() {
    ExperimentPlan plan;
    plan.models = {"S1"};
    plan.sample_sizes = {200};
    plan.taus = {0.5};
    plan.selectors = {"h7"};
    plan.replicates = 3;
    plan.seed = 11;
    plan.grid_resolution = 64;
    plan.truth_resolution = 256;
    return plan;
}
} // namespace

TEST_CASE("plan text parses keys, comments, and lists") {
    const std::string text = "# demo plan\n"
                             "models = S1, S3\n"
                             "sample_sizes = 100, 250\n"
                             "taus = 0.2, 0.8\n"
                             "selectors = h5, h7\n"
                             "replicates = 4\n"
                             "seed = 99\n"
                             "grid_resolution = 64\n"
                             "truth_resolution = 128\n";
    const ExperimentPlan p = parse_plan_text(text, "inline");
    CHECK(p.models == std::vector<std::string>{"S1", "S3"});
    CHECK(p.sample_sizes == std::vector<std::size_t>{100, 250});
    CHECK(p.taus == std::vector<double>{0.2, 0.8});
    CHECK(p.selectors == std::vector<std::string>{"h5", "h7"});
    CHECK(p.replicates == 4);
    CHECK(p.seed == 99);
    CHECK(p.grid_resolution == 64);
    CHECK(p.truth_resolution == 128);
}

TEST_CASE("plan validation rejects bad input") {
    const std::string base = "models = S1\nsample_sizes = 100\ntaus = 0.5\n"
                             "selectors = h7\nreplicates = 2\n";
    CHECK_NOTHROW(parse_plan_text(base, "inline"));
    // Missing required key.
    CHECK_THROWS_AS(parse_plan_text("models = S1\ntaus = 0.5\nselectors = h7\nreplicates = 1\n",
                                    "inline"),
                    ValidationError);
    // Unknown key.
    CHECK_THROWS_AS(parse_plan_text(base + "bogus = 1\n", "inline"), ValidationError);
    // Unknown selector.
    CHECK_THROWS_AS(
        parse_plan_text("models = S1\nsample_sizes = 100\ntaus = 0.5\nselectors = h9\nreplicates = 1\n",
                        "inline"),
        ValidationError);
    // tau outside (0,1).
    CHECK_THROWS_AS(
        parse_plan_text("models = S1\nsample_sizes = 100\ntaus = 1.0\nselectors = h7\nreplicates = 1\n",
                        "inline"),
        ValidationError);
    // Sample size below 2.
    CHECK_THROWS_AS(
        parse_plan_text("models = S1\nsample_sizes = 1\ntaus = 0.5\nselectors = h7\nreplicates = 1\n",
                        "inline"),
        ValidationError);
    // Replicates below 1.
    CHECK_THROWS_AS(
        parse_plan_text("models = S1\nsample_sizes = 100\ntaus = 0.5\nselectors = h7\nreplicates = 0\n",
                        "inline"),
        ValidationError);
    // Garbage number.
    CHECK_THROWS_AS(parse_plan_text(base + "seed = banana\n", "inline"), ValidationError);
}

TEST_CASE("tiny experiment runs, is deterministic, and reports sane errors") {
    const ExperimentPlan plan = tiny_plan();
    const ErrorTable t1 = run_experiment(plan);
    REQUIRE(t1.cells.size() == 1);
    const CellResult& c = t1.cells.front();
    CHECK(c.model == "S1");
    CHECK(c.selector == "h7");
    CHECK(c.n == 200);
    CHECK(c.tau == 0.5);
    REQUIRE(c.errors.size() == 3);
    for (double e : c.errors) {
        CHECK(e >= 0.0);
        CHECK(e <= 2.0);
        CHECK(std::isfinite(e));
    }
    CHECK(c.degenerate_count == 0);
    // S1 is unimodal with kappa 10 and n=200: errors should be small.
    CHECK(c.mean < 0.5);
    // Mean/SD consistent with the raw errors.
    double m = 0.0;
    for (double e : c.errors) m += e;
    m /= c.errors.size();
    CHECK(c.mean == doctest::Approx(m).epsilon(1e-14));

    const ErrorTable t2 = run_experiment(plan);
    REQUIRE(t2.cells.size() == 1);
    for (std::size_t i = 0; i < 3; ++i) CHECK(t1.cells[0].errors[i] == t2.cells[0].errors[i]);
}

TEST_CASE("adding a selector does not change another selector's errors") {
    // Samples are shared per replicate, so the h7 column must be bit-identical
    // whether or not h5 runs alongside it.
    ExperimentPlan solo = tiny_plan();
    ExperimentPlan both = tiny_plan();
    both.selectors = {"h5", "h7"};
    const ErrorTable a = run_experiment(solo);
    const ErrorTable b = run_experiment(both);
    REQUIRE(b.cells.size() == 2);
    const CellResult* h7cell = nullptr;
    for (const CellResult& c : b.cells)
        if (c.selector == "h7") h7cell = &c;
    REQUIRE(h7cell != nullptr);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.cells[0].errors[i] == h7cell->errors[i]);
}

TEST_CASE("circle models from config files run through the harness") {
    const auto dir = std::filesystem::temp_directory_path();
    const std::string mix = (dir / "two_mode_t.mix").string();
    {
        std::ofstream out(mix);
        out << "q = 1\n"
            << "component angle=0.8 kappa=6 weight=0.5\n"
            << "component angle=4.0 kappa=6 weight=0.5\n";
    }
    ExperimentPlan plan;
    plan.models = {mix};
    plan.sample_sizes = {150};
    plan.taus = {0.2, 0.5};
    plan.selectors = {"h5"};
    plan.replicates = 2;
    plan.seed = 3;
    plan.grid_resolution = 128;
    plan.truth_resolution = 512;
    const ErrorTable t = run_experiment(plan);
    REQUIRE(t.cells.size() == 2);
    for (const CellResult& c : t.cells) {
        CHECK(c.errors.size() == 2);
        for (double e : c.errors) {
            CHECK(e >= 0.0);
            CHECK(e <= 2.0);
        }
    }
    std::filesystem::remove(mix);
}

TEST_CASE("experiment validation happens before any work") {
    ExperimentPlan plan = tiny_plan();
    plan.selectors = {"h1"};
    plan.sample_sizes = {30};  // h1 requires n >= 50
    CHECK_THROWS_AS(run_experiment(plan), ValidationError);
    ExperimentPlan bad_model = tiny_plan();
    bad_model.models = {"no_such_file.mix"};
    CHECK_THROWS_AS(run_experiment(bad_model), ValidationError);
}

TEST_CASE("summary and raw CSV outputs") {
    ExperimentPlan plan = tiny_plan();
    plan.selectors = {"h5", "h7"};
    const ErrorTable t = run_experiment(plan);
    const auto dir = std::filesystem::temp_directory_path();
    const std::string sum_path = (dir / "summary_t.csv").string();
    const std::string raw_path = (dir / "raw_t.csv").string();
    write_summary_csv(t, sum_path);
    write_raw_errors_csv(t, raw_path);

    std::ifstream sum(sum_path);
    std::string line;
    std::getline(sum, line);
    CHECK(line == "model,selector,n,tau,replicates,mean,sd,degenerate_count");
    std::size_t rows = 0;
    while (std::getline(sum, line))
        if (!line.empty()) ++rows;
    CHECK(rows == t.cells.size());

    std::ifstream raw(raw_path);
    std::getline(raw, line);
    CHECK(line.find("S1|h5|200|0.5") != std::string::npos);
    CHECK(line.find("S1|h7|200|0.5") != std::string::npos);
    rows = 0;
    while (std::getline(raw, line))
        if (!line.empty()) ++rows;
    CHECK(rows == plan.replicates);

    const std::string text = summarize_text(t);
    CHECK(text.find("seed=11") != std::string::npos);
    CHECK(text.find("h7") != std::string::npos);

    std::filesystem::remove(sum_path);
    std::filesystem::remove(raw_path);
}

TEST_CASE("degenerate accounting") {
    ErrorTable t;
    CellResult c;
    c.model = "S1";
    c.selector = "h7";
    c.n = 100;
    c.tau = 0.5;
    c.errors = {0.1, 2.0, 0.2, 0.3, 2.0};
    c.degenerate = {0, 1, 0, 0, 1};
    c.degenerate_count = 2;
    t.cells.push_back(c);
    CHECK(t.excess_degenerate(0.2));        // 2/5 = 40% > 20%
    CHECK_FALSE(t.excess_degenerate(0.5));  // 40% <= 50%
}
