//! Timing comparison of the OpenMP-parallel kernels against their serial
//! reference implementations. Build and run: ./dirhdr_bench [n] [grid_res]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "dirhdr/kde.hpp"
#include "dirhdr/rng.hpp"
#include "dirhdr/setdist.hpp"
#include "dirhdr/vmf.hpp"

using namespace dirhdr;

namespace {

double seconds(const std::function<void()>& fn, int repeats) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    for (int r = 0; r < repeats; ++r) fn();
    const auto t1 = clock::now();
    return std::chrono::duration<double>(t1 - t0).count() / repeats;
}

void report(const char* name, double serial_s, double parallel_s) {
    std::printf("%-28s serial %8.2f ms   parallel %8.2f ms   speedup %.2fx\n", name,
                1e3 * serial_s, 1e3 * parallel_s, serial_s / parallel_s);
}

} // namespace

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 2000;
    const int res = argc > 2 ? std::atoi(argv[2]) : 256;
    std::printf("n = %zu sample points, %d x %d spherical grid\n", n, res, res / 2);

    const MixtureModel model = load_benchmark("S6");
    RandomStream rng(1);
    const auto pts = sample_mixture(model, n, rng);
    const EvalGrid grid = make_grid(2, res);
    const KdeEstimate est(pts, 0.3);

    std::vector<double> sink;
    const double t_mix_s =
        seconds([&] { sink = serial::mixture_eval_grid(model, grid); }, 5);
    const double t_mix_p = seconds([&] { sink = model.eval_grid(grid); }, 5);
    report("mixture_eval_grid", t_mix_s, t_mix_p);

    const double t_kde_s = seconds([&] { sink = serial::kde_eval_grid(est, grid); }, 3);
    const double t_kde_p = seconds([&] { sink = kde_eval_grid(est, grid); }, 3);
    report("kde_eval_grid", t_kde_s, t_kde_p);

    // Two shifted boundary-sized clouds for the Hausdorff kernel.
    RandomStream rng2(2);
    const auto a = sample_mixture(model, n, rng2);
    const auto b = sample_mixture(model, n, rng2);
    double dist = 0.0;
    const double t_h_s = seconds([&] { dist = serial::hausdorff_distance(a, b); }, 3);
    const double t_h_p = seconds([&] { dist = hausdorff_distance(a, b); }, 3);
    report("hausdorff_distance", t_h_s, t_h_p);
    std::printf("hausdorff(a, b) = %.6f, grid density sum sink = %.6f\n", dist,
                sink.empty() ? 0.0 : sink.front());
    return 0;
}
