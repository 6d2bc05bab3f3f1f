#include "dirhdr/kde.hpp"

#include <cmath>

#include "dirhdr/errors.hpp"
#include "dirhdr/fastexp.hpp"
#include "dirhdr/vmf.hpp"

namespace dirhdr {

KdeEstimate::KdeEstimate(std::vector<UnitVector> pts, double bandwidth)
    : sample(std::move(pts)), h(bandwidth) {
    if (sample.empty()) throw ValidationError("KdeEstimate: sample must be nonempty");
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("KdeEstimate: bandwidth must be finite and > 0");
    q = sample.front().q;
    for (const auto& p : sample) {
        if (p.q != q) throw ValidationError("KdeEstimate: mixed dimensions in sample");
    }
    kappa = 1.0 / (h * h);
    log_norm = log_cq(q, kappa) + kappa;
    scale = std::exp(log_norm) / static_cast<double>(sample.size());
    packed = PackedPoints(sample);
}

namespace {

//! Kernel-term sum Σ_i exp(κ(t_i − 1)) at one evaluation point. The single
//! shared hot loop: every public evaluation path routes through it, so grid,
//! pointwise, serial, and parallel results agree bitwise.
inline double kernel_sum(const PackedPoints& s, double px, double py, double pz, double kappa) {
    const double* sx = s.x.data();
    const double* sy = s.y.data();
    const double* sz = s.z.data();
    const std::size_t n = s.size();
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t i = 0; i < n; ++i) {
        const double t = px * sx[i] + py * sy[i] + pz * sz[i];
        acc += fast_exp(kappa * (t - 1.0));
    }
    return acc;
}

inline void check_point(const KdeEstimate& est, const UnitVector& x) {
    if (x.q != est.q) throw ValidationError("kde_eval: dimension mismatch");
}

} // namespace

double kde_eval(const KdeEstimate& est, const UnitVector& x) {
    check_point(est, x);
    return est.scale * kernel_sum(est.packed, x.x(), x.y(), x.z(), est.kappa);
}

double kde_log_eval(const KdeEstimate& est, const UnitVector& x) {
    check_point(est, x);
    const auto& s = est.packed;
    const std::size_t n = s.size();
    double amax = -2.0 * est.kappa;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = x.x() * s.x[i] + x.y() * s.y[i] + x.z() * s.z[i];
        const double a = est.kappa * (t - 1.0);
        if (a > amax) amax = a;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = x.x() * s.x[i] + x.y() * s.y[i] + x.z() * s.z[i];
        acc += fast_exp(est.kappa * (t - 1.0) - amax);
    }
    return est.log_norm - std::log(static_cast<double>(n)) + amax + std::log(acc);
}

std::vector<double> kde_eval_points(const KdeEstimate& est, const PackedPoints& pts) {
    if (pts.q != est.q) throw ValidationError("kde_eval_points: dimension mismatch");
    const std::size_t m = pts.size();
    std::vector<double> out(m);
    const double kappa = est.kappa;
    const double scale = est.scale;
#pragma omp parallel for schedule(static)
    for (long e = 0; e < static_cast<long>(m); ++e) {
        out[e] = scale * kernel_sum(est.packed, pts.x[e], pts.y[e], pts.z[e], kappa);
    }
    return out;
}

std::vector<double> kde_eval_grid(const KdeEstimate& est, const EvalGrid& grid) {
    if (grid.q != est.q) throw ValidationError("kde_eval_grid: dimension mismatch");
    return kde_eval_points(est, grid.packed);
}

double kde_loo_eval(const KdeEstimate& est, std::size_t i) {
    if (est.n() < 2) throw ValidationError("kde_loo_eval: need n >= 2");
    if (i >= est.n()) throw ValidationError("kde_loo_eval: index out of range");
    const auto& s = est.packed;
    const double px = s.x[i], py = s.y[i], pz = s.z[i];
    double acc = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (j == i) continue;
        const double t = px * s.x[j] + py * s.y[j] + pz * s.z[j];
        acc += fast_exp(est.kappa * (t - 1.0));
    }
    return std::exp(est.log_norm) / static_cast<double>(est.n() - 1) * acc;
}

double kde_loo_log_eval(const KdeEstimate& est, std::size_t i) {
    if (est.n() < 2) throw ValidationError("kde_loo_log_eval: need n >= 2");
    if (i >= est.n()) throw ValidationError("kde_loo_log_eval: index out of range");
    const auto& s = est.packed;
    const double px = s.x[i], py = s.y[i], pz = s.z[i];
    double amax = -2.0 * est.kappa;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (j == i) continue;
        const double t = px * s.x[j] + py * s.y[j] + pz * s.z[j];
        const double a = est.kappa * (t - 1.0);
        if (a > amax) amax = a;
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (j == i) continue;
        const double t = px * s.x[j] + py * s.y[j] + pz * s.z[j];
        acc += fast_exp(est.kappa * (t - 1.0) - amax);
    }
    return est.log_norm - std::log(static_cast<double>(est.n() - 1)) + amax + std::log(acc);
}

namespace serial {

std::vector<double> kde_eval_grid(const KdeEstimate& est, const EvalGrid& grid) {
    if (grid.q != est.q) throw ValidationError("kde_eval_grid: dimension mismatch");
    std::vector<double> out(grid.size());
    for (std::size_t e = 0; e < grid.size(); ++e) {
        out[e] = kde_eval(est, grid.points[e]);
    }
    return out;
}

} // namespace serial

std::vector<UnitVector> sample_from_kde(const KdeEstimate& est, std::size_t n, RandomStream& rng) {
    std::vector<UnitVector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = rng.uniform_index(est.n());
        VonMisesFisher kernel(est.sample[j], est.kappa);
        auto one = sample_vmf(kernel, 1, rng);
        out.push_back(one.front());
    }
    return out;
}

namespace detail {

void pairwise_dots(const PackedPoints& eval, const PackedPoints& sample, std::vector<double>& dots) {
    const std::size_t m = eval.size();
    const std::size_t n = sample.size();
    dots.resize(m * n);
    const double* sx = sample.x.data();
    const double* sy = sample.y.data();
    const double* sz = sample.z.data();
#pragma omp parallel for schedule(static)
    for (long e = 0; e < static_cast<long>(m); ++e) {
        const double px = eval.x[e], py = eval.y[e], pz = eval.z[e];
        double* row = dots.data() + static_cast<std::size_t>(e) * n;
#pragma omp simd
        for (std::size_t i = 0; i < n; ++i) {
            row[i] = px * sx[i] + py * sy[i] + pz * sz[i];
        }
    }
}

void eval_from_dots(const std::vector<double>& dots, std::size_t n_eval, std::size_t n_sample,
                    double kappa, double scale, std::vector<double>& out) {
    out.resize(n_eval);
#pragma omp parallel for schedule(static)
    for (long e = 0; e < static_cast<long>(n_eval); ++e) {
        const double* row = dots.data() + static_cast<std::size_t>(e) * n_sample;
        double acc = 0.0;
#pragma omp simd reduction(+ : acc)
        for (std::size_t i = 0; i < n_sample; ++i) {
            acc += fast_exp(kappa * (row[i] - 1.0));
        }
        out[e] = scale * acc;
    }
}

} // namespace detail

} // namespace dirhdr
