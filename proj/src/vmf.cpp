#include "dirhdr/vmf.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dirhdr/errors.hpp"
#include "dirhdr/fastexp.hpp"
#include "dirhdr/special.hpp"

namespace dirhdr {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
} // namespace

double log_cq(int q, double kappa) {
    if (q != 1 && q != 2) throw ValidationError("log_cq: q must be 1 or 2");
    if (!(kappa >= 0.0)) throw ValidationError("log_cq: kappa must be >= 0");
    if (kappa < 1e-14) {
        return q == 1 ? -std::log(kTwoPi) : -std::log(2.0 * kTwoPi);
    }
    if (q == 1) {
        return -std::log(kTwoPi) - log_bessel_i(0.0, kappa);
    }
    return 0.5 * std::log(kappa) - 1.5 * std::log(kTwoPi) - log_bessel_i(0.5, kappa);
}

VonMisesFisher::VonMisesFisher(UnitVector mean, double concentration)
    : mu(mean), kappa(concentration) {
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
        throw ValidationError("VonMisesFisher: kappa must be finite and >= 0");
    }
}

double VonMisesFisher::log_density(const UnitVector& x) const {
    if (x.q != mu.q) throw ValidationError("vmf_log_density: dimension mismatch");
    return log_cq(mu.q, kappa) + kappa * dot(x, mu);
}

double VonMisesFisher::density(const UnitVector& x) const {
    // Factored form survives any kappa: log C + kappa stays O(log kappa).
    const double m = log_cq(mu.q, kappa) + kappa;
    return std::exp(m + kappa * (dot_clamped(x, mu) - 1.0));
}

MixtureModel::MixtureModel(std::vector<VonMisesFisher> comps, std::vector<double> w)
    : components(std::move(comps)), weights(std::move(w)) {
    if (components.empty()) throw ValidationError("MixtureModel: no components");
    if (components.size() != weights.size()) {
        throw ValidationError("MixtureModel: component/weight count mismatch");
    }
    const int qq = components.front().q();
    double sum = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        if (components[j].q() != qq) throw ValidationError("MixtureModel: mixed dimensions");
        if (!(weights[j] > 0.0)) throw ValidationError("MixtureModel: weights must be > 0");
        sum += weights[j];
    }
    if (std::fabs(sum - 1.0) > 1e-12) {
        throw ValidationError("MixtureModel: weights must sum to 1");
    }
}

double MixtureModel::density(const UnitVector& x) const {
    double f = 0.0;
    for (std::size_t j = 0; j < components.size(); ++j) {
        f += weights[j] * components[j].density(x);
    }
    return f;
}

namespace {

//! Shared kernel for grid evaluation: per-component scaled exponentials over
//! packed coordinates.
void mixture_eval_range(const MixtureModel& model, const PackedPoints& pts,
                        std::size_t lo, std::size_t hi, std::vector<double>& out) {
    const std::size_t k = model.components.size();
    for (std::size_t j = 0; j < k; ++j) {
        const auto& comp = model.components[j];
        const double kap = comp.kappa;
        const double scale = model.weights[j] * std::exp(log_cq(comp.q(), kap) + kap);
        const double mx = comp.mu.x(), my = comp.mu.y(), mz = comp.mu.z();
        const double* gx = pts.x.data();
        const double* gy = pts.y.data();
        const double* gz = pts.z.data();
        for (std::size_t i = lo; i < hi; ++i) {
            const double t = gx[i] * mx + gy[i] * my + gz[i] * mz;
            out[i] += scale * fast_exp(kap * (t - 1.0));
        }
    }
}

} // namespace

std::vector<double> MixtureModel::eval_grid(const EvalGrid& grid) const {
    if (grid.q != q()) throw ValidationError("mixture eval_grid: dimension mismatch");
    std::vector<double> out(grid.size(), 0.0);
    const std::size_t n = grid.size();
#pragma omp parallel for schedule(static)
    for (long b = 0; b < static_cast<long>((n + 4095) / 4096); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * 4096;
        const std::size_t hi = std::min(n, lo + 4096);
        mixture_eval_range(*this, grid.packed, lo, hi, out);
    }
    return out;
}

namespace serial {
std::vector<double> mixture_eval_grid(const MixtureModel& model, const EvalGrid& grid) {
    if (grid.q != model.q()) throw ValidationError("mixture eval_grid: dimension mismatch");
    std::vector<double> out(grid.size(), 0.0);
    mixture_eval_range(model, grid.packed, 0, grid.size(), out);
    return out;
}
} // namespace serial

namespace {

//! Best–Fisher rejection sampler for the von Mises angle offset from the mean.
double sample_vm_offset(double kappa, RandomStream& rng) {
    const double a = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double b = (a - std::sqrt(2.0 * a)) / (2.0 * kappa);
    const double r = (1.0 + b * b) / (2.0 * b);
    for (;;) {
        const double u1 = rng.uniform();
        const double z = std::cos(kPi * u1);
        const double f = (1.0 + r * z) / (r + z);
        const double c = kappa * (r - f);
        const double u2 = rng.uniform_pos();
        if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
            const double u3 = rng.uniform();
            const double mag = std::acos(std::clamp(f, -1.0, 1.0));
            return u3 < 0.5 ? -mag : mag;
        }
    }
}

//! Orthonormal tangent frame at mu (deterministic choice).
void tangent_frame(const UnitVector& mu, double e1[3], double e2[3]) {
    const double ax = std::fabs(mu.x()), ay = std::fabs(mu.y()), az = std::fabs(mu.z());
    double a[3] = {0.0, 0.0, 0.0};
    if (ax <= ay && ax <= az) a[0] = 1.0;
    else if (ay <= az) a[1] = 1.0;
    else a[2] = 1.0;
    // e1 = normalize(mu x a)
    double cx = mu.y() * a[2] - mu.z() * a[1];
    double cy = mu.z() * a[0] - mu.x() * a[2];
    double cz = mu.x() * a[1] - mu.y() * a[0];
    const double n = std::sqrt(cx * cx + cy * cy + cz * cz);
    e1[0] = cx / n; e1[1] = cy / n; e1[2] = cz / n;
    // e2 = mu x e1
    e2[0] = mu.y() * e1[2] - mu.z() * e1[1];
    e2[1] = mu.z() * e1[0] - mu.x() * e1[2];
    e2[2] = mu.x() * e1[1] - mu.y() * e1[0];
}

UnitVector sample_vmf_one(const VonMisesFisher& model, RandomStream& rng) {
    const double kappa = model.kappa;
    if (model.q() == 1) {
        if (kappa < 1e-8) return angle_to_unit(kTwoPi * rng.uniform());
        const double mu_angle = unit_to_angle(model.mu);
        return angle_to_unit(mu_angle + sample_vm_offset(kappa, rng));
    }
    if (kappa < 1e-8) {
        const double w = 2.0 * rng.uniform() - 1.0;
        const double v = kTwoPi * rng.uniform();
        const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
        return UnitVector(s * std::cos(v), s * std::sin(v), w);
    }
    // Exact inverse CDF of W = cos(angle to mu): F(w) ∝ e^{kappa w}.
    const double u = rng.uniform_pos();
    const double e2k = kappa > 350.0 ? 0.0 : std::exp(-2.0 * kappa);
    double w = 1.0 + std::log(u + (1.0 - u) * e2k) / kappa;
    w = std::clamp(w, -1.0, 1.0);
    const double v = kTwoPi * rng.uniform();
    double e1[3], e2[3];
    tangent_frame(model.mu, e1, e2);
    const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
    const double cv = std::cos(v), sv = std::sin(v);
    return UnitVector(w * model.mu.x() + s * (cv * e1[0] + sv * e2[0]),
                      w * model.mu.y() + s * (cv * e1[1] + sv * e2[1]),
                      w * model.mu.z() + s * (cv * e1[2] + sv * e2[2]));
}

} // namespace

std::vector<UnitVector> sample_vmf(const VonMisesFisher& model, std::size_t n, RandomStream& rng) {
    std::vector<UnitVector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample_vmf_one(model, rng));
    return out;
}

std::vector<UnitVector> sample_mixture(const MixtureModel& model, std::size_t n, RandomStream& rng) {
    std::vector<UnitVector> out;
    out.reserve(n);
    const std::size_t k = model.components.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = 0;
        if (k > 1) {
            const double u = rng.uniform();
            double acc = 0.0;
            for (j = 0; j + 1 < k; ++j) {
                acc += model.weights[j];
                if (u < acc) break;
            }
        }
        out.push_back(sample_vmf_one(model.components[j], rng));
    }
    return out;
}

namespace {

MixtureModel make_benchmark(const std::string& name) {
    const UnitVector np(0.0, 0.0, 1.0);
    const UnitVector sp(0.0, 0.0, -1.0);
    const double ir2 = 1.0 / std::sqrt(2.0);
    const UnitVector diag(0.0, ir2, ir2);
    const UnitVector ey(0.0, 1.0, 0.0);
    const UnitVector ex(1.0, 0.0, 0.0);
    const double third = 1.0 / 3.0;
    if (name == "S1") return MixtureModel({{np, 10.0}}, {1.0});
    if (name == "S2") return MixtureModel({{np, 1.0}, {sp, 1.0}}, {0.5, 0.5});
    if (name == "S3") return MixtureModel({{np, 10.0}, {sp, 1.0}}, {0.5, 0.5});
    if (name == "S4") return MixtureModel({{np, 10.0}, {diag, 10.0}}, {0.5, 0.5});
    if (name == "S5") return MixtureModel({{np, 10.0}, {diag, 10.0}}, {0.4, 0.6});
    if (name == "S6") return MixtureModel({{np, 10.0}, {diag, 5.0}}, {0.2, 0.8});
    if (name == "S7") return MixtureModel({{np, 5.0}, {ey, 5.0}, {ex, 5.0}}, {third, third, third});
    if (name == "S8") return MixtureModel({{np, 5.0}, {ey, 5.0}, {ex, 5.0}}, {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0});
    if (name == "S9") return MixtureModel({{np, 10.0}, {diag, 10.0}, {ey, 10.0}}, {third, third, third});
    throw ValidationError("load_benchmark: unknown model name '" + name + "'");
}

} // namespace

bool is_benchmark_name(const std::string& name) {
    return name.size() == 2 && name[0] == 'S' && name[1] >= '1' && name[1] <= '9';
}

MixtureModel load_benchmark(const std::string& name) { return make_benchmark(name); }

namespace {

std::vector<double> parse_csv_doubles(const std::string& s, const std::string& ctx) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
            if (pos != tok.size()) throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            throw ValidationError(ctx + ": bad numeric value '" + tok + "'");
        }
    }
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

MixtureModel parse_mixture_config_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int q = 0;
    std::vector<VonMisesFisher> comps;
    std::vector<double> weights;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string ctx = origin + ":" + std::to_string(lineno);
        if (line.rfind("q", 0) == 0 && line.find('=') != std::string::npos &&
            line.rfind("component", 0) != 0) {
            const std::string v = trim(line.substr(line.find('=') + 1));
            if (v == "1") q = 1;
            else if (v == "2") q = 2;
            else throw ValidationError(ctx + ": q must be 1 or 2");
            continue;
        }
        if (line.rfind("component", 0) == 0) {
            if (q == 0) throw ValidationError(ctx + ": q must be declared before components");
            std::istringstream ls(line.substr(std::string("component").size()));
            std::string tok;
            double kappa = -1.0, weight = -1.0;
            bool have_mean = false;
            UnitVector mean;
            while (ls >> tok) {
                if (tok == ":") continue;
                const std::size_t eq = tok.find('=');
                if (eq == std::string::npos) throw ValidationError(ctx + ": expected key=value, got '" + tok + "'");
                const std::string key = tok.substr(0, eq);
                const std::string val = tok.substr(eq + 1);
                if (key == "angle") {
                    if (q != 1) throw ValidationError(ctx + ": angle= mean requires q=1");
                    mean = angle_to_unit(parse_csv_doubles(val, ctx).at(0));
                    have_mean = true;
                } else if (key == "lonlat") {
                    if (q != 2) throw ValidationError(ctx + ": lonlat= mean requires q=2");
                    const auto v = parse_csv_doubles(val, ctx);
                    if (v.size() != 2) throw ValidationError(ctx + ": lonlat needs lon,lat");
                    mean = lonlat_to_unit(v[0], v[1]);
                    have_mean = true;
                } else if (key == "xyz") {
                    const auto v = parse_csv_doubles(val, ctx);
                    if (q == 1 && v.size() == 2) mean = UnitVector(v[0], v[1]);
                    else if (q == 2 && v.size() == 3) mean = UnitVector(v[0], v[1], v[2]);
                    else throw ValidationError(ctx + ": xyz needs q+1 coordinates");
                    have_mean = true;
                } else if (key == "kappa") {
                    kappa = parse_csv_doubles(val, ctx).at(0);
                } else if (key == "weight") {
                    weight = parse_csv_doubles(val, ctx).at(0);
                } else {
                    throw ValidationError(ctx + ": unknown key '" + key + "'");
                }
            }
            if (!have_mean) throw ValidationError(ctx + ": component needs a mean (angle=/lonlat=/xyz=)");
            if (kappa < 0.0) throw ValidationError(ctx + ": component needs kappa >= 0");
            if (weight <= 0.0) throw ValidationError(ctx + ": component needs weight > 0");
            comps.emplace_back(mean, kappa);
            weights.push_back(weight);
            continue;
        }
        throw ValidationError(ctx + ": unrecognized line '" + line + "'");
    }
    if (comps.empty()) throw ValidationError(origin + ": no components");
    double sum = 0.0;
    for (double w : weights) sum += w;
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw ValidationError(origin + ": component weights sum to " + std::to_string(sum) + ", expected 1");
    }
    for (double& w : weights) w /= sum;
    return MixtureModel(std::move(comps), std::move(weights));
}

MixtureModel parse_mixture_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read mixture config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_mixture_config_text(ss.str(), path);
}

double resultant_length(const std::vector<UnitVector>& sample) {
    if (sample.empty()) throw ValidationError("resultant_length: empty sample");
    double sx = 0.0, sy = 0.0, sz = 0.0;
    for (const auto& p : sample) {
        sx += p.x();
        sy += p.y();
        sz += p.z();
    }
    return std::sqrt(sx * sx + sy * sy + sz * sz) / static_cast<double>(sample.size());
}

double a_ratio(int q, double kappa) {
    if (q != 1 && q != 2) throw ValidationError("a_ratio: q must be 1 or 2");
    if (!(kappa >= 0.0)) throw ValidationError("a_ratio: kappa must be >= 0");
    if (q == 1) {
        if (kappa < 1e-6) return 0.5 * kappa;
        return std::exp(log_bessel_i(1.0, kappa) - log_bessel_i(0.0, kappa));
    }
    if (kappa < 1e-3) {
        const double k2 = kappa * kappa;
        return kappa / 3.0 - kappa * k2 / 45.0 + 2.0 * kappa * k2 * k2 / 945.0;
    }
    return 1.0 / std::tanh(kappa) - 1.0 / kappa;
}

double ml_kappa(int q, double rbar) {
    if (!(rbar >= 0.0) || rbar > 1.0) throw ValidationError("ml_kappa: rbar must be in [0, 1]");
    if (rbar >= 1.0 - 1e-10) {
        throw NumericError("ml_kappa: resultant length ~ 1 (point mass), concentration diverges");
    }
    if (rbar < 1e-7) {
        throw UniformDataError("ml_kappa: resultant length ~ 0, data carry no direction");
    }
    double lo = std::log(1e-8), hi = std::log(1e6);
    if (a_ratio(q, 1e6) <= rbar) return 1e6;
    if (a_ratio(q, 1e-8) >= rbar) return 1e-8;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (a_ratio(q, std::exp(mid)) < rbar) lo = mid;
        else hi = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

} // namespace dirhdr
