#pragma once

// Closed-form m-linear kernels K(x, y_1..y_m) on R^n, their dilation
// families K_t = t^{-mn} K(x/t, y/t), sampled certificates for the size and
// Hoelder-type conditions, and the H1 / H2 square norms over scales.
//
// Kernel arguments are passed as x (n doubles) and y (m*n doubles, slot j
// occupying y[j*n .. j*n+n)).

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "czlab/core.hpp"
#include "czlab/funcspace.hpp"

namespace czlab {

enum class KernelClass { CalderonZygmund, Marcinkiewicz, LittlewoodPaley, Custom };

inline const char* to_string(KernelClass c) {
    switch (c) {
        case KernelClass::CalderonZygmund: return "calderon-zygmund";
        case KernelClass::Marcinkiewicz: return "marcinkiewicz";
        case KernelClass::LittlewoodPaley: return "littlewood-paley";
        case KernelClass::Custom: return "custom";
    }
    return "custom";
}

using KernelFn = std::function<double(std::span<const double> x, std::span<const double> y)>;

class KernelSpec {
public:
    KernelSpec(std::size_t m, std::size_t n, std::string label, KernelFn fn,
               KernelClass cls = KernelClass::Custom, double size_constant = std::numeric_limits<double>::quiet_NaN())
        : m_(m), n_(n), label_(std::move(label)), fn_(std::make_shared<KernelFn>(std::move(fn))), class_(cls),
          size_constant_(size_constant) {
        if (m == 0 || n == 0) throw Error(ErrorKind::InvalidArgument, "kernel needs m, n >= 1");
    }

    double operator()(std::span<const double> x, std::span<const double> y) const { return scale_ * (*fn_)(x, y); }

    KernelSpec scaled(double c) const {
        KernelSpec k = *this;
        k.scale_ *= c;
        k.size_constant_ *= std::abs(c);
        k.label_ = format_double(c) + "*" + label_;
        return k;
    }

    std::size_t m() const { return m_; }
    std::size_t n() const { return n_; }
    const std::string& label() const { return label_; }
    KernelClass kernel_class() const { return class_; }
    /// Known constant C in |K| <= C / (sum |x - y_j|)^{mn}, NaN when not derived.
    double size_constant() const { return size_constant_; }

private:
    std::size_t m_, n_;
    std::string label_;
    std::shared_ptr<KernelFn> fn_;
    KernelClass class_;
    double size_constant_;
    double scale_ = 1.0;
};

/// sum_j |x - y_j|
inline double diagonal_distance(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double s = 0.0;
    for (std::size_t j = 0; j * n < y.size(); ++j) s += distance(x, y.subspan(j * n, n));
    return s;
}

inline double max_slot_distance(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double s = 0.0;
    for (std::size_t j = 0; j * n < y.size(); ++j) s = std::max(s, distance(x, y.subspan(j * n, n)));
    return s;
}

/// Standard C-infinity bump exp(-1/(1-r^2)) on r < 1.
inline double unit_bump(double r) {
    if (r >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - r * r));
}

namespace kernels {

/// K1 = (sum_j |x - y_j|)^{-mn}; saturates its own size bound with C = 1.
inline KernelSpec k1(std::size_t m, std::size_t n) {
    const double power = -static_cast<double>(m * n);
    return KernelSpec(
        m, n, "K1",
        [power](std::span<const double> x, std::span<const double> y) {
            return std::pow(diagonal_distance(x, y), power);
        },
        KernelClass::CalderonZygmund, 1.0);
}

/// K2 = prod_j phi(2m (x - y_j)) with phi the unit bump; supported where every
/// |x - y_j| < 1/(2m), hence inside sum |x - y_j|^2 <= 1.
inline KernelSpec k2(std::size_t m, std::size_t n) {
    const double dilation = 2.0 * static_cast<double>(m);
    return KernelSpec(
        m, n, "K2",
        [dilation, n](std::span<const double> x, std::span<const double> y) {
            double v = 1.0;
            for (std::size_t j = 0; j * n < y.size(); ++j) {
                v *= unit_bump(dilation * distance(x, y.subspan(j * n, n)));
                if (v == 0.0) return 0.0;
            }
            return v;
        },
        KernelClass::Marcinkiewicz);
}

/// K3 = (1 + sum_j |x - y_j|^2)^{-(mn+1)/2}: smooth, no support constraint,
/// decay (1 + sum |x - y_j|)^{-(mn+1)} up to a constant.
inline KernelSpec k3(std::size_t m, std::size_t n) {
    const double power = -0.5 * static_cast<double>(m * n + 1);
    return KernelSpec(
        m, n, "K3",
        [power, n](std::span<const double> x, std::span<const double> y) {
            double s = 0.0;
            for (std::size_t j = 0; j * n < y.size(); ++j) {
                const double d = distance(x, y.subspan(j * n, n));
                s += d * d;
            }
            return std::pow(1.0 + s, power);
        },
        KernelClass::LittlewoodPaley, 1.0);
}

inline KernelSpec zero(std::size_t m, std::size_t n) {
    return KernelSpec(m, n, "zero", [](std::span<const double>, std::span<const double>) { return 0.0; },
                      KernelClass::Custom, 0.0);
}

inline KernelSpec by_label(const std::string& label, std::size_t m, std::size_t n) {
    if (label == "K1") return k1(m, n);
    if (label == "K2") return k2(m, n);
    if (label == "K3") return k3(m, n);
    if (label == "zero") return zero(m, n);
    throw Error(ErrorKind::InvalidArgument, "unknown kernel label '" + label + "'");
}

}  // namespace kernels

inline std::vector<KernelSpec> builtin_kernels(std::size_t m, std::size_t n) {
    return {kernels::k1(m, n), kernels::k2(m, n), kernels::k3(m, n)};
}

/// Geometric scale grid t_k = t_min r^k, k = 0..steps, over a base kernel.
class ScaleFamily {
public:
    ScaleFamily(KernelSpec base, double t_min, double ratio, std::size_t steps)
        : base_(std::move(base)), t_min_(t_min), ratio_(ratio), steps_(steps) {
        if (!(t_min > 0.0) || !(ratio > 1.0)) throw Error(ErrorKind::InvalidArgument, "scale grid needs t_min > 0, r > 1");
        ts_.resize(steps + 1);
        for (std::size_t k = 0; k <= steps; ++k) ts_[k] = t_min * std::pow(ratio, static_cast<double>(k));
    }

    /// r = 2^{1/4} spanning [2^-12, 2^12].
    static ScaleFamily with_default_grid(KernelSpec base) {
        return ScaleFamily(std::move(base), std::ldexp(1.0, -12), std::pow(2.0, 0.25), 96);
    }

    /// Same span, ratio sqrt(r).
    ScaleFamily refined() const { return ScaleFamily(base_, t_min_, std::sqrt(ratio_), 2 * steps_); }

    ScaleFamily with_base(KernelSpec base) const { return ScaleFamily(std::move(base), t_min_, ratio_, steps_); }

    const KernelSpec& base() const { return base_; }
    const std::vector<double>& scales() const { return ts_; }
    double log_ratio() const { return std::log(ratio_); }
    double ratio() const { return ratio_; }
    double t_min() const { return t_min_; }
    std::size_t steps() const { return steps_; }

    /// K_t(x, y) = t^{-mn} K(x/t, y/t); scratch buffers avoid allocation.
    double eval(double t, std::span<const double> x, std::span<const double> y, std::vector<double>& xs,
                std::vector<double>& ys) const {
        xs.resize(x.size());
        ys.resize(y.size());
        const double inv = 1.0 / t;
        for (std::size_t d = 0; d < x.size(); ++d) xs[d] = x[d] * inv;
        for (std::size_t d = 0; d < y.size(); ++d) ys[d] = y[d] * inv;
        return std::pow(inv, static_cast<double>(base_.m() * base_.n())) * base_(xs, ys);
    }

    double eval(double t, std::span<const double> x, std::span<const double> y) const {
        std::vector<double> xs, ys;
        return eval(t, x, y, xs, ys);
    }

private:
    KernelSpec base_;
    double t_min_, ratio_;
    std::size_t steps_;
    std::vector<double> ts_;
};

// ---------------------------------------------------------------------------
// Configurations and samplers

/// A base configuration (x, y) and a perturbed one (xp, yp). Size checks use
/// only (x, y).
struct Configuration {
    Point x, xp;
    std::vector<double> y, yp;
};

namespace detail {
inline Configuration random_base(Rng& rng, std::size_t m, std::size_t n, double radius) {
    Configuration c;
    c.x.resize(n);
    c.y.resize(m * n);
    for (auto& v : c.x) v = rng.uniform(-radius, radius);
    for (auto& v : c.y) v = rng.uniform(-radius, radius);
    c.xp = c.x;
    c.yp = c.y;
    return c;
}
}  // namespace detail

/// Off-diagonal configurations, x and all y_j uniform in [-radius, radius]^n.
inline std::vector<Configuration> sample_configurations(std::size_t m, std::size_t n, std::size_t count,
                                                        std::uint64_t seed, double radius) {
    Rng rng(seed);
    std::vector<Configuration> out;
    out.reserve(count);
    while (out.size() < count) {
        auto c = detail::random_base(rng, m, n, radius);
        if (diagonal_distance(c.x, c.y) > 0.0) out.push_back(std::move(c));
    }
    return out;
}

/// Perturbs slot `slot` (1-based): |y_i - y_i'| = s |x - y_i| / B1 with s uniform in [0, 1).
inline std::vector<Configuration> sample_y_perturbations(std::size_t m, std::size_t n, std::size_t slot,
                                                         std::size_t count, std::uint64_t seed, double radius,
                                                         double gap_factor = 2.0) {
    if (slot < 1 || slot > m) throw Error(ErrorKind::InvalidArgument, "slot out of range");
    Rng rng(seed);
    auto base = sample_configurations(m, n, count, rng.next(), radius);
    for (auto& c : base) {
        auto yi = std::span<const double>(c.y).subspan((slot - 1) * n, n);
        const double allowed = distance(c.x, yi) / gap_factor;
        const double len = rng.uniform() * allowed * (1.0 - 1e-12);
        const Point dir = rng.direction(n);
        for (std::size_t d = 0; d < n; ++d) c.yp[(slot - 1) * n + d] = c.y[(slot - 1) * n + d] + len * dir[d];
    }
    return base;
}

/// Perturbs x: |x - x'| = s max_j |x - y_j| / B1 with s uniform in [0, 1).
inline std::vector<Configuration> sample_x_perturbations(std::size_t m, std::size_t n, std::size_t count,
                                                         std::uint64_t seed, double radius, double gap_factor = 2.0) {
    Rng rng(seed);
    auto base = sample_configurations(m, n, count, rng.next(), radius);
    for (auto& c : base) {
        const double allowed = max_slot_distance(c.x, c.y) / gap_factor;
        const double len = rng.uniform() * allowed * (1.0 - 1e-12);
        const Point dir = rng.direction(n);
        for (std::size_t d = 0; d < n; ++d) c.xp[d] = c.x[d] + len * dir[d];
    }
    return base;
}

// ---------------------------------------------------------------------------
// Certificates

struct KernelCertificate {
    std::string condition;
    std::size_t sample_count = 0;
    double worst_ratio = 0.0;
    Configuration witness;
    double constant = std::numeric_limits<double>::infinity();
    bool pass = true;
    std::vector<double> ratios;  // one per sample, in sample order
    std::vector<std::string> warnings;
    long support_violations = -1;  // Marcinkiewicz kernels: nonzero values outside the support set
};

namespace detail {
inline void record(KernelCertificate& cert, std::size_t i, double ratio, const Configuration& c) {
    cert.ratios[i] = ratio;
    if (i == 0 || ratio > cert.worst_ratio) {
        cert.worst_ratio = ratio;
        cert.witness = c;
    }
}

/// Relative slack when comparing a computed ratio with an exact constant.
inline constexpr double certificate_roundoff = 1e-12;

inline void finish(KernelCertificate& cert) {
    cert.sample_count = cert.ratios.size();
    cert.pass = std::isfinite(cert.worst_ratio) && cert.worst_ratio <= cert.constant * (1.0 + certificate_roundoff);
}

inline void require_dims(const KernelSpec& k, const Configuration& c) {
    if (c.x.size() != k.n() || c.y.size() != k.m() * k.n() || c.xp.size() != k.n() || c.yp.size() != k.m() * k.n())
        throw Error(ErrorKind::InvalidArgument, "configuration dimensions do not match the kernel");
}
}  // namespace detail

/// |K(x,y)| (sum |x - y_j|)^{mn}
inline double size_ratio(const KernelSpec& k, std::span<const double> x, std::span<const double> y) {
    const double s = diagonal_distance(x, y);
    if (!(s > 0.0)) throw Error(ErrorKind::DegenerateConfiguration, "configuration lies on the diagonal");
    return std::abs(k(x, y)) * std::pow(s, static_cast<double>(k.m() * k.n()));
}

/// |K(x,y) - K(x,y')| (sum |x-y_j|)^{mn+gamma} / |y_i - y_i'|^gamma; 0 for a zero perturbation.
inline double hoelder_y_ratio(const KernelSpec& k, std::size_t slot, const Configuration& c, double gamma) {
    const std::size_t n = k.n();
    const auto yi = std::span<const double>(c.y).subspan((slot - 1) * n, n);
    const auto yi2 = std::span<const double>(c.yp).subspan((slot - 1) * n, n);
    const double step = distance(yi, yi2);
    if (step == 0.0) return 0.0;
    const double s = diagonal_distance(c.x, c.y);
    if (!(s > 0.0)) throw Error(ErrorKind::DegenerateConfiguration, "configuration lies on the diagonal");
    const double diff = std::abs(k(c.x, c.y) - k(c.x, c.yp));
    return diff * std::pow(s, static_cast<double>(k.m() * n) + gamma) / std::pow(step, gamma);
}

inline double hoelder_x_ratio(const KernelSpec& k, const Configuration& c, double gamma) {
    const double step = distance(c.x, c.xp);
    if (step == 0.0) return 0.0;
    const double s = diagonal_distance(c.x, c.y);
    if (!(s > 0.0)) throw Error(ErrorKind::DegenerateConfiguration, "configuration lies on the diagonal");
    const double diff = std::abs(k(c.x, c.y) - k(c.xp, c.y));
    return diff * std::pow(s, static_cast<double>(k.m() * k.n()) + gamma) / std::pow(step, gamma);
}

inline KernelCertificate certify_size(const KernelSpec& k, std::span<const Configuration> samples, double C) {
    KernelCertificate cert;
    cert.condition = "size";
    cert.constant = C;
    cert.ratios.resize(samples.size());
    if (k.kernel_class() == KernelClass::Marcinkiewicz) cert.support_violations = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        detail::require_dims(k, samples[i]);
        detail::record(cert, i, size_ratio(k, samples[i].x, samples[i].y), samples[i]);
        if (cert.support_violations >= 0) {
            double s2 = 0.0;
            for (std::size_t j = 0; j < k.m(); ++j) {
                const double d = distance(samples[i].x, std::span<const double>(samples[i].y).subspan(j * k.n(), k.n()));
                s2 += d * d;
            }
            if (s2 > 1.0 && k(samples[i].x, samples[i].y) != 0.0) ++cert.support_violations;
        }
    }
    detail::finish(cert);
    if (cert.support_violations > 0) cert.pass = false;
    return cert;
}

inline KernelCertificate certify_hoelder_y(const KernelSpec& k, std::size_t slot, std::span<const Configuration> samples,
                                           double A, double gamma, double gap_factor = 2.0) {
    if (slot < 1 || slot > k.m()) throw Error(ErrorKind::InvalidArgument, "slot out of range");
    KernelCertificate cert;
    cert.condition = "hoelder-y" + std::to_string(slot);
    cert.constant = A;
    cert.ratios.resize(samples.size());
    const std::size_t n = k.n();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& c = samples[i];
        detail::require_dims(k, c);
        if (c.x != c.xp) throw Error(ErrorKind::ConstraintViolated, "y-perturbation sample moves x");
        for (std::size_t d = 0; d < c.y.size(); ++d) {
            if (d / n != slot - 1 && c.y[d] != c.yp[d])
                throw Error(ErrorKind::ConstraintViolated, "y-perturbation sample moves another slot");
        }
        const auto yi = std::span<const double>(c.y).subspan((slot - 1) * n, n);
        const auto yi2 = std::span<const double>(c.yp).subspan((slot - 1) * n, n);
        if (distance(yi, yi2) > distance(c.x, yi) / gap_factor * (1.0 + 1e-12))
            throw Error(ErrorKind::ConstraintViolated, "|y_i - y_i'| exceeds |x - y_i| / B1");
        detail::record(cert, i, hoelder_y_ratio(k, slot, c, gamma), c);
    }
    detail::finish(cert);
    return cert;
}

inline KernelCertificate certify_hoelder_x(const KernelSpec& k, std::span<const Configuration> samples, double A,
                                           double gamma, double gap_factor = 2.0) {
    KernelCertificate cert;
    cert.condition = "hoelder-x";
    cert.constant = A;
    cert.ratios.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& c = samples[i];
        detail::require_dims(k, c);
        if (c.y != c.yp) throw Error(ErrorKind::ConstraintViolated, "x-perturbation sample moves y");
        if (distance(c.x, c.xp) > max_slot_distance(c.x, c.y) / gap_factor * (1.0 + 1e-12))
            throw Error(ErrorKind::ConstraintViolated, "|x - x'| exceeds max_j |x - y_j| / B1");
        detail::record(cert, i, hoelder_x_ratio(k, c, gamma), c);
    }
    detail::finish(cert);
    return cert;
}

/// Empirical Hoelder exponent: log-log slope of |Delta K| against the
/// perturbation length along a fixed direction. slot 0 perturbs x.
inline double estimate_hoelder_exponent(const KernelSpec& k, const Configuration& base, std::size_t slot,
                                        std::span<const double> direction, std::span<const double> lengths) {
    const std::size_t n = k.n();
    std::vector<double> diffs;
    const double k0 = k(base.x, base.y);
    for (double len : lengths) {
        Point x = base.x;
        std::vector<double> y = base.y;
        for (std::size_t d = 0; d < n; ++d) {
            if (slot == 0)
                x[d] += len * direction[d];
            else
                y[(slot - 1) * n + d] += len * direction[d];
        }
        diffs.push_back(std::abs(k(x, y) - k0));
    }
    return loglog_slope(lengths, diffs);
}

// ---------------------------------------------------------------------------
// Square norms over scales

/// (sum_k |g(t_k)|^2 ln r)^{1/2}: geometric-grid quadrature of the H1 norm.
inline double h1_of(const ScaleFamily& fam, const std::function<double(double)>& g) {
    double s = 0.0;
    for (double t : fam.scales()) {
        const double v = g(t);
        s += v * v;
    }
    return std::sqrt(s * fam.log_ratio());
}

inline double h1_norm(const ScaleFamily& fam, std::span<const double> x, std::span<const double> y) {
    if (!(diagonal_distance(x, y) > 0.0))
        throw Error(ErrorKind::DegenerateConfiguration, "configuration lies on the diagonal");
    std::vector<double> xs, ys;
    return h1_of(fam, [&](double t) { return fam.eval(t, x, y, xs, ys); });
}

/// (sum_k sum_z (t/(|x-z|+t))^{n lambda} |g(t,z)|^2 h_z^n ln r / t^n)^{1/2}
/// where z runs over the cell centers of z_grid.
inline double h2_of(const ScaleFamily& fam, double lambda, std::span<const double> x, const Grid& z_grid,
                    const std::function<double(double, std::span<const double>)>& g) {
    if (!(lambda > 1.0)) throw Error(ErrorKind::LambdaTooSmall, "lambda must exceed 1");
    const double n = static_cast<double>(z_grid.dim());
    const std::vector<double> zs = z_grid.centers();
    const std::size_t dim = z_grid.dim();
    double s = 0.0;
    for (double t : fam.scales()) {
        double inner = 0.0;
        for (std::size_t k = 0; k < z_grid.size(); ++k) {
            const std::span<const double> z(zs.data() + k * dim, dim);
            const double v = g(t, z);
            if (v == 0.0) continue;
            const double poisson = std::pow(t / (distance(x, z) + t), n * lambda);
            inner += poisson * v * v;
        }
        s += inner / std::pow(t, n);
    }
    return std::sqrt(s * z_grid.cell_volume() * fam.log_ratio());
}

inline double h2_norm(const ScaleFamily& fam, double lambda, std::span<const double> x, std::span<const double> y,
                      const Grid& z_grid) {
    if (!(lambda > 1.0)) throw Error(ErrorKind::LambdaTooSmall, "lambda must exceed 1");
    if (!(diagonal_distance(x, y) > 0.0))
        throw Error(ErrorKind::DegenerateConfiguration, "configuration lies on the diagonal");
    std::vector<double> xs, ys;
    return h2_of(fam, lambda, x, z_grid, [&](double t, std::span<const double> z) { return fam.eval(t, z, y, xs, ys); });
}

/// Ratio of the largest end-of-grid integrand to the largest integrand; large
/// values mean the scale grid truncates real mass.
inline double scale_endpoint_fraction(const ScaleFamily& fam, std::span<const double> x, std::span<const double> y) {
    std::vector<double> xs, ys;
    double peak = 0.0;
    for (double t : fam.scales()) peak = std::max(peak, std::abs(fam.eval(t, x, y, xs, ys)));
    if (peak == 0.0) return 0.0;
    const double ends = std::max(std::abs(fam.eval(fam.scales().front(), x, y, xs, ys)),
                                 std::abs(fam.eval(fam.scales().back(), x, y, xs, ys)));
    return ends / peak;
}

struct SquareBoundOptions {
    double gamma = 1.0;
    double gap_factor = 2.0;
    std::size_t slot = 1;  // perturbed slot for the y-smoothness bound
    double size_constant = std::numeric_limits<double>::infinity();
    double smooth_constant = std::numeric_limits<double>::infinity();
    bool include_h2 = false;
    double lambda = 3.0;
    std::optional<Grid> z_grid;
};

struct SquareCertificate {
    KernelCertificate size, smooth_x, smooth_y;
    std::optional<KernelCertificate> h2_size, h2_smooth_x, h2_smooth_y;
    std::vector<std::string> warnings;

    bool pass() const {
        bool ok = size.pass && smooth_x.pass && smooth_y.pass;
        for (const auto* c : {&h2_size, &h2_smooth_x, &h2_smooth_y})
            if (c->has_value()) ok = ok && (*c)->pass;
        return ok;
    }
};

/// Sampled square-norm forms of the size and smoothness bounds: H1 always,
/// H2 (lambda, z_grid) on request. x_samples drive the size and x-smoothness
/// checks, y_samples the y-smoothness check.
inline SquareCertificate certify_square_bounds(const ScaleFamily& fam, std::span<const Configuration> x_samples,
                                               std::span<const Configuration> y_samples,
                                               const SquareBoundOptions& opt = {}) {
    const KernelSpec& k = fam.base();
    const double mn = static_cast<double>(k.m() * k.n());
    const std::size_t n = k.n();
    SquareCertificate cert;
    auto init = [](KernelCertificate& c, const char* name, double constant, std::size_t count) {
        c.condition = name;
        c.constant = constant;
        c.ratios.assign(count, 0.0);
    };
    init(cert.size, "h1-size", opt.size_constant, x_samples.size());
    init(cert.smooth_x, "h1-smooth-x", opt.smooth_constant, x_samples.size());
    init(cert.smooth_y, "h1-smooth-y", opt.smooth_constant, y_samples.size());
    if (opt.include_h2) {
        if (!opt.z_grid) throw Error(ErrorKind::InvalidArgument, "H2 bounds need a z grid");
        if (!(opt.lambda > 1.0)) throw Error(ErrorKind::LambdaTooSmall, "lambda must exceed 1");
        cert.h2_size.emplace();
        cert.h2_smooth_x.emplace();
        cert.h2_smooth_y.emplace();
        init(*cert.h2_size, "h2-size", opt.size_constant, x_samples.size());
        init(*cert.h2_smooth_x, "h2-smooth-x", opt.smooth_constant, x_samples.size());
        init(*cert.h2_smooth_y, "h2-smooth-y", opt.smooth_constant, y_samples.size());
    }

    double worst_endpoint = 0.0;
    std::vector<double> endpoint(x_samples.size() + y_samples.size(), 0.0);
    std::vector<double> size_r(x_samples.size()), smx_r(x_samples.size()), smy_r(y_samples.size());
    std::vector<double> h2s_r(x_samples.size()), h2x_r(x_samples.size()), h2y_r(y_samples.size());

    parallel_for(x_samples.size(), [&](std::size_t i) {
        const auto& c = x_samples[i];
        detail::require_dims(k, c);
        if (distance(c.x, c.xp) > max_slot_distance(c.x, c.y) / opt.gap_factor * (1.0 + 1e-12))
            throw Error(ErrorKind::ConstraintViolated, "|x - x'| exceeds max_j |x - y_j| / B1");
        const double s = diagonal_distance(c.x, c.y);
        if (!(s > 0.0)) throw Error(ErrorKind::DegenerateConfiguration, "configuration lies on the diagonal");
        std::vector<double> xs, ys;
        size_r[i] = h1_norm(fam, c.x, c.y) * std::pow(s, mn);
        endpoint[i] = scale_endpoint_fraction(fam, c.x, c.y);
        const double step = distance(c.x, c.xp);
        if (step > 0.0) {
            const double d = h1_of(fam, [&](double t) { return fam.eval(t, c.xp, c.y, xs, ys) - fam.eval(t, c.x, c.y, xs, ys); });
            smx_r[i] = d * std::pow(s, mn + opt.gamma) / std::pow(step, opt.gamma);
        }
        if (opt.include_h2) {
            h2s_r[i] = h2_norm(fam, opt.lambda, c.x, c.y, *opt.z_grid) * std::pow(s, mn);
            if (step > 0.0) {
                std::vector<double> a(n), b(n);
                const double d = h2_of(fam, opt.lambda, Point(n, 0.0), *opt.z_grid,
                                       [&](double t, std::span<const double> z) {
                                           for (std::size_t q = 0; q < n; ++q) {
                                               a[q] = c.x[q] - z[q];
                                               b[q] = c.xp[q] - z[q];
                                           }
                                           return fam.eval(t, a, c.y, xs, ys) - fam.eval(t, b, c.y, xs, ys);
                                       });
                h2x_r[i] = d * std::pow(s, mn + opt.gamma) / std::pow(step, opt.gamma);
            }
        }
    });

    parallel_for(y_samples.size(), [&](std::size_t i) {
        const auto& c = y_samples[i];
        detail::require_dims(k, c);
        const auto yi = std::span<const double>(c.y).subspan((opt.slot - 1) * n, n);
        const auto yi2 = std::span<const double>(c.yp).subspan((opt.slot - 1) * n, n);
        if (distance(yi, yi2) > distance(c.x, yi) / opt.gap_factor * (1.0 + 1e-12))
            throw Error(ErrorKind::ConstraintViolated, "|y_i - y_i'| exceeds |x - y_i| / B1");
        const double s = diagonal_distance(c.x, c.y);
        if (!(s > 0.0)) throw Error(ErrorKind::DegenerateConfiguration, "configuration lies on the diagonal");
        endpoint[x_samples.size() + i] = scale_endpoint_fraction(fam, c.x, c.y);
        const double step = distance(yi, yi2);
        if (step == 0.0) return;
        std::vector<double> xs, ys;
        const double d = h1_of(fam, [&](double t) { return fam.eval(t, c.x, c.y, xs, ys) - fam.eval(t, c.x, c.yp, xs, ys); });
        smy_r[i] = d * std::pow(s, mn + opt.gamma) / std::pow(step, opt.gamma);
        if (opt.include_h2) {
            const double d2 = h2_of(fam, opt.lambda, c.x, *opt.z_grid, [&](double t, std::span<const double> z) {
                return fam.eval(t, z, c.y, xs, ys) - fam.eval(t, z, c.yp, xs, ys);
            });
            h2y_r[i] = d2 * std::pow(s, mn + opt.gamma) / std::pow(step, opt.gamma);
        }
    });

    for (std::size_t i = 0; i < x_samples.size(); ++i) {
        detail::record(cert.size, i, size_r[i], x_samples[i]);
        detail::record(cert.smooth_x, i, smx_r[i], x_samples[i]);
        if (opt.include_h2) {
            detail::record(*cert.h2_size, i, h2s_r[i], x_samples[i]);
            detail::record(*cert.h2_smooth_x, i, h2x_r[i], x_samples[i]);
        }
    }
    for (std::size_t i = 0; i < y_samples.size(); ++i) {
        detail::record(cert.smooth_y, i, smy_r[i], y_samples[i]);
        if (opt.include_h2) detail::record(*cert.h2_smooth_y, i, h2y_r[i], y_samples[i]);
    }
    for (auto* c : {&cert.size, &cert.smooth_x, &cert.smooth_y}) detail::finish(*c);
    if (opt.include_h2)
        for (auto* c : {&cert.h2_size, &cert.h2_smooth_x, &cert.h2_smooth_y}) detail::finish(**c);

    for (double e : endpoint) worst_endpoint = std::max(worst_endpoint, e);
    if (worst_endpoint > 1e-6)
        cert.warnings.push_back("scale grid endpoints carry up to " + format_double(worst_endpoint) +
                                " of the peak integrand; widen [t_min, t_max]");
    return cert;
}

}  // namespace czlab
