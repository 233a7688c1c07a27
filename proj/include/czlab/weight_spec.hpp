#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "czlab/core.hpp"

namespace czlab {

/// A positive weight evaluable at any point of R^n.
///
/// The built-in family is the regularized power weight (eps + |x|)^alpha.
/// Arbitrary closed-form weights can be wrapped with `from_function`; the
/// multiple-weight products of the weights module are built that way.
class WeightSpec {
public:
    struct Power {
        double alpha;
        double eps;
    };

    static WeightSpec unit() { return power(0.0, 0.0); }

    static WeightSpec power(double alpha, double eps = 0.0) {
        if (!std::isfinite(alpha) || !std::isfinite(eps) || eps < 0.0)
            throw Error(ErrorKind::InvalidArgument, "power weight needs finite alpha and eps >= 0");
        WeightSpec w;
        w.power_ = Power{alpha, eps};
        w.label_ = "power(alpha=" + format_double(alpha) + ",eps=" + format_double(eps) + ")";
        return w;
    }

    static WeightSpec from_function(std::function<double(std::span<const double>)> fn, std::string label) {
        WeightSpec w;
        w.fn_ = std::make_shared<std::function<double(std::span<const double>)>>(std::move(fn));
        w.label_ = std::move(label);
        return w;
    }

    double operator()(std::span<const double> x) const {
        double v = 1.0;
        if (power_) {
            if (power_->alpha != 0.0) v = std::pow(power_->eps + euclidean_norm(x), power_->alpha);
        } else {
            v = (*fn_)(x);
        }
        return scale_ * v;
    }

    /// c * w for c > 0.
    WeightSpec scaled(double c) const {
        if (!(c > 0.0)) throw Error(ErrorKind::InvalidArgument, "weight scale must be positive");
        WeightSpec w = *this;
        w.scale_ *= c;
        w.label_ = format_double(c) + "*" + label_;
        return w;
    }

    /// w^q, evaluated pointwise.
    WeightSpec pow(double q) const {
        if (power_ && scale_ == 1.0) return power(power_->alpha * q, power_->eps);
        WeightSpec base = *this;
        return from_function([base, q](std::span<const double> x) { return std::pow(base(x), q); },
                             "(" + label_ + ")^" + format_double(q));
    }

    const std::optional<Power>& power_params() const { return power_; }
    double scale() const { return scale_; }
    const std::string& label() const { return label_; }

    bool is_unit() const { return power_ && power_->alpha == 0.0 && scale_ == 1.0; }

private:
    WeightSpec() = default;

    std::optional<Power> power_;
    std::shared_ptr<std::function<double(std::span<const double>)>> fn_;
    double scale_ = 1.0;
    std::string label_;
};

}  // namespace czlab
