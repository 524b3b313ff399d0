#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "toruslab/vec2.hpp"

namespace toruslab::geometry {

/// One term c*cos(2pi k.x) + s*sin(2pi k.x) of the conformal exponent f.
struct FourierMode {
    int k1 = 0;
    int k2 = 0;
    double c = 0.0;
    double s = 0.0;

    friend bool operator==(const FourierMode&, const FourierMode&) = default;
};

enum class MetricMode { Flat, Conformal };

/// Maximum of sum(|c| + |s|) accepted for a metric.
inline constexpr double kAmplitudeBudget = 0.75;

/// f together with its gradient and Hessian at a point.
struct FJet {
    double f = 0.0;
    Vec2 grad;
    Mat2 hess;
};

/// Christoffel symbols Gamma^k_{ij}, indexed [k][i][j] with 0-based indices.
using Christoffel = std::array<std::array<std::array<double, 2>, 2>, 2>;

/// Periodic conformal metric g = exp(2f) g_E on the torus, lifted to R^2.
///
/// f is a truncated Fourier series with integer wavenumbers, so it is
/// Z^2-periodic by construction. The flat metric is the conformal metric
/// with no modes.
class MetricField {
public:
    MetricField() = default;

    static MetricField flat();
    /// Throws ConfigError when the amplitude budget is exceeded.
    static MetricField conformal(std::vector<FourierMode> modes);

    /// f = 0.3 cos(2 pi x1) cos(2 pi x2), written as two plane waves.
    static MetricField bumpy_default();

    MetricMode mode() const { return mode_; }
    bool is_flat() const { return modes_.empty(); }
    std::span<const FourierMode> modes() const { return modes_; }
    double amplitude() const;

    double f(Vec2 x) const;
    Vec2 grad_f(Vec2 x) const;
    FJet jet(Vec2 x) const;

    /// exp(f(x)): the factor by which Euclidean lengths are scaled at x.
    double conformal_factor(Vec2 x) const;

    /// The metric tensor exp(2f(x)) * I.
    Mat2 eval(Vec2 x) const;

    /// Christoffel symbols of exp(2f) g_E with analytic derivatives of f.
    Christoffel christoffel(Vec2 x) const;

    /// Upper bound on |Laplacian f| from the coefficient list.
    double laplacian_bound() const;

    /// Stable 64-bit fingerprint of (mode, modes).
    std::uint64_t hash() const;

    friend bool operator==(const MetricField&, const MetricField&) = default;

private:
    MetricMode mode_ = MetricMode::Flat;
    std::vector<FourierMode> modes_;
};

/// A = exp(max |f|) over a uniform sample of one period.
double equivalence_constant(const MetricField& m, int resolution = 256);

}  // namespace toruslab::geometry
