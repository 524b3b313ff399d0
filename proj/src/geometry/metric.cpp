#include "toruslab/geometry/metric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "toruslab/errors.hpp"

namespace toruslab::geometry {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

MetricField MetricField::flat() { return MetricField{}; }

MetricField MetricField::conformal(std::vector<FourierMode> modes) {
    MetricField m;
    m.mode_ = MetricMode::Conformal;
    m.modes_ = std::move(modes);
    const double amp = m.amplitude();
    if (!(amp <= kAmplitudeBudget)) {
        std::ostringstream os;
        os << "amplitude budget exceeded: sum(|c|+|s|) = " << amp << " > " << kAmplitudeBudget;
        throw ConfigError(os.str());
    }
    return m;
}

MetricField MetricField::bumpy_default() {
    return conformal({{1, 1, 0.15, 0.0}, {1, -1, 0.15, 0.0}});
}

double MetricField::amplitude() const {
    double amp = 0.0;
    for (const auto& md : modes_) amp += std::abs(md.c) + std::abs(md.s);
    return amp;
}

double MetricField::f(Vec2 x) const {
    double v = 0.0;
    for (const auto& md : modes_) {
        const double ph = kTwoPi * (md.k1 * x.x + md.k2 * x.y);
        v += md.c * std::cos(ph) + md.s * std::sin(ph);
    }
    return v;
}

Vec2 MetricField::grad_f(Vec2 x) const {
    Vec2 g;
    for (const auto& md : modes_) {
        const double ph = kTwoPi * (md.k1 * x.x + md.k2 * x.y);
        const double amp = -md.c * std::sin(ph) + md.s * std::cos(ph);
        g += amp * Vec2{kTwoPi * md.k1, kTwoPi * md.k2};
    }
    return g;
}

FJet MetricField::jet(Vec2 x) const {
    FJet j;
    for (const auto& md : modes_) {
        const double ph = kTwoPi * (md.k1 * x.x + md.k2 * x.y);
        const double cs = std::cos(ph);
        const double sn = std::sin(ph);
        const Vec2 k{kTwoPi * md.k1, kTwoPi * md.k2};
        const double val = md.c * cs + md.s * sn;
        j.f += val;
        j.grad += (-md.c * sn + md.s * cs) * k;
        j.hess -= val * Mat2::outer(k, k);
    }
    return j;
}

double MetricField::conformal_factor(Vec2 x) const { return std::exp(f(x)); }

Mat2 MetricField::eval(Vec2 x) const {
    const double e2f = std::exp(2.0 * f(x));
    return {e2f, 0.0, 0.0, e2f};
}

Christoffel MetricField::christoffel(Vec2 x) const {
    const Vec2 g = grad_f(x);
    Christoffel G{};
    // Gamma^1
    G[0][0][0] = g.x;
    G[0][0][1] = G[0][1][0] = g.y;
    G[0][1][1] = -g.x;
    // Gamma^2
    G[1][0][0] = -g.y;
    G[1][0][1] = G[1][1][0] = g.x;
    G[1][1][1] = g.y;
    return G;
}

double MetricField::laplacian_bound() const {
    double b = 0.0;
    for (const auto& md : modes_) {
        const double k2 = kTwoPi * kTwoPi * (md.k1 * md.k1 + md.k2 * md.k2);
        b += k2 * (std::abs(md.c) + std::abs(md.s));
    }
    return b;
}

std::uint64_t MetricField::hash() const {
    // FNV-1a over the exact bit patterns.
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    const int mode = static_cast<int>(mode_);
    mix(&mode, sizeof mode);
    for (const auto& md : modes_) {
        mix(&md.k1, sizeof md.k1);
        mix(&md.k2, sizeof md.k2);
        mix(&md.c, sizeof md.c);
        mix(&md.s, sizeof md.s);
    }
    return h;
}

double equivalence_constant(const MetricField& m, int resolution) {
    if (m.is_flat()) return 1.0;
    double fmax = 0.0;
    const double h = 1.0 / resolution;
    for (int j = 0; j < resolution; ++j) {
        for (int i = 0; i < resolution; ++i) {
            fmax = std::max(fmax, std::abs(m.f({i * h, j * h})));
        }
    }
    return std::exp(fmax);
}

}  // namespace toruslab::geometry
