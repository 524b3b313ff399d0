#include "toruslab/flow/geodesic.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>
#include <sstream>

#include "toruslab/errors.hpp"
#include "toruslab/geometry/length.hpp"

namespace toruslab::flow {

using geometry::Grid;
using geometry::MetricField;

double wrap_angle(double theta) {
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t = 0.0;
    return t;
}

Vec2 PhasePoint::velocity(const MetricField& m) const { return std::exp(-m.f(x)) * unit(theta); }

GeodesicPath::GeodesicPath(std::vector<PathSample> samples, double spacing)
    : samples_(std::move(samples)), spacing_(spacing) {}

bool GeodesicPath::covers(double t0, double t1) const {
    if (samples_.empty()) return false;
    const double slack = 1e-9 * std::max(1.0, std::abs(t1));
    return t_begin() <= t0 + slack && t_end() >= t1 - slack;
}

Vec2 GeodesicPath::position(double t) const {
    if (samples_.size() == 1 || t <= t_begin()) return samples_.front().x;
    if (t >= t_end()) return samples_.back().x;
    const double u = (t - t_begin()) / spacing_;
    const std::size_t i = std::min(static_cast<std::size_t>(u), samples_.size() - 2);
    const double s = std::clamp(u - static_cast<double>(i), 0.0, 1.0);
    return lerp(samples_[i].x, samples_[i + 1].x, s);
}

PhasePoint GeodesicPath::phase(double t) const {
    const double u = (t - t_begin()) / spacing_;
    const auto i = static_cast<std::size_t>(std::clamp(std::llround(u), 0LL, static_cast<long long>(samples_.size()) - 1));
    return {samples_[i].x, samples_[i].theta};
}

std::vector<Vec2> GeodesicPath::points() const {
    std::vector<Vec2> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(s.x);
    return out;
}

GeodesicPath GeodesicPath::window(double t0, double t1) const {
    std::vector<PathSample> out;
    const double slack = 1e-9 * std::max(1.0, std::max(std::abs(t0), std::abs(t1)));
    for (const auto& s : samples_) {
        if (s.t >= t0 - slack && s.t <= t1 + slack) out.push_back(s);
    }
    return {std::move(out), spacing_};
}

GeodesicPath GeodesicPath::translated(Vec2 shift) const {
    std::vector<PathSample> out(samples_);
    for (auto& s : out) s.x += shift;
    return {std::move(out), spacing_};
}

GeodesicPath GeodesicPath::reparametrized(double dt) const {
    std::vector<PathSample> out(samples_);
    for (auto& s : out) s.t -= dt;
    return {std::move(out), spacing_};
}

namespace {

struct State {
    Vec2 x;
    Vec2 v;
};

State derivative(const MetricField& m, const State& s) {
    const Vec2 g = m.grad_f(s.x);
    const double v1 = s.v.x;
    const double v2 = s.v.y;
    // x'' = -Gamma(x', x') with the conformal symbols
    const Vec2 acc{-(g.x * v1 * v1 + 2.0 * g.y * v1 * v2 - g.x * v2 * v2),
                   -(-g.y * v1 * v1 + 2.0 * g.x * v1 * v2 + g.y * v2 * v2)};
    return {s.v, acc};
}

State rk4(const MetricField& m, const State& s, double h) {
    const State k1 = derivative(m, s);
    const State k2 = derivative(m, {s.x + 0.5 * h * k1.x, s.v + 0.5 * h * k1.v});
    const State k3 = derivative(m, {s.x + 0.5 * h * k2.x, s.v + 0.5 * h * k2.v});
    const State k4 = derivative(m, {s.x + h * k3.x, s.v + h * k3.v});
    State out{s.x + (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
              s.v + (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
    out.v = (std::exp(-m.f(out.x)) / norm(out.v)) * out.v;
    return out;
}

void check_settings(const FlowSettings& settings, double T) {
    if (!(settings.step > 0.0) || settings.step > 1e-2) throw PreconditionError("integration step must lie in (0, 1e-2]");
    if (!(settings.sampling > 0.0)) throw PreconditionError("sampling spacing must be positive");
    if (std::abs(T) > settings.horizon) {
        std::ostringstream os;
        os << "integration time " << T << " exceeds horizon " << settings.horizon;
        throw PreconditionError(os.str());
    }
}

}  // namespace

GeodesicPath integrate(const MetricField& m, PhasePoint v, double T, const FlowSettings& settings) {
    if (!(T > 0.0)) throw PreconditionError("integration time must be positive");
    check_settings(settings, T);
    const int intervals = static_cast<int>(std::ceil(T / settings.sampling - 1e-9));
    const double hs = T / intervals;
    const int substeps = static_cast<int>(std::ceil(hs / settings.step - 1e-9));
    const double h = hs / substeps;

    std::vector<PathSample> samples;
    samples.reserve(intervals + 1);
    State s{v.x, v.velocity(m)};
    samples.push_back({0.0, v.x, wrap_angle(v.theta)});
    for (int k = 1; k <= intervals; ++k) {
        for (int j = 0; j < substeps; ++j) s = rk4(m, s, h);
        samples.push_back({k * hs, s.x, wrap_angle(std::atan2(s.v.y, s.v.x))});
    }
    return {std::move(samples), hs};
}

PhasePoint flow_map(const MetricField& m, PhasePoint v, double t, const FlowSettings& settings) {
    if (t == 0.0) return v;
    check_settings(settings, t);
    if (t < 0.0) {
        const PhasePoint back = flow_map(m, {v.x, v.theta + std::numbers::pi}, -t, settings);
        return {back.x, wrap_angle(back.theta + std::numbers::pi)};
    }
    const int steps = static_cast<int>(std::ceil(t / settings.step - 1e-9));
    const double h = t / steps;
    State s{v.x, v.velocity(m)};
    for (int j = 0; j < steps; ++j) s = rk4(m, s, h);
    return {s.x, wrap_angle(std::atan2(s.v.y, s.v.x))};
}

GeodesicPath arc_length_path(const MetricField& m, std::span<const Vec2> polyline, double origin_arc, double spacing) {
    if (polyline.size() < 2) throw PreconditionError("arc_length_path needs at least 2 points");
    std::vector<double> cum(polyline.size(), 0.0);
    for (std::size_t i = 1; i < polyline.size(); ++i) {
        cum[i] = cum[i - 1] + geometry::segment_length(m, polyline[i - 1], polyline[i]);
    }
    const double total = cum.back();
    const long long kmin = static_cast<long long>(std::ceil((0.0 - origin_arc) / spacing - 1e-9));
    const long long kmax = static_cast<long long>(std::floor((total - origin_arc) / spacing + 1e-9));
    std::vector<PathSample> samples;
    samples.reserve(static_cast<std::size_t>(std::max(0LL, kmax - kmin + 1)));
    std::size_t seg = 0;
    for (long long k = kmin; k <= kmax; ++k) {
        const double t = k * spacing;
        const double s = std::clamp(origin_arc + t, 0.0, total);
        while (seg + 2 < polyline.size() && cum[seg + 1] < s) ++seg;
        const double len = cum[seg + 1] - cum[seg];
        const double u = len > 0.0 ? std::clamp((s - cum[seg]) / len, 0.0, 1.0) : 0.0;
        const Vec2 d = polyline[seg + 1] - polyline[seg];
        samples.push_back({t, lerp(polyline[seg], polyline[seg + 1], u), wrap_angle(std::atan2(d.y, d.x))});
    }
    return {std::move(samples), spacing};
}

std::vector<double> window_times(double T, double spacing) {
    const long long n = static_cast<long long>(std::ceil((T + 1.0) / spacing - 1e-9));
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n + 1));
    for (long long k = 0; k <= n; ++k) out.push_back(std::min(k * spacing, T + 1.0));
    return out;
}

namespace {

void require_window(const GeodesicPath& v, const GeodesicPath& w, double t0, double t1) {
    if (!v.covers(t0, t1) || !w.covers(t0, t1)) {
        std::ostringstream os;
        os << "paths do not cover the window [" << t0 << ", " << t1 << "]";
        throw PreconditionError(os.str());
    }
}

struct Bracket {
    double t;
    double lower;
    double upper;
    Vec2 a, b;
};

// t -> d(c_v(t), c_w(t)) is 2-Lipschitz for unit speed paths, so every
// exact value bounds its neighbours.
class LipschitzBound {
public:
    explicit LipschitzBound(const std::vector<Bracket>& br) : t_(br.size()), bound_(br.size(), geometry::kInfinity) {
        for (std::size_t i = 0; i < br.size(); ++i) t_[i] = br[i].t;
    }

    double at(std::size_t i) const { return bound_[i]; }

    void add(double t, double d) {
        for (std::size_t i = 0; i < t_.size(); ++i) bound_[i] = std::min(bound_[i], d + 2.0 * std::abs(t_[i] - t));
    }

private:
    std::vector<double> t_;
    std::vector<double> bound_;
};

// Upper ends are chord lengths, or the cheaper exp(max f) |a - b| when chord is false.
std::vector<Bracket> brackets(const Grid& grid, const GeodesicPath& v, const GeodesicPath& w, double t0, double t1,
                              bool chord = true) {
    const double lo = std::exp(grid.fmin_bound());
    const double hi = std::exp(grid.fmax_bound());
    const double spacing = std::min(v.spacing(), w.spacing());
    std::vector<Bracket> out;
    const long long n = static_cast<long long>(std::ceil((t1 - t0) / spacing - 1e-9));
    for (long long k = 0; k <= n; ++k) {
        const double t = std::min(t0 + k * spacing, t1);
        const Vec2 a = v.position(t);
        const Vec2 b = w.position(t);
        const double e = distance(a, b);
        out.push_back({t, lo * e, chord ? geometry::distance_upper_bound(grid, a, b) : hi * e, a, b});
    }
    return out;
}

}  // namespace

double sup_distance(const Grid& grid, const GeodesicPath& v, const GeodesicPath& w, double t0, double t1) {
    require_window(v, w, t0, t1);
    const std::vector<Bracket> br = brackets(grid, v, w, t0, t1);
    double best = 0.0;
    for (const auto& b : br) best = std::max(best, b.lower);
    std::vector<std::size_t> order(br.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return br[x].upper > br[y].upper; });
    LipschitzBound lip(br);
    for (std::size_t i : order) {
        const auto& b = br[i];
        if (b.upper <= best) break;
        if (lip.at(i) <= best) continue;
        const double d = b.upper - b.lower < 1e-12 ? b.upper : geometry::riemannian_distance(grid, b.a, b.b);
        lip.add(b.t, d);
        best = std::max(best, d);
    }
    return best;
}

double sup_chord_length(const geometry::Grid& grid, const GeodesicPath& v, const GeodesicPath& w, double t0,
                        double t1) {
    double best = 0.0;
    require_window(v, w, t0, t1);
    for (const auto& b : brackets(grid, v, w, t0, t1)) best = std::max(best, b.upper);
    return best;
}

bool sup_distance_exceeds(const Grid& grid, const GeodesicPath& v, const GeodesicPath& w, double t0, double t1,
                          double eps) {
    require_window(v, w, t0, t1);
    std::vector<Bracket> br = brackets(grid, v, w, t0, t1, false);
    for (const auto& b : br) {
        if (b.lower > eps) return true;
    }
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < br.size(); ++i) {
        if (br[i].upper <= eps) continue;
        br[i].upper = geometry::distance_upper_bound(grid, br[i].a, br[i].b);
        if (br[i].upper > eps) open.push_back(i);
    }
    std::stable_sort(open.begin(), open.end(), [&](std::size_t x, std::size_t y) { return br[x].upper > br[y].upper; });
    LipschitzBound lip(br);
    for (std::size_t i : open) {
        if (lip.at(i) <= eps) continue;
        const double d = geometry::riemannian_distance(grid, br[i].a, br[i].b);
        if (d > eps) return true;
        lip.add(br[i].t, d);
    }
    return false;
}

double dynamical_distance(const Grid& grid, const GeodesicPath& v, const GeodesicPath& w, double T) {
    return sup_distance(grid, v, w, 0.0, T + 1.0);
}

bool dynamical_distance_exceeds(const Grid& grid, const GeodesicPath& v, const GeodesicPath& w, double T, double eps) {
    return sup_distance_exceeds(grid, v, w, 0.0, T + 1.0, eps);
}

double dynamical_distance(const Grid& grid, PhasePoint v, PhasePoint w, double T, const FlowSettings& settings) {
    const GeodesicPath a = integrate(grid.metric(), v, T + 1.0, settings);
    const GeodesicPath b = integrate(grid.metric(), w, T + 1.0, settings);
    return dynamical_distance(grid, a, b, T);
}

}  // namespace toruslab::flow
