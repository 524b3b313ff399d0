#pragma once

#include <span>
#include <vector>

#include "toruslab/geometry/distance.hpp"
#include "toruslab/geometry/metric.hpp"

namespace toruslab::flow {

/// Unit tangent vector on the lifted torus: footpoint plus Euclidean angle.
struct PhasePoint {
    Vec2 x;
    double theta = 0.0;

    /// The g-unit velocity exp(-f(x)) (cos theta, sin theta).
    Vec2 velocity(const geometry::MetricField& m) const;
    friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

/// Angle wrapped into [0, 2 pi).
double wrap_angle(double theta);

struct PathSample {
    double t = 0.0;
    Vec2 x;
    double theta = 0.0;
};

/// Arc-length sampled lifted geodesic with uniform spacing.
class GeodesicPath {
public:
    GeodesicPath() = default;
    GeodesicPath(std::vector<PathSample> samples, double spacing);

    std::span<const PathSample> samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    const PathSample& operator[](std::size_t i) const { return samples_[i]; }
    double spacing() const { return spacing_; }
    double t_begin() const { return samples_.front().t; }
    double t_end() const { return samples_.back().t; }
    bool covers(double t0, double t1) const;

    /// Linear interpolation in t (clamped to the sampled range).
    Vec2 position(double t) const;
    /// Phase point at the sample nearest to t.
    PhasePoint phase(double t) const;

    std::vector<Vec2> points() const;
    /// Samples with t in [t0, t1].
    GeodesicPath window(double t0, double t1) const;
    GeodesicPath translated(Vec2 shift) const;
    /// Same image with every parameter shifted: new t = old t - dt.
    GeodesicPath reparametrized(double dt) const;

private:
    std::vector<PathSample> samples_;
    double spacing_ = 0.0;
};

struct FlowSettings {
    double step = 1e-3;
    double sampling = 0.05;
    double horizon = 200.0;

    friend bool operator==(const FlowSettings&, const FlowSettings&) = default;
};

/// Classical RK4 on the geodesic equation with the speed renormalised to 1
/// after every step. Throws PreconditionError if step > 1e-2, T <= 0 or
/// T > horizon.
GeodesicPath integrate(const geometry::MetricField& m, PhasePoint v, double T, const FlowSettings& settings = {});

/// phi^t(v); t = 0 returns v and negative t flows backwards.
PhasePoint flow_map(const geometry::MetricField& m, PhasePoint v, double t, const FlowSettings& settings = {});

/// Arc-length parametrisation of a polyline with t = 0 at Riemannian arc
/// length origin_arc from its first point.
GeodesicPath arc_length_path(const geometry::MetricField& m, std::span<const Vec2> polyline, double origin_arc,
                             double spacing);

/// max over sampled t in [0, T+1] of d(c_v(t), c_w(t)). Exact distances are
/// only computed where the Euclidean brackets cannot decide the maximum.
double dynamical_distance(const geometry::Grid& grid, const GeodesicPath& v, const GeodesicPath& w, double T);

/// Whether dynamical_distance(v, w, T) > eps, with early exit.
bool dynamical_distance_exceeds(const geometry::Grid& grid, const GeodesicPath& v, const GeodesicPath& w, double T,
                                double eps);

/// max over sampled t in [t0, t1] of d(c_v(t), c_w(t)), pruned as above.
/// Throws PreconditionError unless both paths cover [t0, t1].
double sup_distance(const geometry::Grid& grid, const GeodesicPath& v, const GeodesicPath& w, double t0, double t1);
bool sup_distance_exceeds(const geometry::Grid& grid, const GeodesicPath& v, const GeodesicPath& w, double t0,
                          double t1, double eps);
/// Sampled sup of the chord length, an upper bound for sup_distance without
/// any distance queries.
double sup_chord_length(const geometry::Grid& grid, const GeodesicPath& v, const GeodesicPath& w, double t0,
                        double t1);

/// Integrates both phase points to T+1 and compares.
double dynamical_distance(const geometry::Grid& grid, PhasePoint v, PhasePoint w, double T,
                          const FlowSettings& settings = {});

/// Sampled times 0, h, ..., covering [0, T+1].
std::vector<double> window_times(double T, double spacing);

}  // namespace toruslab::flow
