#pragma once

#include <span>
#include <vector>

#include "toruslab/geometry/metric.hpp"

namespace toruslab::minimal {

struct ShortenResult {
    std::vector<Vec2> polyline;
    double length = 0.0;
    double initial_length = 0.0;
    int sweeps = 0;
    bool converged = false;
};

/// Node spacing used when a polyline is handed to the shortener.
inline constexpr double kShortenSpacing = 0.05;

/// Damped Newton descent on the discrete length with endpoints fixed.
/// Interior nodes move along their normals; a sweep is accepted only if
/// it lowers the length, so lengths never increase. Stops when a sweep
/// gains less than tol or after max_sweeps (converged = false).
ShortenResult shorten(const geometry::MetricField& m, std::vector<Vec2> polyline, int max_sweeps = 200,
                      double tol = 1e-10);

/// Uniform Euclidean resampling with both endpoints kept; every segment is
/// at most spacing long.
std::vector<Vec2> resample(std::span<const Vec2> polyline, double spacing);

/// Length and gradient of the discrete length with respect to each node.
/// Exposed for derivative tests.
double discrete_length(const geometry::MetricField& m, std::span<const Vec2> polyline);
std::vector<Vec2> discrete_length_gradient(const geometry::MetricField& m, std::span<const Vec2> polyline);

/// Second derivative blocks of one GL segment length ell(p, q).
struct SegmentHessian {
    Mat2 pp;
    Mat2 qq;
    Mat2 qp;  // d/dp of the q-gradient
};
SegmentHessian segment_hessian(const geometry::MetricField& m, Vec2 p, Vec2 q);

}  // namespace toruslab::minimal
