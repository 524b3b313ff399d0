#pragma once

#include <span>

#include "toruslab/geometry/metric.hpp"

namespace toruslab::geometry {

/// Longest Euclidean piece integrated by one Gauss-Legendre panel.
inline constexpr double kQuadraturePiece = 0.1;

/// Riemannian length of the straight segment p -> q (3-point Gauss-Legendre
/// on pieces of at most kQuadraturePiece).
double segment_length(const MetricField& m, Vec2 p, Vec2 q);

/// Sum of segment lengths. Throws PreconditionError for fewer than 2 points.
double curve_length(const MetricField& m, std::span<const Vec2> polyline);

/// Riemannian area of the polygon bounded by the closed polyline (the last
/// point connects back to the first). Counter-clockwise input gives a
/// positive value.
double polygon_area(const MetricField& m, std::span<const Vec2> polygon);

}  // namespace toruslab::geometry
