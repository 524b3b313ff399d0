#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "toruslab/flow/geodesic.hpp"
#include "toruslab/geometry/distance.hpp"

namespace toruslab::minimal {

using flow::GeodesicPath;
using flow::PhasePoint;
using geometry::Grid;

/// Euclidean line with the order induced by its unit direction.
struct Line {
    Vec2 base;
    Vec2 dir{1.0, 0.0};

    static Line through(Vec2 a, Vec2 b);
    static Line from_angle(Vec2 base, double angle);

    double parameter(Vec2 x) const { return dot(x - base, dir); }
    Vec2 point(double s) const { return base + s * dir; }
    Vec2 foot(Vec2 x) const { return point(parameter(x)); }
    double euclidean_distance(Vec2 x) const { return std::abs(cross(dir, x - base)); }
    Line translated(Vec2 shift) const { return {base + shift, dir}; }
};

/// Slope of the displacement, with rational detection up to denominator 12.
struct Rotation {
    double alpha = 0.0;  // +inf for vertical displacement
    bool rational = false;
    int p = 0;
    int q = 0;

    bool infinite() const { return std::isinf(alpha); }
};

inline constexpr int kMaxDenominator = 12;
inline constexpr double kMinRotationSpan = 20.0;

struct Certificate {
    bool minimal = false;
    double slack = 0.0;
};

struct MinimalRecord {
    GeodesicPath path;
    Rotation rotation;
    Line line;             // accompanying line of the path
    Line generating_line;  // line the construction shadowed
    double deviation = 0.0;
    double minimality_slack = 0.0;
    bool certified = false;
    double stability = 0.0;  // sup distance to the margin-doubled construction
    bool stable = true;

    PhasePoint initial() const { return path.phase(0.0); }
};

struct MinimalOptions {
    double margin = 10.0;
    double spacing = 0.05;
    bool check_stability = true;
    double stability_tolerance = 1e-2;
    bool certify = true;
};

/// Minimal segment from x to y sampled by arc length with t = 0 at x.
GeodesicPath minimizing_segment(const Grid& grid, Vec2 x, Vec2 y, double spacing = 0.05);

/// Central portion over line parameters [s_lo, s_hi] of the minimizing
/// segment between l(s_lo - margin) and l(s_hi + margin). t = 0 is where
/// the path crosses the normal of l at parameter 0.
MinimalRecord minimal_for_window(const Grid& grid, const Line& l, double s_lo, double s_hi,
                                 const MinimalOptions& options = {});

/// Record whose path covers arc-length times [t_lo, t_hi] (t_lo <= 0 <= t_hi).
MinimalRecord minimal_for_times(const Grid& grid, const Line& l, double t_lo, double t_hi,
                                const MinimalOptions& options = {});

/// Window [-R/2, R/2] of the segment between l(-R) and l(R).
/// Throws PreconditionError if R < 20.
MinimalRecord minimal_geodesic_for_line(const Grid& grid, const Line& l, double R);

/// 3 * (cache cell diagonal) * exp(max f).
double minimality_tolerance(const Grid& grid);

/// 2 * (cache cell diagonal) * exp(max f), the resolution of computed positions.
double position_tolerance(const Grid& grid);

/// Dyadic sub-segments down to arc length ~1; slack is the worst
/// curve_length(sub) - d(endpoints). Throws PreconditionError for < 3 samples.
Certificate is_minimal(const Grid& grid, const GeodesicPath& path, double tol);

/// Throws PreconditionError if the path spans less than 20.
Rotation rotation_number(const GeodesicPath& path);

/// Total least squares line, oriented along the path, based at the foot of c(0).
Line accompanying_line(const GeodesicPath& path);

/// min over s of d(x, l(s)) by Brent search near the Euclidean foot.
/// Writes the minimising parameter to foot_parameter if given.
double point_line_distance(const Grid& grid, Vec2 x, const Line& l, double* foot_parameter = nullptr);

/// sup over samples of point_line_distance, pruned by Euclidean brackets.
double line_deviation(const Grid& grid, const GeodesicPath& path, const Line& l);

/// Max deviation over the records. Throws PreconditionError when empty.
double hedlund_constant(std::span<const MinimalRecord> records);

/// Parameter on l of the Riemannian nearest point of each sample.
std::vector<double> project_to_line(const Grid& grid, const GeodesicPath& path, const Line& l);

/// Strict monotonicity after collapsing consecutive values within tol.
bool strictly_monotone(std::span<const double> values, double tol = 1e-4);

/// Sign changes of the offset of path1 relative to path2, ignoring touches
/// closer than touch_tol and samples beyond the ends of path2.
int crossing_count(const GeodesicPath& path1, const GeodesicPath& path2, double touch_tol = 1e-6);

/// Hausdorff distance over the overlap below tol.
bool same_image(const GeodesicPath& a, const GeodesicPath& b, double tol = 1e-3);

/// Integer vector k with c(0) + k in [0,1)^2.
Vec2 deck_shift_into_unit_square(Vec2 x);

struct MinimalSample {
    std::vector<PhasePoint> initial;
    std::vector<MinimalRecord> records;
};

/// Lines for sample_minimal_conditions: direction angles[i % size] through
/// a base point uniform in [0,1]^2 drawn from seed.
std::vector<Line> sample_lines(int count, std::span<const double> angles, std::uint64_t seed);

/// Deck translate so that c(0) lies in [0,1)^2.
MinimalRecord deck_normalized(MinimalRecord record);

/// Records for sample_lines(count, angles, seed), deck normalised. Records
/// failing certification are kept but flagged; only certified ones
/// contribute an initial condition.
MinimalSample sample_minimal_conditions(const Grid& grid, int count, std::span<const double> angles,
                                        std::uint64_t seed, double R = 40.0);

}  // namespace toruslab::minimal
