#pragma once

#include <array>
#include <vector>

#include "toruslab/entropy/bowen.hpp"
#include "toruslab/minimal/minimal.hpp"

namespace toruslab::entropy {

inline constexpr double kDefaultTMax = 60.0;

/// Minimal geodesic near the tube centre, tagged with how it was generated.
struct TubeCandidate {
    GeodesicPath path;
    minimal::Rotation rotation;
    minimal::Line line;  // accompanying line
    double deviation = 0.0;
    double offset = 0.0;  // along the normal of the centre line, in units of mu
    double angle = 0.0;   // direction offset in units of the superset angle
    double shift = 0.0;   // time shift: path(t) = c(t + shift)
    bool certified = false;

    bool same_image_as_centre() const { return offset == 0.0 && angle == 0.0; }
};

/// Superset angle atan(2 mu / T_max).
double tube_angle(double mu, double T_max);

/// Candidates for S_mu(v): offsets mu * {0, +-1/16, +-1/4, +-1/2}, angles
/// psi * {0, +-1/2} and time shifts {0, +-mu/8, +-mu/2}, all built as
/// minimal geodesics covering |t| <= T_max + mu/2 + 1. Candidate 0 is the
/// centre. Uncertified geodesics are skipped.
std::vector<TubeCandidate> tube_population(const Grid& grid, const minimal::Line& centre, double mu,
                                           double T_max = kDefaultTMax, int jobs = 1);

struct TubeMember {
    std::size_t candidate = 0;
    double sup = 0.0;        // sampled sup over |t| <= T_max of the chord length from c_v(t) to c_w(t)
    double angle_gap = 0.0;  // between accompanying lines
    minimal::Rotation rotation;
};

struct TubeReport {
    PhasePoint centre;
    double mu = 0.0;
    double T_max = 0.0;
    double psi = 0.0;             // superset angle
    double angle_resolution = 0.0;  // slope gap undetectable within T_max
    std::size_t candidates = 0;
    std::vector<TubeMember> members;
    bool rotation_consistent = false;  // every angle_gap <= angle_resolution
};

/// Keeps candidates whose sampled sup distance to v over [-T_max, T_max] is at most mu.
TubeReport tube_members(const Grid& grid, const TubeCandidate& v, std::span<const TubeCandidate> candidates,
                        double mu, double T_max = kDefaultTMax, int jobs = 1);

struct Triangle {
    std::array<Vec2, 3> vertices;  // c_w1(t0), c_w2(t0 - delta/2), c_w2(t0 + delta/2)
    std::array<double, 3> sides;   // opposite vertex 2, 0, 1: |v0 v1|, |v1 v2|, |v2 v0|
    double area = 0.0;             // Riemannian area enclosed by the three minimal sides

    /// delta/2 < l <= 2 mu + delta/2 for every side.
    bool sides_within(double mu, double delta) const;
};

/// Throws PreconditionError if d(c_w1(t0), c_w2(t0)) < delta or a path does
/// not cover the required times.
Triangle min_delta_triangle(const Grid& grid, const GeodesicPath& w1, const GeodesicPath& w2, double t0,
                            double delta);

/// Riemannian area of a closed polygon (signed fan quadrature, absolute value).
double polygon_area(const geometry::MetricField& m, std::span<const Vec2> polygon);

struct TriangleFamily {
    double delta = 0.0;
    std::vector<Triangle> triangles;
    double C2 = 0.0;  // smallest area
    std::size_t sides_ok = 0;
};

/// Triangles between non-crossing pairs of distinct images, closest pairs
/// first, at most max_count. Throws PreconditionError if delta <= 0.
TriangleFamily triangle_family(const Grid& grid, std::span<const TubeCandidate> paths, double t0, double delta,
                               double mu, std::size_t max_count, int jobs = 1);

/// Riemannian area of the (mu + 2 delta)-neighbourhood of c_v([0, T+1]).
double neighborhood_volume(const Grid& grid, const GeodesicPath& v, double T, double mu, double delta);

struct NeighborhoodFit {
    std::vector<double> T;
    std::vector<double> volume;
    std::vector<double> ratio;  // volume / (mu (T + 1 + 2 mu + 4 delta))
    double C1 = 0.0;            // max ratio
    double doubling_spread = 0.0;  // worst |ratio(2T)/ratio(T) - 1|
};

NeighborhoodFit fit_C1(const Grid& grid, const GeodesicPath& v, std::span<const double> T_list, double mu,
                       double delta);

/// (C1 beta (T + 1 + 2 beta + 4 delta) / C2) (2 beta / delta).
double tube_bound(double C1, double C2, double beta, double T, double delta);

struct TubeEntropy {
    std::vector<TubeCandidate> population;
    TubeReport tube;
    EntropyReport entropy;
    NeighborhoodFit neighborhood;
    TriangleFamily triangles;
    double delta = 0.0;
    double beta = 0.0;
    std::vector<double> bound;  // per T
    std::size_t same_image = 0;  // shifts of the centre in the largest-T separated set
    bool population_ok = false;  // at least 10 members
    bool bound_ok = false;
};

struct TubeOptions {
    double T_max = kDefaultTMax;
    double a = 0.0;  // fundamental domain diameter, measured when 0
    std::size_t triangles = 30;
};

/// Throws PreconditionError unless delta <= min(mu, a) / 10 and T_list has at least 4 values.
TubeEntropy tube_entropy(const Grid& grid, const minimal::Line& centre, double mu, double delta,
                         std::span<const double> T_list, const TubeOptions& options = {}, int jobs = 1);

}  // namespace toruslab::entropy
