#pragma once

#include <string>
#include <vector>

#include "toruslab/entropy/bowen.hpp"
#include "toruslab/minimal/minimal.hpp"

namespace toruslab::entropy {

struct BetaConstants {
    double beta = 0.0;
    double B = 0.0;
    double H = 0.0;
};

/// B = A^2 (4D + a + 2 eps) + 2D, H = 2 (B + 2D), beta = 2D + H.
/// Throws PreconditionError for negative inputs or A < 1.
BetaConstants beta_constant(double D, double A, double a, double eps);

/// Greedy maximal eps-separated subset (static distance) of a 65 x 65
/// lattice on the closed unit square, scanned row by row.
std::vector<Vec2> build_F_eps(const Grid& grid, double eps);

/// Riemannian distance from z to the closed unit square.
double distance_to_square(const Grid& grid, Vec2 z);

/// Greedy maximal eps-separated subset of lattice points (spacing about
/// eps/2) whose distance to the unit square lies in [r - a, r].
struct Shell {
    double r = 0.0;
    double eps = 0.0;
    double a = 0.0;
    std::vector<Vec2> points;
    std::vector<double> distances;  // certified d(z, square) per point
    std::size_t candidates = 0;
    std::size_t rejected = 0;  // kept by the lattice values, failed certification
    int resolution = 0;
};

/// Throws PreconditionError unless r > 2a and RegionError when the shell
/// leaves the sampled region.
Shell build_F_r_eps(const Grid& grid, double r, double eps, double a, int jobs = 1);

/// Indices into F and the shell; the member itself is built on demand.
struct SpanningConstruction {
    double r = 0.0;
    double eps = 0.0;
    double a = 0.0;
    double A = 1.0;
    double D = 0.0;
    BetaConstants beta;
    std::vector<Vec2> F;
    Shell shell;

    std::size_t count() const { return F.size() * shell.points.size(); }
};

SpanningConstruction build_P_r(const Grid& grid, double r, double eps, double a, double A, double D,
                               int jobs = 1);

struct PairMember {
    std::size_t y = 0;
    std::size_t z = 0;
    minimal::MinimalRecord record;
    bool dropped = false;
    std::string note;
};

/// v_yz: minimal geodesic along the line through F[y] and shell z covering
/// times [-1, r + 1], deck translated so that c(0) lies in the square.
/// Dropped when the segment fails the minimality certificate.
PairMember construct_member(const Grid& grid, const SpanningConstruction& con, std::size_t y, std::size_t z);

/// Witness: certified minimal path covering [0, r + 1] with c(0) in the square.
std::vector<minimal::MinimalRecord> spanning_witnesses(const Grid& grid, double r, int count, std::uint64_t seed,
                                                       int jobs = 1);

struct WitnessCheck {
    std::size_t y = 0;
    std::size_t z = 0;
    double dy = 0.0;  // d(c_w(0), F[y])
    double dz = 0.0;  // d(c_w(r), shell z)
    double dbar = 0.0;
    double ratio = 0.0;
    bool matched = false;   // some non-dropped pair within eps at both ends
    int alternatives = 0;   // pairs tried beyond the nearest one
};

struct SpanningVerification {
    double beta = 0.0;
    std::vector<WitnessCheck> checks;
    std::vector<PairMember> dropped;
    double worst_ratio = 0.0;
    std::size_t unmatched = 0;

    bool pass() const { return unmatched == 0 && worst_ratio <= 1.0; }
};

SpanningVerification verify_spanning(const Grid& grid, const SpanningConstruction& con,
                                     std::span<const minimal::MinimalRecord> witnesses, int jobs = 1);

struct SpanningRow {
    double r = 0.0;
    std::size_t F = 0;
    std::size_t shell = 0;
    std::size_t P = 0;
    std::size_t shell_rejected = 0;
    double volume_min = 0.0;  // ball_volume(x, r + a + eps/2) over x in F
    double volume_max = 0.0;
    bool ball_ok = false;      // #shell * C_eps <= volume for every x in F
    double log_P_rate = 0.0;   // (1/r) log #P_r
    double volume_rate = 0.0;  // (1/r) log (volume_max / C_eps)
};

struct SpanningReport {
    double eps = 0.0;
    double a = 0.0;
    double A = 1.0;
    double D = 0.0;
    double c_eps = 0.0;
    BetaConstants beta;
    std::vector<SpanningRow> rows;
    double slope_linear = 0.0;  // of log #P_r against r, tail half
    bool ball_ok = false;
    bool volume_decreasing = false;
};

/// Throws PreconditionError unless r_list is increasing with at least 4 values.
SpanningReport spanning_entropy_series(const Grid& grid, double eps, std::span<const double> r_list, double a,
                                       double A, double D, int jobs = 1);

}  // namespace toruslab::entropy
