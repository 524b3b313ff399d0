#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "toruslab/geometry/grid.hpp"

namespace toruslab::geometry {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Single-source (or multi-source) Dijkstra over a rectangular window of a
/// periodic lattice. Values are lengths of actual lattice polylines, hence
/// upper bounds for the Riemannian distance to the seed set.
///
/// On the flat metric, point and unit-square seeds are evaluated in closed
/// form instead.
class DistanceField {
public:
    /// Window covering [lo, hi] at lattice resolution res.
    DistanceField(const Grid& grid, int res, Vec2 lo, Vec2 hi);

    int res() const { return res_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return value_.size(); }
    double spacing() const { return 1.0 / res_; }

    Vec2 node(std::size_t idx) const;
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
    /// Cached f at the node (falls back to direct evaluation if the cache
    /// resolution is not a multiple of res).
    double f_at(std::size_t idx) const;

    void seed_point(Vec2 p);
    void seed_unit_square();
    void seed_polyline(std::span<const Vec2> polyline);

    /// Only nodes within Euclidean distance halfwidth of segment [a, b] are visited.
    void restrict_to_corridor(Vec2 a, Vec2 b, double halfwidth);

    /// Settles every reachable node with value <= max_value.
    void run(double max_value = kInfinity);

    /// Stops as soon as the best lattice-plus-chord route to target is final.
    /// Returns that route's length.
    double run_to_target(Vec2 target);

    double value(std::size_t idx) const { return value_[idx]; }
    std::span<const double> values() const { return value_; }

    /// Lattice route from node idx back to the seed set, ending at the seed
    /// source point.
    std::vector<Vec2> path_to_seed(std::size_t idx) const;
    /// Route x -> target after run_to_target, starting at the seed point.
    std::vector<Vec2> path_from_seed_to_target() const;

private:
    void push_seed(std::size_t idx, double d, Vec2 source);
    bool closed_form() const;

    const Grid* grid_;
    std::shared_ptr<const Lattice> lattice_;
    int res_;
    long long i0_, j0_;
    int nx_, ny_;
    std::vector<double> value_;
    std::vector<std::int32_t> parent_;
    std::vector<std::uint8_t> allowed_;
    std::vector<std::pair<std::size_t, Vec2>> seeds_;
    std::vector<Vec2> point_seeds_;
    std::vector<std::size_t> frontier_;
    bool square_seed_ = false;
    bool polyline_seed_ = false;

    Vec2 target_;
    std::size_t target_node_ = static_cast<std::size_t>(-1);
};

/// A polyline realising (up to discretisation) the distance between x and y.
struct MinimizingPath {
    double length = 0.0;
    double lattice_length = kInfinity;  // Dijkstra value, infinite if skipped
    double straight_length = 0.0;
    std::vector<Vec2> polyline;
};

/// Lattice Dijkstra in a corridor around the chord, refined by shortening.
/// Short pairs inside the convexity radius skip the lattice.
/// Throws RegionError if an endpoint lies outside the sampled region.
MinimizingPath minimizing_path(const Grid& grid, Vec2 x, Vec2 y);

double riemannian_distance(const Grid& grid, Vec2 x, Vec2 y);

/// Cheap brackets for d(x, y).
double distance_lower_bound(const Grid& grid, Vec2 x, Vec2 y);
double distance_upper_bound(const Grid& grid, Vec2 x, Vec2 y);

/// Riemannian area of B(x, r). Throws PreconditionError for r < 0 and
/// RegionError if the ball leaves the sampled region.
double ball_volume(const Grid& grid, Vec2 x, double r);
/// Areas for several radii from one distance field.
std::vector<double> ball_volumes(const Grid& grid, Vec2 x, std::span<const double> radii);

/// Area of the nodes of a field with value <= r (smoothed at the boundary).
double sublevel_area(const DistanceField& field, double r);

/// Finest power-of-two lattice resolution (at most 256) for a field of
/// Euclidean halfwidth reach that stays under the node budget.
int field_resolution(double reach, std::size_t node_budget = 2'000'000);

/// Centres used for the minimum in c_epsilon (16 x 16 grid of [0,1)^2).
std::vector<Vec2> c_epsilon_centres();

/// min over the centres of ball_volume(y, eps/2). Throws PreconditionError
/// for eps <= 0.
double c_epsilon(const Grid& grid, double eps);

/// Riemannian diameter of the closed unit square (exactly sqrt 2 when flat).
double fundamental_domain_diameter(const Grid& grid);

}  // namespace toruslab::geometry
