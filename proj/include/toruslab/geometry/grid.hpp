#pragma once

#include <array>
#include <memory>
#include <vector>

#include "toruslab/geometry/metric.hpp"

namespace toruslab::geometry {

struct GridSettings {
    int resolution = 256;      // cache nodes per unit cell
    double halfwidth = 40.0;   // sampled region is [-halfwidth, halfwidth]^2
    int graph_resolution = 16; // default lattice resolution for Dijkstra
    int stencil_radius = 6;    // max(|a|,|b|) of lattice moves

    friend bool operator==(const GridSettings&, const GridSettings&) = default;
};

/// Periodic Dijkstra lattice: nodes at (i/res, j/res), moves (a,b) with
/// gcd(|a|,|b|) = 1 and max(|a|,|b|) <= radius. Edge weights are exact
/// Riemannian lengths of the straight moves and are indexed by the
/// residue of the start node, so one table serves the whole plane.
struct Lattice {
    int res = 0;
    std::vector<std::array<int, 2>> moves;
    std::vector<double> weights;  // [(j*res + i) * moves.size() + k]

    double weight(long long gi, long long gj, std::size_t k) const {
        const long long i = ((gi % res) + res) % res;
        const long long j = ((gj % res) + res) % res;
        return weights[(static_cast<std::size_t>(j) * res + static_cast<std::size_t>(i)) * moves.size() + k];
    }
};

std::vector<std::array<int, 2>> lattice_moves(int radius);

/// Read-only geometric cache for one metric. Copies share the cache.
class Grid {
public:
    explicit Grid(MetricField metric, GridSettings settings = {});

    const MetricField& metric() const { return metric_; }
    const GridSettings& settings() const { return settings_; }
    int resolution() const { return settings_.resolution; }
    double halfwidth() const { return settings_.halfwidth; }

    /// Cached f at node (i/n, j/n), indices taken modulo n.
    double f_node(long long i, long long j) const;
    Vec2 grad_node(long long i, long long j) const;

    double fmin() const { return fmin_; }
    double fmax() const { return fmax_; }
    /// Rigorous bounds: sampled extrema widened by the gradient bound times
    /// half a cell diagonal.
    double fmin_bound() const { return fmin_ - slack_; }
    double fmax_bound() const { return fmax_ + slack_; }
    /// exp(max |f|) over the cache nodes.
    double equivalence_constant() const { return A_; }
    /// Euclidean diagonal of one cache cell.
    double cell_diagonal() const;

    /// Upper bound on |K| from the Fourier coefficients.
    double curvature_bound() const { return kmax_; }
    /// Distance below which the minimiser between two points is unique
    /// and reachable from the straight chord.
    double convexity_radius() const { return r_safe_; }

    bool contains(Vec2 x) const;
    void require_inside(Vec2 x) const;

    /// Lattice at the given resolution, built on first use (thread safe).
    std::shared_ptr<const Lattice> lattice(int res) const;

private:
    struct Cache;

    MetricField metric_;
    GridSettings settings_;
    std::shared_ptr<Cache> cache_;
    double fmin_ = 0.0;
    double fmax_ = 0.0;
    double slack_ = 0.0;
    double A_ = 1.0;
    double kmax_ = 0.0;
    double r_safe_ = 0.0;
};

}  // namespace toruslab::geometry
