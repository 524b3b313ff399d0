#include "toruslab/geometry/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include "toruslab/errors.hpp"
#include "toruslab/geometry/length.hpp"

namespace toruslab::geometry {

struct Grid::Cache {
    int n = 0;
    std::vector<double> f;
    std::vector<Vec2> grad;

    std::mutex mutex;
    std::map<int, std::shared_ptr<const Lattice>> lattices;
};

std::vector<std::array<int, 2>> lattice_moves(int radius) {
    std::vector<std::array<int, 2>> moves;
    for (int b = -radius; b <= radius; ++b) {
        for (int a = -radius; a <= radius; ++a) {
            if (a == 0 && b == 0) continue;
            if (std::gcd(std::abs(a), std::abs(b)) != 1) continue;
            moves.push_back({a, b});
        }
    }
    return moves;
}

Grid::Grid(MetricField metric, GridSettings settings)
    : metric_(std::move(metric)), settings_(settings), cache_(std::make_shared<Cache>()) {
    if (settings_.resolution < 64) throw ConfigError("grid resolution must be at least 64");
    if (!(settings_.halfwidth > 0.0)) throw ConfigError("grid halfwidth must be positive");
    if (settings_.graph_resolution < 1) throw ConfigError("graph_resolution must be positive");
    if (settings_.stencil_radius < 1) throw ConfigError("stencil_radius must be positive");

    const int n = settings_.resolution;
    cache_->n = n;
    cache_->f.resize(static_cast<std::size_t>(n) * n);
    cache_->grad.resize(static_cast<std::size_t>(n) * n);
    fmin_ = std::numeric_limits<double>::infinity();
    fmax_ = -fmin_;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const Vec2 x{static_cast<double>(i) / n, static_cast<double>(j) / n};
            const double f = metric_.f(x);
            cache_->f[static_cast<std::size_t>(j) * n + i] = f;
            cache_->grad[static_cast<std::size_t>(j) * n + i] = metric_.grad_f(x);
            fmin_ = std::min(fmin_, f);
            fmax_ = std::max(fmax_, f);
        }
    }
    A_ = std::exp(std::max(std::abs(fmin_), std::abs(fmax_)));
    double grad_bound = 0.0;
    for (const auto& md : metric_.modes()) {
        grad_bound += 2.0 * std::numbers::pi * std::hypot(md.k1, md.k2) * (std::abs(md.c) + std::abs(md.s));
    }
    slack_ = 0.5 * grad_bound * cell_diagonal();

    // K = -exp(-2f) * Laplacian(f)
    kmax_ = std::exp(-2.0 * fmin_bound()) * metric_.laplacian_bound();
    r_safe_ = kmax_ > 0.0 ? 0.5 * std::numbers::pi / std::sqrt(kmax_) : std::numeric_limits<double>::infinity();
}

double Grid::f_node(long long i, long long j) const {
    const long long n = cache_->n;
    i = ((i % n) + n) % n;
    j = ((j % n) + n) % n;
    return cache_->f[static_cast<std::size_t>(j * n + i)];
}

Vec2 Grid::grad_node(long long i, long long j) const {
    const long long n = cache_->n;
    i = ((i % n) + n) % n;
    j = ((j % n) + n) % n;
    return cache_->grad[static_cast<std::size_t>(j * n + i)];
}

double Grid::cell_diagonal() const { return std::sqrt(2.0) / settings_.resolution; }

bool Grid::contains(Vec2 x) const {
    const double w = settings_.halfwidth;
    return std::abs(x.x) <= w && std::abs(x.y) <= w;
}

void Grid::require_inside(Vec2 x) const {
    if (!contains(x)) {
        std::ostringstream os;
        os << "point (" << x.x << ", " << x.y << ") outside sampled region of halfwidth " << settings_.halfwidth;
        throw RegionError(os.str());
    }
}

std::shared_ptr<const Lattice> Grid::lattice(int res) const {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->lattices.find(res);
    if (it != cache_->lattices.end()) return it->second;

    auto lat = std::make_shared<Lattice>();
    lat->res = res;
    lat->moves = lattice_moves(settings_.stencil_radius);
    const std::size_t k = lat->moves.size();
    lat->weights.resize(static_cast<std::size_t>(res) * res * k);
    const double h = 1.0 / res;
    for (int j = 0; j < res; ++j) {
        for (int i = 0; i < res; ++i) {
            const Vec2 p{i * h, j * h};
            for (std::size_t m = 0; m < k; ++m) {
                const Vec2 q{(i + lat->moves[m][0]) * h, (j + lat->moves[m][1]) * h};
                lat->weights[(static_cast<std::size_t>(j) * res + i) * k + m] = segment_length(metric_, p, q);
            }
        }
    }
    cache_->lattices.emplace(res, lat);
    return lat;
}

}  // namespace toruslab::geometry
