#include "toruslab/geometry/distance.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "toruslab/errors.hpp"
#include "toruslab/geometry/length.hpp"
#include "toruslab/minimal/shorten.hpp"

namespace toruslab::geometry {

namespace {

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 d = b - a;
    const double len2 = norm2(d);
    if (len2 == 0.0) return distance(p, a);
    const double t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
    return distance(p, a + t * d);
}

Vec2 clamp_to_square(Vec2 p) { return {std::clamp(p.x, 0.0, 1.0), std::clamp(p.y, 0.0, 1.0)}; }

}  // namespace

DistanceField::DistanceField(const Grid& grid, int res, Vec2 lo, Vec2 hi)
    : grid_(&grid), lattice_(grid.lattice(res)), res_(res) {
    i0_ = static_cast<long long>(std::floor(lo.x * res));
    j0_ = static_cast<long long>(std::floor(lo.y * res));
    const long long i1 = static_cast<long long>(std::ceil(hi.x * res));
    const long long j1 = static_cast<long long>(std::ceil(hi.y * res));
    nx_ = static_cast<int>(i1 - i0_ + 1);
    ny_ = static_cast<int>(j1 - j0_ + 1);
    const std::size_t n = static_cast<std::size_t>(nx_) * ny_;
    if (n > 200'000'000ULL) throw RegionError("distance field window too large");
    value_.assign(n, kInfinity);
    parent_.assign(n, -1);
}

Vec2 DistanceField::node(std::size_t idx) const {
    const long long i = static_cast<long long>(idx % nx_) + i0_;
    const long long j = static_cast<long long>(idx / nx_) + j0_;
    return {static_cast<double>(i) / res_, static_cast<double>(j) / res_};
}

double DistanceField::f_at(std::size_t idx) const {
    const int n = grid_->resolution();
    if (n % res_ == 0) {
        const long long mult = n / res_;
        const long long i = static_cast<long long>(idx % nx_) + i0_;
        const long long j = static_cast<long long>(idx / nx_) + j0_;
        return grid_->f_node(i * mult, j * mult);
    }
    return grid_->metric().f(node(idx));
}

void DistanceField::push_seed(std::size_t idx, double d, Vec2 source) {
    if (d < value_[idx]) {
        value_[idx] = d;
        parent_[idx] = -1;
        auto it = std::find_if(seeds_.begin(), seeds_.end(), [idx](const auto& s) { return s.first == idx; });
        if (it == seeds_.end()) {
            seeds_.emplace_back(idx, source);
            frontier_.push_back(idx);
        } else {
            it->second = source;
        }
    }
}

void DistanceField::seed_point(Vec2 p) {
    point_seeds_.push_back(p);
    const long long ci = std::llround(p.x * res_) - i0_;
    const long long cj = std::llround(p.y * res_) - j0_;
    const MetricField& m = grid_->metric();
    for (long long dj = -2; dj <= 2; ++dj) {
        for (long long di = -2; di <= 2; ++di) {
            const long long i = ci + di;
            const long long j = cj + dj;
            if (i < 0 || j < 0 || i >= nx_ || j >= ny_) continue;
            const std::size_t idx = index(static_cast<int>(i), static_cast<int>(j));
            push_seed(idx, segment_length(m, p, node(idx)), p);
        }
    }
}

void DistanceField::seed_unit_square() {
    square_seed_ = true;
    for (long long j = std::max(0LL, -j0_); j <= std::min<long long>(ny_ - 1, res_ - j0_); ++j) {
        for (long long i = std::max(0LL, -i0_); i <= std::min<long long>(nx_ - 1, res_ - i0_); ++i) {
            const std::size_t idx = index(static_cast<int>(i), static_cast<int>(j));
            value_[idx] = 0.0;
            parent_[idx] = -1;
            frontier_.push_back(idx);
        }
    }
}

void DistanceField::seed_polyline(std::span<const Vec2> polyline) {
    polyline_seed_ = true;
    const MetricField& m = grid_->metric();
    const std::vector<Vec2> dense = minimal::resample(polyline, 0.5 / res_);
    std::unordered_map<std::size_t, std::size_t> slot;
    for (const Vec2& p : dense) {
        const long long ci = std::llround(p.x * res_) - i0_;
        const long long cj = std::llround(p.y * res_) - j0_;
        for (long long dj = -1; dj <= 1; ++dj) {
            for (long long di = -1; di <= 1; ++di) {
                const long long i = ci + di;
                const long long j = cj + dj;
                if (i < 0 || j < 0 || i >= nx_ || j >= ny_) continue;
                const std::size_t idx = index(static_cast<int>(i), static_cast<int>(j));
                const double d = segment_length(m, p, node(idx));
                if (d < value_[idx]) {
                    value_[idx] = d;
                    parent_[idx] = -1;
                    auto [it, fresh] = slot.try_emplace(idx, seeds_.size());
                    if (fresh) {
                        seeds_.emplace_back(idx, p);
                        frontier_.push_back(idx);
                    } else {
                        seeds_[it->second].second = p;
                    }
                }
            }
        }
    }
}

void DistanceField::restrict_to_corridor(Vec2 a, Vec2 b, double halfwidth) {
    allowed_.assign(value_.size(), 0);
    for (std::size_t idx = 0; idx < value_.size(); ++idx) {
        allowed_[idx] = point_segment_distance(node(idx), a, b) <= halfwidth ? 1 : 0;
    }
}

bool DistanceField::closed_form() const { return grid_->metric().is_flat() && !polyline_seed_; }

void DistanceField::run(double max_value) {
    if (closed_form()) {
        for (std::size_t idx = 0; idx < value_.size(); ++idx) {
            const Vec2 x = node(idx);
            double d = kInfinity;
            for (const Vec2& p : point_seeds_) d = std::min(d, distance(x, p));
            if (square_seed_) d = std::min(d, distance(x, clamp_to_square(x)));
            value_[idx] = d;
            parent_[idx] = -1;
        }
        return;
    }

    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    for (std::size_t idx : frontier_) queue.emplace(value_[idx], idx);
    const Lattice& lat = *lattice_;
    const std::size_t nm = lat.moves.size();
    std::vector<std::uint8_t> settled(value_.size(), 0);
    const bool masked = !allowed_.empty();

    while (!queue.empty()) {
        const auto [d, idx] = queue.top();
        queue.pop();
        if (settled[idx] || d > value_[idx]) continue;
        if (d > max_value) break;
        settled[idx] = 1;
        const int i = static_cast<int>(idx % nx_);
        const int j = static_cast<int>(idx / nx_);
        const long long gi = i + i0_;
        const long long gj = j + j0_;
        const long long ri = ((gi % res_) + res_) % res_;
        const long long rj = ((gj % res_) + res_) % res_;
        const double* w = &lat.weights[(static_cast<std::size_t>(rj) * res_ + static_cast<std::size_t>(ri)) * nm];
        for (std::size_t k = 0; k < nm; ++k) {
            const int ni = i + lat.moves[k][0];
            const int nj = j + lat.moves[k][1];
            if (ni < 0 || nj < 0 || ni >= nx_ || nj >= ny_) continue;
            const std::size_t nidx = index(ni, nj);
            if (masked && !allowed_[nidx]) continue;
            const double nd = d + w[k];
            if (nd < value_[nidx]) {
                value_[nidx] = nd;
                parent_[nidx] = static_cast<std::int32_t>(idx);
                queue.emplace(nd, nidx);
            }
        }
    }
}

double DistanceField::run_to_target(Vec2 target) {
    target_ = target;
    const MetricField& m = grid_->metric();
    if (closed_form()) {
        double best = kInfinity;
        for (const Vec2& p : point_seeds_) best = std::min(best, distance(target, p));
        return best;
    }

    const long long ci = std::llround(target.x * res_) - i0_;
    const long long cj = std::llround(target.y * res_) - j0_;
    std::unordered_map<std::size_t, double> chord;
    for (long long dj = -2; dj <= 2; ++dj) {
        for (long long di = -2; di <= 2; ++di) {
            const long long i = ci + di;
            const long long j = cj + dj;
            if (i < 0 || j < 0 || i >= nx_ || j >= ny_) continue;
            const std::size_t idx = index(static_cast<int>(i), static_cast<int>(j));
            if (!allowed_.empty() && !allowed_[idx]) continue;
            chord.emplace(idx, segment_length(m, node(idx), target));
        }
    }

    // A* with the admissible, consistent estimate exp(fmin) * |node - target|.
    const double slope = std::exp(grid_->fmin_bound());
    auto estimate = [&](std::size_t idx) { return slope * distance(node(idx), target); };

    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    for (std::size_t idx : frontier_) queue.emplace(value_[idx] + estimate(idx), idx);
    const Lattice& lat = *lattice_;
    const std::size_t nm = lat.moves.size();
    std::vector<std::uint8_t> settled(value_.size(), 0);
    const bool masked = !allowed_.empty();
    double best = kInfinity;

    while (!queue.empty()) {
        const auto [key, idx] = queue.top();
        queue.pop();
        if (settled[idx]) continue;
        if (key >= best) break;
        settled[idx] = 1;
        const double d = value_[idx];
        if (auto it = chord.find(idx); it != chord.end() && d + it->second < best) {
            best = d + it->second;
            target_node_ = idx;
        }
        const int i = static_cast<int>(idx % nx_);
        const int j = static_cast<int>(idx / nx_);
        const long long gi = i + i0_;
        const long long gj = j + j0_;
        const long long ri = ((gi % res_) + res_) % res_;
        const long long rj = ((gj % res_) + res_) % res_;
        const double* w = &lat.weights[(static_cast<std::size_t>(rj) * res_ + static_cast<std::size_t>(ri)) * nm];
        for (std::size_t k = 0; k < nm; ++k) {
            const int ni = i + lat.moves[k][0];
            const int nj = j + lat.moves[k][1];
            if (ni < 0 || nj < 0 || ni >= nx_ || nj >= ny_) continue;
            const std::size_t nidx = index(ni, nj);
            if (settled[nidx] || (masked && !allowed_[nidx])) continue;
            const double nd = d + w[k];
            if (nd < value_[nidx]) {
                value_[nidx] = nd;
                parent_[nidx] = static_cast<std::int32_t>(idx);
                queue.emplace(nd + estimate(nidx), nidx);
            }
        }
    }
    return best;
}

std::vector<Vec2> DistanceField::path_to_seed(std::size_t idx) const {
    std::vector<Vec2> out;
    if (closed_form()) {
        const Vec2 x = node(idx);
        out.push_back(x);
        Vec2 src = x;
        double best = kInfinity;
        for (const Vec2& p : point_seeds_) {
            if (distance(x, p) < best) {
                best = distance(x, p);
                src = p;
            }
        }
        if (square_seed_ && distance(x, clamp_to_square(x)) < best) src = clamp_to_square(x);
        if (!(src == x)) out.push_back(src);
        return out;
    }
    std::size_t cur = idx;
    out.push_back(node(cur));
    while (parent_[cur] >= 0) {
        cur = static_cast<std::size_t>(parent_[cur]);
        out.push_back(node(cur));
    }
    auto it = std::find_if(seeds_.begin(), seeds_.end(), [cur](const auto& s) { return s.first == cur; });
    if (it != seeds_.end() && !(it->second == out.back())) out.push_back(it->second);
    return out;
}

std::vector<Vec2> DistanceField::path_from_seed_to_target() const {
    if (closed_form()) {
        Vec2 src = point_seeds_.empty() ? target_ : point_seeds_.front();
        for (const Vec2& p : point_seeds_) {
            if (distance(target_, p) < distance(target_, src)) src = p;
        }
        return {src, target_};
    }
    if (target_node_ == static_cast<std::size_t>(-1)) return {};
    std::vector<Vec2> out = path_to_seed(target_node_);
    std::reverse(out.begin(), out.end());
    if (!(out.back() == target_)) out.push_back(target_);
    return out;
}

// ---------------------------------------------------------------------------

double distance_lower_bound(const Grid& grid, Vec2 x, Vec2 y) {
    return std::exp(grid.fmin_bound()) * distance(x, y);
}

double distance_upper_bound(const Grid& grid, Vec2 x, Vec2 y) {
    return segment_length(grid.metric(), x, y);
}

namespace {

constexpr double kCorridorBase = 0.75;
constexpr double kCorridorSlope = 0.005;

int distance_resolution(const Grid& grid, double de) {
    const int base = grid.settings().graph_resolution;
    if (de < 1.0) return base * 2;
    if (de < 8.0) return base;
    return std::max(4, base / 2);
}

MinimizingPath shortened_chord(const MetricField& m, Vec2 x, Vec2 y, double straight) {
    MinimizingPath out;
    out.straight_length = straight;
    const std::vector<Vec2> chord{x, y};
    auto sh = minimal::shorten(m, minimal::resample(chord, minimal::kShortenSpacing));
    if (sh.length <= straight) {
        out.length = sh.length;
        out.polyline = std::move(sh.polyline);
    } else {
        out.length = straight;
        out.polyline = minimal::resample(chord, minimal::kShortenSpacing);
    }
    return out;
}

MinimizingPath compute_path(const Grid& grid, Vec2 x, Vec2 y) {
    const MetricField& m = grid.metric();
    const double de = distance(x, y);
    const double straight = segment_length(m, x, y);
    if (m.is_flat() || straight <= grid.convexity_radius()) return shortened_chord(m, x, y, straight);

    const double rho = std::exp(grid.fmax_bound() - grid.fmin_bound());
    const double ellipse = 0.5 * de * std::sqrt(std::max(rho * rho - 1.0, 0.0));
    const int res = distance_resolution(grid, de);
    const double h = 1.0 / res;
    double width = std::min(ellipse, kCorridorBase + kCorridorSlope * de) + 3.0 * h;

    std::vector<Vec2> route;
    double lattice_len = kInfinity;
    for (;;) {
        const Vec2 lo{std::min(x.x, y.x) - width, std::min(x.y, y.y) - width};
        const Vec2 hi{std::max(x.x, y.x) + width, std::max(x.y, y.y) + width};
        DistanceField field(grid, res, lo, hi);
        field.restrict_to_corridor(x, y, width);
        field.seed_point(x);
        lattice_len = field.run_to_target(y);
        route = field.path_from_seed_to_target();
        double reach = 0.0;
        for (const Vec2& p : route) reach = std::max(reach, point_segment_distance(p, x, y));
        const bool touches = reach > width - 2.0 * h;
        if (!touches || width >= ellipse + 3.0 * h) break;
        width = std::min(2.0 * width, ellipse + 3.0 * h);
    }

    MinimizingPath out;
    out.straight_length = straight;
    out.lattice_length = lattice_len;
    if (route.size() >= 2) {
        auto sh = minimal::shorten(m, minimal::resample(route, minimal::kShortenSpacing));
        out.length = sh.length;
        out.polyline = std::move(sh.polyline);
    } else {
        out.length = kInfinity;
    }
    if (straight < out.length + 1e-9) {
        MinimizingPath chord = shortened_chord(m, x, y, straight);
        if (chord.length < out.length) {
            out.length = chord.length;
            out.polyline = std::move(chord.polyline);
        }
    }
    return out;
}

}  // namespace

MinimizingPath minimizing_path(const Grid& grid, Vec2 x, Vec2 y) {
    grid.require_inside(x);
    grid.require_inside(y);
    if (x == y) return {0.0, 0.0, 0.0, {x, y}};
    // Canonical orientation makes d(x,y) and d(y,x) bitwise equal.
    const bool swapped = std::tie(y.x, y.y) < std::tie(x.x, x.y);
    MinimizingPath out = swapped ? compute_path(grid, y, x) : compute_path(grid, x, y);
    if (swapped) std::reverse(out.polyline.begin(), out.polyline.end());
    return out;
}

double riemannian_distance(const Grid& grid, Vec2 x, Vec2 y) {
    if (grid.metric().is_flat()) {
        grid.require_inside(x);
        grid.require_inside(y);
        return distance(x, y);
    }
    return minimizing_path(grid, x, y).length;
}

// ---------------------------------------------------------------------------

int field_resolution(double reach, std::size_t node_budget) {
    int res = 256;
    while (res > 4) {
        const double side = 2.0 * reach * res + 8.0;
        if (side * side <= static_cast<double>(node_budget)) break;
        res /= 2;
    }
    return res;
}

double sublevel_area(const DistanceField& field, double r) {
    const double h = field.spacing();
    double area = 0.0;
    for (std::size_t idx = 0; idx < field.size(); ++idx) {
        const double d = field.value(idx);
        if (!(d < kInfinity)) continue;
        const double f = field.f_at(idx);
        const double width = h * std::exp(f);
        const double frac = std::clamp(0.5 + (r - d) / width, 0.0, 1.0);
        if (frac > 0.0) area += frac * std::exp(2.0 * f) * h * h;
    }
    return area;
}

std::vector<double> ball_volumes(const Grid& grid, Vec2 x, std::span<const double> radii) {
    double rmax = 0.0;
    for (double r : radii) {
        if (!(r >= 0.0)) throw PreconditionError("ball radius must be non-negative");
        rmax = std::max(rmax, r);
    }
    std::vector<double> out(radii.size(), 0.0);
    if (rmax == 0.0) return out;

    const double reach = rmax * std::exp(-grid.fmin_bound());
    const double w = grid.halfwidth();
    if (std::abs(x.x) + reach > w || std::abs(x.y) + reach > w) {
        std::ostringstream os;
        os << "ball of radius " << rmax << " leaves the sampled region of halfwidth " << w;
        throw RegionError(os.str());
    }
    const int res = field_resolution(reach);
    const double h = 1.0 / res;
    const double margin = 3.0 * h;
    DistanceField field(grid, res, x - Vec2{reach + margin, reach + margin}, x + Vec2{reach + margin, reach + margin});
    field.seed_point(x);
    field.run(rmax + 2.0 * h * std::exp(grid.fmax()));
    for (std::size_t k = 0; k < radii.size(); ++k) out[k] = radii[k] > 0.0 ? sublevel_area(field, radii[k]) : 0.0;
    return out;
}

double ball_volume(const Grid& grid, Vec2 x, double r) {
    const double radii[1] = {r};
    return ball_volumes(grid, x, radii)[0];
}

std::vector<Vec2> c_epsilon_centres() {
    std::vector<Vec2> out;
    for (int j = 0; j < 16; ++j) {
        for (int i = 0; i < 16; ++i) out.push_back({i / 16.0, j / 16.0});
    }
    return out;
}

double c_epsilon(const Grid& grid, double eps) {
    if (!(eps > 0.0)) throw PreconditionError("c_epsilon needs eps > 0");
    double best = kInfinity;
    for (const Vec2& y : c_epsilon_centres()) best = std::min(best, ball_volume(grid, y, 0.5 * eps));
    return best;
}

double fundamental_domain_diameter(const Grid& grid) {
    if (grid.metric().is_flat()) return std::sqrt(2.0);
    constexpr int kPerSide = 16;
    std::vector<Vec2> boundary;
    for (int k = 0; k < kPerSide; ++k) {
        const double s = static_cast<double>(k) / kPerSide;
        boundary.push_back({s, 0.0});
        boundary.push_back({1.0, s});
        boundary.push_back({1.0 - s, 1.0});
        boundary.push_back({0.0, 1.0 - s});
    }
    struct Pair {
        double upper;
        std::size_t i, j;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < boundary.size(); ++i) {
        for (std::size_t j = i + 1; j < boundary.size(); ++j) {
            pairs.push_back({distance_upper_bound(grid, boundary[i], boundary[j]), i, j});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.upper > b.upper; });
    double best = 0.0;
    for (const Pair& p : pairs) {
        if (p.upper <= best) break;
        best = std::max(best, riemannian_distance(grid, boundary[p.i], boundary[p.j]));
    }
    return best;
}

}  // namespace toruslab::geometry
