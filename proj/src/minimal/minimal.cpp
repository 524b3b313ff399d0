#include "toruslab/minimal/minimal.hpp"

#include <algorithm>
#include <numeric>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <unordered_map>

#include "toruslab/errors.hpp"
#include "toruslab/geometry/length.hpp"

namespace toruslab::minimal {

using flow::PathSample;
using geometry::riemannian_distance;

Line Line::through(Vec2 a, Vec2 b) {
    if (a == b) throw PreconditionError("line through coincident points");
    return {a, (b - a) / distance(a, b)};
}

Line Line::from_angle(Vec2 base, double angle) { return {base, unit(angle)}; }

namespace {

std::vector<double> cumulative_arc(const geometry::MetricField& m, std::span<const Vec2> poly) {
    std::vector<double> cum(poly.size(), 0.0);
    for (std::size_t i = 1; i < poly.size(); ++i) cum[i] = cum[i - 1] + geometry::segment_length(m, poly[i - 1], poly[i]);
    return cum;
}

// Arc length at the first point where the polyline reaches line parameter s.
double arc_at_parameter(std::span<const Vec2> poly, std::span<const double> cum, const Line& l, double s) {
    if (l.parameter(poly.front()) >= s) return 0.0;
    for (std::size_t i = 1; i < poly.size(); ++i) {
        const double b = l.parameter(poly[i]);
        if (b >= s) {
            const double a = l.parameter(poly[i - 1]);
            const double u = b > a ? (s - a) / (b - a) : 1.0;
            return cum[i - 1] + u * (cum[i] - cum[i - 1]);
        }
    }
    return cum.back();
}

// Central part of the minimising segment between l(s_lo - margin) and
// l(s_hi + margin), with t = 0 where it reaches parameter 0.
GeodesicPath central_portion(const Grid& grid, const Line& l, double s_lo, double s_hi, double margin,
                             double spacing) {
    const Vec2 p = l.point(s_lo - margin);
    const Vec2 q = l.point(s_hi + margin);
    const auto mp = geometry::minimizing_path(grid, p, q);
    const std::vector<Vec2>& poly = mp.polyline;
    const auto cum = cumulative_arc(grid.metric(), poly);
    const double origin = arc_at_parameter(poly, cum, l, 0.0);
    const GeodesicPath path = flow::arc_length_path(grid.metric(), poly, origin, spacing);
    const double ta = arc_at_parameter(poly, cum, l, s_lo) - origin;
    const double tb = arc_at_parameter(poly, cum, l, s_hi) - origin;
    return path.window(ta, tb);
}

double sup_distance(const GeodesicPath& a, const GeodesicPath& b) {
    double sup = 0.0;
    const double t0 = std::max(a.t_begin(), b.t_begin());
    const double t1 = std::min(a.t_end(), b.t_end());
    for (const auto& s : a.samples()) {
        if (s.t < t0 || s.t > t1) continue;
        sup = std::max(sup, distance(s.x, b.position(s.t)));
    }
    return sup;
}

Line principal_line(std::span<const PathSample> samples, Vec2 anchor) {
    Vec2 mean{0.0, 0.0};
    for (const auto& s : samples) mean += s.x;
    mean = (1.0 / static_cast<double>(samples.size())) * mean;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& s : samples) {
        const Vec2 d = s.x - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    Vec2 dir = unit(angle);
    if (dot(dir, samples.back().x - samples.front().x) < 0.0) dir = -dir;
    const Line l{mean, dir};
    return {l.foot(anchor), dir};
}

Rotation rotation_of(const GeodesicPath& path, bool detect) {
    const Vec2 d = path[path.size() - 1].x - path[0].x;
    Rotation r;
    if (std::abs(d.x) < 1e-6 * std::abs(d.y)) {
        r.alpha = std::numeric_limits<double>::infinity();
        return r;
    }
    r.alpha = d.y / d.x;
    if (!detect) return r;
    const double span = path.t_end() - path.t_begin();
    for (int q = 1; q <= kMaxDenominator; ++q) {
        const double p = std::round(r.alpha * q);
        if (std::abs(r.alpha - p / q) < 0.5 / (q * span)) {
            r.rational = true;
            r.p = static_cast<int>(p);
            r.q = q;
            break;
        }
    }
    return r;
}

MinimalRecord finish_record(const Grid& grid, GeodesicPath path, const Line& l, const MinimalOptions& options) {
    if (path.size() < 3) throw InstabilityError("minimal geodesic window has fewer than 3 samples");
    MinimalRecord rec;
    rec.path = std::move(path);
    rec.generating_line = l;
    rec.rotation = rotation_of(rec.path, rec.path.t_end() - rec.path.t_begin() >= kMinRotationSpan);
    rec.line = principal_line(rec.path.samples(), rec.path.position(0.0));
    rec.deviation = line_deviation(grid, rec.path, rec.line);
    if (options.certify) {
        const Certificate c = is_minimal(grid, rec.path, minimality_tolerance(grid));
        rec.certified = c.minimal;
        rec.minimality_slack = c.slack;
    }
    return rec;
}

// Buckets of polyline segments for nearest-point queries.
class SegmentIndex {
public:
    SegmentIndex(std::span<const PathSample> samples, double cell) : samples_(samples), cell_(cell) {
        for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
            const Vec2 a = samples[i].x;
            const Vec2 b = samples[i + 1].x;
            const long long x0 = key(std::min(a.x, b.x)), x1 = key(std::max(a.x, b.x));
            const long long y0 = key(std::min(a.y, b.y)), y1 = key(std::max(a.y, b.y));
            for (long long cy = y0; cy <= y1; ++cy) {
                for (long long cx = x0; cx <= x1; ++cx) buckets_[pack(cx, cy)].push_back(i);
            }
        }
    }

    struct Hit {
        double dist = geometry::kInfinity;
        std::size_t seg = 0;
        double u = 0.0;
    };

    // Nearest point among segments within Euclidean distance radius of p.
    Hit nearest(Vec2 p, double radius) const {
        Hit best;
        const long long cx = key(p.x), cy = key(p.y);
        const long long rings = static_cast<long long>(std::ceil(radius / cell_));
        for (long long ring = 0; ring <= rings; ++ring) {
            if (best.dist < (ring - 1) * cell_) break;
            for (long long y = cy - ring; y <= cy + ring; ++y) {
                for (long long x = cx - ring; x <= cx + ring; ++x) {
                    if (std::max(std::abs(x - cx), std::abs(y - cy)) != ring) continue;
                    auto it = buckets_.find(pack(x, y));
                    if (it == buckets_.end()) continue;
                    for (std::size_t i : it->second) consider(p, i, best);
                }
            }
        }
        return best.dist <= radius ? best : Hit{};
    }

    Hit nearest_brute(Vec2 p) const {
        Hit best;
        for (std::size_t i = 0; i + 1 < samples_.size(); ++i) consider(p, i, best);
        return best;
    }

private:
    long long key(double v) const { return static_cast<long long>(std::floor(v / cell_)); }
    static std::uint64_t pack(long long x, long long y) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) | static_cast<std::uint32_t>(y);
    }

    void consider(Vec2 p, std::size_t i, Hit& best) const {
        const Vec2 a = samples_[i].x;
        const Vec2 d = samples_[i + 1].x - a;
        const double len2 = norm2(d);
        const double u = len2 > 0.0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
        const double dist = distance(p, a + u * d);
        if (dist < best.dist) best = {dist, i, u};
    }

    std::span<const PathSample> samples_;
    double cell_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

struct Overlap {
    Line line;
    double smin, smax;
    double band;
};

Overlap overlap_frame(const GeodesicPath& path) {
    Overlap o{principal_line(path.samples(), path[0].x), geometry::kInfinity, -geometry::kInfinity, 0.0};
    for (const auto& s : path.samples()) {
        const double t = o.line.parameter(s.x);
        o.smin = std::min(o.smin, t);
        o.smax = std::max(o.smax, t);
        o.band = std::max(o.band, o.line.euclidean_distance(s.x));
    }
    return o;
}

}  // namespace

GeodesicPath minimizing_segment(const Grid& grid, Vec2 x, Vec2 y, double spacing) {
    if (x == y) throw PreconditionError("minimizing_segment needs distinct endpoints");
    const auto mp = geometry::minimizing_path(grid, x, y);
    return flow::arc_length_path(grid.metric(), mp.polyline, 0.0, spacing);
}

MinimalRecord minimal_for_window(const Grid& grid, const Line& l, double s_lo, double s_hi,
                                 const MinimalOptions& options) {
    if (!(s_lo < s_hi)) throw PreconditionError("empty parameter window");
    GeodesicPath path = central_portion(grid, l, s_lo, s_hi, options.margin, options.spacing);
    double stability = 0.0;
    if (options.check_stability) {
        const GeodesicPath wide = central_portion(grid, l, s_lo, s_hi, 2.0 * options.margin + (s_hi - s_lo) / 2.0,
                                                  options.spacing);
        stability = sup_distance(path, wide);
    }
    MinimalRecord rec = finish_record(grid, std::move(path), l, options);
    rec.stability = stability;
    rec.stable = stability < options.stability_tolerance;
    return rec;
}

MinimalRecord minimal_for_times(const Grid& grid, const Line& l, double t_lo, double t_hi,
                                const MinimalOptions& options) {
    if (!(t_lo <= 0.0 && 0.0 <= t_hi && t_lo < t_hi)) throw PreconditionError("time window must contain 0");
    // Parameter speed along l is at most exp(-min f).
    const double speed = std::exp(-grid.fmin_bound());
    const double s_lo = t_lo * speed - 1.0;
    const double s_hi = t_hi * speed + 1.0;
    GeodesicPath path = central_portion(grid, l, s_lo, s_hi, options.margin, options.spacing);
    double stability = 0.0;
    if (options.check_stability) {
        const GeodesicPath wide = central_portion(grid, l, s_lo, s_hi, 2.0 * options.margin + (s_hi - s_lo) / 2.0,
                                                  options.spacing);
        stability = sup_distance(path, wide);
    }
    if (!path.covers(t_lo, t_hi)) throw InstabilityError("minimal geodesic does not cover the requested times");
    MinimalRecord out = finish_record(grid, path.window(t_lo, t_hi), l, options);
    out.stability = stability;
    out.stable = stability < options.stability_tolerance;
    return out;
}

MinimalRecord minimal_geodesic_for_line(const Grid& grid, const Line& l, double R) {
    if (R < 20.0) throw PreconditionError("minimal_geodesic_for_line needs R >= 20");
    MinimalOptions options;
    options.margin = R / 2.0;
    return minimal_for_window(grid, l, -R / 2.0, R / 2.0, options);
}

double minimality_tolerance(const Grid& grid) { return 3.0 * grid.cell_diagonal() * std::exp(grid.fmax()); }

double position_tolerance(const Grid& grid) { return 2.0 * grid.cell_diagonal() * std::exp(grid.fmax()); }

Certificate is_minimal(const Grid& grid, const GeodesicPath& path, double tol) {
    if (path.size() < 3) throw PreconditionError("is_minimal needs at least 3 samples");
    const auto pts = path.points();
    const auto cum = cumulative_arc(grid.metric(), pts);
    const std::size_t last = pts.size() - 1;
    const double total = cum.back();
    double slack = -geometry::kInfinity;
    for (std::size_t pieces = 1;; pieces *= 2) {
        for (std::size_t k = 0; k < pieces; ++k) {
            const std::size_t i0 = k * last / pieces;
            const std::size_t i1 = (k + 1) * last / pieces;
            if (i1 <= i0) continue;
            slack = std::max(slack, cum[i1] - cum[i0] - riemannian_distance(grid, pts[i0], pts[i1]));
        }
        if (total / static_cast<double>(pieces) < 2.0 || last / pieces < 2) break;
    }
    return {slack <= tol, std::max(slack, 0.0)};
}

Rotation rotation_number(const GeodesicPath& path) {
    if (path.size() < 2 || path.t_end() - path.t_begin() < kMinRotationSpan) {
        throw PreconditionError("rotation_number needs a parameter span of at least 20");
    }
    return rotation_of(path, true);
}

Line accompanying_line(const GeodesicPath& path) {
    if (path.size() < 2 || path.t_end() - path.t_begin() < kMinRotationSpan) {
        throw PreconditionError("accompanying_line needs a parameter span of at least 20");
    }
    return principal_line(path.samples(), path.position(0.0));
}

double point_line_distance(const Grid& grid, Vec2 x, const Line& l, double* foot_parameter) {
    const double s0 = l.parameter(x);
    const double e = l.euclidean_distance(x);
    if (foot_parameter) *foot_parameter = s0;
    if (e == 0.0) return 0.0;
    if (grid.metric().is_flat()) return e;
    // The nearest point lies within exp(max f - min f) * e of x.
    const double rho = std::exp(grid.fmax_bound() - grid.fmin_bound());
    const double reach = e * std::sqrt(rho * rho - 1.0) + 1e-9;
    auto objective = [&](double u) { return riemannian_distance(grid, x, l.point(s0 + u)); };
    std::uintmax_t iterations = 60;
    const auto [u, d] = boost::math::tools::brent_find_minima(objective, -reach, reach, 24, iterations);
    const double at_foot = objective(0.0);
    if (at_foot <= d) return at_foot;
    if (foot_parameter) *foot_parameter = s0 + u;
    return d;
}

double line_deviation(const Grid& grid, const GeodesicPath& path, const Line& l) {
    const auto samples = path.samples();
    if (grid.metric().is_flat()) {
        double best = 0.0;
        for (const auto& s : samples) best = std::max(best, l.euclidean_distance(s.x));
        return best;
    }
    const double lo = std::exp(grid.fmin_bound());
    const double hi = std::exp(grid.fmax_bound());
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> upper(samples.size());
    double best = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double e = l.euclidean_distance(samples[i].x);
        upper[i] = hi * e;
        best = std::max(best, lo * e);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return upper[a] > upper[b]; });
    // Distance to l is 1-Lipschitz along a unit speed path.
    std::vector<double> lip(samples.size(), geometry::kInfinity);
    for (std::size_t i : order) {
        if (upper[i] <= best) break;
        if (lip[i] <= best) continue;
        const double d = point_line_distance(grid, samples[i].x, l);
        best = std::max(best, d);
        for (std::size_t k = 0; k < samples.size(); ++k) {
            lip[k] = std::min(lip[k], d + std::abs(samples[k].t - samples[i].t));
        }
    }
    return best;
}

double hedlund_constant(std::span<const MinimalRecord> records) {
    if (records.empty()) throw PreconditionError("hedlund_constant needs a non-empty sample");
    double d = 0.0;
    for (const auto& r : records) d = std::max(d, r.deviation);
    return d;
}

std::vector<double> project_to_line(const Grid& grid, const GeodesicPath& path, const Line& l) {
    std::vector<double> out;
    out.reserve(path.size());
    for (const auto& s : path.samples()) {
        double p = 0.0;
        point_line_distance(grid, s.x, l, &p);
        out.push_back(p);
    }
    return out;
}

bool strictly_monotone(std::span<const double> values, double tol) {
    std::vector<double> v;
    for (double x : values) {
        if (v.empty() || std::abs(x - v.back()) > tol) v.push_back(x);
    }
    if (v.size() < 2) return true;
    const bool up = v[1] > v[0];
    for (std::size_t i = 1; i < v.size(); ++i) {
        if ((v[i] > v[i - 1]) != up) return false;
    }
    return true;
}

int crossing_count(const GeodesicPath& path1, const GeodesicPath& path2, double touch_tol) {
    if (path1.size() < 2 || path2.size() < 2) return 0;
    const Overlap frame = overlap_frame(path2);
    const double band = frame.band + 0.5;
    const SegmentIndex index(path2.samples(), 0.25);
    const std::size_t last_seg = path2.size() - 2;

    int crossings = 0;
    int previous = 0;
    for (const auto& s : path1.samples()) {
        const Vec2 p = s.x;
        const double t = frame.line.parameter(p);
        if (t < frame.smin || t > frame.smax) continue;
        const double offset = cross(frame.line.dir, p - frame.line.base);
        int sign = 0;
        if (std::abs(offset) > band) {
            sign = offset > 0.0 ? 1 : -1;
        } else {
            auto hit = index.nearest(p, 2.0 * band + 1.0);
            if (!(hit.dist < geometry::kInfinity)) hit = index.nearest_brute(p);
            if ((hit.seg == 0 && hit.u == 0.0) || (hit.seg == last_seg && hit.u == 1.0)) continue;
            if (hit.dist < touch_tol) continue;
            const Vec2 a = path2[hit.seg].x;
            const Vec2 b = path2[hit.seg + 1].x;
            const double side = cross(b - a, p - lerp(a, b, hit.u));
            sign = side > 0.0 ? 1 : -1;
        }
        if (previous != 0 && sign != previous) ++crossings;
        previous = sign;
    }
    return crossings;
}

bool same_image(const GeodesicPath& a, const GeodesicPath& b, double tol) {
    auto one_sided = [tol](const GeodesicPath& p, const GeodesicPath& q, int& used) {
        const Overlap frame = overlap_frame(q);
        const SegmentIndex index(q.samples(), 0.25);
        for (const auto& s : p.samples()) {
            const double t = frame.line.parameter(s.x);
            if (t < frame.smin || t > frame.smax) continue;
            ++used;
            if (index.nearest(s.x, tol).dist >= tol) return false;
        }
        return true;
    };
    int used_a = 0, used_b = 0;
    if (!one_sided(a, b, used_a) || !one_sided(b, a, used_b)) return false;
    return used_a >= 2 && used_b >= 2;
}

Vec2 deck_shift_into_unit_square(Vec2 x) { return {-std::floor(x.x), -std::floor(x.y)}; }

std::vector<Line> sample_lines(int count, std::span<const double> angles, std::uint64_t seed) {
    if (count < 0) throw PreconditionError("count must be non-negative");
    if (count > 0 && angles.empty()) throw PreconditionError("direction set is empty");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit_interval(0.0, 1.0);
    std::vector<Line> lines;
    lines.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double bx = unit_interval(rng);
        const double by = unit_interval(rng);
        lines.push_back(Line::from_angle({bx, by}, angles[static_cast<std::size_t>(i) % angles.size()]));
    }
    return lines;
}

MinimalRecord deck_normalized(MinimalRecord record) {
    const Vec2 k = deck_shift_into_unit_square(record.path.position(0.0));
    record.path = record.path.translated(k);
    record.line = record.line.translated(k);
    record.generating_line = record.generating_line.translated(k);
    return record;
}

MinimalSample sample_minimal_conditions(const Grid& grid, int count, std::span<const double> angles,
                                        std::uint64_t seed, double R) {
    MinimalSample out;
    for (const Line& l : sample_lines(count, angles, seed)) {
        MinimalRecord rec = deck_normalized(minimal_geodesic_for_line(grid, l, R));
        if (rec.certified) out.initial.push_back(rec.initial());
        out.records.push_back(std::move(rec));
    }
    return out;
}

}  // namespace toruslab::minimal
