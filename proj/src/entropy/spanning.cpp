#include "toruslab/entropy/spanning.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "toruslab/errors.hpp"

namespace toruslab::entropy {

using geometry::riemannian_distance;
using minimal::Line;
using minimal::MinimalRecord;

BetaConstants beta_constant(double D, double A, double a, double eps) {
    if (D < 0.0 || a < 0.0 || eps < 0.0) throw PreconditionError("beta_constant inputs must be non-negative");
    if (A < 1.0) throw PreconditionError("beta_constant needs A >= 1");
    BetaConstants c;
    c.B = A * A * (4.0 * D + a + 2.0 * eps) + 2.0 * D;
    c.H = 2.0 * (c.B + 2.0 * D);
    c.beta = 2.0 * D + c.H;
    return c;
}

namespace {

// Euclidean buckets of point indices.
class PointHash {
public:
    explicit PointHash(double cell) : cell_(cell) {}

    void add(std::size_t i, Vec2 p) { buckets_[pack(key(p.x), key(p.y))].push_back(i); }

    template <class Fn>
    void visit(Vec2 p, double radius, Fn&& fn) const {
        const long long r = static_cast<long long>(std::ceil(radius / cell_));
        const long long cx = key(p.x), cy = key(p.y);
        for (long long y = cy - r; y <= cy + r; ++y) {
            for (long long x = cx - r; x <= cx + r; ++x) {
                auto it = buckets_.find(pack(x, y));
                if (it == buckets_.end()) continue;
                for (std::size_t i : it->second) fn(i);
            }
        }
    }

private:
    long long key(double v) const { return static_cast<long long>(std::floor(v / cell_)); }
    static std::uint64_t pack(long long x, long long y) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) | static_cast<std::uint32_t>(y);
    }

    double cell_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

bool within(const Grid& grid, Vec2 p, Vec2 q, double eps) {
    if (grid.metric().is_flat()) return distance(p, q) <= eps;
    if (geometry::distance_lower_bound(grid, p, q) > eps) return false;
    if (geometry::distance_upper_bound(grid, p, q) <= eps) return true;
    return riemannian_distance(grid, p, q) <= eps;
}

// Euclidean reach of a d-ball of radius eps.
double euclidean_reach(const Grid& grid, double eps) { return eps * std::exp(-grid.fmin_bound()); }

// Candidates are visited in order; accept(c) runs only for those not
// within eps of an earlier kept point.
template <class Accept>
std::vector<std::size_t> greedy_separated(const Grid& grid, std::span<const Vec2> candidates, double eps,
                                          Accept&& accept) {
    const double reach = euclidean_reach(grid, eps);
    PointHash hash(reach);
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        bool blocked = false;
        hash.visit(candidates[c], reach, [&](std::size_t k) {
            if (!blocked && within(grid, candidates[c], candidates[k], eps)) blocked = true;
        });
        if (!blocked && accept(c)) {
            kept.push_back(c);
            hash.add(c, candidates[c]);
        }
    }
    return kept;
}

std::vector<std::size_t> greedy_separated(const Grid& grid, std::span<const Vec2> candidates, double eps) {
    return greedy_separated(grid, candidates, eps, [](std::size_t) { return true; });
}

constexpr std::size_t kShellNodeBudget = 4'000'000;

Vec2 clamp_to_square(Vec2 p) { return {std::clamp(p.x, 0.0, 1.0), std::clamp(p.y, 0.0, 1.0)}; }

// Point on the square boundary at perimeter parameter u in [0, 4).
Vec2 boundary_point(double u) {
    u = std::fmod(std::fmod(u, 4.0) + 4.0, 4.0);
    if (u < 1.0) return {u, 0.0};
    if (u < 2.0) return {1.0, u - 1.0};
    if (u < 3.0) return {3.0 - u, 1.0};
    return {0.0, 4.0 - u};
}

double boundary_parameter(Vec2 p) {
    if (p.y <= 0.0) return p.x;
    if (p.x >= 1.0) return 1.0 + p.y;
    if (p.y >= 1.0) return 3.0 - p.x;
    return 4.0 - p.y;
}

}  // namespace

std::vector<Vec2> build_F_eps(const Grid& grid, double eps) {
    if (!(eps > 0.0)) throw PreconditionError("build_F_eps needs eps > 0");
    constexpr int kSide = 65;
    std::vector<Vec2> candidates;
    for (int j = 0; j < kSide; ++j) {
        for (int i = 0; i < kSide; ++i) candidates.push_back({i / (kSide - 1.0), j / (kSide - 1.0)});
    }
    std::vector<Vec2> out;
    for (std::size_t k : greedy_separated(grid, candidates, eps)) out.push_back(candidates[k]);
    return out;
}

double distance_to_square(const Grid& grid, Vec2 z) {
    const Vec2 p0 = clamp_to_square(z);
    if (p0 == z) return 0.0;
    if (grid.metric().is_flat()) return distance(z, p0);
    // The minimiser lies within exp(max f - min f) * |z - p0| of z.
    const double e = distance(z, p0);
    const double rho = std::exp(grid.fmax_bound() - grid.fmin_bound());
    const double reach = std::min(2.0, e * std::sqrt(rho * rho - 1.0) + 1e-9);
    const double u0 = boundary_parameter(p0);
    auto objective = [&](double u) { return riemannian_distance(grid, z, boundary_point(u0 + u)); };
    std::uintmax_t iterations = 60;
    const auto [u, d] = boost::math::tools::brent_find_minima(objective, -reach, reach, 24, iterations);
    (void)u;
    return std::min(d, objective(0.0));
}

Shell build_F_r_eps(const Grid& grid, double r, double eps, double a, int jobs) {
    if (!(eps > 0.0)) throw PreconditionError("build_F_r_eps needs eps > 0");
    if (!(r > 2.0 * a)) throw PreconditionError("build_F_r_eps needs r > 2a");
    Shell shell;
    shell.r = r;
    shell.eps = eps;
    shell.a = a;
    const bool flat = grid.metric().is_flat();
    const double reach = r * std::exp(-grid.fmin_bound()) + 1.0;
    const Vec2 lo{0.5 - reach - 0.5, 0.5 - reach - 0.5};
    const Vec2 hi{0.5 + reach + 0.5, 0.5 + reach + 0.5};
    grid.require_inside(lo);
    grid.require_inside(hi);

    // Candidate lattice with spacing about eps/2.
    int res = 1;
    while (res < 256 && 1.0 / res > 0.5 * eps) res *= 2;
    const double tol = minimal::minimality_tolerance(grid);

    if (flat) {
        std::vector<Vec2> candidates;
        const long long n0 = static_cast<long long>(std::floor(lo.x * res));
        const long long n1 = static_cast<long long>(std::ceil(hi.x * res));
        for (long long j = n0; j <= n1; ++j) {
            for (long long i = n0; i <= n1; ++i) {
                const Vec2 z{static_cast<double>(i) / res, static_cast<double>(j) / res};
                const double d = distance(z, clamp_to_square(z));
                if (d >= r - a && d <= r) candidates.push_back(z);
            }
        }
        shell.resolution = res;
        shell.candidates = candidates.size();
        for (std::size_t k : greedy_separated(grid, candidates, eps)) {
            shell.points.push_back(candidates[k]);
            shell.distances.push_back(distance(candidates[k], clamp_to_square(candidates[k])));
        }
        return shell;
    }

    const int fres = std::max(res, geometry::field_resolution(reach + 0.5, kShellNodeBudget));
    geometry::DistanceField field(grid, fres, lo, hi);
    field.seed_unit_square();
    // Lattice values overestimate d by a discretisation error growing with r.
    const double margin = tol + 0.1 * r / fres;
    field.run(r + margin + 2.0 * std::exp(grid.fmax_bound()) / fres);
    const int stride = std::max(1, fres / res);
    std::vector<Vec2> candidates;
    std::vector<std::size_t> source;
    for (int j = 0; j < field.ny(); j += stride) {
        for (int i = 0; i < field.nx(); i += stride) {
            const std::size_t idx = field.index(i, j);
            const double v = field.value(idx);
            if (v >= r - a - margin && v <= r + margin) {
                candidates.push_back(field.node(idx));
                source.push_back(idx);
            }
        }
    }
    shell.resolution = fres / stride;
    shell.candidates = candidates.size();

    auto certified = [&](std::size_t k) {
        const auto route = field.path_to_seed(source[k]);
        return riemannian_distance(grid, candidates[k], clamp_to_square(route.back()));
    };
    std::vector<double> d(candidates.size(), -1.0);
    const auto kept = greedy_separated(grid, candidates, eps, [&](std::size_t k) {
        const double v = field.value(source[k]);
        if (v >= r - a + margin && v <= r - margin) return true;
        d[k] = certified(k);
        return d[k] >= r - a && d[k] <= r;
    });
    kernels::for_each(kept.size(), jobs, [&](std::size_t i) {
        if (d[kept[i]] < 0.0) d[kept[i]] = certified(kept[i]);
    });
    for (std::size_t k : kept) {
        if (d[k] < r - a - tol || d[k] > r + tol) {
            ++shell.rejected;
            continue;
        }
        shell.points.push_back(candidates[k]);
        shell.distances.push_back(d[k]);
    }
    return shell;
}

SpanningConstruction build_P_r(const Grid& grid, double r, double eps, double a, double A, double D, int jobs) {
    SpanningConstruction con;
    con.r = r;
    con.eps = eps;
    con.a = a;
    con.A = A;
    con.D = D;
    con.beta = beta_constant(D, A, a, eps);
    con.F = build_F_eps(grid, eps);
    con.shell = build_F_r_eps(grid, r, eps, a, jobs);
    return con;
}

PairMember construct_member(const Grid& grid, const SpanningConstruction& con, std::size_t y, std::size_t z) {
    PairMember m;
    m.y = y;
    m.z = z;
    const Line l = Line::through(con.F.at(y), con.shell.points.at(z));
    minimal::MinimalOptions options;
    options.check_stability = false;
    m.record = minimal::deck_normalized(minimal::minimal_for_times(grid, l, -1.0, con.r + 1.0, options));
    if (!m.record.certified) {
        m.dropped = true;
        std::ostringstream os;
        os << "not certified minimal (slack " << m.record.minimality_slack << ")";
        m.note = os.str();
    }
    return m;
}

std::vector<MinimalRecord> spanning_witnesses(const Grid& grid, double r, int count, std::uint64_t seed, int jobs) {
    if (count < 0) throw PreconditionError("witness count must be non-negative");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit_interval(0.0, 1.0);
    std::vector<MinimalRecord> out;
    minimal::MinimalOptions options;
    options.check_stability = false;
    for (int round = 0; round < 4 && static_cast<int>(out.size()) < count; ++round) {
        const std::size_t batch = static_cast<std::size_t>(count) - out.size();
        std::vector<Line> lines;
        for (std::size_t i = 0; i < batch; ++i) {
            const Vec2 base{unit_interval(rng), unit_interval(rng)};
            lines.push_back(Line::from_angle(base, 2.0 * std::numbers::pi * unit_interval(rng)));
        }
        std::vector<MinimalRecord> recs(batch);
        kernels::for_each(batch, jobs, [&](std::size_t i) {
            recs[i] = minimal::deck_normalized(minimal::minimal_for_times(grid, lines[i], -1.0, r + 1.0, options));
        });
        for (auto& rec : recs) {
            if (rec.certified) out.push_back(std::move(rec));
        }
    }
    return out;
}

SpanningVerification verify_spanning(const Grid& grid, const SpanningConstruction& con,
                                     std::span<const MinimalRecord> witnesses, int jobs) {
    SpanningVerification out;
    out.beta = con.beta.beta;
    out.checks.resize(witnesses.size());

    const double reach = euclidean_reach(grid, 2.0 * con.eps) + 1.0;
    PointHash hash(reach);
    for (std::size_t k = 0; k < con.shell.points.size(); ++k) hash.add(k, con.shell.points[k]);

    std::mutex mutex;
    std::map<std::pair<std::size_t, std::size_t>, PairMember> cache;
    auto member = [&](std::size_t y, std::size_t z) {
        {
            std::lock_guard lock(mutex);
            if (auto it = cache.find({y, z}); it != cache.end()) return it->second;
        }
        PairMember m = construct_member(grid, con, y, z);
        std::lock_guard lock(mutex);
        return cache.emplace(std::make_pair(y, z), std::move(m)).first->second;
    };

    kernels::for_each(witnesses.size(), jobs, [&](std::size_t w) {
        const auto& path = witnesses[w].path;
        const Vec2 x0 = path.position(0.0);
        const Vec2 xr = path.position(con.r);
        std::vector<std::pair<double, std::size_t>> ys, zs;
        for (std::size_t i = 0; i < con.F.size(); ++i) ys.emplace_back(riemannian_distance(grid, x0, con.F[i]), i);
        hash.visit(xr, reach, [&](std::size_t k) {
            if (geometry::distance_lower_bound(grid, xr, con.shell.points[k]) <= 2.0 * con.eps) {
                zs.emplace_back(riemannian_distance(grid, xr, con.shell.points[k]), k);
            }
        });
        std::sort(ys.begin(), ys.end());
        std::sort(zs.begin(), zs.end());
        WitnessCheck& check = out.checks[w];
        if (zs.empty()) return;

        std::vector<std::tuple<double, std::size_t, std::size_t, double, double>> pairs;
        for (const auto& [dy, y] : ys) {
            for (const auto& [dz, z] : zs) {
                if (dy <= con.eps && dz <= con.eps) pairs.emplace_back(dy + dz, y, z, dy, dz);
            }
        }
        std::sort(pairs.begin(), pairs.end());
        if (pairs.empty()) {
            pairs.emplace_back(ys[0].first + zs[0].first, ys[0].second, zs[0].second, ys[0].first, zs[0].first);
        }
        check.y = std::get<1>(pairs[0]);
        check.z = std::get<2>(pairs[0]);
        check.dy = std::get<3>(pairs[0]);
        check.dz = std::get<4>(pairs[0]);
        constexpr int kMaxTries = 8;
        for (std::size_t p = 0; p < pairs.size() && static_cast<int>(p) < kMaxTries; ++p) {
            const auto& [sum, y, z, dy, dz] = pairs[p];
            const PairMember m = member(y, z);
            if (m.dropped) continue;
            check.y = y;
            check.z = z;
            check.dy = dy;
            check.dz = dz;
            check.alternatives = static_cast<int>(p);
            check.matched = dy <= con.eps && dz <= con.eps;
            check.dbar = flow::dynamical_distance(grid, path, m.record.path, con.r);
            check.ratio = check.dbar / con.beta.beta;
            return;
        }
    });

    for (const auto& c : out.checks) {
        if (!c.matched) ++out.unmatched;
        out.worst_ratio = std::max(out.worst_ratio, c.ratio);
    }
    for (auto& [key, m] : cache) {
        if (m.dropped) out.dropped.push_back(std::move(m));
    }
    return out;
}

SpanningReport spanning_entropy_series(const Grid& grid, double eps, std::span<const double> r_list, double a,
                                       double A, double D, int jobs) {
    if (r_list.size() < 4) throw PreconditionError("spanning_entropy_series needs at least 4 radii");
    if (!std::is_sorted(r_list.begin(), r_list.end()) ||
        std::adjacent_find(r_list.begin(), r_list.end()) != r_list.end()) {
        throw PreconditionError("r_list must be increasing");
    }
    SpanningReport report;
    report.eps = eps;
    report.a = a;
    report.A = A;
    report.D = D;
    report.beta = beta_constant(D, A, a, eps);
    report.c_eps = kernels::c_epsilon(grid, eps, jobs);
    const auto F = build_F_eps(grid, eps);

    std::vector<double> radii;
    for (double r : r_list) radii.push_back(r + a + 0.5 * eps);
    std::vector<std::vector<double>> volumes(F.size());
    kernels::for_each(F.size(), jobs, [&](std::size_t i) { volumes[i] = geometry::ball_volumes(grid, F[i], radii); });

    std::vector<Shell> shells(r_list.size());
    for (std::size_t k = 0; k < r_list.size(); ++k) shells[k] = build_F_r_eps(grid, r_list[k], eps, a, jobs);

    report.ball_ok = true;
    std::vector<double> rs, counts;
    for (std::size_t k = 0; k < r_list.size(); ++k) {
        SpanningRow row;
        row.r = r_list[k];
        row.F = F.size();
        row.shell = shells[k].points.size();
        row.P = row.F * row.shell;
        row.shell_rejected = shells[k].rejected;
        row.volume_min = geometry::kInfinity;
        for (const auto& v : volumes) {
            row.volume_min = std::min(row.volume_min, v[k]);
            row.volume_max = std::max(row.volume_max, v[k]);
        }
        row.ball_ok = static_cast<double>(row.shell) * report.c_eps <= row.volume_min;
        report.ball_ok = report.ball_ok && row.ball_ok;
        row.log_P_rate = std::log(static_cast<double>(std::max<std::size_t>(row.P, 1))) / row.r;
        row.volume_rate = std::log(row.volume_max / report.c_eps) / row.r;
        rs.push_back(row.r);
        counts.push_back(static_cast<double>(std::max<std::size_t>(row.P, 1)));
        report.rows.push_back(row);
    }
    report.slope_linear = entropy_estimate(rs, counts).linear;
    report.volume_decreasing = true;
    for (std::size_t k = 1; k < report.rows.size(); ++k) {
        if (!(report.rows[k].volume_rate < report.rows[k - 1].volume_rate)) report.volume_decreasing = false;
    }
    return report;
}

}  // namespace toruslab::entropy
