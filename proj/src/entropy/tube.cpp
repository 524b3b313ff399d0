#include "toruslab/entropy/tube.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "toruslab/errors.hpp"
#include "toruslab/geometry/quadrature.hpp"

namespace toruslab::entropy {

using geometry::riemannian_distance;
using minimal::Line;

double tube_angle(double mu, double T_max) { return std::atan(2.0 * mu / T_max); }

std::vector<TubeCandidate> tube_population(const Grid& grid, const Line& centre, double mu, double T_max, int jobs) {
    if (!(mu > 0.0) || !(T_max > 0.0)) throw PreconditionError("tube_population needs mu > 0 and T_max > 0");
    constexpr double kOffsets[] = {0.0, 1.0 / 16, -1.0 / 16, 0.25, -0.25, 0.5, -0.5};
    constexpr double kAngles[] = {0.0, 0.5, -0.5};
    const double kShifts[] = {0.0, mu / 8, -mu / 8, mu / 2, -mu / 2};
    const double psi = tube_angle(mu, T_max);
    const double cover = T_max + 0.5 * mu + 1.0;
    const double theta = std::atan2(centre.dir.y, centre.dir.x);
    const Vec2 normal = perp(centre.dir);

    struct Job {
        double offset, angle;
    };
    std::vector<Job> work;
    for (double an : kAngles) {
        for (double off : kOffsets) work.push_back({off, an});
    }
    std::vector<minimal::MinimalRecord> records(work.size());
    minimal::MinimalOptions options;
    options.check_stability = false;
    kernels::for_each(work.size(), jobs, [&](std::size_t i) {
        const Line l = Line::from_angle(centre.base + work[i].offset * mu * normal, theta + work[i].angle * psi);
        records[i] = minimal::minimal_for_times(grid, l, -cover, cover, options);
    });

    std::vector<TubeCandidate> out;
    for (std::size_t i = 0; i < work.size(); ++i) {
        if (!records[i].certified) continue;
        for (double s : kShifts) {
            TubeCandidate c;
            c.path = records[i].path.reparametrized(s);
            c.rotation = records[i].rotation;
            c.line = records[i].line;
            c.deviation = records[i].deviation;
            c.offset = work[i].offset;
            c.angle = work[i].angle;
            c.shift = s;
            c.certified = true;
            out.push_back(std::move(c));
        }
    }
    return out;
}

TubeReport tube_members(const Grid& grid, const TubeCandidate& v, std::span<const TubeCandidate> candidates,
                        double mu, double T_max, int jobs) {
    if (!(mu > 0.0)) throw PreconditionError("tube_members needs mu > 0");
    TubeReport report;
    report.centre = v.path.phase(0.0);
    report.mu = mu;
    report.T_max = T_max;
    report.psi = tube_angle(mu, T_max);
    report.candidates = candidates.size();

    std::vector<double> sup(candidates.size(), -1.0);
    kernels::for_each(candidates.size(), jobs, [&](std::size_t i) {
        const auto& w = candidates[i].path;
        if (!flow::sup_distance_exceeds(grid, v.path, w, -T_max, T_max, mu)) {
            sup[i] = flow::sup_chord_length(grid, v.path, w, -T_max, T_max);
        }
    });

    double D = v.deviation;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (sup[i] < 0.0) continue;
        TubeMember m;
        m.candidate = i;
        m.sup = sup[i];
        m.angle_gap = std::acos(std::clamp(dot(v.line.dir, candidates[i].line.dir), -1.0, 1.0));
        m.rotation = candidates[i].rotation;
        D = std::max(D, candidates[i].deviation);
        report.members.push_back(m);
    }
    // Two lines whose sampled curves stay mu apart over [-T_max, T_max].
    report.angle_resolution = std::atan((mu * std::exp(-grid.fmin_bound()) + 2.0 * D) / T_max);
    report.rotation_consistent = std::all_of(report.members.begin(), report.members.end(),
                                             [&](const TubeMember& m) { return m.angle_gap <= report.angle_resolution; });
    return report;
}

bool Triangle::sides_within(double mu, double delta) const {
    return std::all_of(sides.begin(), sides.end(), [&](double l) { return l > 0.5 * delta && l <= 2.0 * mu + 0.5 * delta; });
}

double polygon_area(const geometry::MetricField& m, std::span<const Vec2> polygon) {
    if (polygon.size() < 3) return 0.0;
    constexpr double kPanel = 0.1;
    const Vec2 A = polygon[0];
    auto density = [&](Vec2 x) { return std::exp(2.0 * m.f(x)); };
    double total = 0.0;
    for (std::size_t k = 1; k + 1 < polygon.size(); ++k) {
        const Vec2 p = polygon[k] - A;
        const Vec2 q = polygon[k + 1] - A;
        const double jac = cross(p, q);
        if (jac == 0.0) continue;
        if (m.is_flat()) {
            total += 0.5 * jac;
            continue;
        }
        // x(u, v) = A + u ((1 - v) p + v q), dA = u |p x q| du dv.
        const int nu = std::max(1, static_cast<int>(std::ceil(std::max(norm(p), norm(q)) / kPanel)));
        const int nv = std::max(1, static_cast<int>(std::ceil(distance(p, q) / kPanel)));
        double sum = 0.0;
        for (int iv = 0; iv < nv; ++iv) {
            for (std::size_t gv = 0; gv < 3; ++gv) {
                const double v = (iv + geometry::kGaussNodes[gv]) / nv;
                const Vec2 e = (1.0 - v) * p + v * q;
                for (int iu = 0; iu < nu; ++iu) {
                    for (std::size_t gu = 0; gu < 3; ++gu) {
                        const double u = (iu + geometry::kGaussNodes[gu]) / nu;
                        sum += geometry::kGaussWeights[gv] * geometry::kGaussWeights[gu] * u * density(A + u * e);
                    }
                }
            }
        }
        total += sum * jac / (static_cast<double>(nu) * nv);
    }
    return std::abs(total);
}

Triangle min_delta_triangle(const Grid& grid, const GeodesicPath& w1, const GeodesicPath& w2, double t0,
                            double delta) {
    if (!(delta > 0.0)) throw PreconditionError("min_delta_triangle needs delta > 0");
    if (!w1.covers(t0, t0) || !w2.covers(t0 - 0.5 * delta, t0 + 0.5 * delta)) {
        throw PreconditionError("min_delta_triangle: paths do not cover the vertex times");
    }
    const Vec2 a = w1.position(t0);
    const double gap = riemannian_distance(grid, a, w2.position(t0));
    if (gap < delta) {
        std::ostringstream os;
        os << "min_delta_triangle needs d(c_w1(t0), c_w2(t0)) >= delta, got " << gap;
        throw PreconditionError(os.str());
    }
    Triangle tri;
    tri.vertices = {a, w2.position(t0 - 0.5 * delta), w2.position(t0 + 0.5 * delta)};
    std::vector<Vec2> polygon;
    for (int s = 0; s < 3; ++s) {
        const auto side = geometry::minimizing_path(grid, tri.vertices[s], tri.vertices[(s + 1) % 3]);
        tri.sides[s] = side.length;
        polygon.insert(polygon.end(), side.polyline.begin(), side.polyline.end() - 1);
    }
    tri.area = polygon_area(grid.metric(), polygon);
    return tri;
}

TriangleFamily triangle_family(const Grid& grid, std::span<const TubeCandidate> paths, double t0, double delta,
                               double mu, std::size_t max_count, int jobs) {
    if (!(delta > 0.0)) throw PreconditionError("triangle_family needs delta > 0");
    TriangleFamily family;
    family.delta = delta;

    struct Pair {
        double gap;
        std::size_t i, j;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        if (!paths[i].path.covers(t0 - delta, t0 + delta)) continue;
        for (std::size_t j = i + 1; j < paths.size(); ++j) {
            if (!paths[j].path.covers(t0 - delta, t0 + delta)) continue;
            if (paths[i].offset == paths[j].offset && paths[i].angle == paths[j].angle) continue;
            const double gap = distance(paths[i].path.position(t0), paths[j].path.position(t0));
            if (geometry::distance_upper_bound(grid, paths[i].path.position(t0), paths[j].path.position(t0)) < delta) {
                continue;
            }
            pairs.push_back({gap, i, j});
        }
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.gap < y.gap; });

    const double tol = minimal::position_tolerance(grid);
    std::vector<std::pair<std::size_t, std::size_t>> chosen;
    for (const auto& p : pairs) {
        if (chosen.size() >= max_count) break;
        const auto& a = paths[p.i].path;
        const auto& b = paths[p.j].path;
        if (riemannian_distance(grid, a.position(t0), b.position(t0)) < delta) continue;
        if (minimal::same_image(a, b, tol)) continue;
        if (minimal::crossing_count(a, b, tol) != 0) continue;
        chosen.emplace_back(p.i, p.j);
    }
    family.triangles.resize(chosen.size());
    kernels::for_each(chosen.size(), jobs, [&](std::size_t k) {
        family.triangles[k] = min_delta_triangle(grid, paths[chosen[k].first].path, paths[chosen[k].second].path, t0, delta);
    });
    family.C2 = family.triangles.empty() ? 0.0 : geometry::kInfinity;
    for (const auto& t : family.triangles) {
        family.C2 = std::min(family.C2, t.area);
        if (t.sides_within(mu, delta)) ++family.sides_ok;
    }
    return family;
}

double neighborhood_volume(const Grid& grid, const GeodesicPath& v, double T, double mu, double delta) {
    if (!v.covers(0.0, T + 1.0)) throw PreconditionError("neighborhood_volume: path does not cover [0, T+1]");
    const auto poly = v.window(0.0, T + 1.0).points();
    const double R = mu + 2.0 * delta;
    const double pad = R * std::exp(-grid.fmin_bound()) + 0.5;
    Vec2 lo = poly.front(), hi = poly.front();
    for (const Vec2& p : poly) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    lo = lo - Vec2{pad, pad};
    hi = hi + Vec2{pad, pad};
    grid.require_inside(lo);
    grid.require_inside(hi);
    const int res = geometry::field_resolution(0.5 * std::max(hi.x - lo.x, hi.y - lo.y), 4'000'000);
    geometry::DistanceField field(grid, res, lo, hi);
    field.seed_polyline(poly);
    field.run(R + 2.0 * std::exp(grid.fmax_bound()) / res);
    return geometry::sublevel_area(field, R);
}

NeighborhoodFit fit_C1(const Grid& grid, const GeodesicPath& v, std::span<const double> T_list, double mu,
                       double delta) {
    NeighborhoodFit fit;
    for (double T : T_list) {
        const double vol = neighborhood_volume(grid, v, T, mu, delta);
        fit.T.push_back(T);
        fit.volume.push_back(vol);
        fit.ratio.push_back(vol / (mu * (T + 1.0 + 2.0 * mu + 4.0 * delta)));
        fit.C1 = std::max(fit.C1, fit.ratio.back());
    }
    for (std::size_t i = 0; i < fit.T.size(); ++i) {
        for (std::size_t j = 0; j < fit.T.size(); ++j) {
            if (std::abs(fit.T[j] - 2.0 * fit.T[i]) < 1e-9) {
                fit.doubling_spread = std::max(fit.doubling_spread, std::abs(fit.ratio[j] / fit.ratio[i] - 1.0));
            }
        }
    }
    return fit;
}

double tube_bound(double C1, double C2, double beta, double T, double delta) {
    if (!(C2 > 0.0)) return geometry::kInfinity;
    return C1 * beta * (T + 1.0 + 2.0 * beta + 4.0 * delta) / C2 * (2.0 * beta / delta);
}

TubeEntropy tube_entropy(const Grid& grid, const Line& centre, double mu, double delta, std::span<const double> T_list,
                         const TubeOptions& options, int jobs) {
    const double a = options.a > 0.0 ? options.a : geometry::fundamental_domain_diameter(grid);
    if (!(delta > 0.0) || delta > std::min(mu, a) / 10.0 + 1e-12) {
        throw PreconditionError("tube_entropy needs 0 < delta <= min(mu, a) / 10");
    }
    if (T_list.size() < 4) throw PreconditionError("tube_entropy needs at least 4 values of T");
    if (*std::max_element(T_list.begin(), T_list.end()) + 1.0 > options.T_max) {
        throw PreconditionError("tube_entropy: T + 1 exceeds T_max");
    }

    TubeEntropy out;
    out.delta = delta;
    out.beta = mu;
    out.population = tube_population(grid, centre, mu, options.T_max, jobs);
    if (out.population.empty() || !out.population.front().same_image_as_centre() || out.population.front().shift != 0.0) {
        throw InstabilityError("tube centre is not certified minimal");
    }
    out.tube = tube_members(grid, out.population.front(), out.population, mu, options.T_max, jobs);
    out.population_ok = out.tube.members.size() >= 10;

    std::vector<TubeCandidate> members;
    std::vector<GeodesicPath> paths;
    for (const auto& m : out.tube.members) {
        members.push_back(out.population[m.candidate]);
        paths.push_back(out.population[m.candidate].path);
    }
    out.entropy = entropy_series(grid, paths, delta, T_list, jobs);
    {
        std::ostringstream os;
        const auto c = out.tube.centre;
        os << "tube members around (" << c.x.x << ", " << c.x.y << ", " << c.theta << "), mu " << mu << ", T_max "
           << options.T_max;
        out.entropy.sample = os.str();
    }
    const double T_last = *std::max_element(T_list.begin(), T_list.end());
    for (std::size_t k : separated_set(grid, paths, T_last, delta, jobs)) {
        if (members[k].same_image_as_centre()) ++out.same_image;
    }

    out.neighborhood = fit_C1(grid, out.population.front().path, T_list, mu, delta);
    out.triangles = triangle_family(grid, members, 0.0, delta, mu, options.triangles, jobs);
    out.bound_ok = out.triangles.C2 > 0.0;
    for (const auto& s : out.entropy.series) {
        out.bound.push_back(tube_bound(out.neighborhood.C1, out.triangles.C2, out.beta, s.T, delta));
        if (!(static_cast<double>(s.separated) <= out.bound.back())) out.bound_ok = false;
    }
    return out;
}

}  // namespace toruslab::entropy
