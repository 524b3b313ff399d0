#include "toruslab/harness/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>

#include "toruslab/entropy/spanning.hpp"
#include "toruslab/entropy/tube.hpp"
#include "toruslab/errors.hpp"
#include "toruslab/geometry/distance.hpp"
#include "toruslab/kernels/kernels.hpp"
#include "toruslab/minimal/minimal.hpp"

namespace toruslab::harness {

namespace {

using minimal::Line;
using minimal::MinimalRecord;

// Slope tan(angle) equals p/q with q <= kMaxDenominator (vertical counts as rational).
bool rational_direction(double angle) {
    const double c = std::cos(angle);
    if (std::abs(c) < 1e-12) return true;
    const double s = std::tan(angle);
    for (int q = 1; q <= minimal::kMaxDenominator; ++q) {
        if (std::abs(s * q - std::round(s * q)) < 1e-9) return true;
    }
    return false;
}

class Context {
public:
    Context(const ExperimentConfig& config, int jobs)
        : cfg(config), grid(make_metric(config.metric), config.grid), jobs(jobs) {}

    const ExperimentConfig& cfg;
    geometry::Grid grid;
    int jobs;
    ojson constants = ojson::object();
    ojson tables = ojson::object();
    ojson timings = ojson::object();

    template <class F>
    auto timed(const std::string& stage, F&& body) {
        const auto start = std::chrono::steady_clock::now();
        auto finish = [&] {
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            timings[stage] = timings.value(stage, 0.0) + s;
        };
        if constexpr (std::is_void_v<decltype(body())>) {
            body();
            finish();
        } else {
            auto r = body();
            finish();
            return r;
        }
    }

    void put(const std::string& name, const Table& t) { tables[name] = t.to_json(); }

    double a() {
        if (!a_) a_ = timed("a", [&] { return geometry::fundamental_domain_diameter(grid); });
        constants["a"] = *a_;
        return *a_;
    }

    double A() {
        constants["A"] = grid.equivalence_constant();
        return grid.equivalence_constant();
    }

    double c_eps(double eps) {
        if (!c_eps_) c_eps_ = timed("C_eps", [&] { return kernels::c_epsilon(grid, eps, jobs); });
        constants["C_eps"] = *c_eps_;
        return *c_eps_;
    }

    double D() {
        if (!D_) D_ = measure_D();
        constants["D"] = *D_;
        return *D_;
    }

    entropy::BetaConstants beta(double eps) {
        const auto b = entropy::beta_constant(D(), A(), a(), eps);
        constants["eps"] = eps;
        constants["beta"] = b.beta;
        constants["B"] = b.B;
        constants["H"] = b.H;
        return b;
    }

    std::vector<MinimalRecord> minimal_records(int count, std::span<const double> angles, double R) {
        const auto lines = minimal::sample_lines(count, angles, cfg.seed);
        std::vector<MinimalRecord> out(lines.size());
        kernels::for_each(lines.size(), jobs, [&](std::size_t i) {
            out[i] = minimal::deck_normalized(minimal::minimal_geodesic_for_line(grid, lines[i], R));
        });
        return out;
    }

private:
    double measure_D() {
        const auto& h = cfg.experiment.hedlund;
        if (h.D >= 0.0) return h.D;
        std::vector<double> angles;
        for (int k = 0; k < h.directions; ++k) angles.push_back(std::numbers::pi * k / h.directions);
        const auto records = timed("hedlund", [&] { return minimal_records(h.count, angles, h.R); });
        Table t({"index", "direction", "deviation", "certified", "slack"});
        std::vector<MinimalRecord> certified;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto& r = records[i];
            const Vec2 d = r.generating_line.dir;
            t.add({i, std::atan2(d.y, d.x), r.deviation, r.certified, r.minimality_slack});
            if (r.certified) certified.push_back(r);
        }
        put("hedlund", t);
        if (certified.empty()) throw InstabilityError("no certified minimal geodesic for the Hedlund constant");
        return minimal::hedlund_constant(certified);
    }

    std::optional<double> a_, c_eps_, D_;
};

void metric_info(Context& ctx) {
    const auto& g = ctx.grid;
    ctx.constants["metric"] = ctx.cfg.metric.type;
    ctx.constants["amplitude"] = g.metric().amplitude();
    ctx.constants["fmin"] = g.fmin();
    ctx.constants["fmax"] = g.fmax();
    ctx.constants["curvature_bound"] = g.curvature_bound();
    ctx.constants["convexity_radius"] = std::isfinite(g.convexity_radius()) ? ojson(g.convexity_radius()) : ojson("inf");
    ctx.constants["distance_tolerance"] = minimal::position_tolerance(g);
    ctx.constants["minimality_tolerance"] = minimal::minimality_tolerance(g);
    ctx.A();
    ctx.a();
    ctx.c_eps(ctx.cfg.experiment.spanning.eps);
}

void geodesic(Context& ctx) {
    const auto& p = ctx.cfg.experiment.geodesic;
    const auto path = ctx.timed("geodesic", [&] {
        return flow::integrate(ctx.grid.metric(), {{p.x, p.y}, p.theta}, p.T, ctx.cfg.flow);
    });
    Table t({"t", "x1", "x2", "theta"});
    for (const auto& s : path.samples()) t.add({s.t, s.x.x, s.x.y, s.theta});
    ctx.put("path", t);
    ctx.constants["euclidean_displacement"] = distance(path.samples().front().x, path.samples().back().x);
}

std::uint8_t irrational_flag(const minimal::Rotation& r) { return !r.rational && !r.infinite(); }

void add_crossings(Table& t, const std::string& source, const geometry::Grid& grid,
                   std::span<const flow::GeodesicPath> paths, std::span<const double> angles,
                   std::span<const std::uint8_t> irrational) {
    const double tol = minimal::position_tolerance(grid);
    for (std::size_t i = 0; i < paths.size(); ++i) {
        for (std::size_t j = i + 1; j < paths.size(); ++j) {
            if (minimal::same_image(paths[i], paths[j], tol)) continue;
            const bool same = angles[i] == angles[j] && !rational_direction(angles[i]) && irrational[i] && irrational[j];
            t.add({source, i, j, minimal::crossing_count(paths[i], paths[j], tol), same});
        }
    }
}

void minimal_experiment(Context& ctx) {
    const auto& p = ctx.cfg.experiment.minimal;
    const auto records = ctx.timed("minimal", [&] { return ctx.minimal_records(p.count, p.directions, p.span); });
    std::vector<std::uint8_t> monotone(records.size(), 0);
    ctx.timed("projection", [&] {
        kernels::for_each(records.size(), ctx.jobs, [&](std::size_t i) {
            if (!records[i].certified) return;
            const auto proj = minimal::project_to_line(ctx.grid, records[i].path, records[i].line);
            monotone[i] = minimal::strictly_monotone(proj);
        });
    });

    Table rec({"index", "direction", "x", "y", "theta", "alpha", "rational", "p", "q", "deviation", "certified",
               "slack", "stable", "monotone"});
    Table paths({"index", "t", "x1", "x2", "theta"});
    std::vector<flow::GeodesicPath> certified;
    std::vector<double> angles;
    std::vector<std::uint8_t> irrational;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const auto v = r.initial();
        const Vec2 d = r.generating_line.dir;
        const double angle = std::atan2(d.y, d.x);
        rec.add({i, angle, v.x.x, v.x.y, v.theta, r.rotation.infinite() ? ojson("inf") : ojson(r.rotation.alpha),
                 r.rotation.rational, r.rotation.p, r.rotation.q, r.deviation, r.certified, r.minimality_slack,
                 r.stable, monotone[i] != 0});
        if (!r.certified) continue;
        for (const auto& s : r.path.samples()) paths.add({i, s.t, s.x.x, s.x.y, s.theta});
        certified.push_back(r.path);
        angles.push_back(angle);
        irrational.push_back(irrational_flag(r.rotation));
    }
    ctx.put("minimal_records", rec);
    ctx.put("minimal_paths", paths);
    Table cross({"source", "i", "j", "count", "same_irrational"});
    ctx.timed("crossings", [&] { add_crossings(cross, "minimal", ctx.grid, certified, angles, irrational); });
    ctx.put("crossings", cross);
}

void hedlund_experiment(Context& ctx) { ctx.D(); }

void entropy_experiment(Context& ctx) {
    const auto& p = ctx.cfg.experiment.entropy;
    const double T_last = p.T_list.back();
    const auto lines = minimal::sample_lines(p.population, ctx.cfg.experiment.minimal.directions, ctx.cfg.seed);
    std::vector<MinimalRecord> records(lines.size());
    minimal::MinimalOptions options;
    options.check_stability = false;
    ctx.timed("population", [&] {
        kernels::for_each(lines.size(), ctx.jobs, [&](std::size_t i) {
            records[i] = minimal::deck_normalized(minimal::minimal_for_times(ctx.grid, lines[i], 0.0, T_last + 1.0, options));
        });
    });
    std::vector<flow::GeodesicPath> paths;
    for (const auto& r : records) {
        if (r.certified) paths.push_back(r.path);
    }
    ctx.constants["population"] = paths.size();
    ctx.constants["entropy_eps"] = p.eps;
    const auto report = ctx.timed("entropy_series", [&] {
        return entropy::entropy_series(ctx.grid, paths, p.eps, p.T_list, ctx.jobs);
    });
    Table t({"T", "separated", "spanning", "separated_2eps"});
    for (const auto& s : report.series) t.add({s.T, s.separated, s.spanning, s.separated_2eps});
    ctx.put("entropy_series", t);
}

void spanning_experiment(Context& ctx) {
    const auto& p = ctx.cfg.experiment.spanning;
    const double a = ctx.a();
    const double A = ctx.A();
    const double D = ctx.D();
    ctx.beta(p.eps);
    ctx.c_eps(p.eps);
    const auto series = ctx.timed("spanning_series", [&] {
        return entropy::spanning_entropy_series(ctx.grid, p.eps, p.r_list, a, A, D, ctx.jobs);
    });
    Table t({"r", "F", "shell", "P", "shell_rejected", "volume_min", "volume_max", "log_P_rate", "volume_rate"});
    for (const auto& r : series.rows) {
        t.add({r.r, r.F, r.shell, r.P, r.shell_rejected, r.volume_min, r.volume_max, r.log_P_rate, r.volume_rate});
    }
    ctx.put("spanning_series", t);

    if (p.witness_r.empty() || p.witnesses == 0) return;
    Table w({"r", "witness", "y", "z", "dy", "dz", "dbar", "ratio", "matched", "alternatives"});
    Table dropped({"r", "y", "z", "note"});
    for (double r : p.witness_r) {
        ctx.timed("spanning_witnesses", [&] {
            const auto con = entropy::build_P_r(ctx.grid, r, p.eps, a, A, D, ctx.jobs);
            const auto witnesses = entropy::spanning_witnesses(ctx.grid, r, p.witnesses, ctx.cfg.seed, ctx.jobs);
            const auto ver = entropy::verify_spanning(ctx.grid, con, witnesses, ctx.jobs);
            for (std::size_t i = 0; i < ver.checks.size(); ++i) {
                const auto& c = ver.checks[i];
                w.add({r, i, c.y, c.z, c.dy, c.dz, c.dbar, c.ratio, c.matched, c.alternatives});
            }
            for (const auto& m : ver.dropped) dropped.add({r, m.y, m.z, m.note});
        });
    }
    ctx.put("spanning_witnesses", w);
    ctx.put("dropped_members", dropped);
}

void tube_experiment(Context& ctx) {
    const auto& p = ctx.cfg.experiment.tube;
    const double a = ctx.a();
    const double mu = p.mu > 0.0 ? p.mu : ctx.beta(ctx.cfg.experiment.spanning.eps).beta;
    const double delta = p.delta > 0.0 ? p.delta : std::min(mu, a) / 10.0;
    ctx.constants["mu"] = mu;
    ctx.constants["delta"] = delta;

    std::mt19937_64 rng(ctx.cfg.seed);
    std::uniform_real_distribution<double> unit_interval(0.0, 1.0);
    entropy::TubeOptions options;
    options.T_max = p.T_max;
    options.a = a;
    options.triangles = static_cast<std::size_t>(p.triangles);

    Table tubes({"centre", "direction", "x", "y", "theta", "mu", "delta", "candidates", "members", "C1",
                 "doubling_spread", "psi", "angle_resolution", "rotation_consistent", "same_image"});
    Table series({"centre", "T", "separated", "spanning", "separated_2eps", "volume", "bound"});
    Table tri({"centre", "delta", "index", "area", "side0", "side1", "side2"});
    Table cross({"source", "i", "j", "count", "same_irrational"});
    auto add_triangles = [&](std::size_t centre, const entropy::TriangleFamily& fam) {
        for (std::size_t k = 0; k < fam.triangles.size(); ++k) {
            const auto& x = fam.triangles[k];
            tri.add({centre, fam.delta, k, x.area, x.sides[0], x.sides[1], x.sides[2]});
        }
    };

    for (std::size_t c = 0; c < p.centre_directions.size(); ++c) {
        const double direction = p.centre_directions[c];
        const Vec2 base{unit_interval(rng), unit_interval(rng)};
        const auto te = ctx.timed("tube", [&] {
            return entropy::tube_entropy(ctx.grid, Line::from_angle(base, direction), mu, delta, p.T_list, options,
                                         ctx.jobs);
        });
        const auto v = te.tube.centre;
        tubes.add({c, direction, v.x.x, v.x.y, v.theta, mu, delta, te.tube.candidates, te.tube.members.size(),
                   te.neighborhood.C1, te.neighborhood.doubling_spread, te.tube.psi, te.tube.angle_resolution,
                   te.tube.rotation_consistent, te.same_image});
        for (std::size_t k = 0; k < te.entropy.series.size(); ++k) {
            const auto& s = te.entropy.series[k];
            series.add({c, s.T, s.separated, s.spanning, s.separated_2eps, te.neighborhood.volume[k], te.bound[k]});
        }
        add_triangles(c, te.triangles);

        std::vector<entropy::TubeCandidate> members;
        for (const auto& m : te.tube.members) members.push_back(te.population[m.candidate]);
        for (double d : p.triangle_deltas) {
            if (d == delta) continue;
            ctx.timed("triangles", [&] {
                add_triangles(c, entropy::triangle_family(ctx.grid, members, 0.0, d, mu, options.triangles, ctx.jobs));
            });
        }

        std::vector<flow::GeodesicPath> images;
        std::vector<double> angles;
        std::vector<std::uint8_t> irrational;
        for (const auto& cand : te.population) {
            if (cand.shift != 0.0) continue;
            images.push_back(cand.path);
            angles.push_back(cand.angle == 0.0 ? direction : direction + cand.angle * te.tube.psi);
            irrational.push_back(irrational_flag(cand.rotation));
        }
        ctx.timed("crossings", [&] { add_crossings(cross, "tube " + std::to_string(c), ctx.grid, images, angles, irrational); });
    }
    ctx.put("tubes", tubes);
    ctx.put("tube_series", series);
    ctx.put("triangles", tri);
    if (ctx.tables.contains("crossings")) {
        Table merged = Table::from_json(ctx.tables["crossings"]);
        const Table fresh = cross;
        for (std::size_t i = 0; i < fresh.size(); ++i) {
            std::vector<ojson> row;
            for (const auto& col : fresh.columns()) row.push_back(fresh.at(i, col));
            merged.add(row);
        }
        ctx.put("crossings", merged);
    } else {
        ctx.put("crossings", cross);
    }
}

void full(Context& ctx) {
    metric_info(ctx);
    spanning_experiment(ctx);
    tube_experiment(ctx);
}

}  // namespace

RunResult run(const std::string& subcommand, const ExperimentConfig& config, int jobs) {
    Context ctx(config, jobs);
    if (subcommand == "metric-info") {
        metric_info(ctx);
    } else if (subcommand == "geodesic") {
        geodesic(ctx);
    } else if (subcommand == "minimal") {
        minimal_experiment(ctx);
    } else if (subcommand == "hedlund") {
        hedlund_experiment(ctx);
    } else if (subcommand == "entropy") {
        entropy_experiment(ctx);
    } else if (subcommand == "spanning") {
        spanning_experiment(ctx);
    } else if (subcommand == "tube") {
        tube_experiment(ctx);
    } else if (subcommand == "full") {
        full(ctx);
    } else {
        throw ConfigError("unknown subcommand '" + subcommand + "'");
    }

    RunResult out;
    out.report = {{"subcommand", subcommand},
                  {"config", ojson::parse(to_json(config).dump())},
                  {"slope_tolerance", kSlopeTolerance},
                  {"constants", ctx.constants},
                  {"tables", ctx.tables}};
    const auto flags = evaluate_flags(out.report);
    out.report["flags"] = flags_to_json(flags);
    out.exit_code = exit_code(flags);
    out.timings = ctx.timings;
    return out;
}

void write_outputs(const RunResult& result, const std::filesystem::path& dir) {
    write_report(result.report, dir);
    std::ofstream out(dir / "timings.json", std::ios::binary);
    out << result.timings.dump(2) << '\n';
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const InstabilityError*>(&e)) return 3;
    return 2;
}

}  // namespace toruslab::harness
