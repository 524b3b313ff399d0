// Acceptance run: one PASS/FAIL line per criterion.

#include <CLI11.hpp>
#include <chrono>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "toruslab/entropy/spanning.hpp"
#include "toruslab/flow/geodesic.hpp"
#include "toruslab/geometry/distance.hpp"
#include "toruslab/harness/pipeline.hpp"

using namespace toruslab;
using harness::ExperimentConfig;
using harness::ojson;
using harness::Table;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return os.str();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail += (detail.empty() ? "" : "; ") + std::string(ok ? "" : "NOT ") + what;
    }
};

ExperimentConfig flat_config() {
    ExperimentConfig c;
    c.metric.type = "flat";
    c.metric.coeffs.clear();
    c.grid.halfwidth = 250.0;
    return c;
}

ExperimentConfig bumpy_config() { return ExperimentConfig{}; }

ExperimentConfig mixed_config() {
    ExperimentConfig c;
    c.metric.coeffs = {{2, 0, 0.1, 0.05}, {0, 3, -0.08, 0.0}, {1, 2, 0.05, 0.1}};
    return c;
}

const ojson* find_flag(const ojson& report, const std::string& name) {
    for (const auto& f : report["flags"]) {
        if (f["name"] == name) return &f;
    }
    return nullptr;
}

void require_flag(Outcome& o, const std::string& label, const ojson& report, const std::string& name) {
    const ojson* f = find_flag(report, name);
    if (!f) {
        o.require(false, label + " " + name + " present");
        return;
    }
    o.require((*f)["pass"].get<bool>(), label + " " + name + " (" + (*f)["detail"].get<std::string>() + ")");
}

class Acceptance {
public:
    Acceptance(std::filesystem::path out, int jobs) : out_(std::move(out)), jobs_(jobs) {}

    const harness::RunResult& full(const std::string& label) {
        auto it = full_.find(label);
        if (it != full_.end()) return it->second;
        const auto start = Clock::now();
        auto r = harness::run("full", label == "flat" ? flat_config() : bumpy_config(), jobs_);
        full_seconds_[label] = seconds_since(start);
        harness::write_outputs(r, out_ / ("full_" + label));
        return full_.emplace(label, std::move(r)).first->second;
    }

    double full_seconds(const std::string& label) const { return full_seconds_.at(label); }

    const harness::RunResult& minimal(const std::string& label) {
        auto it = minimal_.find(label);
        if (it != minimal_.end()) return it->second;
        ExperimentConfig c = label == "bumpy" ? bumpy_config() : mixed_config();
        c.experiment.minimal.count = 64;
        c.experiment.minimal.span = 40.0;
        auto r = harness::run("minimal", c, jobs_);
        harness::write_outputs(r, out_ / ("minimal_" + label));
        return minimal_.emplace(label, std::move(r)).first->second;
    }

    int jobs() const { return jobs_; }

private:
    std::filesystem::path out_;
    int jobs_;
    std::map<std::string, harness::RunResult> full_, minimal_;
    std::map<std::string, double> full_seconds_;
};

// Flat metric: straight geodesics, A = 1, D ~ 0, beta formula and flat spanning growth.
Outcome criterion1(Acceptance& acc) {
    Outcome o;
    const auto cfg = flat_config();
    const geometry::Grid grid(geometry::MetricField::flat(), cfg.grid);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    const double T = 50.0;
    for (int k = 0; k < 8; ++k) {
        const flow::PhasePoint v{{u(rng), u(rng)}, 2.0 * std::numbers::pi * u(rng)};
        const auto path = flow::integrate(grid.metric(), v, T, cfg.flow);
        const Vec2 dir{std::cos(v.theta), std::sin(v.theta)};
        for (const auto& s : path.samples()) worst = std::max(worst, distance(s.x, v.x + s.t * dir));
    }
    o.require(worst <= 1e-9 * T, "geodesics straight (" + fmt(worst) + " <= " + fmt(1e-9 * T) + ")");

    const double A = grid.equivalence_constant();
    o.require(A == 1.0, "A = 1 (" + fmt(A) + ")");
    const auto hed = harness::run("hedlund", cfg, acc.jobs());
    const double D = hed.report["constants"]["D"].get<double>();
    o.require(D <= 1e-6, "D <= 1e-6 (" + fmt(D) + ")");

    const double a = geometry::fundamental_domain_diameter(grid);
    const double eps = cfg.experiment.spanning.eps;
    const double exact = 2.0 * (a + 2.0 * eps);
    const double formula = entropy::beta_constant(0.0, A, a, eps).beta;
    const double measured = entropy::beta_constant(D, A, a, eps).beta;
    o.require(std::abs(formula - exact) <= 1e-12 && std::abs(measured - exact) <= 1e-5,
              "beta = 2(a + 2 eps) = " + fmt(exact) + " (measured " + fmt(measured) + ")");

    const std::vector<double> r_list{25.0, 50.0, 100.0, 200.0};
    const auto series = entropy::spanning_entropy_series(grid, eps, r_list, a, A, D, acc.jobs());
    o.require(series.slope_linear <= 0.01, "spanning slope over r = 25..200 <= 0.01 (" + fmt(series.slope_linear) + ")");
    return o;
}

// Christoffel symbols against central differences of the metric tensor.
Outcome criterion2(Acceptance&) {
    Outcome o;
    const std::vector<std::pair<std::string, geometry::MetricField>> metrics{
        {"flat", geometry::MetricField::flat()},
        {"bumpy", geometry::MetricField::bumpy_default()},
        {"mixed", harness::make_metric(mixed_config().metric)}};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    constexpr double h = 1e-5;
    for (const auto& [name, m] : metrics) {
        double worst = 0.0;
        for (int n = 0; n < 1000; ++n) {
            const Vec2 x{u(rng), u(rng)};
            const auto comp = [](const Mat2& g, int i, int j) { return i == 0 ? (j == 0 ? g.a : g.b) : (j == 0 ? g.c : g.d); };
            // dg[l](i, j) = d g_ij / d x_l
            std::array<Mat2, 2> dg;
            for (int l = 0; l < 2; ++l) {
                const Vec2 e = l == 0 ? Vec2{h, 0.0} : Vec2{0.0, h};
                dg[l] = (1.0 / (2.0 * h)) * (m.eval(x + e) - m.eval(x - e));
            }
            const Mat2 g = m.eval(x);
            const double det = g.a * g.d - g.b * g.c;
            const Mat2 inv{g.d / det, -g.b / det, -g.c / det, g.a / det};
            const auto gamma = m.christoffel(x);
            for (int k = 0; k < 2; ++k) {
                for (int i = 0; i < 2; ++i) {
                    for (int j = 0; j < 2; ++j) {
                        double s = 0.0;
                        for (int l = 0; l < 2; ++l) {
                            s += 0.5 * comp(inv, k, l) * (comp(dg[i], j, l) + comp(dg[j], i, l) - comp(dg[l], i, j));
                        }
                        worst = std::max(worst, std::abs(s - gamma[k][i][j]));
                    }
                }
            }
        }
        o.require(worst <= 1e-6, name + " max error " + fmt(worst));
    }
    return o;
}

// Packing inequality for every probe in F^eps.
Outcome criterion3(Acceptance& acc) {
    Outcome o;
    const std::vector<double> r_list{5.0, 10.0, 20.0, 40.0};
    for (const auto& [name, cfg] : {std::pair{std::string("flat"), flat_config()}, std::pair{std::string("bumpy"), bumpy_config()}}) {
        const geometry::Grid grid(harness::make_metric(cfg.metric), cfg.grid);
        const double a = geometry::fundamental_domain_diameter(grid);
        const double D = name == "flat" ? 0.0 : acc.full("bumpy").report["constants"]["D"].get<double>();
        for (double eps : {0.25, 0.5}) {
            const auto s = entropy::spanning_entropy_series(grid, eps, r_list, a, grid.equivalence_constant(), D, acc.jobs());
            double margin = geometry::kInfinity;
            std::size_t rejected = 0;
            for (const auto& row : s.rows) {
                margin = std::min(margin, row.volume_min / (static_cast<double>(row.shell) * s.c_eps));
                rejected += row.shell_rejected;
            }
            o.require(s.ball_ok, name + " eps " + fmt(eps) + " (min vol / (#F_r C_eps) = " + fmt(margin) +
                                     ", shell rejects " + std::to_string(rejected) + ")");
        }
    }
    return o;
}

// Spanning property on the bumpy metric.
Outcome criterion4(Acceptance& acc) {
    Outcome o;
    const auto& r = acc.full("bumpy");
    const Table w = Table::from_json(r.report["tables"]["spanning_witnesses"]);
    std::map<double, std::size_t> per_r;
    for (std::size_t i = 0; i < w.size(); ++i) ++per_r[w.at(i, "r").get<double>()];
    for (double rr : {10.0, 20.0}) {
        o.require(per_r[rr] >= 30, "30 witnesses at r = " + fmt(rr) + " (" + std::to_string(per_r[rr]) + ")");
    }
    const auto& c = r.report["constants"];
    o.detail += "; A " + fmt(c["A"].get<double>()) + ", D " + fmt(c["D"].get<double>()) + ", beta " +
                fmt(c["beta"].get<double>());
    require_flag(o, "bumpy", r.report, "spanning-cover");
    return o;
}

// Projection monotonicity on two metrics.
Outcome criterion5(Acceptance& acc) {
    Outcome o;
    for (const char* name : {"bumpy", "mixed"}) {
        const auto& r = acc.minimal(name);
        const Table t = Table::from_json(r.report["tables"]["minimal_records"]);
        std::size_t certified = 0;
        for (std::size_t i = 0; i < t.size(); ++i) certified += t.at(i, "certified").get<bool>();
        o.require(certified >= 50, std::string(name) + " certified " + std::to_string(certified) + " >= 50");
        require_flag(o, name, r.report, "projection-monotone");
    }
    return o;
}

// Non-crossing across every experiment that records pairs.
Outcome criterion6(Acceptance& acc) {
    Outcome o;
    for (const char* name : {"bumpy", "mixed"}) require_flag(o, std::string("minimal ") + name, acc.minimal(name).report, "non-crossing");
    for (const char* name : {"flat", "bumpy"}) require_flag(o, std::string("tubes ") + name, acc.full(name).report, "non-crossing");
    return o;
}

// Spanning growth and the volume curve on the bumpy metric.
Outcome criterion7(Acceptance& acc) {
    Outcome o;
    const auto& r = acc.full("bumpy");
    require_flag(o, "bumpy", r.report, "spanning-slope");
    require_flag(o, "bumpy", r.report, "volume-rate-decreasing");
    const Table t = Table::from_json(r.report["tables"]["spanning_series"]);
    o.detail += "; volume rate at r = 40: " + fmt(t.at(t.size() - 1, "volume_rate").get<double>());
    return o;
}

// Growth bound inside five tubes.
Outcome criterion8(Acceptance& acc) {
    Outcome o;
    for (const char* name : {"flat", "bumpy"}) {
        const auto& r = acc.full(name);
        const Table tubes = Table::from_json(r.report["tables"]["tubes"]);
        o.require(tubes.size() >= 5, std::string(name) + " " + std::to_string(tubes.size()) + " centres");
        const Table s = Table::from_json(r.report["tables"]["tube_series"]);
        std::set<double> Ts;
        for (std::size_t i = 0; i < s.size(); ++i) Ts.insert(s.at(i, "T").get<double>());
        o.require(Ts.count(10.0) && Ts.count(20.0) && Ts.count(40.0), std::string(name) + " T in {10, 20, 40}");
        require_flag(o, name, r.report, "tube-growth-bound");
        require_flag(o, name, r.report, "tube-slope");
    }
    return o;
}

// Triangle areas and side lengths.
Outcome criterion9(Acceptance& acc) {
    Outcome o;
    for (const char* name : {"flat", "bumpy"}) {
        const auto& r = acc.full(name);
        const Table t = Table::from_json(r.report["tables"]["triangles"]);
        for (double delta : {0.1, 0.2}) {
            std::size_t n = 0;
            double C2 = geometry::kInfinity;
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (t.at(i, "delta").get<double>() != delta) continue;
                ++n;
                C2 = std::min(C2, t.at(i, "area").get<double>());
            }
            o.require(n >= 100 && C2 > 0.0, std::string(name) + " delta " + fmt(delta) + ": " + std::to_string(n) +
                                                " triangles, C2 " + fmt(C2));
        }
        require_flag(o, name, r.report, "triangle-area");
    }
    return o;
}

// Combined verdict, determinism and runtime.
Outcome criterion10(Acceptance& acc, int jobs) {
    Outcome o;
    for (const char* name : {"flat", "bumpy"}) {
        const auto& r = acc.full(name);
        require_flag(o, name, r.report, "bowen-combination");
        const auto start = Clock::now();
        const auto again = harness::run("full", std::string(name) == "flat" ? flat_config() : bumpy_config(), jobs);
        const double t = seconds_since(start);
        o.require(again.report.dump() == r.report.dump(), std::string(name) + " rerun byte-identical");
        o.require(t <= 7200.0, std::string(name) + " end-to-end " + fmt(t) + " s <= 7200 s");
    }
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria 1-10"};
    std::string out = "acceptance_out";
    int jobs = 1;
    std::vector<int> only;
    app.add_option("--out", out, "directory for the intermediate reports");
    app.add_option("--jobs", jobs)->check(CLI::PositiveNumber);
    app.add_option("--only", only, "run only these criteria")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    Acceptance acc(out, jobs);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"flat analytic anchor", [&] { return criterion1(acc); }},
        {"Christoffel symbols vs finite differences", [&] { return criterion2(acc); }},
        {"packing inequality", [&] { return criterion3(acc); }},
        {"spanning property on the bumpy metric", [&] { return criterion4(acc); }},
        {"projection monotone", [&] { return criterion5(acc); }},
        {"non-crossing", [&] { return criterion6(acc); }},
        {"spanning growth and volume curve", [&] { return criterion7(acc); }},
        {"growth bound inside tubes", [&] { return criterion8(acc); }},
        {"triangle area lower bound", [&] { return criterion9(acc); }},
        {"combined verdict", [&] { return criterion10(acc, jobs); }},
    };

    std::filesystem::create_directories(out);
    std::ofstream summary(std::filesystem::path(out) / "summary.txt");
    auto emit = [&](const std::string& line) {
        std::cout << line << std::endl;
        summary << line << '\n' << std::flush;
    };

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto start = Clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("error: ") + e.what();
        }
        failed += !o.pass;
        emit("criterion " + std::to_string(id) + " " + (o.pass ? "PASS" : "FAIL") + " [" + criteria[k].first + ", " +
             fmt(seconds_since(start)) + " s]: " + o.detail);
    }
    emit(failed ? std::to_string(failed) + " criteria failed" : "all criteria passed");
    return failed ? 1 : 0;
}
