#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <optional>

#include "toruslab/errors.hpp"
#include "toruslab/harness/pipeline.hpp"

namespace th = toruslab::harness;

namespace {

// "a/b" is the slope a/b, i.e. direction (b, a); anything else is an angle in radians.
double parse_direction(const std::string& s) {
    const auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return std::stod(s);
        return std::atan2(std::stod(s.substr(0, slash)), std::stod(s.substr(slash + 1)));
    } catch (const std::logic_error&) {
        throw toruslab::ConfigError("cannot parse direction '" + s + "'");
    }
}

template <class T>
void override_with(const std::optional<T>& v, T& target) {
    if (v) target = *v;
}

void print_flags(const th::ojson& flags) {
    for (const auto& f : flags) {
        std::cout << (f["pass"].get<bool>() ? "PASS " : "FAIL ") << f["name"].get<std::string>() << ": "
                  << f["detail"].get<std::string>() << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimal geodesics and geodesic-flow entropy on conformal tori"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--seed", seed, "overrides the config seed");

    for (const auto& name : {"metric-info", "full"}) app.add_subcommand(name, "");
    app.get_subcommand("metric-info")->description("metric constants A, a, C_eps and tolerances");
    app.get_subcommand("full")->description("A, D, spanning series, tubes and the combined verdict");

    std::optional<double> gx, gy, gtheta, gT;
    auto* geo = app.add_subcommand("geodesic", "integrate one geodesic");
    geo->add_option("--x", gx);
    geo->add_option("--y", gy);
    geo->add_option("--theta", gtheta);
    geo->add_option("--T", gT);

    std::vector<std::string> mdirs;
    std::optional<double> mspan;
    std::optional<int> mcount;
    auto* mini = app.add_subcommand("minimal", "sample certified minimal geodesics");
    mini->add_option("--direction", mdirs, "slope a/b or angle in radians (repeatable)");
    mini->add_option("--span", mspan);
    mini->add_option("--count", mcount);

    std::optional<int> hdirs, hcount;
    std::optional<double> hR, hD;
    auto* hed = app.add_subcommand("hedlund", "measure the Hedlund constant D");
    hed->add_option("--directions", hdirs);
    hed->add_option("--count", hcount);
    hed->add_option("--R", hR);
    hed->add_option("--D", hD, "use this D instead of measuring");

    std::optional<double> eeps;
    std::vector<double> eT;
    std::optional<int> epop;
    auto* ent = app.add_subcommand("entropy", "separated and spanning series of minimal initial conditions");
    ent->add_option("--eps", eeps);
    ent->add_option("--T-list", eT)->delimiter(',');
    ent->add_option("--population", epop);

    std::optional<double> seps;
    std::vector<double> sr, swr;
    std::optional<int> switn;
    auto* span = app.add_subcommand("spanning", "spanning construction series and witness check");
    span->add_option("--r-list", sr)->delimiter(',');
    span->add_option("--eps", seps);
    span->add_option("--witnesses", switn);
    span->add_option("--witness-r", swr)->delimiter(',');

    std::vector<std::string> tdirs;
    std::optional<double> tmu, tdelta;
    std::vector<double> tT;
    auto* tube = app.add_subcommand("tube", "entropy inside tubes around minimal geodesics");
    tube->add_option("--center-direction", tdirs, "slope a/b or angle in radians (repeatable)");
    tube->add_option("--mu", tmu, "tube radius (beta when 0)");
    tube->add_option("--delta", tdelta, "separation (min(mu, a)/10 when 0)");
    tube->add_option("--T-list", tT)->delimiter(',');

    std::string report_path;
    auto* rep = app.add_subcommand("report", "re-evaluate the flags of a stored report");
    rep->add_option("report", report_path, "report.json (default: <out>/report.json)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*rep) {
            const auto report = th::read_report(report_path.empty() ? std::filesystem::path(out_dir) / "report.json"
                                                                    : std::filesystem::path(report_path));
            const auto flags = th::evaluate_flags(report);
            const auto fresh = th::flags_to_json(flags);
            print_flags(fresh);
            if (report.contains("flags") && report["flags"] != fresh) {
                std::cout << "stored flags differ from the recomputed ones\n";
            }
            return th::exit_code(flags);
        }

        th::ExperimentConfig cfg = config_path.empty() ? th::ExperimentConfig{} : th::load_config(config_path);
        if (seed) cfg.seed = *seed;
        auto& e = cfg.experiment;
        override_with(gx, e.geodesic.x);
        override_with(gy, e.geodesic.y);
        override_with(gtheta, e.geodesic.theta);
        override_with(gT, e.geodesic.T);
        if (!mdirs.empty()) {
            e.minimal.directions.clear();
            for (const auto& d : mdirs) e.minimal.directions.push_back(parse_direction(d));
        }
        override_with(mspan, e.minimal.span);
        override_with(mcount, e.minimal.count);
        override_with(hdirs, e.hedlund.directions);
        override_with(hcount, e.hedlund.count);
        override_with(hR, e.hedlund.R);
        override_with(hD, e.hedlund.D);
        override_with(eeps, e.entropy.eps);
        if (!eT.empty()) e.entropy.T_list = eT;
        override_with(epop, e.entropy.population);
        override_with(seps, e.spanning.eps);
        if (!sr.empty()) e.spanning.r_list = sr;
        if (!swr.empty()) e.spanning.witness_r = swr;
        override_with(switn, e.spanning.witnesses);
        if (!tdirs.empty()) {
            e.tube.centre_directions.clear();
            for (const auto& d : tdirs) e.tube.centre_directions.push_back(parse_direction(d));
        }
        override_with(tmu, e.tube.mu);
        override_with(tdelta, e.tube.delta);
        if (!tT.empty()) e.tube.T_list = tT;
        cfg = th::config_from_json(th::to_json(cfg));

        const std::string sub = app.get_subcommands().front()->get_name();
        const auto result = th::run(sub, cfg, jobs);
        th::write_outputs(result, out_dir);
        print_flags(result.report["flags"]);
        std::cout << "report written to " << (std::filesystem::path(out_dir) / "report.json").string() << '\n';
        return result.exit_code;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return th::exit_code_for(ex);
    }
}
