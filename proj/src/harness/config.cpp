#include "toruslab/harness/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "toruslab/errors.hpp"

namespace toruslab::harness {

namespace {

void require_object(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items()) {
        if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
    }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

void positive(double v, const std::string& what) {
    if (!(v > 0.0)) throw ConfigError(what + " must be positive");
}

void increasing(const std::vector<double>& v, const std::string& what, std::size_t min_size) {
    if (v.size() < min_size) throw ConfigError(what + " needs at least " + std::to_string(min_size) + " values");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0) || (i > 0 && !(v[i] > v[i - 1]))) throw ConfigError(what + " must be positive and increasing");
    }
}

MetricConfig metric_from_json(const json& j) {
    require_object(j, "metric", {"type", "coeffs"});
    MetricConfig m;
    read(j, "type", m.type, "metric");
    if (m.type == "flat") {
        m.coeffs.clear();
        if (j.contains("coeffs") && !j.at("coeffs").empty()) throw ConfigError("flat metric takes no coeffs");
        return m;
    }
    if (m.type != "conformal-fourier") throw ConfigError("metric.type must be 'flat' or 'conformal-fourier'");
    if (j.contains("coeffs")) {
        const auto& c = j.at("coeffs");
        if (!c.is_array()) throw ConfigError("metric.coeffs must be an array");
        m.coeffs.clear();
        for (const auto& row : c) {
            if (!row.is_array() || row.size() != 4 || !row[0].is_number_integer() || !row[1].is_number_integer() ||
                !row[2].is_number() || !row[3].is_number()) {
                throw ConfigError("metric.coeffs rows must be [k1, k2, c, s] with integer k");
            }
            m.coeffs.push_back({row[0].get<int>(), row[1].get<int>(), row[2].get<double>(), row[3].get<double>()});
        }
    }
    return m;
}

}  // namespace

geometry::MetricField make_metric(const MetricConfig& m) {
    if (m.type == "flat") return geometry::MetricField::flat();
    if (m.coeffs.empty()) return geometry::MetricField::flat();
    return geometry::MetricField::conformal(m.coeffs);
}

ExperimentConfig config_from_json(const json& j) {
    require_object(j, "config", {"metric", "grid", "flow", "experiment", "seed"});
    ExperimentConfig c;
    if (j.contains("metric")) c.metric = metric_from_json(j.at("metric"));
    make_metric(c.metric);

    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        require_object(g, "grid", {"resolution", "halfwidth", "graph_resolution", "stencil_radius"});
        read(g, "resolution", c.grid.resolution, "grid");
        read(g, "halfwidth", c.grid.halfwidth, "grid");
        read(g, "graph_resolution", c.grid.graph_resolution, "grid");
        read(g, "stencil_radius", c.grid.stencil_radius, "grid");
    }
    if (c.grid.resolution < 8) throw ConfigError("grid.resolution must be at least 8");
    positive(c.grid.halfwidth, "grid.halfwidth");

    if (j.contains("flow")) {
        const auto& f = j.at("flow");
        require_object(f, "flow", {"step", "sampling", "horizon"});
        read(f, "step", c.flow.step, "flow");
        read(f, "sampling", c.flow.sampling, "flow");
        read(f, "horizon", c.flow.horizon, "flow");
    }
    positive(c.flow.step, "flow.step");
    positive(c.flow.sampling, "flow.sampling");
    if (c.flow.step > 1e-2) throw ConfigError("flow.step must be at most 0.01");

    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }

    if (j.contains("experiment")) {
        const auto& e = j.at("experiment");
        require_object(e, "experiment", {"geodesic", "minimal", "hedlund", "entropy", "spanning", "tube"});
        auto& p = c.experiment;
        if (e.contains("geodesic")) {
            const auto& g = e.at("geodesic");
            require_object(g, "experiment.geodesic", {"x", "y", "theta", "T"});
            read(g, "x", p.geodesic.x, "experiment.geodesic");
            read(g, "y", p.geodesic.y, "experiment.geodesic");
            read(g, "theta", p.geodesic.theta, "experiment.geodesic");
            read(g, "T", p.geodesic.T, "experiment.geodesic");
        }
        if (e.contains("minimal")) {
            const auto& g = e.at("minimal");
            require_object(g, "experiment.minimal", {"directions", "span", "count"});
            read(g, "directions", p.minimal.directions, "experiment.minimal");
            read(g, "span", p.minimal.span, "experiment.minimal");
            read(g, "count", p.minimal.count, "experiment.minimal");
        }
        if (e.contains("hedlund")) {
            const auto& g = e.at("hedlund");
            require_object(g, "experiment.hedlund", {"directions", "count", "R", "D"});
            read(g, "directions", p.hedlund.directions, "experiment.hedlund");
            read(g, "count", p.hedlund.count, "experiment.hedlund");
            read(g, "R", p.hedlund.R, "experiment.hedlund");
            read(g, "D", p.hedlund.D, "experiment.hedlund");
        }
        if (e.contains("entropy")) {
            const auto& g = e.at("entropy");
            require_object(g, "experiment.entropy", {"eps", "T_list", "population"});
            read(g, "eps", p.entropy.eps, "experiment.entropy");
            read(g, "T_list", p.entropy.T_list, "experiment.entropy");
            read(g, "population", p.entropy.population, "experiment.entropy");
        }
        if (e.contains("spanning")) {
            const auto& g = e.at("spanning");
            require_object(g, "experiment.spanning", {"eps", "r_list", "witness_r", "witnesses"});
            read(g, "eps", p.spanning.eps, "experiment.spanning");
            read(g, "r_list", p.spanning.r_list, "experiment.spanning");
            read(g, "witness_r", p.spanning.witness_r, "experiment.spanning");
            read(g, "witnesses", p.spanning.witnesses, "experiment.spanning");
        }
        if (e.contains("tube")) {
            const auto& g = e.at("tube");
            require_object(g, "experiment.tube",
                           {"centre_directions", "mu", "delta", "T_list", "T_max", "triangles", "triangle_deltas"});
            read(g, "centre_directions", p.tube.centre_directions, "experiment.tube");
            read(g, "mu", p.tube.mu, "experiment.tube");
            read(g, "delta", p.tube.delta, "experiment.tube");
            read(g, "T_list", p.tube.T_list, "experiment.tube");
            read(g, "T_max", p.tube.T_max, "experiment.tube");
            read(g, "triangles", p.tube.triangles, "experiment.tube");
            read(g, "triangle_deltas", p.tube.triangle_deltas, "experiment.tube");
        }
    }
    const auto& p = c.experiment;
    positive(p.geodesic.T, "experiment.geodesic.T");
    if (p.minimal.directions.empty()) throw ConfigError("experiment.minimal.directions must not be empty");
    if (p.minimal.span < 20.0) throw ConfigError("experiment.minimal.span must be at least 20");
    if (p.minimal.count < 1) throw ConfigError("experiment.minimal.count must be positive");
    if (p.hedlund.directions < 1 || p.hedlund.count < 1) throw ConfigError("experiment.hedlund counts must be positive");
    if (p.hedlund.R < 20.0) throw ConfigError("experiment.hedlund.R must be at least 20");
    positive(p.entropy.eps, "experiment.entropy.eps");
    increasing(p.entropy.T_list, "experiment.entropy.T_list", 4);
    if (p.entropy.population < 1) throw ConfigError("experiment.entropy.population must be positive");
    positive(p.spanning.eps, "experiment.spanning.eps");
    increasing(p.spanning.r_list, "experiment.spanning.r_list", 4);
    increasing(p.spanning.witness_r, "experiment.spanning.witness_r", 0);
    if (p.spanning.witnesses < 0) throw ConfigError("experiment.spanning.witnesses must be non-negative");
    if (p.tube.centre_directions.empty()) throw ConfigError("experiment.tube.centre_directions must not be empty");
    if (p.tube.mu < 0.0 || p.tube.delta < 0.0) throw ConfigError("experiment.tube mu and delta must be non-negative");
    increasing(p.tube.T_list, "experiment.tube.T_list", 4);
    if (!(p.tube.T_list.back() + 1.0 <= p.tube.T_max)) throw ConfigError("experiment.tube.T_max must exceed T + 1");
    increasing(p.tube.triangle_deltas, "experiment.tube.triangle_deltas", 0);
    if (p.tube.triangles < 1) throw ConfigError("experiment.tube.triangles must be positive");
    return c;
}

json to_json(const ExperimentConfig& c) {
    json coeffs = json::array();
    for (const auto& m : c.metric.coeffs) coeffs.push_back({m.k1, m.k2, m.c, m.s});
    const auto& p = c.experiment;
    return {
        {"metric", {{"type", c.metric.type}, {"coeffs", coeffs}}},
        {"grid",
         {{"resolution", c.grid.resolution},
          {"halfwidth", c.grid.halfwidth},
          {"graph_resolution", c.grid.graph_resolution},
          {"stencil_radius", c.grid.stencil_radius}}},
        {"flow", {{"step", c.flow.step}, {"sampling", c.flow.sampling}, {"horizon", c.flow.horizon}}},
        {"experiment",
         {{"geodesic", {{"x", p.geodesic.x}, {"y", p.geodesic.y}, {"theta", p.geodesic.theta}, {"T", p.geodesic.T}}},
          {"minimal", {{"directions", p.minimal.directions}, {"span", p.minimal.span}, {"count", p.minimal.count}}},
          {"hedlund",
           {{"directions", p.hedlund.directions}, {"count", p.hedlund.count}, {"R", p.hedlund.R}, {"D", p.hedlund.D}}},
          {"entropy", {{"eps", p.entropy.eps}, {"T_list", p.entropy.T_list}, {"population", p.entropy.population}}},
          {"spanning",
           {{"eps", p.spanning.eps},
            {"r_list", p.spanning.r_list},
            {"witness_r", p.spanning.witness_r},
            {"witnesses", p.spanning.witnesses}}},
          {"tube",
           {{"centre_directions", p.tube.centre_directions},
            {"mu", p.tube.mu},
            {"delta", p.tube.delta},
            {"T_list", p.tube.T_list},
            {"T_max", p.tube.T_max},
            {"triangles", p.tube.triangles},
            {"triangle_deltas", p.tube.triangle_deltas}}}}},
        {"seed", c.seed},
    };
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

}  // namespace toruslab::harness
