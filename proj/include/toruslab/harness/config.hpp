#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "toruslab/flow/geodesic.hpp"
#include "toruslab/geometry/grid.hpp"

namespace toruslab::harness {

using nlohmann::json;

struct MetricConfig {
    std::string type = "conformal-fourier";  // or "flat"
    std::vector<geometry::FourierMode> coeffs{{1, 1, 0.15, 0.0}, {1, -1, 0.15, 0.0}};

    friend bool operator==(const MetricConfig&, const MetricConfig&) = default;
};

struct GeodesicParams {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double T = 10.0;

    friend bool operator==(const GeodesicParams&, const GeodesicParams&) = default;
};

struct MinimalParams {
    std::vector<double> directions{0.0, 0.3, 0.7853981633974483, 1.1};
    double span = 40.0;
    int count = 50;  // certified geodesics for the projection and crossing checks

    friend bool operator==(const MinimalParams&, const MinimalParams&) = default;
};

struct HedlundParams {
    int directions = 20;
    int count = 20;
    double R = 40.0;
    double D = -1.0;  // use this value instead of measuring when >= 0

    friend bool operator==(const HedlundParams&, const HedlundParams&) = default;
};

struct EntropyParams {
    double eps = 0.5;
    std::vector<double> T_list{5.0, 10.0, 20.0, 40.0};
    int population = 40;

    friend bool operator==(const EntropyParams&, const EntropyParams&) = default;
};

struct SpanningParams {
    double eps = 0.5;
    std::vector<double> r_list{5.0, 10.0, 20.0, 40.0};
    std::vector<double> witness_r{10.0, 20.0};
    int witnesses = 30;

    friend bool operator==(const SpanningParams&, const SpanningParams&) = default;
};

struct TubeParams {
    std::vector<double> centre_directions{0.0, 0.3, 0.7853981633974483, 1.1, 1.5707963267948966};
    double mu = 0.0;     // beta when 0
    double delta = 0.0;  // min(mu, a) / 10 when 0
    std::vector<double> T_list{5.0, 10.0, 20.0, 40.0};
    double T_max = 60.0;
    int triangles = 30;
    std::vector<double> triangle_deltas{0.1, 0.2};

    friend bool operator==(const TubeParams&, const TubeParams&) = default;
};

struct ExperimentParams {
    GeodesicParams geodesic;
    MinimalParams minimal;
    HedlundParams hedlund;
    EntropyParams entropy;
    SpanningParams spanning;
    TubeParams tube;

    friend bool operator==(const ExperimentParams&, const ExperimentParams&) = default;
};

struct ExperimentConfig {
    MetricConfig metric;
    geometry::GridSettings grid{256, 200.0};
    flow::FlowSettings flow;
    ExperimentParams experiment;
    std::uint64_t seed = 1;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws ConfigError on unknown keys, wrong types or invalid values.
ExperimentConfig config_from_json(const json& j);
json to_json(const ExperimentConfig& c);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Builds the metric; throws ConfigError when the amplitude budget is exceeded.
geometry::MetricField make_metric(const MetricConfig& m);

}  // namespace toruslab::harness
