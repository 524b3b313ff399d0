#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "toruslab/flow/geodesic.hpp"
#include "toruslab/kernels/kernels.hpp"

namespace toruslab::entropy {

using flow::GeodesicPath;
using flow::PhasePoint;
using geometry::Grid;

/// Greedy maximal separated set: scan in index order, keep i iff it is not
/// close to any kept index. Returns kept indices.
std::vector<std::size_t> separated_from(const kernels::CloseMatrix& close);

/// Greedy cover: repeatedly take the index covering most uncovered points
/// (lowest index on ties) until everything is covered.
std::vector<std::size_t> spanning_from(const kernels::CloseMatrix& close);

/// Paths must cover [0, T + 1]. Throws PreconditionError for eps <= 0.
std::vector<std::size_t> separated_set(const Grid& grid, std::span<const GeodesicPath> paths, double T, double eps,
                                       int jobs = 1);
std::vector<std::size_t> spanning_set(const Grid& grid, std::span<const GeodesicPath> paths, double T, double eps,
                                      int jobs = 1);

/// Phase point variants; every point is integrated to T + 1.
std::vector<std::size_t> separated_set(const Grid& grid, std::span<const PhasePoint> points, double T, double eps,
                                       const flow::FlowSettings& settings = {}, int jobs = 1);
std::vector<std::size_t> spanning_set(const Grid& grid, std::span<const PhasePoint> points, double T, double eps,
                                      const flow::FlowSettings& settings = {}, int jobs = 1);

struct SeriesPoint {
    double T = 0.0;
    std::size_t separated = 0;       // greedy r_T at eps
    std::size_t spanning = 0;        // greedy s_T at eps
    std::size_t separated_2eps = 0;  // greedy r_T at 2 eps
};

struct Slopes {
    double linear = 0.0;  // d log r_T / d T
    double log = 0.0;     // d log r_T / d log T
};

struct EntropyReport {
    double eps = 0.0;
    std::vector<SeriesPoint> series;
    Slopes slopes;
    std::uint64_t metric_hash = 0;
    std::string sample;
};

/// Least-squares slopes over the tail half of the series (indices >= n/2).
/// Throws PreconditionError with fewer than 4 values or T spanning less
/// than a factor 4.
Slopes entropy_estimate(std::span<const double> T, std::span<const double> counts);
Slopes entropy_estimate(const EntropyReport& report);

/// Separated and spanning cardinalities of one population for each T.
/// Paths must cover [0, max T + 1].
EntropyReport entropy_series(const Grid& grid, std::span<const GeodesicPath> paths, double eps,
                             std::span<const double> T_list, int jobs = 1);

}  // namespace toruslab::entropy
