#include "toruslab/entropy/bowen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "toruslab/errors.hpp"

namespace toruslab::entropy {

std::vector<std::size_t> separated_from(const kernels::CloseMatrix& close) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < close.n; ++i) {
        const bool blocked = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) { return close(i, k); });
        if (!blocked) kept.push_back(i);
    }
    return kept;
}

std::vector<std::size_t> spanning_from(const kernels::CloseMatrix& close) {
    std::vector<std::uint8_t> covered(close.n, 0);
    std::size_t remaining = close.n;
    std::vector<std::size_t> centres;
    while (remaining > 0) {
        std::size_t best = 0, best_gain = 0;
        for (std::size_t i = 0; i < close.n; ++i) {
            std::size_t gain = 0;
            for (std::size_t j = 0; j < close.n; ++j) gain += !covered[j] && close(i, j);
            if (gain > best_gain) {
                best = i;
                best_gain = gain;
            }
        }
        centres.push_back(best);
        for (std::size_t j = 0; j < close.n; ++j) {
            if (!covered[j] && close(best, j)) {
                covered[j] = 1;
                --remaining;
            }
        }
    }
    return centres;
}

namespace {

void check_eps(double eps) {
    if (!(eps > 0.0)) throw PreconditionError("eps must be positive");
}

std::vector<GeodesicPath> integrate_all(const Grid& grid, std::span<const PhasePoint> points, double T,
                                        const flow::FlowSettings& settings, int jobs) {
    std::vector<GeodesicPath> paths(points.size());
    kernels::for_each(points.size(), jobs,
                      [&](std::size_t i) { paths[i] = flow::integrate(grid.metric(), points[i], T + 1.0, settings); });
    return paths;
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

std::vector<std::size_t> separated_set(const Grid& grid, std::span<const GeodesicPath> paths, double T, double eps,
                                       int jobs) {
    check_eps(eps);
    return separated_from(kernels::close_matrix(grid, paths, T, eps, jobs));
}

std::vector<std::size_t> spanning_set(const Grid& grid, std::span<const GeodesicPath> paths, double T, double eps,
                                      int jobs) {
    check_eps(eps);
    return spanning_from(kernels::close_matrix(grid, paths, T, eps, jobs));
}

std::vector<std::size_t> separated_set(const Grid& grid, std::span<const PhasePoint> points, double T, double eps,
                                       const flow::FlowSettings& settings, int jobs) {
    check_eps(eps);
    const auto paths = integrate_all(grid, points, T, settings, jobs);
    return separated_set(grid, paths, T, eps, jobs);
}

std::vector<std::size_t> spanning_set(const Grid& grid, std::span<const PhasePoint> points, double T, double eps,
                                      const flow::FlowSettings& settings, int jobs) {
    check_eps(eps);
    const auto paths = integrate_all(grid, points, T, settings, jobs);
    return spanning_set(grid, paths, T, eps, jobs);
}

Slopes entropy_estimate(std::span<const double> T, std::span<const double> counts) {
    if (T.size() != counts.size()) throw PreconditionError("series lengths differ");
    if (T.size() < 4) throw PreconditionError("entropy_estimate needs at least 4 values");
    const auto [lo, hi] = std::minmax_element(T.begin(), T.end());
    if (!(*lo > 0.0) || *hi < 4.0 * *lo) throw PreconditionError("T values must span at least a factor 4");
    if (!std::all_of(counts.begin(), counts.end(), [](double c) { return c > 0.0; })) {
        throw PreconditionError("cardinalities must be positive");
    }
    std::vector<double> t, logt, logr;
    for (std::size_t i = T.size() / 2; i < T.size(); ++i) {
        t.push_back(T[i]);
        logt.push_back(std::log(T[i]));
        logr.push_back(std::log(counts[i]));
    }
    return {fit_slope(t, logr), fit_slope(logt, logr)};
}

Slopes entropy_estimate(const EntropyReport& report) {
    std::vector<double> T, r;
    for (const auto& p : report.series) {
        T.push_back(p.T);
        r.push_back(static_cast<double>(p.separated));
    }
    return entropy_estimate(T, r);
}

EntropyReport entropy_series(const Grid& grid, std::span<const GeodesicPath> paths, double eps,
                             std::span<const double> T_list, int jobs) {
    check_eps(eps);
    EntropyReport report;
    report.eps = eps;
    report.metric_hash = grid.metric().hash();
    for (double T : T_list) {
        const auto close = kernels::close_matrix(grid, paths, T, eps, jobs);
        const auto close2 = kernels::close_matrix(grid, paths, T, 2.0 * eps, jobs);
        report.series.push_back({T, separated_from(close).size(), spanning_from(close).size(),
                                 separated_from(close2).size()});
    }
    if (report.series.size() >= 4) report.slopes = entropy_estimate(report);
    return report;
}

}  // namespace toruslab::entropy
