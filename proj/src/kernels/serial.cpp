#include <algorithm>

#include "toruslab/errors.hpp"
#include "toruslab/kernels/kernels.hpp"

namespace toruslab::kernels {

namespace serial {

void for_each(std::size_t n, const std::function<void(std::size_t)>& body) {
    for (std::size_t i = 0; i < n; ++i) body(i);
}

CloseMatrix close_matrix(const geometry::Grid& grid, std::span<const flow::GeodesicPath> paths, double T, double eps) {
    const std::size_t n = paths.size();
    CloseMatrix m{n, std::vector<std::uint8_t>(n * n, 0)};
    for (std::size_t i = 0; i < n; ++i) {
        m.close[i * n + i] = 1;
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::uint8_t c = flow::dynamical_distance_exceeds(grid, paths[i], paths[j], T, eps) ? 0 : 1;
            m.close[i * n + j] = c;
            m.close[j * n + i] = c;
        }
    }
    return m;
}

std::vector<double> ball_volumes_at(const geometry::Grid& grid, std::span<const Vec2> centres, double r) {
    std::vector<double> out(centres.size());
    for (std::size_t i = 0; i < centres.size(); ++i) out[i] = geometry::ball_volume(grid, centres[i], r);
    return out;
}

}  // namespace serial

void for_each(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
    if (jobs <= 1) {
        serial::for_each(n, body);
    } else {
        omp::for_each(n, jobs, body);
    }
}

CloseMatrix close_matrix(const geometry::Grid& grid, std::span<const flow::GeodesicPath> paths, double T, double eps,
                         int jobs) {
    return jobs <= 1 ? serial::close_matrix(grid, paths, T, eps) : omp::close_matrix(grid, paths, T, eps, jobs);
}

std::vector<double> ball_volumes_at(const geometry::Grid& grid, std::span<const Vec2> centres, double r, int jobs) {
    return jobs <= 1 ? serial::ball_volumes_at(grid, centres, r) : omp::ball_volumes_at(grid, centres, r, jobs);
}

double c_epsilon(const geometry::Grid& grid, double eps, int jobs) {
    if (!(eps > 0.0)) throw PreconditionError("c_epsilon needs eps > 0");
    const auto centres = geometry::c_epsilon_centres();
    const auto v = ball_volumes_at(grid, centres, 0.5 * eps, jobs);
    return *std::min_element(v.begin(), v.end());
}

}  // namespace toruslab::kernels
