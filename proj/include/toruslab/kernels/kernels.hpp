#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "toruslab/flow/geodesic.hpp"
#include "toruslab/geometry/distance.hpp"

namespace toruslab::kernels {

/// Row-major n x n matrix, 1 iff dbar_T(i, j) <= eps. The diagonal is 1.
struct CloseMatrix {
    std::size_t n = 0;
    std::vector<std::uint8_t> close;

    bool operator()(std::size_t i, std::size_t j) const { return close[i * n + j] != 0; }
};

namespace serial {

void for_each(std::size_t n, const std::function<void(std::size_t)>& body);
CloseMatrix close_matrix(const geometry::Grid& grid, std::span<const flow::GeodesicPath> paths, double T, double eps);
std::vector<double> ball_volumes_at(const geometry::Grid& grid, std::span<const Vec2> centres, double r);

}  // namespace serial

namespace omp {

/// Dynamic schedule over jobs threads. The first exception thrown by a
/// body is rethrown after the loop.
void for_each(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);
CloseMatrix close_matrix(const geometry::Grid& grid, std::span<const flow::GeodesicPath> paths, double T, double eps,
                         int jobs);
std::vector<double> ball_volumes_at(const geometry::Grid& grid, std::span<const Vec2> centres, double r, int jobs);

}  // namespace omp

/// Serial for jobs <= 1, OpenMP otherwise. Results do not depend on jobs.
void for_each(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);
CloseMatrix close_matrix(const geometry::Grid& grid, std::span<const flow::GeodesicPath> paths, double T, double eps,
                         int jobs = 1);
std::vector<double> ball_volumes_at(const geometry::Grid& grid, std::span<const Vec2> centres, double r, int jobs = 1);

/// c_epsilon over the standard centres.
double c_epsilon(const geometry::Grid& grid, double eps, int jobs = 1);

}  // namespace toruslab::kernels
