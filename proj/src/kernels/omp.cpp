#include <exception>
#include <mutex>

#include "toruslab/kernels/kernels.hpp"

namespace toruslab::kernels::omp {

namespace {

class ErrorSlot {
public:
    void capture() {
        std::lock_guard lock(mutex_);
        if (!error_) error_ = std::current_exception();
    }
    void rethrow() const {
        if (error_) std::rethrow_exception(error_);
    }

private:
    std::mutex mutex_;
    std::exception_ptr error_;
};

}  // namespace

void for_each(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
    ErrorSlot error;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            error.capture();
        }
    }
    error.rethrow();
}

CloseMatrix close_matrix(const geometry::Grid& grid, std::span<const flow::GeodesicPath> paths, double T, double eps,
                         int jobs) {
    const std::size_t n = paths.size();
    CloseMatrix m{n, std::vector<std::uint8_t>(n * n, 0)};
    for (std::size_t i = 0; i < n; ++i) m.close[i * n + i] = 1;
    // Row i writes only entries (i, j) and (j, i) with j > i.
    for_each(n, jobs, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::uint8_t c = flow::dynamical_distance_exceeds(grid, paths[i], paths[j], T, eps) ? 0 : 1;
            m.close[i * n + j] = c;
            m.close[j * n + i] = c;
        }
    });
    return m;
}

std::vector<double> ball_volumes_at(const geometry::Grid& grid, std::span<const Vec2> centres, double r, int jobs) {
    std::vector<double> out(centres.size());
    for_each(centres.size(), jobs, [&](std::size_t i) { out[i] = geometry::ball_volume(grid, centres[i], r); });
    return out;
}

}  // namespace toruslab::kernels::omp
