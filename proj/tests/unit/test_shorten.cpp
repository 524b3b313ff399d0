#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "toruslab/geometry/length.hpp"
#include "toruslab/minimal/shorten.hpp"

using namespace toruslab;
using namespace toruslab::minimal;
using geometry::MetricField;

namespace {

Mat2 column_fd(const MetricField& m, Vec2 p, Vec2 q, bool vary_p, bool grad_of_q, double h) {
    auto grad = [&](Vec2 pp, Vec2 qq) {
        const std::vector<Vec2> seg{pp, qq};
        return discrete_length_gradient(m, seg)[grad_of_q ? 1 : 0];
    };
    Vec2 col[2];
    for (int c = 0; c < 2; ++c) {
        const Vec2 e = c == 0 ? Vec2{h, 0.0} : Vec2{0.0, h};
        const Vec2 gp = vary_p ? grad(p + e, q) : grad(p, q + e);
        const Vec2 gm = vary_p ? grad(p - e, q) : grad(p, q - e);
        col[c] = (1.0 / (2.0 * h)) * (gp - gm);
    }
    return {col[0].x, col[1].x, col[0].y, col[1].y};
}

double max_abs(const Mat2& a) { return std::max({std::abs(a.a), std::abs(a.b), std::abs(a.c), std::abs(a.d)}); }

}  // namespace

TEST(Shorten, FlatZigzagBecomesStraight) {
    const auto m = MetricField::flat();
    const std::vector<Vec2> zig{{0.0, 0.0}, {1.0, 0.5}, {2.0, -0.5}, {3.0, 0.5}, {4.0, 0.0}};
    const auto r = shorten(m, resample(zig, kShortenSpacing));
    EXPECT_NEAR(r.length, 4.0, 1e-4);
    EXPECT_EQ(r.polyline.front(), zig.front());
    EXPECT_EQ(r.polyline.back(), zig.back());
}

TEST(Shorten, GeodesicIsFixedPoint) {
    const auto m = MetricField::flat();
    const auto line = resample(std::vector<Vec2>{{0.0, 0.0}, {2.0, 1.0}}, kShortenSpacing);
    const auto r = shorten(m, line);
    ASSERT_EQ(r.polyline.size(), line.size());
    for (std::size_t i = 0; i < line.size(); ++i) EXPECT_LT(distance(r.polyline[i], line[i]), 1e-10);
}

TEST(Shorten, BumpyMonotoneAndConverged) {
    const auto m = MetricField::bumpy_default();
    std::mt19937_64 rng(11);
    std::normal_distribution<double> noise(0.0, 0.05);
    auto chord = resample(std::vector<Vec2>{{0.1, 0.2}, {3.3, 1.7}}, kShortenSpacing);
    for (std::size_t i = 1; i + 1 < chord.size(); ++i) chord[i] += Vec2{noise(rng), noise(rng)};
    const double before = discrete_length(m, chord);
    const auto r = shorten(m, chord);
    EXPECT_LE(r.length, before);
    EXPECT_DOUBLE_EQ(r.initial_length, before);
    const auto again = shorten(m, r.polyline);
    EXPECT_LE(again.length, r.length);
    EXPECT_LT(r.length - again.length, 1e-8);
}

TEST(Shorten, LengthNeverIncreasesPerSweep) {
    const auto m = MetricField::bumpy_default();
    auto chord = resample(std::vector<Vec2>{{0.0, 0.0}, {2.0, 0.3}}, kShortenSpacing);
    for (std::size_t i = 1; i + 1 < chord.size(); ++i) chord[i].y += 0.2 * std::sin(7.0 * i);
    double prev = discrete_length(m, chord);
    for (int sweeps = 1; sweeps <= 8; ++sweeps) {
        const auto r = shorten(m, chord, sweeps);
        EXPECT_LE(r.length, prev + 1e-15);
        prev = r.length;
    }
}

TEST(Shorten, DiscreteLengthMatchesCurveLength) {
    const auto m = MetricField::bumpy_default();
    const std::vector<Vec2> poly{{0.0, 0.0}, {0.3, 0.4}, {0.9, 0.1}};
    EXPECT_NEAR(discrete_length(m, poly), geometry::curve_length(m, poly), 1e-12);
}

TEST(Shorten, GradientMatchesFiniteDifferences) {
    const auto m = MetricField::conformal({{1, 0, 0.2, 0.1}, {1, 1, 0.1, -0.05}});
    const std::vector<Vec2> poly{{0.0, 0.0}, {0.07, 0.03}, {0.12, 0.08}, {0.2, 0.05}};
    const auto g = discrete_length_gradient(m, poly);
    const double h = 1e-6;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        for (int c = 0; c < 2; ++c) {
            auto plus = poly, minus = poly;
            (c == 0 ? plus[i].x : plus[i].y) += h;
            (c == 0 ? minus[i].x : minus[i].y) -= h;
            const double fd = (discrete_length(m, plus) - discrete_length(m, minus)) / (2.0 * h);
            EXPECT_NEAR(c == 0 ? g[i].x : g[i].y, fd, 1e-7);
        }
    }
}

TEST(Shorten, SegmentHessianMatchesFiniteDifferences) {
    const auto m = MetricField::bumpy_default();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        const Vec2 p{u(rng), u(rng)};
        const Vec2 q = p + 0.05 * Vec2{u(rng), u(rng)};
        const auto H = segment_hessian(m, p, q);
        const double h = 1e-6;
        const double scale = 1.0 / distance(p, q);
        EXPECT_LT(max_abs(H.pp - column_fd(m, p, q, true, false, h)), 1e-5 * scale);
        EXPECT_LT(max_abs(H.qq - column_fd(m, p, q, false, true, h)), 1e-5 * scale);
        EXPECT_LT(max_abs(H.qp - column_fd(m, p, q, true, true, h)), 1e-5 * scale);
    }
}

TEST(Resample, KeepsEndpointsAndSpacing) {
    const std::vector<Vec2> poly{{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.33}};
    const auto r = resample(poly, 0.1);
    EXPECT_EQ(r.front(), poly.front());
    EXPECT_EQ(r.back(), poly.back());
    for (std::size_t i = 1; i < r.size(); ++i) EXPECT_LE(distance(r[i - 1], r[i]), 0.1 + 1e-12);
}
