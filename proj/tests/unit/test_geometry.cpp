#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "toruslab/errors.hpp"
#include "toruslab/geometry/distance.hpp"
#include "toruslab/geometry/grid.hpp"
#include "toruslab/geometry/length.hpp"
#include "toruslab/geometry/metric.hpp"

using namespace toruslab;
using namespace toruslab::geometry;

namespace {

constexpr double kPi = std::numbers::pi;

MetricField cos_x() { return MetricField::conformal({{1, 0, 0.3, 0.0}}); }

MetricField mixed() {
    return MetricField::conformal({{1, 0, 0.1, 0.05}, {0, 1, -0.08, 0.1}, {1, 2, 0.04, -0.03}, {2, -1, 0.0, 0.06}});
}

// Christoffel symbols from central differences of the metric tensor,
// Gamma^k_ij = 1/2 g^{kl} (d_i g_lj + d_j g_li - d_l g_ij).
Christoffel christoffel_from_metric(const MetricField& m, Vec2 x, double h) {
    const Mat2 g = m.eval(x);
    const Mat2 ginv = g.inverse();
    auto entry = [](const Mat2& a, int r, int c) { return r == 0 ? (c == 0 ? a.a : a.b) : (c == 0 ? a.c : a.d); };
    Mat2 dg[2];
    for (int l = 0; l < 2; ++l) {
        const Vec2 e = l == 0 ? Vec2{h, 0.0} : Vec2{0.0, h};
        dg[l] = (1.0 / (2.0 * h)) * (m.eval(x + e) - m.eval(x - e));
    }
    Christoffel G{};
    for (int k = 0; k < 2; ++k) {
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                double s = 0.0;
                for (int l = 0; l < 2; ++l) {
                    s += entry(ginv, k, l) * (entry(dg[i], l, j) + entry(dg[j], l, i) - entry(dg[l], i, j));
                }
                G[k][i][j] = 0.5 * s;
            }
        }
    }
    return G;
}

double simpson(auto&& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

}  // namespace

TEST(Metric, FlatIsIdentity) {
    const Mat2 g = MetricField::flat().eval({0.3, 0.7});
    EXPECT_DOUBLE_EQ(g.a, 1.0);
    EXPECT_DOUBLE_EQ(g.b, 0.0);
    EXPECT_DOUBLE_EQ(g.c, 0.0);
    EXPECT_DOUBLE_EQ(g.d, 1.0);
}

TEST(Metric, ConformalFactorAtOrigin) {
    const Mat2 g = cos_x().eval({0.0, 0.0});
    EXPECT_NEAR(g.a, std::exp(0.6), 1e-12);
    EXPECT_NEAR(g.a, 1.822119, 1e-6);
    EXPECT_DOUBLE_EQ(g.b, 0.0);
    EXPECT_NEAR(g.d, g.a, 0.0);
}

TEST(Metric, ConformalFactorAtQuarter) {
    const Mat2 g = cos_x().eval({0.25, 0.0});
    EXPECT_NEAR(g.a, 1.0, 1e-12);
    EXPECT_NEAR(g.d, 1.0, 1e-12);
}

TEST(Metric, FlatEqualsEmptyConformal) {
    const MetricField a = MetricField::flat();
    const MetricField b = MetricField::conformal({});
    for (Vec2 x : {Vec2{0.1, 0.2}, Vec2{-3.3, 7.1}}) {
        EXPECT_EQ(a.f(x), b.f(x));
        EXPECT_EQ(a.eval(x).a, b.eval(x).a);
    }
    EXPECT_TRUE(b.is_flat());
}

TEST(Metric, AmplitudeBudgetRejected) {
    EXPECT_THROW(MetricField::conformal({{1, 0, 0.5, 0.4}}), ConfigError);
    EXPECT_NO_THROW(MetricField::conformal({{1, 0, 0.5, 0.25}}));
}

TEST(Metric, PeriodicUnderDeckTranslations) {
    const MetricField m = mixed();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int k = 0; k < 200; ++k) {
        const Vec2 x{u(rng), u(rng)};
        EXPECT_NEAR(m.f(x), m.f(x + Vec2{1.0, 0.0}), 1e-12);
        EXPECT_NEAR(m.f(x), m.f(x + Vec2{-3.0, 2.0}), 1e-11);
    }
}

TEST(Metric, SymmetricPositiveDefiniteAtRandomPoints) {
    const MetricField m = mixed();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-40.0, 40.0);
    for (int k = 0; k < 1'000'000; ++k) {
        const Mat2 g = m.eval({u(rng), u(rng)});
        ASSERT_EQ(g.b, g.c);
        ASSERT_GT(g.a, 0.0);
        ASSERT_GT(g.det(), 0.0);
    }
}

TEST(Christoffel, FlatVanishes) {
    const Christoffel G = MetricField::flat().christoffel({0.37, -1.2});
    for (const auto& a : G)
        for (const auto& b : a)
            for (double v : b) EXPECT_EQ(v, 0.0);
}

TEST(Christoffel, VanishAtCriticalPoint) {
    const Christoffel G = cos_x().christoffel({0.0, 0.0});
    for (const auto& a : G)
        for (const auto& b : a)
            for (double v : b) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(Christoffel, QuarterPointMatchesFiniteDifferences) {
    const Vec2 x{0.25, 0.0};
    const Christoffel G = cos_x().christoffel(x);
    EXPECT_NEAR(G[0][0][0], -0.6 * kPi, 1e-12);
    const Christoffel F = christoffel_from_metric(cos_x(), x, 1e-5);
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) EXPECT_NEAR(G[k][i][j], F[k][i][j], 1e-6);
}

TEST(Christoffel, RandomPointsMatchFiniteDifferences) {
    for (const MetricField& m : {cos_x(), MetricField::bumpy_default(), mixed()}) {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-10.0, 10.0);
        for (int n = 0; n < 1000; ++n) {
            const Vec2 x{u(rng), u(rng)};
            const Christoffel G = m.christoffel(x);
            const Christoffel F = christoffel_from_metric(m, x, 1e-5);
            for (int k = 0; k < 2; ++k)
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) {
                        ASSERT_NEAR(G[k][i][j], F[k][i][j], 1e-6);
                        ASSERT_EQ(G[k][i][j], G[k][j][i]);
                    }
        }
    }
}

TEST(Metric, JetMatchesFiniteDifferences) {
    const MetricField m = mixed();
    const Vec2 x{0.31, -0.77};
    const FJet j = m.jet(x);
    const double h = 1e-5;
    const Vec2 gx = (m.grad_f(x + Vec2{h, 0}) - m.grad_f(x - Vec2{h, 0})) / (2 * h);
    const Vec2 gy = (m.grad_f(x + Vec2{0, h}) - m.grad_f(x - Vec2{0, h})) / (2 * h);
    EXPECT_NEAR(j.hess.a, gx.x, 1e-6);
    EXPECT_NEAR(j.hess.c, gx.y, 1e-6);
    EXPECT_NEAR(j.hess.b, gy.x, 1e-6);
    EXPECT_NEAR(j.hess.d, gy.y, 1e-6);
    EXPECT_NEAR(j.grad.x, (m.f(x + Vec2{h, 0}) - m.f(x - Vec2{h, 0})) / (2 * h), 1e-8);
}

TEST(Metric, HashDistinguishesMetrics) {
    EXPECT_EQ(cos_x().hash(), cos_x().hash());
    EXPECT_NE(cos_x().hash(), MetricField::bumpy_default().hash());
    EXPECT_NE(MetricField::flat().hash(), cos_x().hash());
}

TEST(Grid, CacheMatchesDirectEvaluation) {
    const Grid grid(mixed(), {.resolution = 128});
    for (int j = 0; j < 128; j += 7) {
        for (int i = 0; i < 128; i += 5) {
            const Vec2 x{i / 128.0, j / 128.0};
            EXPECT_NEAR(grid.f_node(i, j), grid.metric().f(x), 1e-12);
            EXPECT_NEAR(grid.grad_node(i + 128, j - 256).x, grid.metric().grad_f(x).x, 1e-12);
        }
    }
}

TEST(Grid, RejectsCoarseResolution) { EXPECT_THROW(Grid(MetricField::flat(), {.resolution = 32}), ConfigError); }

TEST(Grid, LatticeMovesArePrimitive) {
    const auto moves = lattice_moves(6);
    EXPECT_EQ(moves.size(), 96u);
    for (auto [a, b] : moves) EXPECT_EQ(std::gcd(std::abs(a), std::abs(b)), 1);
}

TEST(EquivalenceConstant, FlatIsOne) { EXPECT_EQ(equivalence_constant(MetricField::flat()), 1.0); }

TEST(EquivalenceConstant, CosineProfile) {
    EXPECT_NEAR(equivalence_constant(cos_x()), std::exp(0.3), 1e-12);
    EXPECT_NEAR(equivalence_constant(cos_x()), 1.349859, 1e-6);
    EXPECT_NEAR(Grid(cos_x()).equivalence_constant(), std::exp(0.3), 1e-12);
}

TEST(EquivalenceConstant, BracketsDistanceRatios) {
    for (const MetricField& m : {cos_x(), MetricField::bumpy_default()}) {
        const Grid grid(m);
        const double A = grid.equivalence_constant();
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (int k = 0; k < 100; ++k) {
            const Vec2 x{u(rng), u(rng)};
            const Vec2 y{u(rng), u(rng)};
            const double ratio = riemannian_distance(grid, x, y) / distance(x, y);
            EXPECT_GE(ratio, 1.0 / A - 1e-6);
            EXPECT_LE(ratio, A + 1e-6);
        }
    }
}

TEST(CurveLength, FlatSegment) {
    const Vec2 pts[] = {{0, 0}, {3, 4}};
    EXPECT_NEAR(curve_length(MetricField::flat(), pts), 5.0, 1e-12);
}

TEST(CurveLength, DegenerateIsZero) {
    const Vec2 pts[] = {{0.4, 0.2}, {0.4, 0.2}};
    EXPECT_EQ(curve_length(mixed(), pts), 0.0);
}

TEST(CurveLength, LineWhereFVanishes) {
    const Vec2 pts[] = {{0.25, 0.0}, {0.25, 1.0}};
    EXPECT_NEAR(curve_length(cos_x(), pts), 1.0, 1e-12);
}

TEST(CurveLength, TooFewPoints) {
    const Vec2 pts[] = {{0.0, 0.0}};
    EXPECT_THROW(curve_length(mixed(), pts), PreconditionError);
}

TEST(CurveLength, AdditiveOverConcatenation) {
    const MetricField m = mixed();
    const Vec2 a[] = {{0, 0}, {0.7, 0.2}, {1.3, -0.4}};
    const Vec2 b[] = {{1.3, -0.4}, {2.0, 0.5}};
    const Vec2 ab[] = {{0, 0}, {0.7, 0.2}, {1.3, -0.4}, {2.0, 0.5}};
    EXPECT_NEAR(curve_length(m, a) + curve_length(m, b), curve_length(m, ab), 1e-13);
}

TEST(CurveLength, MatchesOneDimensionalQuadrature) {
    const Vec2 pts[] = {{0.0, 0.0}, {1.0, 0.0}};
    const double oracle = simpson([](double t) { return std::exp(0.3 * std::cos(2 * kPi * t)); }, 0.0, 1.0, 2000);
    EXPECT_NEAR(oracle, 1.02263, 1e-5);
    EXPECT_NEAR(curve_length(cos_x(), pts), oracle, 1e-9);
}

TEST(Distance, FlatPythagoras) {
    const Grid grid(MetricField::flat());
    EXPECT_NEAR(riemannian_distance(grid, {0, 0}, {3, 4}), 5.0, 1e-3);
}

TEST(Distance, ZeroForEqualPoints) {
    const Grid grid(mixed());
    EXPECT_EQ(riemannian_distance(grid, {0.3, 0.3}, {0.3, 0.3}), 0.0);
}

TEST(Distance, BelowStraightLineQuadrature) {
    const Grid grid(cos_x());
    const double oracle = simpson([](double t) { return std::exp(0.3 * std::cos(2 * kPi * t)); }, 0.0, 1.0, 2000);
    EXPECT_LE(riemannian_distance(grid, {0, 0}, {1, 0}), oracle + 1e-12);
}

TEST(Distance, OutsideRegionThrows) {
    const Grid grid(mixed(), {.halfwidth = 5.0});
    EXPECT_THROW(riemannian_distance(grid, {0, 0}, {6, 0}), RegionError);
}

TEST(Distance, SymmetricAndBelowPolylineLengths) {
    const Grid grid(MetricField::bumpy_default());
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int k = 0; k < 50; ++k) {
        const Vec2 x{u(rng), u(rng)};
        const Vec2 y{u(rng), u(rng)};
        const double d = riemannian_distance(grid, x, y);
        EXPECT_NEAR(d, riemannian_distance(grid, y, x), 1e-6);
        const Vec2 mid = 0.5 * (x + y) + Vec2{u(rng), u(rng)} * 0.2;
        const Vec2 poly[] = {x, mid, y};
        EXPECT_LE(d, curve_length(grid.metric(), poly) + 1e-9);
        const Vec2 chord[] = {x, y};
        EXPECT_LE(d, curve_length(grid.metric(), chord) + 1e-12);
    }
}

TEST(Distance, TriangleInequality) {
    const Grid grid(MetricField::bumpy_default());
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    for (int k = 0; k < 1000; ++k) {
        const Vec2 x{u(rng), u(rng)};
        const Vec2 y{u(rng), u(rng)};
        const Vec2 z{u(rng), u(rng)};
        const double xy = riemannian_distance(grid, x, y);
        const double yz = riemannian_distance(grid, y, z);
        const double xz = riemannian_distance(grid, x, z);
        ASSERT_LE(xz, xy + yz + 1e-4);
    }
}

TEST(BallVolume, FlatDisk) {
    const Grid grid(MetricField::flat());
    EXPECT_NEAR(ball_volume(grid, {0.3, 0.4}, 2.0), 4.0 * kPi, 0.02 * 4.0 * kPi);
}

TEST(BallVolume, ZeroRadius) {
    const Grid grid(mixed());
    EXPECT_EQ(ball_volume(grid, {0.3, 0.4}, 0.0), 0.0);
}

TEST(BallVolume, NegativeRadiusRejected) {
    const Grid grid(mixed());
    EXPECT_THROW(ball_volume(grid, {0.0, 0.0}, -1.0), PreconditionError);
}

TEST(BallVolume, RegionExceeded) {
    const Grid grid(mixed(), {.halfwidth = 5.0});
    EXPECT_THROW(ball_volume(grid, {0.0, 0.0}, 6.0), RegionError);
}

TEST(BallVolume, MonotoneAndBelowEuclideanComparison) {
    const Grid grid(MetricField::bumpy_default());
    const double A = grid.equivalence_constant();
    const double radii[] = {0.5, 1.0, 2.0, 4.0, 8.0};
    const auto vols = ball_volumes(grid, {0.2, 0.7}, radii);
    for (std::size_t k = 0; k < vols.size(); ++k) {
        if (k > 0) EXPECT_GE(vols[k], vols[k - 1]);
        const double bound = std::exp(2.0 * grid.fmax()) * kPi * (A * radii[k]) * (A * radii[k]);
        EXPECT_LE(vols[k], bound);
    }
}

TEST(CEpsilon, FlatQuarterDisk) {
    const Grid grid(MetricField::flat());
    EXPECT_NEAR(c_epsilon(grid, 0.5), kPi * 0.0625, 0.02 * kPi * 0.0625);
}

TEST(CEpsilon, RejectsNonPositive) {
    const Grid grid(MetricField::flat());
    EXPECT_THROW(c_epsilon(grid, 0.0), PreconditionError);
}

TEST(CEpsilon, AboveEuclideanComparison) {
    const Grid grid(cos_x());
    const double A = grid.equivalence_constant();
    const double eps = 0.5;
    const double lower = std::exp(2.0 * grid.fmin()) * kPi * std::pow(eps / (2.0 * A), 2);
    EXPECT_GE(c_epsilon(grid, eps), lower * 0.95);
}

TEST(FundamentalDomain, FlatDiameter) {
    EXPECT_DOUBLE_EQ(fundamental_domain_diameter(Grid(MetricField::flat())), std::sqrt(2.0));
}
