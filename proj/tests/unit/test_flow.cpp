#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "toruslab/errors.hpp"
#include "toruslab/flow/geodesic.hpp"
#include "toruslab/geometry/length.hpp"

using namespace toruslab;
using namespace toruslab::flow;
using geometry::Grid;
using geometry::GridSettings;
using geometry::MetricField;

namespace {

constexpr double kPi = std::numbers::pi;

MetricField cos_x() { return MetricField::conformal({{1, 0, 0.3, 0.0}}); }

// Plain RK4 on x'' = -Gamma^k_ij x'^i x'^j with the full Christoffel
// contraction and no renormalisation.
Vec2 reference_endpoint(const MetricField& m, PhasePoint v, double T, double h) {
    auto acc = [&](Vec2 x, Vec2 u) {
        const auto G = m.christoffel(x);
        const double w[2] = {u.x, u.y};
        double a[2] = {0.0, 0.0};
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) a[k] -= G[k][i][j] * w[i] * w[j];
        return Vec2{a[0], a[1]};
    };
    Vec2 x = v.x;
    Vec2 u = v.velocity(m);
    const int n = static_cast<int>(std::round(T / h));
    for (int s = 0; s < n; ++s) {
        const Vec2 k1x = u, k1v = acc(x, u);
        const Vec2 k2x = u + 0.5 * h * k1v, k2v = acc(x + 0.5 * h * k1x, k2x);
        const Vec2 k3x = u + 0.5 * h * k2v, k3v = acc(x + 0.5 * h * k2x, k3x);
        const Vec2 k4x = u + h * k3v, k4v = acc(x + h * k3x, k4x);
        x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        u += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    return x;
}

}  // namespace

TEST(Integrate, FlatStraightLines) {
    const auto m = MetricField::flat();
    const auto p = integrate(m, {{0.0, 0.0}, 0.0}, 2.0);
    EXPECT_NEAR(p[p.size() - 1].x.x, 2.0, 1e-9);
    EXPECT_NEAR(p[p.size() - 1].x.y, 0.0, 1e-9);
    const auto q = integrate(m, {{0.0, 0.0}, kPi / 4}, std::sqrt(2.0));
    EXPECT_NEAR(q[q.size() - 1].x.x, 1.0, 1e-9);
    EXPECT_NEAR(q[q.size() - 1].x.y, 1.0, 1e-9);
    EXPECT_DOUBLE_EQ(q.t_end(), std::sqrt(2.0));
}

TEST(Integrate, FlatDeviationFromLine) {
    const auto m = MetricField::flat();
    const double T = 50.0, th = 0.7;
    const auto p = integrate(m, {{0.3, -0.2}, th}, T);
    for (const auto& s : p.samples()) {
        const Vec2 exact = Vec2{0.3, -0.2} + s.t * unit(th);
        EXPECT_LE(distance(s.x, exact), 1e-9 * T);
    }
}

TEST(Integrate, StepHalvingOracle) {
    const auto m = cos_x();
    FlowSettings a;
    FlowSettings b;
    b.step = 5e-4;
    const auto pa = integrate(m, {{0.0, 0.0}, 0.3}, 10.0, a);
    const auto pb = integrate(m, {{0.0, 0.0}, 0.3}, 10.0, b);
    EXPECT_LT(distance(pa[pa.size() - 1].x, pb[pb.size() - 1].x), 1e-6);
}

TEST(Integrate, MatchesFullChristoffelContraction) {
    const auto m = MetricField::bumpy_default();
    const PhasePoint v{{0.1, 0.2}, 1.1};
    const auto p = integrate(m, v, 5.0);
    EXPECT_LT(distance(p[p.size() - 1].x, reference_endpoint(m, v, 5.0, 2.5e-4)), 1e-6);
}

TEST(Integrate, SampleSpacingIsArcLength) {
    const auto m = MetricField::bumpy_default();
    const auto p = integrate(m, {{0.0, 0.0}, 0.4}, 20.0);
    for (std::size_t i = 1; i < p.size(); ++i) {
        const double d = geometry::segment_length(m, p[i - 1].x, p[i].x);
        EXPECT_NEAR(d, p.spacing(), 0.01 * p.spacing());
    }
    EXPECT_DOUBLE_EQ(p[0].t, 0.0);
}

TEST(Integrate, RejectsBadSettings) {
    const auto m = MetricField::flat();
    FlowSettings s;
    s.step = 2e-2;
    EXPECT_THROW(integrate(m, {}, 1.0, s), PreconditionError);
    EXPECT_THROW(integrate(m, {}, 0.0), PreconditionError);
    EXPECT_THROW(integrate(m, {}, 500.0), PreconditionError);
}

TEST(Integrate, Deterministic) {
    const auto m = MetricField::bumpy_default();
    const auto a = integrate(m, {{0.2, 0.1}, 2.0}, 5.0);
    const auto b = integrate(m, {{0.2, 0.1}, 2.0}, 5.0);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].x, b[i].x);
}

TEST(FlowMap, IdentityAtZero) {
    const auto m = MetricField::bumpy_default();
    const PhasePoint v{{0.3, 0.4}, 1.0};
    EXPECT_EQ(flow_map(m, v, 0.0), v);
}

TEST(FlowMap, FlatComposition) {
    const auto m = MetricField::flat();
    const PhasePoint v{{0.1, 0.2}, 0.9};
    const auto a = flow_map(m, flow_map(m, v, 1.0), 2.0);
    const auto b = flow_map(m, v, 3.0);
    EXPECT_LT(distance(a.x, b.x), 1e-9);
    EXPECT_NEAR(a.theta, b.theta, 1e-9);
}

TEST(FlowMap, BumpyComposition) {
    const auto m = MetricField::bumpy_default();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 10; ++k) {
        const PhasePoint v{{u(rng), u(rng)}, 2.0 * kPi * u(rng)};
        const double s = 3.0 * u(rng), t = 3.0 * u(rng);
        const auto a = flow_map(m, flow_map(m, v, s), t);
        const auto b = flow_map(m, v, s + t);
        EXPECT_LT(distance(a.x, b.x), 1e-5);
    }
}

TEST(FlowMap, Reversibility) {
    const auto m = MetricField::bumpy_default();
    const PhasePoint v{{0.25, 0.6}, 0.8};
    const auto back = flow_map(m, flow_map(m, v, 20.0), -20.0);
    EXPECT_LT(distance(back.x, v.x), 1e-5);
    EXPECT_NEAR(std::remainder(back.theta - v.theta, 2.0 * kPi), 0.0, 1e-5);
}

TEST(FlowMap, AgreesWithIntegrate) {
    const auto m = cos_x();
    const PhasePoint v{{0.0, 0.0}, 0.3};
    const auto p = integrate(m, v, 4.0);
    EXPECT_LT(distance(flow_map(m, v, 4.0).x, p[p.size() - 1].x), 1e-9);
}

TEST(Path, WindowTranslateReparametrize) {
    const auto m = MetricField::flat();
    const auto p = integrate(m, {{0.0, 0.0}, 0.0}, 4.0);
    const auto w = p.window(1.0, 2.0);
    EXPECT_NEAR(w.t_begin(), 1.0, 1e-12);
    EXPECT_NEAR(w.t_end(), 2.0, 1e-12);
    const auto r = p.reparametrized(1.0);
    EXPECT_NEAR(r.t_begin(), -1.0, 1e-12);
    EXPECT_NEAR(r.position(0.0).x, 1.0, 1e-12);
    const auto tr = p.translated({1.0, 2.0});
    EXPECT_NEAR(tr.position(1.5).y, 2.0, 1e-12);
    EXPECT_NEAR(p.position(1.525).x, 1.525, 1e-12);
}

TEST(ArcLengthPath, OriginAndSpacing) {
    const auto m = MetricField::flat();
    const std::vector<Vec2> poly{{0.0, 0.0}, {2.0, 0.0}, {2.0, 2.0}};
    const auto p = arc_length_path(m, poly, 1.0, 0.1);
    EXPECT_NEAR(p.t_begin(), -1.0, 1e-9);
    EXPECT_NEAR(p.t_end(), 3.0, 1e-9);
    EXPECT_NEAR(distance(p.position(0.0), {1.0, 0.0}), 0.0, 1e-9);
    EXPECT_NEAR(distance(p.position(2.0), {2.0, 1.0}), 0.0, 1e-9);
}

TEST(DynamicalDistance, FlatExamples) {
    const Grid grid(MetricField::flat(), GridSettings{256, 100.0});
    for (double T : {0.0, 1.0, 5.0, 20.0}) {
        EXPECT_NEAR(dynamical_distance(grid, PhasePoint{{0.0, 0.0}, 0.3}, PhasePoint{Vec2{0.0, 0.0} + 0.5 * unit(0.3 + kPi / 2), 0.3}, T),
                    0.5, 1e-9);
        EXPECT_NEAR(dynamical_distance(grid, PhasePoint{{0.2, 0.1}, 1.0}, PhasePoint{{0.2, 0.1}, 1.0}, T), 0.0, 1e-12);
        const double psi = 0.2;
        EXPECT_NEAR(dynamical_distance(grid, PhasePoint{{0.0, 0.0}, 0.0}, PhasePoint{{0.0, 0.0}, psi}, T),
                    (T + 1.0) * 2.0 * std::sin(psi / 2.0), 1e-8);
    }
}

TEST(DynamicalDistance, MonotoneInT) {
    const Grid grid(MetricField::bumpy_default(), GridSettings{256, 60.0});
    const PhasePoint v{{0.1, 0.1}, 0.5};
    const PhasePoint w{{0.15, 0.05}, 0.62};
    const auto pv = integrate(grid.metric(), v, 9.0);
    const auto pw = integrate(grid.metric(), w, 9.0);
    double prev = 0.0;
    for (double T : {0.0, 1.0, 2.0, 4.0, 8.0}) {
        const double d = dynamical_distance(grid, pv, pw, T);
        EXPECT_GE(d, prev);
        const double ends = std::max(geometry::riemannian_distance(grid, pv.position(0.0), pw.position(0.0)),
                                     geometry::riemannian_distance(grid, pv.position(T + 1.0), pw.position(T + 1.0)));
        EXPECT_GE(d, ends - 1e-9);
        prev = d;
    }
}

TEST(DynamicalDistance, ExceedsAgreesWithValue) {
    const Grid grid(MetricField::bumpy_default(), GridSettings{256, 60.0});
    const auto pv = integrate(grid.metric(), {{0.0, 0.0}, 0.2}, 6.0);
    const auto pw = integrate(grid.metric(), {{0.05, 0.0}, 0.25}, 6.0);
    const double d = dynamical_distance(grid, pv, pw, 5.0);
    EXPECT_TRUE(dynamical_distance_exceeds(grid, pv, pw, 5.0, 0.9 * d));
    EXPECT_FALSE(dynamical_distance_exceeds(grid, pv, pw, 5.0, 1.1 * d));
}

TEST(DynamicalDistance, RequiresWindow) {
    const Grid grid(MetricField::flat());
    const auto pv = integrate(grid.metric(), {{0.0, 0.0}, 0.2}, 2.0);
    EXPECT_THROW(dynamical_distance(grid, pv, pv, 3.0), PreconditionError);
}
