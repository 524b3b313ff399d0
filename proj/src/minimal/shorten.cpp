#include "toruslab/minimal/shorten.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "toruslab/geometry/length.hpp"
#include "toruslab/geometry/quadrature.hpp"

namespace toruslab::minimal {

using geometry::MetricField;

namespace {

struct SegmentDerivs {
    double value = 0.0;
    Vec2 grad_p;
    Vec2 grad_q;
    SegmentHessian hess;
};

int piece_count(double len) {
    return std::max(1, static_cast<int>(std::ceil(len / geometry::kQuadraturePiece)));
}

// ell(p,q) = |q-p| * sum_k w_k exp(f(p + s_k (q-p))) with the composite rule.
SegmentDerivs segment_derivs(const MetricField& m, Vec2 p, Vec2 q, bool with_hessian) {
    SegmentDerivs out;
    const Vec2 d = q - p;
    const double len = norm(d);
    if (len == 0.0) return out;
    const Vec2 u = d / len;
    const int pieces = piece_count(len);

    double I = 0.0;
    Vec2 J, K;
    Mat2 Mss, Mtt, Mst;
    for (int k = 0; k < pieces; ++k) {
        for (int g = 0; g < 3; ++g) {
            const double s = (k + geometry::kGaussNodes[g]) / pieces;
            const double w = geometry::kGaussWeights[g] / pieces;
            const Vec2 x = p + s * d;
            if (!with_hessian) {
                const double phi = std::exp(m.f(x));
                const Vec2 gf = m.grad_f(x);
                I += w * phi;
                J += (w * phi * s) * gf;
                K += (w * phi * (1.0 - s)) * gf;
                continue;
            }
            const geometry::FJet jet = m.jet(x);
            const double phi = std::exp(jet.f);
            I += w * phi;
            J += (w * phi * s) * jet.grad;
            K += (w * phi * (1.0 - s)) * jet.grad;
            const Mat2 M = Mat2::outer(jet.grad, jet.grad) + jet.hess;
            Mss += (w * phi * s * s) * M;
            Mtt += (w * phi * (1.0 - s) * (1.0 - s)) * M;
            Mst += (w * phi * s * (1.0 - s)) * M;
        }
    }
    out.value = len * I;
    out.grad_q = I * u + len * J;
    out.grad_p = -I * u + len * K;
    if (with_hessian) {
        const Mat2 P = (I / len) * (Mat2::identity() - Mat2::outer(u, u));
        out.hess.qq = P + Mat2::outer(u, J) + Mat2::outer(J, u) + len * Mss;
        out.hess.pp = P - Mat2::outer(u, K) - Mat2::outer(K, u) + len * Mtt;
        out.hess.qp = (-1.0) * P + Mat2::outer(u, K) - Mat2::outer(J, u) + len * Mst;
    }
    return out;
}

double quad(Vec2 a, const Mat2& M, Vec2 b) { return dot(a, M * b); }

}  // namespace

SegmentHessian segment_hessian(const MetricField& m, Vec2 p, Vec2 q) { return segment_derivs(m, p, q, true).hess; }

double discrete_length(const MetricField& m, std::span<const Vec2> polyline) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) total += geometry::segment_length(m, polyline[i], polyline[i + 1]);
    return total;
}

std::vector<Vec2> discrete_length_gradient(const MetricField& m, std::span<const Vec2> polyline) {
    std::vector<Vec2> g(polyline.size());
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
        const SegmentDerivs sd = segment_derivs(m, polyline[i], polyline[i + 1], false);
        g[i] += sd.grad_p;
        g[i + 1] += sd.grad_q;
    }
    return g;
}

std::vector<Vec2> resample(std::span<const Vec2> polyline, double spacing) {
    std::vector<double> cum(polyline.size(), 0.0);
    for (std::size_t i = 1; i < polyline.size(); ++i) cum[i] = cum[i - 1] + distance(polyline[i - 1], polyline[i]);
    const double total = cum.back();
    if (polyline.size() < 2 || total == 0.0) return {polyline.begin(), polyline.end()};
    const int segments = std::max(1, static_cast<int>(std::ceil(total / spacing)));
    std::vector<Vec2> out;
    out.reserve(segments + 1);
    out.push_back(polyline.front());
    std::size_t seg = 0;
    for (int k = 1; k < segments; ++k) {
        const double s = total * k / segments;
        while (seg + 2 < polyline.size() && cum[seg + 1] < s) ++seg;
        const double span = cum[seg + 1] - cum[seg];
        const double t = span > 0.0 ? (s - cum[seg]) / span : 0.0;
        out.push_back(lerp(polyline[seg], polyline[seg + 1], std::clamp(t, 0.0, 1.0)));
    }
    out.push_back(polyline.back());
    return out;
}

ShortenResult shorten(const MetricField& m, std::vector<Vec2> poly, int max_sweeps, double tol) {
    ShortenResult res;
    res.initial_length = poly.size() >= 2 ? discrete_length(m, poly) : 0.0;
    res.length = res.initial_length;
    const std::size_t n = poly.size();
    if (n < 3 || m.is_flat()) {
        // Flat minimisers are chords.
        if (n >= 3) {
            const Vec2 p = poly.front();
            const Vec2 q = poly.back();
            for (std::size_t i = 1; i + 1 < n; ++i) poly[i] = lerp(p, q, static_cast<double>(i) / (n - 1));
            res.length = distance(p, q);
            res.sweeps = 1;
        }
        res.polyline = std::move(poly);
        res.converged = true;
        return res;
    }

    const std::size_t interior = n - 2;
    std::vector<Vec2> normal(interior);
    std::vector<double> g(interior), a(interior), b(interior), t(interior), cp(interior), dp(interior);
    std::vector<Vec2> trial(poly);
    std::vector<SegmentDerivs> seg(n - 1);
    double lambda_rel = 1e-3;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        for (std::size_t i = 0; i + 1 < n; ++i) seg[i] = segment_derivs(m, poly[i], poly[i + 1], true);
        double scale = 0.0;
        for (std::size_t k = 0; k < interior; ++k) {
            const std::size_t i = k + 1;
            const Vec2 chord = poly[i + 1] - poly[i - 1];
            const double cl = norm(chord);
            normal[k] = cl > 0.0 ? perp(chord / cl) : Vec2{0.0, 1.0};
            const Vec2 G = seg[i - 1].grad_q + seg[i].grad_p;
            g[k] = dot(normal[k], G);
            a[k] = quad(normal[k], seg[i - 1].hess.qq + seg[i].hess.pp, normal[k]);
            scale += std::abs(a[k]);
        }
        for (std::size_t k = 0; k + 1 < interior; ++k) {
            // d^2 L / dp_i dp_{i+1} is the transpose of seg[i].qp
            b[k] = quad(normal[k], seg[k + 1].hess.qp.transposed(), normal[k + 1]);
        }
        scale = std::max(scale / interior, 1e-12);

        bool accepted = false;
        double gain = 0.0;
        while (lambda_rel < 1e10) {
            const double lambda = lambda_rel * scale;
            bool ok = true;
            // Thomas algorithm on (a + lambda) t + b_{k-1} t_{k-1} + b_k t_{k+1} = -g
            for (std::size_t k = 0; k < interior; ++k) {
                double diag = a[k] + lambda;
                double rhs = -g[k];
                if (k > 0) {
                    diag -= b[k - 1] * cp[k - 1];
                    rhs -= b[k - 1] * dp[k - 1];
                }
                if (!(diag > 0.0)) {
                    ok = false;
                    break;
                }
                cp[k] = k + 1 < interior ? b[k] / diag : 0.0;
                dp[k] = rhs / diag;
            }
            if (!ok) {
                lambda_rel *= 4.0;
                continue;
            }
            for (std::size_t k = interior; k-- > 0;) t[k] = dp[k] - (k + 1 < interior ? cp[k] * t[k + 1] : 0.0);

            double tmax = 0.0;
            for (double v : t) tmax = std::max(tmax, std::abs(v));
            const double cap = 0.25;
            const double shrink = tmax > cap ? cap / tmax : 1.0;
            bool degenerate = false;
            for (std::size_t k = 0; k < interior; ++k) trial[k + 1] = poly[k + 1] + (shrink * t[k]) * normal[k];
            for (std::size_t i = 0; i + 1 < n; ++i) {
                if (distance(trial[i], trial[i + 1]) < 1e-12) degenerate = true;
            }
            const double len = degenerate ? std::numeric_limits<double>::infinity() : discrete_length(m, trial);
            if (len < res.length) {
                gain = res.length - len;
                res.length = len;
                std::swap(poly, trial);
                trial = poly;
                lambda_rel = std::max(lambda_rel / 3.0, 1e-9);
                accepted = true;
                break;
            }
            lambda_rel *= 4.0;
        }
        res.sweeps = sweep + 1;
        if (!accepted || gain < tol) {
            res.converged = true;
            break;
        }
    }
    res.polyline = std::move(poly);
    return res;
}

}  // namespace toruslab::minimal
