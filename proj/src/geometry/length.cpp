#include "toruslab/geometry/length.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "toruslab/errors.hpp"
#include "toruslab/geometry/quadrature.hpp"

namespace toruslab::geometry {

double segment_length(const MetricField& m, Vec2 p, Vec2 q) {
    const double len = distance(p, q);
    if (len == 0.0) return 0.0;
    if (m.is_flat()) return len;
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / kQuadraturePiece)));
    const Vec2 step = (q - p) / pieces;
    double sum = 0.0;
    for (int k = 0; k < pieces; ++k) {
        const Vec2 a = p + static_cast<double>(k) * step;
        for (int g = 0; g < 3; ++g) sum += kGaussWeights[g] * std::exp(m.f(a + kGaussNodes[g] * step));
    }
    return sum * len / pieces;
}

double curve_length(const MetricField& m, std::span<const Vec2> polyline) {
    if (polyline.size() < 2) throw PreconditionError("curve_length needs at least 2 points");
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) total += segment_length(m, polyline[i], polyline[i + 1]);
    return total;
}

double polygon_area(const MetricField& m, std::span<const Vec2> polygon) {
    if (polygon.size() < 3) return 0.0;
    double x0 = polygon[0].x;
    for (const Vec2& v : polygon) x0 = std::min(x0, v.x);

    // Green: area = closed integral of Q dy with Q(x,y) = int_{x0}^{x} e^{2f(s,y)} ds.
    auto inner = [&](Vec2 p) {
        const double width = p.x - x0;
        if (width <= 0.0) return 0.0;
        if (m.is_flat()) return width;
        const int pieces = std::max(1, static_cast<int>(std::ceil(width / (0.5 * kQuadraturePiece))));
        const double h = width / pieces;
        double sum = 0.0;
        for (int k = 0; k < pieces; ++k) {
            for (int g = 0; g < 3; ++g) {
                sum += kGaussWeights[g] * std::exp(2.0 * m.f({x0 + (k + kGaussNodes[g]) * h, p.y}));
            }
        }
        return sum * h;
    };

    double area = 0.0;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = polygon[i];
        const Vec2 q = polygon[(i + 1) % n];
        const double dy = q.y - p.y;
        if (dy == 0.0) continue;
        const int pieces = std::max(1, static_cast<int>(std::ceil(distance(p, q) / (0.5 * kQuadraturePiece))));
        const Vec2 step = (q - p) / pieces;
        double sum = 0.0;
        for (int k = 0; k < pieces; ++k) {
            const Vec2 a = p + static_cast<double>(k) * step;
            for (int g = 0; g < 3; ++g) sum += kGaussWeights[g] * inner(a + kGaussNodes[g] * step);
        }
        area += sum * dy / pieces;
    }
    return area;
}

}  // namespace toruslab::geometry
