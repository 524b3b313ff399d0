#pragma once

#include <array>

namespace toruslab::geometry {

// 3-point Gauss-Legendre rule on [0, 1].
inline constexpr std::array<double, 3> kGaussNodes{0.11270166537925831, 0.5, 0.88729833462074169};
inline constexpr std::array<double, 3> kGaussWeights{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

}  // namespace toruslab::geometry
