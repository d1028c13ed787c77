#pragma once

#include <array>

#include "diver/image.hpp"

namespace diver {

/// 3x3 kernel, row-major.
using Kernel3x3 = std::array<double, 9>;

/// Standard Sobel kernels, applied correlation-style (no extra flip).
constexpr Kernel3x3 kSobelX = {1, 0, -1, 2, 0, -2, 1, 0, -1};
constexpr Kernel3x3 kSobelY = {1, 2, 1, 0, 0, 0, -1, -2, -1};

/// Correlation of the plane with the kernel, replicate padding at borders.
Plane convolve3x3(const Plane& plane, const Kernel3x3& kernel);

/// Exact adjoint of convolve3x3 with replicate padding: propagates a
/// gradient w.r.t. the output back to a gradient w.r.t. the input.
Plane convolve3x3_adjoint(const Plane& grad_out, const Kernel3x3& kernel);

}  // namespace diver
