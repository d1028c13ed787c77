#include "diver/convolve.hpp"

#include <algorithm>

namespace diver {

Plane convolve3x3(const Plane& plane, const Kernel3x3& kernel) {
  if (plane.empty()) throw std::invalid_argument("convolve3x3: empty plane");
  const int w = plane.width(), h = plane.height();
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        const int sy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -1; dx <= 1; ++dx) {
          const int sx = std::clamp(x + dx, 0, w - 1);
          acc += kernel[static_cast<std::size_t>((dy + 1) * 3 + (dx + 1))] *
                 plane.at(sx, sy);
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

Plane convolve3x3_adjoint(const Plane& grad_out, const Kernel3x3& kernel) {
  const int w = grad_out.width(), h = grad_out.height();
  Plane out(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double g = grad_out.at(x, y);
      if (g == 0.0) continue;
      for (int dy = -1; dy <= 1; ++dy) {
        const int sy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -1; dx <= 1; ++dx) {
          const int sx = std::clamp(x + dx, 0, w - 1);
          out.at(sx, sy) +=
              g * kernel[static_cast<std::size_t>((dy + 1) * 3 + (dx + 1))];
        }
      }
    }
  }
  return out;
}

}  // namespace diver
