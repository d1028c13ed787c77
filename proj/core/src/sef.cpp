#include "diver/sef.hpp"

#include <algorithm>
#include <cmath>

namespace diver {

ImagePlanar apply_sef(const ImagePlanar& img, const SefConfig& cfg) {
  if (cfg.alpha <= 0.0 || cfg.alpha > 1.0)
    throw std::invalid_argument("apply_sef: alpha must be in (0,1]");
  if (cfg.epsilon <= 0.0)
    throw std::invalid_argument("apply_sef: epsilon must be positive");

  double mu[3];
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0;
    for (double v : img.plane(c).samples()) sum += v;
    mu[c] = sum / static_cast<double>(img.pixel_count());
  }
  const double c_sup = std::max({mu[0], mu[1], mu[2]});

  ImagePlanar out(img.width(), img.height());
  for (int c = 0; c < 3; ++c) {
    const double gain = std::pow(c_sup / (mu[c] + cfg.epsilon), cfg.alpha);
    auto src = img.plane(c).samples();
    auto dst = out.plane(c).samples();
    for (std::size_t i = 0; i < src.size(); ++i)
      dst[i] = clamp01(src[i] * gain);
  }
  return out;
}

}  // namespace diver
