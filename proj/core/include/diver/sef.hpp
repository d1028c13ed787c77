#pragma once

#include "diver/image.hpp"

namespace diver {

struct SefConfig {
  double alpha = 0.5;    // correction strength in (0,1]
  double epsilon = 1e-6;
};

/// Spectral Equalization Filter: boosts each channel by (C_sup/(mu_c+eps))^alpha
/// toward the dominant channel mean, then clamps to [0,1].
ImagePlanar apply_sef(const ImagePlanar& img, const SefConfig& cfg);

}  // namespace diver
