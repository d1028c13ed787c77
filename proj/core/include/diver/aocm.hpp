#pragma once

#include "diver/image.hpp"

namespace diver {

struct HssfConfig {
  double hue_low = 160.0;   // degrees
  double hue_high = 200.0;  // degrees
  double s_min = 0.3;
  double v_min = 0.3;
  double lambda = 0.6;      // chroma suppression factor in [0,1]
};

/// Contrast Enhancement Filter: per-channel dual stretching around the
/// pivot (mean+median)/2, fused as the average of the lower- and
/// upper-stretch maps. Constant channels pass through unchanged.
ImagePlanar cef(const ImagePlanar& img);

/// Hue Speckle Suppression Filter: pixels inside the hue band with
/// sufficient saturation and value get their Lab a/b components pulled
/// toward neutral by (1-lambda); everything else is untouched.
ImagePlanar hssf(const ImagePlanar& img, const HssfConfig& cfg);

}  // namespace diver
