#pragma once

#include "diver/image.hpp"

namespace diver {

/// HSV image: H in degrees [0,360), S and V in [0,1].
/// Achromatic pixels (including V=0) report S=0, H=0.
struct HsvImage {
  Plane h, s, v;
};

/// CIELAB image with L in [0,100] and a, b in the 8-bit-offset convention:
/// neutral at 128, clamped to [0,255].
struct LabImage {
  Plane l, a, b;
};

HsvImage rgb_to_hsv(const ImagePlanar& img);
ImagePlanar hsv_to_rgb(const HsvImage& hsv);

/// sRGB companding, D65 white point. The inverse clamps RGB to [0,1].
LabImage rgb_to_lab(const ImagePlanar& img);
ImagePlanar lab_to_rgb(const LabImage& lab);

/// Scalar conversions shared with the metrics module (a, b un-offset here).
void rgb_to_lab_pixel(double r, double g, double b,
                      double& L, double& A, double& B);

}  // namespace diver
