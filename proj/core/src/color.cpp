#include "diver/color.hpp"

#include <algorithm>
#include <cmath>

namespace diver {

namespace {

// sRGB <-> linear companding.
double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double c) {
  if (c <= 0.0) return 0.0;
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

// sRGB D65 reference (Lindbloom).
constexpr double kM[3][3] = {{0.4124564, 0.3575761, 0.1804375},
                             {0.2126729, 0.7151522, 0.0721750},
                             {0.0193339, 0.1191920, 0.9503041}};
constexpr double kMInv[3][3] = {{3.2404542, -1.5371385, -0.4985314},
                                {-0.9692660, 1.8760108, 0.0415560},
                                {0.0556434, -0.2040259, 1.0572252}};
constexpr double kWhite[3] = {0.95047, 1.0, 1.08883};

double f_lab(double t) {
  constexpr double d = 6.0 / 29.0;
  return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
}

double f_lab_inv(double t) {
  constexpr double d = 6.0 / 29.0;
  return t > d ? t * t * t : 3.0 * d * d * (t - 4.0 / 29.0);
}

}  // namespace

HsvImage rgb_to_hsv(const ImagePlanar& img) {
  const int w = img.width(), h = img.height();
  HsvImage out{Plane(w, h), Plane(w, h), Plane(w, h)};
  auto r = img.plane(0).samples(), g = img.plane(1).samples(),
       b = img.plane(2).samples();
  auto H = out.h.samples(), S = out.s.samples(), V = out.v.samples();
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double mx = std::max({r[i], g[i], b[i]});
    const double mn = std::min({r[i], g[i], b[i]});
    const double c = mx - mn;
    V[i] = mx;
    S[i] = mx > 0.0 ? c / mx : 0.0;
    double hue = 0.0;
    if (c > 0.0) {
      if (mx == r[i])
        hue = std::fmod((g[i] - b[i]) / c, 6.0);
      else if (mx == g[i])
        hue = (b[i] - r[i]) / c + 2.0;
      else
        hue = (r[i] - g[i]) / c + 4.0;
      hue *= 60.0;
      if (hue < 0.0) hue += 360.0;
    }
    H[i] = hue;
  }
  return out;
}

ImagePlanar hsv_to_rgb(const HsvImage& hsv) {
  const int w = hsv.h.width(), ht = hsv.h.height();
  ImagePlanar out(w, ht);
  auto H = hsv.h.samples(), S = hsv.s.samples(), V = hsv.v.samples();
  auto r = out.plane(0).samples(), g = out.plane(1).samples(),
       b = out.plane(2).samples();
  for (std::size_t i = 0; i < H.size(); ++i) {
    const double c = V[i] * S[i];
    const double hp = H[i] / 60.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double rr = 0, gg = 0, bb = 0;
    if (hp < 1)      { rr = c; gg = x; }
    else if (hp < 2) { rr = x; gg = c; }
    else if (hp < 3) { gg = c; bb = x; }
    else if (hp < 4) { gg = x; bb = c; }
    else if (hp < 5) { rr = x; bb = c; }
    else             { rr = c; bb = x; }
    const double m = V[i] - c;
    r[i] = rr + m;
    g[i] = gg + m;
    b[i] = bb + m;
  }
  return out;
}

void rgb_to_lab_pixel(double r, double g, double b,
                      double& L, double& A, double& B) {
  const double lr = srgb_to_linear(r), lg = srgb_to_linear(g),
               lb = srgb_to_linear(b);
  double xyz[3];
  for (int k = 0; k < 3; ++k)
    xyz[k] = (kM[k][0] * lr + kM[k][1] * lg + kM[k][2] * lb) / kWhite[k];
  const double fx = f_lab(xyz[0]), fy = f_lab(xyz[1]), fz = f_lab(xyz[2]);
  L = 116.0 * fy - 16.0;
  A = 500.0 * (fx - fy);
  B = 200.0 * (fy - fz);
}

LabImage rgb_to_lab(const ImagePlanar& img) {
  const int w = img.width(), h = img.height();
  LabImage out{Plane(w, h), Plane(w, h), Plane(w, h)};
  auto r = img.plane(0).samples(), g = img.plane(1).samples(),
       b = img.plane(2).samples();
  auto L = out.l.samples(), A = out.a.samples(), B = out.b.samples();
  for (std::size_t i = 0; i < r.size(); ++i) {
    double lL, la, lb;
    rgb_to_lab_pixel(r[i], g[i], b[i], lL, la, lb);
    L[i] = lL;
    A[i] = std::clamp(la + 128.0, 0.0, 255.0);
    B[i] = std::clamp(lb + 128.0, 0.0, 255.0);
  }
  return out;
}

ImagePlanar lab_to_rgb(const LabImage& lab) {
  const int w = lab.l.width(), h = lab.l.height();
  ImagePlanar out(w, h);
  auto L = lab.l.samples(), A = lab.a.samples(), B = lab.b.samples();
  auto r = out.plane(0).samples(), g = out.plane(1).samples(),
       b = out.plane(2).samples();
  for (std::size_t i = 0; i < L.size(); ++i) {
    const double fy = (L[i] + 16.0) / 116.0;
    const double fx = fy + (A[i] - 128.0) / 500.0;
    const double fz = fy - (B[i] - 128.0) / 200.0;
    const double xyz[3] = {f_lab_inv(fx) * kWhite[0], f_lab_inv(fy) * kWhite[1],
                           f_lab_inv(fz) * kWhite[2]};
    double lin[3];
    for (int k = 0; k < 3; ++k)
      lin[k] = kMInv[k][0] * xyz[0] + kMInv[k][1] * xyz[1] + kMInv[k][2] * xyz[2];
    r[i] = clamp01(linear_to_srgb(lin[0]));
    g[i] = clamp01(linear_to_srgb(lin[1]));
    b[i] = clamp01(linear_to_srgb(lin[2]));
  }
  return out;
}

}  // namespace diver
