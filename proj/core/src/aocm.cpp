#include "diver/aocm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "diver/color.hpp"

namespace diver {

ImagePlanar cef(const ImagePlanar& img) {
  ImagePlanar out(img.width(), img.height());
  for (int c = 0; c < 3; ++c) {
    const PlaneStats st = plane_stats(img.plane(c));
    auto src = img.plane(c).samples();
    auto dst = out.plane(c).samples();

    if (st.max == st.min) {  // constant channel passes through
      std::copy(src.begin(), src.end(), dst.begin());
      continue;
    }

    const double t = 0.5 * (st.mean + st.median);
    const bool ls_degenerate = t == st.min;
    const bool us_degenerate = st.max == t;
    for (std::size_t i = 0; i < src.size(); ++i) {
      const double x = src[i];
      double ls, us;
      if (x < t) {
        ls = ls_degenerate ? x
                           : (x - st.min) * (1.0 - st.min) / (t - st.min) + st.min;
        us = 0.0;
      } else {
        ls = 1.0;
        us = us_degenerate ? 1.0 : (x - t) * 1.0 / (st.max - t);
      }
      dst[i] = clamp01(0.5 * (ls + us));
    }
  }
  return out;
}

ImagePlanar hssf(const ImagePlanar& img, const HssfConfig& cfg) {
  if (cfg.lambda < 0.0 || cfg.lambda > 1.0)
    throw std::invalid_argument("hssf: lambda must be in [0,1]");
  if (cfg.hue_low < 0.0 || cfg.hue_high < cfg.hue_low || cfg.hue_high >= 360.0)
    throw std::invalid_argument("hssf: invalid hue band");
  if (cfg.lambda == 0.0) return img;  // exact identity

  const HsvImage hsv = rgb_to_hsv(img);

  std::vector<bool> mask(img.pixel_count(), false);
  bool any = false;
  auto hs = hsv.h.samples(), ss = hsv.s.samples(), vs = hsv.v.samples();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = hs[i] >= cfg.hue_low && hs[i] <= cfg.hue_high &&
              ss[i] >= cfg.s_min && vs[i] >= cfg.v_min;
    any = any || mask[i];
  }
  if (!any) return img;

  LabImage lab = rgb_to_lab(img);
  auto la = lab.a.samples(), lb = lab.b.samples();
  const double keep = 1.0 - cfg.lambda;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    la[i] = 128.0 + (la[i] - 128.0) * keep;
    lb[i] = 128.0 + (lb[i] - 128.0) * keep;
  }
  const ImagePlanar suppressed = lab_to_rgb(lab);

  ImagePlanar out = img;
  for (int c = 0; c < 3; ++c) {
    auto dst = out.plane(c).samples();
    auto sup = suppressed.plane(c).samples();
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (mask[i]) dst[i] = sup[i];
  }
  return out;
}

}  // namespace diver
