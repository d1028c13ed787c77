#include "diver/image.hpp"

#include <algorithm>
#include <numeric>

namespace diver {

PlaneStats plane_stats(const Plane& p) {
  if (p.empty()) throw std::invalid_argument("plane_stats: empty plane");
  auto s = p.samples();
  PlaneStats st;
  st.min = s[0];
  st.max = s[0];
  double sum = 0.0;
  for (double v : s) {
    sum += v;
    st.min = std::min(st.min, v);
    st.max = std::max(st.max, v);
  }
  st.mean = sum / static_cast<double>(s.size());

  std::vector<double> sorted(s.begin(), s.end());
  const std::size_t n = sorted.size();
  const std::size_t mid = n / 2;
  std::nth_element(sorted.begin(), sorted.begin() + mid, sorted.end());
  if (n % 2 == 1) {
    st.median = sorted[mid];
  } else {
    const double hi = sorted[mid];
    const double lo = *std::max_element(sorted.begin(), sorted.begin() + mid);
    st.median = 0.5 * (lo + hi);
  }
  return st;
}

ChannelStats channel_stats(const ImagePlanar& img) {
  return {plane_stats(img.plane(0)), plane_stats(img.plane(1)),
          plane_stats(img.plane(2))};
}

bool all_finite(const Plane& p) {
  for (double v : p.samples())
    if (!std::isfinite(v)) return false;
  return true;
}

bool all_finite(const ImagePlanar& img) {
  return all_finite(img.plane(0)) && all_finite(img.plane(1)) &&
         all_finite(img.plane(2));
}

void clamp01(Plane& p) {
  for (double& v : p.samples()) v = clamp01(v);
}

void clamp01(ImagePlanar& img) {
  for (auto& p : img.planes) clamp01(p);
}

void require_same_shape(const ImagePlanar& img, const DepthMap& depth) {
  if (!img.planes[0].same_shape(depth.plane))
    throw std::invalid_argument("image/depth dimension mismatch");
}

void require_same_shape(const ImagePlanar& a, const ImagePlanar& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("image dimension mismatch");
}

}  // namespace diver
