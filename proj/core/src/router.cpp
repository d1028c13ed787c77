#include "diver/router.hpp"

namespace diver {

namespace {
double plane_mean(const Plane& p) {
  double sum = 0.0;
  for (double v : p.samples()) sum += v;
  return sum / static_cast<double>(p.size());
}
}  // namespace

RouteDecision assess_illumination(const ImagePlanar& img) {
  RouteDecision d;
  d.r_avg = plane_mean(img.plane(0));
  d.g_avg = plane_mean(img.plane(1));
  d.b_avg = plane_mean(img.plane(2));
  const bool low = d.r_avg < d.g_avg / 5.0 || d.r_avg < d.b_avg / 5.0;
  d.branch = low ? Branch::LowLight : Branch::WellLit;
  return d;
}

}  // namespace diver
