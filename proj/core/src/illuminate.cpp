#include "diver/illuminate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "diver/optim.hpp"

namespace diver {

std::array<double, 3> GlobalLightParams::realized() const {
  return {std::tanh(theta[0]), std::tanh(theta[1]), std::tanh(theta[2])};
}

AmbientLight estimate_ambient(const ImagePlanar& img, const DepthMap& depth) {
  require_same_shape(img, depth);
  const std::size_t n = img.pixel_count();
  const std::size_t k = static_cast<std::size_t>(
      std::ceil(0.001 * static_cast<double>(n)));

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  auto deeper = [&](std::size_t a, std::size_t b) {
    const double za = depth.plane.samples()[a], zb = depth.plane.samples()[b];
    if (za != zb) return za > zb;
    return a < b;  // deterministic tie-break by row-major index
  };
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k) - 1,
                   idx.end(), deeper);

  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t p = idx[i];
    sum += img.plane(0).samples()[p] + img.plane(1).samples()[p] +
           img.plane(2).samples()[p];
  }
  AmbientLight a;
  a.a = sum / (3.0 * static_cast<double>(k));
  return a;
}

TransmissionMap transmission_map(const ImagePlanar& img, const AmbientLight& a,
                                 int patch_radius, double t_min) {
  if (a.a < 0.0 || a.a > 1.0)
    throw std::invalid_argument("transmission_map: ambient light outside [0,1]");
  const int w = img.width(), h = img.height();
  const double denom = std::max(a.a, 1.0 - a.a);
  TransmissionMap tm{Plane(w, h)};
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - patch_radius);
    const int y1 = std::min(h - 1, y + patch_radius);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - patch_radius);
      const int x1 = std::min(w - 1, x + patch_radius);
      double best = 0.0;
      for (int sy = y0; sy <= y1; ++sy)
        for (int sx = x0; sx <= x1; ++sx)
          for (int c = 0; c < 3; ++c)
            best = std::max(best, std::fabs(img.plane(c).at(sx, sy) - a.a));
      tm.t.at(x, y) = std::clamp(best / denom, t_min, 1.0);
    }
  }
  return tm;
}

ImagePlanar forward_illuminate(const ImagePlanar& img, const TransmissionMap& t,
                               const GlobalLightParams& params) {
  const auto ug = params.realized();
  ImagePlanar out(img.width(), img.height());
  auto tt = t.t.samples();
  for (int c = 0; c < 3; ++c) {
    auto src = img.plane(c).samples();
    auto dst = out.plane(c).samples();
    for (std::size_t i = 0; i < src.size(); ++i) {
      const double r = (src[i] - ug[c]) / tt[i];
      dst[i] = ug[c] + (r > 0.0 ? r : 0.0);
    }
  }
  return out;
}

double loss_grayworld(const ImagePlanar& img) {
  double mu[3];
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0;
    for (double v : img.plane(c).samples()) sum += v;
    mu[c] = sum / static_cast<double>(img.pixel_count());
  }
  const double gray = (mu[0] + mu[1] + mu[2]) / 3.0;
  return (std::fabs(mu[0] - gray) + std::fabs(mu[1] - gray) +
          std::fabs(mu[2] - gray)) / 3.0;
}

double loss_luminous(const ImagePlanar& img, double target) {
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    double acc = 0.0;
    for (double v : img.plane(c).samples()) {
      const double d = v - target;
      acc += d * d;
    }
    total += acc / static_cast<double>(img.pixel_count());
  }
  return total / 3.0;
}

double illuminate_loss_and_grad(const ImagePlanar& img, const TransmissionMap& t,
                                const std::array<double, 3>& theta,
                                const IlluminateConfig& cfg,
                                std::array<double, 3>* grad) {
  const std::size_t n = img.pixel_count();
  const double invn = 1.0 / static_cast<double>(n);
  auto tt = t.t.samples();

  std::array<double, 3> ug, mu, dmu_dug, dll_dug, ll_c;
  for (int c = 0; c < 3; ++c) {
    ug[c] = std::tanh(theta[c]);
    auto src = img.plane(c).samples();
    double sum = 0.0, dsum = 0.0, llsum = 0.0, dllsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = (src[i] - ug[c]) / tt[i];
      const bool active = r > 0.0;
      const double y = ug[c] + (active ? r : 0.0);
      const double dy = 1.0 + (active ? -1.0 / tt[i] : 0.0);
      sum += y;
      dsum += dy;
      const double d = y - cfg.target;
      llsum += d * d;
      dllsum += d * dy;
    }
    mu[c] = sum * invn;
    dmu_dug[c] = dsum * invn;
    ll_c[c] = llsum * invn;
    dll_dug[c] = (2.0 / 3.0) * dllsum * invn;
  }

  const double gray = (mu[0] + mu[1] + mu[2]) / 3.0;
  double lg = 0.0;
  std::array<double, 3> sgn;
  for (int c = 0; c < 3; ++c) {
    const double d = mu[c] - gray;
    lg += std::fabs(d);
    sgn[c] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  }
  lg /= 3.0;
  const double ll = (ll_c[0] + ll_c[1] + ll_c[2]) / 3.0;

  if (grad) {
    for (int c = 0; c < 3; ++c) {
      double dlg = 0.0;
      for (int cc = 0; cc < 3; ++cc)
        dlg += sgn[cc] * ((cc == c ? 1.0 : 0.0) - 1.0 / 3.0);
      dlg = dlg / 3.0 * dmu_dug[c];
      const double dtotal = cfg.lambda1 * dlg + cfg.lambda2 * dll_dug[c];
      (*grad)[c] = dtotal * (1.0 - ug[c] * ug[c]);
    }
  }
  return cfg.lambda1 * lg + cfg.lambda2 * ll;
}

IlluminateResult fit_illuminate(const ImagePlanar& img, const DepthMap& depth,
                                const IlluminateConfig& cfg) {
  if (cfg.iters < 1) throw std::invalid_argument("fit_illuminate: iters >= 1");
  if (cfg.lr <= 0.0) throw std::invalid_argument("fit_illuminate: lr > 0");

  const AmbientLight ambient = estimate_ambient(img, depth);
  const TransmissionMap tmap =
      transmission_map(img, ambient, cfg.patch_radius, cfg.t_min);

  std::vector<double> theta = {0.0, 0.0, 0.0};
  AdamState adam(3, cfg.lr);
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(cfg.iters));

  for (int it = 0; it < cfg.iters; ++it) {
    std::array<double, 3> th{theta[0], theta[1], theta[2]};
    std::array<double, 3> grad;
    const double loss = illuminate_loss_and_grad(img, tmap, th, cfg, &grad);
    if (!std::isfinite(loss))
      throw std::runtime_error(
          "fit_illuminate: non-finite loss at iteration " + std::to_string(it));
    std::vector<double> g(grad.begin(), grad.end());
    adam_step(adam, theta, g);
    trace.push_back(loss);
  }

  IlluminateResult res;
  res.params.theta = {theta[0], theta[1], theta[2]};
  res.enhanced = forward_illuminate(img, tmap, res.params);
  clamp01(res.enhanced);
  res.loss_trace = std::move(trace);
  return res;
}

}  // namespace diver
