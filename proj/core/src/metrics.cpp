#include "diver/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "diver/color.hpp"
#include "diver/convolve.hpp"

namespace diver {

double psnr(const ImagePlanar& a, const ImagePlanar& b) {
  require_same_shape(a, b);
  double acc = 0.0;
  for (int c = 0; c < 3; ++c) {
    auto as = a.plane(c).samples(), bs = b.plane(c).samples();
    for (std::size_t i = 0; i < as.size(); ++i) {
      const double d = as[i] - bs[i];
      acc += d * d;
    }
  }
  const double mse = acc / (3.0 * static_cast<double>(a.pixel_count()));
  if (mse == 0.0) return 99.0;
  return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

namespace {

// 11x11 Gaussian window, sigma 1.5, normalized to unit sum.
const std::vector<double>& ssim_window() {
  static const std::vector<double> win = [] {
    constexpr int r = 5;
    constexpr double sigma = 1.5;
    std::vector<double> w(11 * 11);
    double sum = 0.0;
    for (int y = -r; y <= r; ++y)
      for (int x = -r; x <= r; ++x) {
        const double v = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
        w[static_cast<std::size_t>((y + r) * 11 + (x + r))] = v;
        sum += v;
      }
    for (double& v : w) v /= sum;
    return w;
  }();
  return win;
}

double ssim_plane(const Plane& a, const Plane& b) {
  constexpr double kC1 = 0.01 * 0.01;
  constexpr double kC2 = 0.03 * 0.03;
  constexpr int r = 5;
  const int w = a.width(), h = a.height();
  const auto& win = ssim_window();

  double total = 0.0;
  long count = 0;
  for (int y = r; y < h - r; ++y) {
    for (int x = r; x < w - r; ++x) {
      double mua = 0, mub = 0, saa = 0, sbb = 0, sab = 0;
      std::size_t k = 0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx, ++k) {
          const double wa = a.at(x + dx, y + dy);
          const double wb = b.at(x + dx, y + dy);
          mua += win[k] * wa;
          mub += win[k] * wb;
          saa += win[k] * wa * wa;
          sbb += win[k] * wb * wb;
          sab += win[k] * wa * wb;
        }
      const double va = saa - mua * mua;
      const double vb = sbb - mub * mub;
      const double cov = sab - mua * mub;
      const double num = (2 * mua * mub + kC1) * (2 * cov + kC2);
      const double den = (mua * mua + mub * mub + kC1) * (va + vb + kC2);
      total += num / den;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace

double ssim(const ImagePlanar& a, const ImagePlanar& b) {
  require_same_shape(a, b);
  if (a.width() < 11 || a.height() < 11)
    throw std::invalid_argument("ssim: image sides must be >= 11");
  double total = 0.0;
  for (int c = 0; c < 3; ++c) total += ssim_plane(a.plane(c), b.plane(c));
  return total / 3.0;
}

namespace {

constexpr int kBlock = 8;

// Asymmetric alpha-trimmed mean, trim fraction 0.1 each side.
double trimmed_mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const auto t1 = static_cast<std::size_t>(
      std::ceil(0.1 * static_cast<double>(n)));
  const auto t2 = static_cast<std::size_t>(
      std::floor(0.1 * static_cast<double>(n)));
  double sum = 0.0;
  for (std::size_t i = t1; i < n - t2; ++i) sum += v[i];
  return sum / static_cast<double>(n - t1 - t2);
}

double uicm_component(const ImagePlanar& img) {
  const std::size_t n = img.pixel_count();
  std::vector<double> rg(n), yb(n);
  auto r = img.plane(0).samples(), g = img.plane(1).samples(),
       b = img.plane(2).samples();
  for (std::size_t i = 0; i < n; ++i) {
    rg[i] = r[i] - g[i];
    yb[i] = 0.5 * (r[i] + g[i]) - b[i];
  }
  const double mu_rg = trimmed_mean(rg), mu_yb = trimmed_mean(yb);
  double var_rg = 0.0, var_yb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    var_rg += (rg[i] - mu_rg) * (rg[i] - mu_rg);
    var_yb += (yb[i] - mu_yb) * (yb[i] - mu_yb);
  }
  var_rg /= static_cast<double>(n);
  var_yb /= static_cast<double>(n);
  return -0.0268 * std::hypot(mu_rg, mu_yb) + 0.1586 * std::sqrt(var_rg + var_yb);
}

// EME over whole blocks: (2/K) sum log(max/min) where both bounds positive.
double eme(const Plane& p) {
  const int bw = p.width() / kBlock, bh = p.height() / kBlock;
  if (bw == 0 || bh == 0) return 0.0;
  double total = 0.0;
  for (int by = 0; by < bh; ++by)
    for (int bx = 0; bx < bw; ++bx) {
      double mn = p.at(bx * kBlock, by * kBlock), mx = mn;
      for (int y = by * kBlock; y < (by + 1) * kBlock; ++y)
        for (int x = bx * kBlock; x < (bx + 1) * kBlock; ++x) {
          const double v = p.at(x, y);
          mn = std::min(mn, v);
          mx = std::max(mx, v);
        }
      if (mn > 0.0 && mx > 0.0) total += std::log(mx / mn);
    }
  return 2.0 * total / static_cast<double>(bw * bh);
}

double uism_component(const ImagePlanar& img) {
  constexpr double kLuma[3] = {0.299, 0.587, 0.114};
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    const Plane gx = convolve3x3(img.plane(c), kSobelX);
    const Plane gy = convolve3x3(img.plane(c), kSobelY);
    Plane edge(img.width(), img.height());
    auto xs = gx.samples(), ys = gy.samples(), cs = img.plane(c).samples();
    auto es = edge.samples();
    for (std::size_t i = 0; i < es.size(); ++i)
      es[i] = std::hypot(xs[i], ys[i]) * cs[i];  // sobel-weighted channel
    total += kLuma[c] * eme(edge);
  }
  return total;
}

// logAMEE over whole blocks, max/min taken across all three channels.
double uiconm_component(const ImagePlanar& img) {
  const int bw = img.width() / kBlock, bh = img.height() / kBlock;
  if (bw == 0 || bh == 0) return 0.0;
  double total = 0.0;
  for (int by = 0; by < bh; ++by)
    for (int bx = 0; bx < bw; ++bx) {
      double mn = img.plane(0).at(bx * kBlock, by * kBlock), mx = mn;
      for (int c = 0; c < 3; ++c)
        for (int y = by * kBlock; y < (by + 1) * kBlock; ++y)
          for (int x = bx * kBlock; x < (bx + 1) * kBlock; ++x) {
            const double v = img.plane(c).at(x, y);
            mn = std::min(mn, v);
            mx = std::max(mx, v);
          }
      const double top = mx - mn, bot = mx + mn;
      if (top > 0.0 && bot > 0.0) {
        const double ratio = top / bot;
        total += ratio * std::log(ratio);
      }
    }
  return -total / static_cast<double>(bw * bh);
}

}  // namespace

double uiqm(const ImagePlanar& img) {
  return 0.0282 * uicm_component(img) + 0.2953 * uism_component(img) +
         3.5753 * uiconm_component(img);
}

double uciqe(const ImagePlanar& img) {
  const std::size_t n = img.pixel_count();
  auto r = img.plane(0).samples(), g = img.plane(1).samples(),
       b = img.plane(2).samples();

  std::vector<double> lum(n);
  double chroma_sum = 0.0, chroma_sq = 0.0, sat_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double L, A, B;
    rgb_to_lab_pixel(r[i], g[i], b[i], L, A, B);
    const double ln = L / 100.0;
    const double chroma = std::hypot(A, B) / 100.0;
    lum[i] = ln;
    chroma_sum += chroma;
    chroma_sq += chroma * chroma;
    sat_sum += ln > 1e-9 ? chroma / ln : 0.0;
  }
  const double mean_c = chroma_sum / static_cast<double>(n);
  const double var_c =
      std::max(0.0, chroma_sq / static_cast<double>(n) - mean_c * mean_c);

  std::sort(lum.begin(), lum.end());
  const auto k = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::llround(0.01 * static_cast<double>(n))));
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    lo += lum[i];
    hi += lum[n - 1 - i];
  }
  const double contrast = (hi - lo) / static_cast<double>(k);

  return 0.4680 * std::sqrt(var_c) + 0.2745 * contrast +
         0.2576 * sat_sum / static_cast<double>(n);
}

double gpmae(const ImagePlanar& img, const GrayPatchSet& patches) {
  if (patches.empty()) throw std::invalid_argument("gpmae: empty patch set");
  double total = 0.0;
  for (const auto& p : patches) {
    if (p.w <= 0 || p.h <= 0 || p.x < 0 || p.y < 0 ||
        p.x + p.w > img.width() || p.y + p.h > img.height())
      throw std::invalid_argument("gpmae: patch outside image bounds");
    double mean[3] = {0, 0, 0};
    for (int c = 0; c < 3; ++c) {
      for (int y = p.y; y < p.y + p.h; ++y)
        for (int x = p.x; x < p.x + p.w; ++x)
          mean[c] += img.plane(c).at(x, y);
      mean[c] /= static_cast<double>(p.w) * p.h;
    }
    const double norm =
        std::sqrt(mean[0] * mean[0] + mean[1] * mean[1] + mean[2] * mean[2]);
    if (norm <= 0.0)
      throw std::invalid_argument("gpmae: zero-norm patch mean");
    const double cosang = std::clamp(
        (mean[0] + mean[1] + mean[2]) / (norm * std::sqrt(3.0)), -1.0, 1.0);
    total += std::acos(cosang) * 180.0 / std::numbers::pi;
  }
  return total / static_cast<double>(patches.size());
}

GrayPatchSet parse_patches(const std::string& text) {
  GrayPatchSet out;
  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    PatchRect p;
    if (ls >> p.x >> p.y >> p.w >> p.h) out.push_back(p);
  }
  return out;
}

}  // namespace diver
