#include "diver/hydrooptic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "diver/convolve.hpp"
#include "diver/optim.hpp"

namespace diver {

namespace {

// Smooth softplus used as the nonnegativity map for decay rates.
double softplus_nonneg(double x) {
  return std::log1p(std::exp(-std::fabs(x))) + std::max(x, 0.0);
}

double softplus_nonneg_deriv(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double sign_or_zero(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double softplus_branch(double x, SoftplusVariant variant) {
  if (variant == SoftplusVariant::PaperPiecewise && x <= 0.0) return 1.0;
  // log(1 + e^-x), computed stably for both signs
  return x >= 0.0 ? std::log1p(std::exp(-x))
                  : std::log1p(std::exp(x)) - x;
}

double softplus_branch_deriv(double x, SoftplusVariant variant) {
  if (variant == SoftplusVariant::PaperPiecewise && x <= 0.0) return 0.0;
  return -1.0 / (1.0 + std::exp(x));
}

double VeilParams::decay1() const { return softplus_nonneg(b1_raw); }
double VeilParams::decay2() const { return softplus_nonneg(b2_raw); }

AttenParams AttenParams::zeros(int p_terms) {
  if (p_terms < 1)
    throw std::invalid_argument("AttenParams: P must be >= 1");
  AttenParams p;
  p.slope.assign(static_cast<std::size_t>(p_terms), 0.0);
  p.weight.assign(static_cast<std::size_t>(p_terms), 0.0);
  return p;
}

Plane backscatter_physical(const DepthMap& z, double b1_mag, double b2_mag,
                           double decay1, double decay2) {
  if (decay1 < 0.0 || decay2 < 0.0)
    throw std::invalid_argument("backscatter_physical: decay rates must be >= 0");
  Plane out(z.width(), z.height());
  auto zs = z.plane.samples();
  auto os = out.samples();
  for (std::size_t i = 0; i < zs.size(); ++i)
    os[i] = b1_mag * (1.0 - std::exp(-decay1 * zs[i])) +
            b2_mag * std::exp(-decay2 * zs[i]);
  return out;
}

Plane veilnet_forward(const DepthMap& z, const VeilParams& params,
                      SoftplusVariant variant) {
  Plane out(z.width(), z.height());
  const double d1 = params.decay1(), d2 = params.decay2();
  auto zs = z.plane.samples();
  auto os = out.samples();
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double scm = 1.0 - softplus_branch(-d1 * zs[i], variant);
    const double sp = softplus_branch(-d2 * zs[i], variant);
    os[i] = std::tanh(params.b1_mag * scm + params.b2_mag * sp);
  }
  return out;
}

ImagePlanar direct_signal(const ImagePlanar& u_h, const Plane& u_b) {
  if (!u_h.planes[0].same_shape(u_b))
    throw std::invalid_argument("direct_signal: dimension mismatch");
  ImagePlanar out(u_h.width(), u_h.height());
  auto bs = u_b.samples();
  for (int c = 0; c < 3; ++c) {
    auto src = u_h.plane(c).samples();
    auto dst = out.plane(c).samples();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] - bs[i];
  }
  return out;
}

Plane attennet_forward(const DepthMap& z, const AttenParams& params,
                       SoftplusVariant variant) {
  if (params.terms() < 1)
    throw std::invalid_argument("attennet_forward: P must be >= 1");
  Plane out(z.width(), z.height());
  auto zs = z.plane.samples();
  auto os = out.samples();
  for (std::size_t i = 0; i < zs.size(); ++i) {
    double inner = 0.0;
    for (int p = 0; p < params.terms(); ++p)
      inner += params.weight[static_cast<std::size_t>(p)] *
               softplus_branch(params.slope[static_cast<std::size_t>(p)] * zs[i],
                               variant);
    os[i] = softplus_branch(inner, variant);
  }
  return out;
}

ImagePlanar degrade(const ImagePlanar& j, const DepthMap& z,
                    const std::array<double, 3>& beta,
                    const std::array<double, 3>& b_inf) {
  require_same_shape(j, z);
  for (int c = 0; c < 3; ++c) {
    if (beta[static_cast<std::size_t>(c)] < 0.0)
      throw std::invalid_argument("degrade: beta must be >= 0");
    if (b_inf[static_cast<std::size_t>(c)] < 0.0 ||
        b_inf[static_cast<std::size_t>(c)] > 1.0)
      throw std::invalid_argument("degrade: B_inf must be in [0,1]");
  }
  ImagePlanar out(j.width(), j.height());
  auto zs = z.plane.samples();
  for (int c = 0; c < 3; ++c) {
    auto src = j.plane(c).samples();
    auto dst = out.plane(c).samples();
    const double b = beta[static_cast<std::size_t>(c)];
    const double binf = b_inf[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < src.size(); ++i) {
      const double e = std::exp(-b * zs[i]);
      dst[i] = clamp01(src[i] * e + binf * (1.0 - e));
    }
  }
  return out;
}

double loss_huber(const Plane& u_b, const HuberConfig& cfg) {
  if (cfg.delta <= 0.0 || cfg.eta <= 0.0)
    throw std::invalid_argument("loss_huber: delta and eta must be positive");
  double acc = 0.0;
  for (double u : u_b.samples()) {
    const double au = std::fabs(u);
    acc += au <= cfg.delta ? u * u : cfg.eta * cfg.delta * (au - cfg.delta / 2.0);
  }
  return acc / static_cast<double>(u_b.size());
}

double loss_color_consistency(const ImagePlanar& img) {
  double mu[3];
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0;
    for (double v : img.plane(c).samples()) sum += v;
    mu[c] = sum / static_cast<double>(img.pixel_count());
  }
  const double rg = mu[0] - mu[1], rb = mu[0] - mu[2], gb = mu[1] - mu[2];
  return rg * rg + rb * rb + gb * gb;
}

double loss_sobel(const ImagePlanar& u_j, const ImagePlanar& u_d) {
  require_same_shape(u_j, u_d);
  const double invn = 1.0 / static_cast<double>(u_j.pixel_count());
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (const auto& k : {kSobelX, kSobelY}) {
      const Plane gj = convolve3x3(u_j.plane(c), k);
      const Plane gd = convolve3x3(u_d.plane(c), k);
      auto js = gj.samples(), ds = gd.samples();
      double acc = 0.0;
      for (std::size_t i = 0; i < js.size(); ++i)
        acc += std::fabs(js[i] - ds[i]);
      total += acc * invn;
    }
  }
  return total / 3.0;
}

double veil_loss_and_grad(const DepthMap& z, const VeilParams& params,
                          SoftplusVariant variant, const HuberConfig& huber,
                          std::array<double, 4>* grad) {
  const double d1 = params.decay1(), d2 = params.decay2();
  auto zs = z.plane.samples();
  const double invn = 1.0 / static_cast<double>(zs.size());

  double loss = 0.0;
  double g_b1 = 0.0, g_b2 = 0.0, g_d1 = 0.0, g_d2 = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double a1 = -d1 * zs[i], a2 = -d2 * zs[i];
    const double scm = 1.0 - softplus_branch(a1, variant);
    const double sp = softplus_branch(a2, variant);
    const double s = params.b1_mag * scm + params.b2_mag * sp;
    const double u = std::tanh(s);
    const double au = std::fabs(u);

    double dh;  // d huber / d u
    if (au <= huber.delta) {
      loss += u * u;
      dh = 2.0 * u;
    } else {
      loss += huber.eta * huber.delta * (au - huber.delta / 2.0);
      dh = huber.eta * huber.delta * sign_or_zero(u);
    }
    if (!grad) continue;

    const double ds = dh * (1.0 - u * u) * invn;
    g_b1 += ds * scm;
    g_b2 += ds * sp;
    // d scm / d d1 = -S+'(a1) * (-z) = z * S+'(a1)
    g_d1 += ds * params.b1_mag * zs[i] * softplus_branch_deriv(a1, variant);
    g_d2 += ds * params.b2_mag * (-zs[i]) * softplus_branch_deriv(a2, variant);
  }
  loss *= invn;

  if (grad) {
    (*grad)[0] = g_b1;
    (*grad)[1] = g_b2;
    (*grad)[2] = g_d1 * softplus_nonneg_deriv(params.b1_raw);
    (*grad)[3] = g_d2 * softplus_nonneg_deriv(params.b2_raw);
  }
  return loss;
}

double atten_loss_and_grad(const ImagePlanar& u_d, const DepthMap& z,
                           const AttenParams& params, SoftplusVariant variant,
                           double target, std::vector<double>* grad) {
  require_same_shape(u_d, z);
  const int P = params.terms();
  const std::size_t n = u_d.pixel_count();
  const double invn = 1.0 / static_cast<double>(n);
  auto zs = z.plane.samples();

  // Forward: inner sum and gain plane.
  std::vector<std::vector<double>> spz(static_cast<std::size_t>(P));
  Plane inner(z.width(), z.height());
  auto is = inner.samples();
  for (int p = 0; p < P; ++p) {
    auto& v = spz[static_cast<std::size_t>(p)];
    v.resize(n);
    const double a = params.slope[static_cast<std::size_t>(p)];
    const double w = params.weight[static_cast<std::size_t>(p)];
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = softplus_branch(a * zs[i], variant);
      is[i] += w * v[i];
    }
  }
  Plane gain(z.width(), z.height());
  auto gs = gain.samples();
  for (std::size_t i = 0; i < n; ++i) gs[i] = softplus_branch(is[i], variant);

  ImagePlanar u_j(u_d.width(), u_d.height());
  for (int c = 0; c < 3; ++c) {
    auto ds = u_d.plane(c).samples();
    auto js = u_j.plane(c).samples();
    for (std::size_t i = 0; i < n; ++i) js[i] = ds[i] * gs[i];
  }

  // Losses.
  double ll = 0.0;
  double mu[3];
  for (int c = 0; c < 3; ++c) {
    auto js = u_j.plane(c).samples();
    double acc = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = js[i] - target;
      acc += d * d;
      sum += js[i];
    }
    ll += acc * invn;
    mu[c] = sum * invn;
  }
  ll /= 3.0;
  const double rg = mu[0] - mu[1], rb = mu[0] - mu[2], gb = mu[1] - mu[2];
  const double lc = rg * rg + rb * rb + gb * gb;
  const double ls = loss_sobel(u_j, u_d);
  const double loss = ll + lc + ls;
  if (!grad) return loss;

  // dL/dgain accumulated over the three loss terms.
  Plane dgain(z.width(), z.height(), 0.0);
  auto dg = dgain.samples();
  const double dmu[3] = {2.0 * rg + 2.0 * rb, -2.0 * rg + 2.0 * gb,
                         -2.0 * rb - 2.0 * gb};
  for (int c = 0; c < 3; ++c) {
    auto ds = u_d.plane(c).samples();
    auto js = u_j.plane(c).samples();
    const double dmu_c = dmu[c] * invn;
    for (std::size_t i = 0; i < n; ++i)
      dg[i] += ((2.0 / 3.0) * invn * (js[i] - target) + dmu_c) * ds[i];

    for (const auto& k : {kSobelX, kSobelY}) {
      const Plane ej = convolve3x3(u_j.plane(c), k);
      const Plane ed = convolve3x3(u_d.plane(c), k);
      Plane sgn(ej.width(), ej.height());
      auto es = sgn.samples();
      auto ejs = ej.samples(), eds = ed.samples();
      for (std::size_t i = 0; i < n; ++i)
        es[i] = sign_or_zero(ejs[i] - eds[i]) * invn / 3.0;
      const Plane back = convolve3x3_adjoint(sgn, k);
      auto bs = back.samples();
      for (std::size_t i = 0; i < n; ++i) dg[i] += bs[i] * ds[i];
    }
  }

  grad->assign(static_cast<std::size_t>(2 * P), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double dinner = dg[i] * softplus_branch_deriv(is[i], variant);
    if (dinner == 0.0) continue;
    for (int p = 0; p < P; ++p) {
      const double a = params.slope[static_cast<std::size_t>(p)];
      const double w = params.weight[static_cast<std::size_t>(p)];
      (*grad)[static_cast<std::size_t>(p)] +=
          dinner * w * softplus_branch_deriv(a * zs[i], variant) * zs[i];
      (*grad)[static_cast<std::size_t>(P + p)] +=
          dinner * spz[static_cast<std::size_t>(p)][i];
    }
  }
  return loss;
}

HydroResult fit_hydrooptic(const ImagePlanar& u_h, const DepthMap& z,
                           const HydroConfig& cfg) {
  require_same_shape(u_h, z);
  if (cfg.iters < 1) throw std::invalid_argument("fit_hydrooptic: iters >= 1");
  if (cfg.p_terms < 1) throw std::invalid_argument("fit_hydrooptic: P >= 1");

  DeterministicRng rng(cfg.seed);
  auto small_init = [&rng]() { return rng.uniform(-0.02, 0.02); };

  HydroResult res;

  // Phase 1: VeilNet against the Huber loss of the veil map.
  std::vector<double> vp = {small_init(), small_init(), small_init(),
                            small_init()};
  {
    AdamState adam(vp.size(), cfg.lr);
    res.veil_loss_trace.reserve(static_cast<std::size_t>(cfg.iters));
    for (int it = 0; it < cfg.iters; ++it) {
      const VeilParams cur{vp[0], vp[1], vp[2], vp[3]};
      std::array<double, 4> grad;
      const double loss =
          veil_loss_and_grad(z, cur, cfg.softplus, cfg.huber, &grad);
      if (!std::isfinite(loss))
        throw std::runtime_error(
            "fit_hydrooptic: non-finite veil loss at iteration " +
            std::to_string(it));
      std::vector<double> g(grad.begin(), grad.end());
      adam_step(adam, vp, g);
      res.veil_loss_trace.push_back(loss);
    }
  }
  res.veil = VeilParams{vp[0], vp[1], vp[2], vp[3]};

  const Plane u_b = veilnet_forward(z, res.veil, cfg.softplus);
  res.veil_free = direct_signal(u_h, u_b);

  // Phase 2: AttenNet against the composite loss of the restored image.
  std::vector<double> ap(static_cast<std::size_t>(2 * cfg.p_terms));
  for (auto& v : ap) v = small_init();
  {
    AdamState adam(ap.size(), cfg.lr);
    res.atten_loss_trace.reserve(static_cast<std::size_t>(cfg.iters));
    for (int it = 0; it < cfg.iters; ++it) {
      AttenParams cur;
      cur.slope.assign(ap.begin(), ap.begin() + cfg.p_terms);
      cur.weight.assign(ap.begin() + cfg.p_terms, ap.end());
      std::vector<double> grad;
      const double loss = atten_loss_and_grad(res.veil_free, z, cur,
                                              cfg.softplus, cfg.target, &grad);
      if (!std::isfinite(loss))
        throw std::runtime_error(
            "fit_hydrooptic: non-finite atten loss at iteration " +
            std::to_string(it));
      adam_step(adam, ap, grad);
      res.atten_loss_trace.push_back(loss);
    }
  }
  res.atten.slope.assign(ap.begin(), ap.begin() + cfg.p_terms);
  res.atten.weight.assign(ap.begin() + cfg.p_terms, ap.end());

  const Plane gain = attennet_forward(z, res.atten, cfg.softplus);
  res.restored = ImagePlanar(u_h.width(), u_h.height());
  auto gs = gain.samples();
  for (int c = 0; c < 3; ++c) {
    auto ds = res.veil_free.plane(c).samples();
    auto js = res.restored.plane(c).samples();
    for (std::size_t i = 0; i < gs.size(); ++i)
      js[i] = clamp01(ds[i] * gs[i]);
  }
  return res;
}

}  // namespace diver
