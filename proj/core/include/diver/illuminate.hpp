#pragma once

#include <array>
#include <vector>

#include "diver/image.hpp"

namespace diver {

/// Learnable global light: one raw scalar per channel, realized as
/// tanh(theta_c) in (-1,1) and broadcast spatially. Negative values act as
/// light intensifiers through the additive term of the forward model.
struct GlobalLightParams {
  std::array<double, 3> theta = {0.0, 0.0, 0.0};

  std::array<double, 3> realized() const;
};

struct TransmissionMap {
  Plane t;
};

/// Scalar per-image ambient light: mean RGB intensity of the deepest pixels.
struct AmbientLight {
  double a = 0.0;
};

struct IlluminateConfig {
  int patch_radius = 7;      // square half-size of psi(y)
  double lr = 0.001;
  int iters = 150;
  double lambda1 = 0.25;     // grayworld weight
  double lambda2 = 1.0;      // luminous weight
  double target = 0.5;       // U_t
  double t_min = 0.05;       // transmission floor
  std::uint64_t seed = 0;
};

struct IlluminateResult {
  ImagePlanar enhanced;            // clamped at egress
  GlobalLightParams params;
  std::vector<double> loss_trace;  // one entry per iteration
};

/// Mean RGB over the ceil(0.1% * H * W) deepest pixels; depth ties break by
/// row-major index.
AmbientLight estimate_ambient(const ImagePlanar& img, const DepthMap& depth);

/// T(x) = max over the patch and channels of |U_R - A| / max(A, 1-A),
/// clamped to [t_min, 1].
TransmissionMap transmission_map(const ImagePlanar& img, const AmbientLight& a,
                                 int patch_radius, double t_min);

/// U_I = U_G + relu((U_R - U_G)/T) per pixel and channel; not clamped here.
ImagePlanar forward_illuminate(const ImagePlanar& img, const TransmissionMap& t,
                               const GlobalLightParams& params);

/// (1/3) sum_c |mu_c - mu_gray| with mu_gray the mean of channel means.
double loss_grayworld(const ImagePlanar& img);

/// Mean over channels of per-channel MSE against the constant target.
double loss_luminous(const ImagePlanar& img, double target);

/// Combined lambda1 * L_G + lambda2 * L_L of the forward output, plus its
/// analytic gradient w.r.t. raw theta. Exposed for the fit loop and checks.
double illuminate_loss_and_grad(const ImagePlanar& img, const TransmissionMap& t,
                                const std::array<double, 3>& theta,
                                const IlluminateConfig& cfg,
                                std::array<double, 3>* grad);

/// Adam fit of theta against the combined loss; deterministic given config.
/// Throws on a non-finite loss.
IlluminateResult fit_illuminate(const ImagePlanar& img, const DepthMap& depth,
                                const IlluminateConfig& cfg);

}  // namespace diver
