#pragma once

#include <array>
#include <vector>

#include "diver/image.hpp"

namespace diver {

/// The backscatter/attenuation sub-networks use the piecewise softplus
/// S+(x) = 1 for x <= 0, log(1+e^-x) for x > 0 (with S_C+ = 1 - S+), which
/// is discontinuous at 0; the constant branch carries subgradient 0.
/// StandardSmooth applies log(1+e^-x) everywhere.
enum class SoftplusVariant { PaperPiecewise, StandardSmooth };

double softplus_branch(double x, SoftplusVariant variant);
double softplus_branch_deriv(double x, SoftplusVariant variant);

/// Raw VeilNet parameters. Magnitudes B1, B2 enter the forward sum directly;
/// decay rates are realized through a smooth nonnegativity map.
struct VeilParams {
  double b1_mag = 0.0;   // B-hat 1
  double b2_mag = 0.0;   // B-hat 2
  double b1_raw = 0.0;   // decay rate, raw
  double b2_raw = 0.0;

  double decay1() const;  // realized, >= 0
  double decay2() const;
};

/// Raw AttenNet parameters: P exponential terms with slope alpha_p and
/// weight alpha'_p each.
struct AttenParams {
  std::vector<double> slope;   // alpha_p
  std::vector<double> weight;  // alpha'_p

  static AttenParams zeros(int p_terms);
  int terms() const { return static_cast<int>(slope.size()); }
};

struct HuberConfig {
  double delta = 0.1;  // quadratic/linear transition threshold
  double eta = 1.0;    // linear-regime weight
};

struct HydroConfig {
  double lr = 0.001;
  int iters = 50;
  HuberConfig huber;
  int p_terms = 2;
  SoftplusVariant softplus = SoftplusVariant::PaperPiecewise;
  double target = 0.5;  // luminance target for the atten phase
  std::uint64_t seed = 0;
};

struct HydroResult {
  ImagePlanar restored;   // clamped at egress
  ImagePlanar veil_free;  // direct signal U_H - U_B (unclamped)
  VeilParams veil;
  AttenParams atten;
  std::vector<double> veil_loss_trace;
  std::vector<double> atten_loss_trace;
};

/// Physical two-term backscatter model B1(1 - e^-b1 z) + B2 e^-b2 z.
Plane backscatter_physical(const DepthMap& z, double b1_mag, double b2_mag,
                           double decay1, double decay2);

/// Learned backscatter map tanh(B1 * S_C+(-b1 z) + B2 * S+(-b2 z)).
Plane veilnet_forward(const DepthMap& z, const VeilParams& params,
                      SoftplusVariant variant);

/// U_D = U_H - U_B, unclamped (feeds the losses).
ImagePlanar direct_signal(const ImagePlanar& u_h, const Plane& u_b);

/// Inverse attenuation map S+(sum_p alpha'_p * S+(alpha_p z)).
Plane attennet_forward(const DepthMap& z, const AttenParams& params,
                       SoftplusVariant variant);

/// Forward degradation simulator U = J e^-beta z + B_inf (1 - e^-beta z),
/// clamped to [0,1]. Test-fixture generator.
ImagePlanar degrade(const ImagePlanar& j, const DepthMap& z,
                    const std::array<double, 3>& beta,
                    const std::array<double, 3>& b_inf);

/// Mean over samples of u^2 for |u| <= delta, else eta*delta*(|u| - delta/2).
double loss_huber(const Plane& u_b, const HuberConfig& cfg);

/// Sum over channel pairs of squared channel-mean differences.
double loss_color_consistency(const ImagePlanar& img);

/// (1/3) sum_c mean(|Sx*J - Sx*D| + |Sy*J - Sy*D|).
double loss_sobel(const ImagePlanar& u_j, const ImagePlanar& u_d);

/// Huber loss of the veil map plus analytic gradient w.r.t. the four raw
/// parameters (order: b1_mag, b2_mag, b1_raw, b2_raw).
double veil_loss_and_grad(const DepthMap& z, const VeilParams& params,
                          SoftplusVariant variant, const HuberConfig& huber,
                          std::array<double, 4>* grad);

/// L_A = L_L + L_C + L_S of U_J = U_D * alpha_A(z) against U_D, plus the
/// analytic gradient w.r.t. raw slopes and weights (slopes first).
double atten_loss_and_grad(const ImagePlanar& u_d, const DepthMap& z,
                           const AttenParams& params, SoftplusVariant variant,
                           double target, std::vector<double>* grad);

/// Two-phase fit: VeilNet against the Huber loss, then AttenNet against the
/// composite loss of the restored image. Deterministic given cfg.seed
/// (raw parameters initialize from a small seeded uniform draw).
HydroResult fit_hydrooptic(const ImagePlanar& u_h, const DepthMap& z,
                           const HydroConfig& cfg);

}  // namespace diver
