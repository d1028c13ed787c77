#pragma once

#include <optional>
#include <string>
#include <vector>

#include "diver/image.hpp"
#include "diver/router.hpp"

namespace diver {

struct PatchRect {
  int x = 0, y = 0, w = 0, h = 0;
};

/// Axis-aligned rectangles marking neutral patches, image coordinates.
using GrayPatchSet = std::vector<PatchRect>;

struct QualityReport {
  Branch route = Branch::WellLit;
  std::optional<double> psnr;
  std::optional<double> ssim;
  double uiqm = 0.0;
  double uciqe = 0.0;
  std::optional<double> gpmae;
};

/// 10*log10(1/MSE) with peak 1.0, capped at 99 dB for identical inputs.
double psnr(const ImagePlanar& a, const ImagePlanar& b);

/// Canonical single-scale SSIM: 11x11 Gaussian window (sigma 1.5),
/// K1=0.01, K2=0.03, peak 1.0, averaged over valid positions and channels.
/// Requires min(width, height) >= 11.
double ssim(const ImagePlanar& a, const ImagePlanar& b);

/// c1*UICM + c2*UISM + c3*UIConM with (0.0282, 0.2953, 3.5753).
double uiqm(const ImagePlanar& img);

/// 0.4680*sigma_chroma + 0.2745*luminance_contrast + 0.2576*mean_saturation,
/// computed in CIELab with L and chroma normalized by 100 so results land in
/// the customary range; contrast is the spread between the top and bottom
/// 1% luminance quantile means.
double uciqe(const ImagePlanar& img);

/// Mean over patches of the angle (degrees) between the patch mean color
/// and the neutral (1,1,1) axis. Throws on zero-norm patch means.
double gpmae(const ImagePlanar& img, const GrayPatchSet& patches);

/// Parses one `x y w h` patch per line; '#' starts a comment.
GrayPatchSet parse_patches(const std::string& text);

}  // namespace diver
