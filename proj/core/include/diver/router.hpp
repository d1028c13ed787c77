#pragma once

#include "diver/image.hpp"

namespace diver {

enum class Branch { LowLight, WellLit };

struct RouteDecision {
  Branch branch = Branch::WellLit;
  double r_avg = 0.0;
  double g_avg = 0.0;
  double b_avg = 0.0;
};

/// Classifies the image as low-lit when the average red intensity falls
/// strictly below a fifth of the green or blue average. Ties are WellLit.
RouteDecision assess_illumination(const ImagePlanar& img);

inline const char* to_string(Branch b) {
  return b == Branch::LowLight ? "LowLight" : "WellLit";
}

}  // namespace diver
