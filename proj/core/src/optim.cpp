#include "diver/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace diver {

void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grads) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: size mismatch");
  for (double g : grads)
    if (!std::isfinite(g))
      throw std::runtime_error("adam_step: non-finite gradient");

  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

double grad_check(const std::function<double(const std::vector<double>&)>& f,
                  const std::vector<double>& at,
                  const std::vector<double>& analytic, double step) {
  if (at.size() != analytic.size())
    throw std::invalid_argument("grad_check: size mismatch");
  double worst = 0.0;
  std::vector<double> x = at;
  for (std::size_t i = 0; i < at.size(); ++i) {
    x[i] = at[i] + step;
    const double fp = f(x);
    x[i] = at[i] - step;
    const double fm = f(x);
    x[i] = at[i];
    const double numeric = (fp - fm) / (2.0 * step);
    const double err =
        std::fabs(analytic[i] - numeric) / std::max(1.0, std::fabs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace diver
