#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "diver/image.hpp"

namespace diver {

/// Ordered list of named raw scalar parameters.
struct ParamVector {
  std::vector<std::string> names;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  void push(std::string name, double value) {
    names.push_back(std::move(name));
    values.push_back(value);
  }
};

struct AdamState {
  explicit AdamState(std::size_t n, double lr = 1e-3)
      : lr(lr), m(n, 0.0), v(n, 0.0) {}

  double lr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<double> m, v;
};

/// One bias-corrected Adam update, in place. Throws on non-finite gradients.
void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grads);

/// Max over coordinates of |analytic - central_difference| / max(1, |numeric|).
double grad_check(const std::function<double(const std::vector<double>&)>& f,
                  const std::vector<double>& at,
                  const std::vector<double>& analytic, double step);

/// Seeded uniform generator with an explicit mapping from raw 64-bit draws,
/// so sequences are reproducible across standard libraries.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b9ull) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::uint64_t state_;
};

}  // namespace diver
