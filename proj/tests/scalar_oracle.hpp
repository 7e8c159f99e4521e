#pragma once

#include <cmath>
#include <limits>

// Exhaustive search over (q, p) ∈ [0, 10]² at step 1e-3 for the scalar
// problem a = b = 1, where H(q, p) = [[p + 1, p], [p, q]].
namespace scalar_oracle {

struct GridOptimum {
  double q = 0.0;
  double p = 0.0;
  double objective = std::numeric_limits<double>::infinity();
  double gain() const { return -p / (p + 1.0); }
};

inline GridOptimum grid_search(double c_q, double c_p, double phi) {
  GridOptimum best;
  for (int i = 0; i <= 10000; ++i) {
    const double p = 1e-3 * i;
    for (int j = 0; j <= 10000; ++j) {
      const double q = 1e-3 * j;
      if (q > phi || p > phi) continue;
      if ((p + 1.0) * q - p * p < 0.0) continue;
      const double v = c_q * q + c_p * p;
      if (v < best.objective) best = {q, p, v};
    }
  }
  return best;
}

// Noiseless data from x₁ = 1 with q̄ = 1 over N = 3 steps: p̄ is the golden
// ratio and k̄ = −p̄/(p̄ + 1).
struct GoldenInstance {
  double p_bar = (1.0 + std::sqrt(5.0)) / 2.0;
  double k_bar = -p_bar / (p_bar + 1.0);
  double y2 = 1.0 + k_bar;
  double y3 = y2 * y2;
  double c_q = 1.0 + y2 * y2;
  double c_p = y3 * y3 - 1.0;
};

}  // namespace scalar_oracle
