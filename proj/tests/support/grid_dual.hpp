#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "sentinel/svm.hpp"

namespace sentinel::testing {

/// Minimum of 0.5 |sum a_i y_i x_i|^2 - sum a_i over a_i in {0, step, ..., C} for all but the
/// last sample; the last is fixed by sum a_i y_i = 0 and must land in [0, C].
inline double grid_dual_minimum(const std::vector<Sample>& samples, double c, int steps = 100) {
  const std::size_t n = samples.size();
  const std::size_t d = samples[0].features.size();
  std::vector<int> idx(n - 1, 0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> w(d);
  while (true) {
    double balance = 0.0, sum = 0.0;
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double a = c * idx[i] / steps;
      const double y = sign_of(samples[i].label);
      balance += a * y;
      sum += a;
      for (std::size_t k = 0; k < d; ++k) w[k] += a * y * samples[i].features[k];
    }
    const double y_last = sign_of(samples[n - 1].label);
    const double a_last = -balance * y_last;
    if (a_last >= -1e-12 && a_last <= c + 1e-12) {
      sum += a_last;
      double norm2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double wk = w[k] + a_last * y_last * samples[n - 1].features[k];
        norm2 += wk * wk;
      }
      best = std::min(best, 0.5 * norm2 - sum);
    }
    std::size_t i = 0;
    while (i < idx.size() && ++idx[i] > steps) idx[i++] = 0;
    if (i == idx.size()) break;
  }
  return best;
}

}  // namespace sentinel::testing
