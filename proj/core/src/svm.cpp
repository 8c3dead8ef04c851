#include "sentinel/svm.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "sentinel/error.hpp"

namespace sentinel {

std::string_view to_string(PatternLabel label) { return label == PatternLabel::Fall ? "Fall" : "Stand"; }

std::optional<PatternLabel> parse_pattern_label(std::string_view text) {
  if (text == "Fall") return PatternLabel::Fall;
  if (text == "Stand") return PatternLabel::Stand;
  return std::nullopt;
}

namespace {

constexpr double kTau = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Row-major design matrix with labels.
struct Problem {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> x;
  std::vector<double> y;
  [[nodiscard]] std::span<const double> row(std::size_t i) const { return {x.data() + i * d, d}; }
};

struct Solution {
  std::vector<double> alpha;
  std::vector<double> w;
  double bias = 0.0;
  long iterations = 0;
  bool converged = false;
  double gap = 0.0;
};

Solution solve(const Problem& p, double c, double tolerance, long max_iterations) {
  Solution s;
  s.alpha.assign(p.n, 0.0);
  s.w.assign(p.d, 0.0);
  std::vector<double> grad(p.n, -1.0);  // y_i w.x_i - 1
  std::vector<double> diag(p.n);
  for (std::size_t i = 0; i < p.n; ++i) diag[i] = dot(p.row(i), p.row(i));
  std::vector<double> dw(p.d);

  while (true) {
    // Maximal violating pair: i maximizes -y G over I_up, j minimizes it over I_low.
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    std::size_t i = p.n, j = p.n;
    for (std::size_t t = 0; t < p.n; ++t) {
      const double v = -p.y[t] * grad[t];
      const bool up = p.y[t] > 0 ? s.alpha[t] < c : s.alpha[t] > 0;
      const bool low = p.y[t] > 0 ? s.alpha[t] > 0 : s.alpha[t] < c;
      if (up && v > g_max) {
        g_max = v;
        i = t;
      }
      if (low && v < g_min) {
        g_min = v;
        j = t;
      }
    }
    s.gap = (i == p.n || j == p.n) ? 0.0 : g_max - g_min;
    if (s.gap < tolerance) {
      s.converged = true;
      break;
    }
    if (s.iterations >= max_iterations) break;
    ++s.iterations;

    const double kij = dot(p.row(i), p.row(j));
    const double old_i = s.alpha[i];
    const double old_j = s.alpha[j];
    double& ai = s.alpha[i];
    double& aj = s.alpha[j];
    if (p.y[i] != p.y[j]) {
      double quad = diag[i] + diag[j] - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) {
          aj = 0.0;
          ai = diff;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = -diff;
      }
      if (diff > 0.0) {
        if (ai > c) {
          ai = c;
          aj = c - diff;
        }
      } else if (aj > c) {
        aj = c;
        ai = c + diff;
      }
    } else {
      double quad = diag[i] + diag[j] - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c) {
        if (ai > c) {
          ai = c;
          aj = sum - c;
        }
      } else if (aj < 0.0) {
        aj = 0.0;
        ai = sum;
      }
      if (sum > c) {
        if (aj > c) {
          aj = c;
          ai = sum - c;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = sum;
      }
    }

    const double di = (ai - old_i) * p.y[i];
    const double dj = (aj - old_j) * p.y[j];
    const auto xi = p.row(i);
    const auto xj = p.row(j);
    for (std::size_t k = 0; k < p.d; ++k) {
      dw[k] = di * xi[k] + dj * xj[k];
      s.w[k] += dw[k];
    }
    for (std::size_t t = 0; t < p.n; ++t) grad[t] += p.y[t] * dot(dw, p.row(t));
  }

  // Bias from complementary slackness.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  int free_count = 0;
  for (std::size_t t = 0; t < p.n; ++t) {
    const double yg = p.y[t] * grad[t];
    if (s.alpha[t] >= c) {
      if (p.y[t] < 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else if (s.alpha[t] <= 0.0) {
      if (p.y[t] > 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  double rho = 0.0;
  if (free_count > 0) {
    rho = free_sum / free_count;
  } else if (std::isfinite(upper) && std::isfinite(lower)) {
    rho = (upper + lower) / 2.0;
  } else if (std::isfinite(upper)) {
    rho = upper;
  } else if (std::isfinite(lower)) {
    rho = lower;
  }
  s.bias = -rho;
  return s;
}

}  // namespace

double dual_objective(std::span<const Sample> samples, std::span<const double> alphas) {
  if (samples.empty()) return 0.0;
  std::vector<double> w(samples.front().features.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double coef = alphas[i] * sign_of(samples[i].label);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += coef * samples[i].features[k];
    sum += alphas[i];
  }
  return 0.5 * dot(w, w) - sum;
}

double kkt_residual(std::span<const Sample> samples, std::span<const double> alphas, const SvmModel& model,
                    double c) {
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double margin = sign_of(samples[i].label) * (dot(model.weights, samples[i].features) + model.bias);
    double v;
    if (alphas[i] <= 0.0) {
      v = std::max(0.0, 1.0 - margin);
    } else if (alphas[i] >= c) {
      v = std::max(0.0, margin - 1.0);
    } else {
      v = std::abs(margin - 1.0);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

TrainResult train(std::span<const Sample> samples, const TrainOptions& options) {
  if (samples.empty()) throw std::invalid_argument("training set is empty");
  if (!(options.c > 0.0)) throw std::invalid_argument("C must be positive");
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const std::size_t d = samples.front().features.size();
  if (d == 0) throw std::invalid_argument("samples have no features");

  Problem p;
  p.n = samples.size();
  p.d = d;
  p.x.reserve(p.n * d);
  long falls = 0;
  for (std::size_t i = 0; i < p.n; ++i) {
    const auto& f = samples[i].features;
    if (f.size() != d) throw std::invalid_argument("sample " + std::to_string(i) + " has a different dimension");
    for (double v : f) {
      if (!std::isfinite(v)) throw std::invalid_argument("sample " + std::to_string(i) + " has a non-finite feature");
    }
    p.x.insert(p.x.end(), f.begin(), f.end());
    p.y.push_back(sign_of(samples[i].label));
    falls += samples[i].label == PatternLabel::Fall;
  }
  const long stands = static_cast<long>(p.n) - falls;
  if (falls == 0 || stands == 0) throw std::invalid_argument("training data contains a single class");

  std::vector<double> mean(d, 0.0), scale(d, 1.0);
  if (options.standardize) {
    for (std::size_t i = 0; i < p.n; ++i) {
      for (std::size_t k = 0; k < d; ++k) mean[k] += p.x[i * d + k];
    }
    for (auto& m : mean) m /= static_cast<double>(p.n);
    for (std::size_t k = 0; k < d; ++k) {
      double var = 0.0;
      for (std::size_t i = 0; i < p.n; ++i) var += (p.x[i * d + k] - mean[k]) * (p.x[i * d + k] - mean[k]);
      const double sd = std::sqrt(var / static_cast<double>(p.n));
      scale[k] = sd > 1e-12 ? sd : 1.0;
    }
    for (std::size_t i = 0; i < p.n; ++i) {
      for (std::size_t k = 0; k < d; ++k) p.x[i * d + k] = (p.x[i * d + k] - mean[k]) / scale[k];
    }
  }

  const long max_iter = options.max_iterations > 0
                            ? options.max_iterations
                            : std::max<long>(1'000'000, 100 * static_cast<long>(p.n));
  Solution sol = solve(p, options.c, options.tolerance, max_iter);
  if (!sol.converged) {
    spdlog::warn("SVM training stopped after {} iterations with gap {}", sol.iterations, sol.gap);
  }

  TrainResult result;
  result.alphas = sol.alpha;
  result.iterations = sol.iterations;
  result.converged = sol.converged;
  result.gap = sol.gap;
  result.objective = 0.5 * dot(sol.w, sol.w);
  for (double a : sol.alpha) {
    result.objective -= a;
    result.support_vectors += a > 0.0;
  }

  // Optimality is measured on the problem actually solved.
  SvmModel solved{sol.w, sol.bias, options.c, falls, stands};
  std::vector<Sample> solved_samples;
  solved_samples.reserve(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    const auto r = p.row(i);
    solved_samples.push_back(Sample{{r.begin(), r.end()}, samples[i].label});
  }
  result.kkt_residual = kkt_residual(solved_samples, sol.alpha, solved, options.c);

  SvmModel model = solved;
  if (options.standardize) {
    for (std::size_t k = 0; k < d; ++k) {
      model.weights[k] = sol.w[k] / scale[k];
      model.bias -= sol.w[k] * mean[k] / scale[k];
    }
  }
  result.model = std::move(model);
  return result;
}

Prediction predict(const SvmModel& model, std::span<const double> features) {
  if (features.size() != model.weights.size()) {
    throw std::invalid_argument("feature dimension " + std::to_string(features.size()) +
                                " does not match model dimension " + std::to_string(model.weights.size()));
  }
  const double score = dot(model.weights, features) + model.bias;
  return Prediction{score > 0.0 ? PatternLabel::Fall : PatternLabel::Stand, score};
}

void save_model(std::ostream& out, const SvmModel& model) {
  out << "svm-v1\n";
  out << "dimension " << model.dimension() << '\n';
  out << fmt::format("c {}\n", model.c);
  out << fmt::format("bias {}\n", model.bias);
  out << "weights";
  for (double w : model.weights) out << fmt::format(" {}", w);
  out << '\n';
  out << "fall_count " << model.fall_count << '\n';
  out << "stand_count " << model.stand_count << '\n';
}

void save_model(const std::filesystem::path& path, const SvmModel& model) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create model file " + path.string());
  save_model(out, model);
  if (!out) throw IoError("write failure on " + path.string());
}

SvmModel load_model(std::istream& in) {
  auto fail = [](const std::string& why) { throw std::runtime_error("malformed svm-v1 model: " + why); };
  std::string line;
  if (!std::getline(in, line) || line != "svm-v1") fail("missing svm-v1 header");
  SvmModel model;
  std::size_t dimension = 0;
  bool have_dim = false, have_c = false, have_bias = false, have_weights = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "dimension") {
      have_dim = static_cast<bool>(fields >> dimension);
    } else if (key == "c") {
      have_c = static_cast<bool>(fields >> model.c);
    } else if (key == "bias") {
      have_bias = static_cast<bool>(fields >> model.bias);
    } else if (key == "weights") {
      double w;
      while (fields >> w) model.weights.push_back(w);
      have_weights = true;
    } else if (key == "fall_count") {
      fields >> model.fall_count;
    } else if (key == "stand_count") {
      fields >> model.stand_count;
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (!have_dim || !have_c || !have_bias || !have_weights) fail("missing required field");
  if (model.weights.size() != dimension) fail("weight count does not match dimension");
  for (double w : model.weights) {
    if (!std::isfinite(w)) fail("non-finite weight");
  }
  return model;
}

SvmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file " + path.string());
  return load_model(in);
}

}  // namespace sentinel
