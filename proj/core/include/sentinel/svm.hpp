#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

/// Fall is the positive class.
enum class PatternLabel { Stand, Fall };

[[nodiscard]] std::string_view to_string(PatternLabel label);
[[nodiscard]] std::optional<PatternLabel> parse_pattern_label(std::string_view text);
[[nodiscard]] constexpr double sign_of(PatternLabel label) { return label == PatternLabel::Fall ? 1.0 : -1.0; }

struct Sample {
  std::vector<double> features;
  PatternLabel label = PatternLabel::Stand;
};

struct TrainOptions {
  double c = 10.0;
  double tolerance = 1e-3;
  /// Solve on z-scored features, then fold the scaling back into (w, b).
  bool standardize = false;
  long max_iterations = 0;  ///< 0: max(1e6, 100 n)
};

struct SvmModel {
  std::vector<double> weights;
  double bias = 0.0;
  double c = 10.0;
  long fall_count = 0;
  long stand_count = 0;

  [[nodiscard]] std::size_t dimension() const { return weights.size(); }
  friend bool operator==(const SvmModel&, const SvmModel&) = default;
};

struct TrainResult {
  SvmModel model;
  /// Dual variables, indexed like the training samples. With standardize they belong
  /// to the scaled problem.
  std::vector<double> alphas;
  /// 0.5 * |w|^2 - sum(alpha) of the solved (possibly scaled) problem.
  double objective = 0.0;
  int support_vectors = 0;
  long iterations = 0;
  bool converged = false;
  /// Maximal-violating-pair gap at exit.
  double gap = 0.0;
  /// kkt_residual() of the solved problem at exit.
  double kkt_residual = 0.0;
};

/// Soft-margin linear SVM trained in the dual by two-variable (SMO) updates.
///
/// Each iteration picks the maximal violating pair; ties go to the lowest sample index,
/// so training is deterministic. Stops when the pair gap drops below the tolerance. The
/// bias is the average of y_i - w.x_i over free support vectors, or the midpoint of the
/// feasible interval when none are free.
///
/// Throws std::invalid_argument for an empty set, a single class, ragged dimensions,
/// non-finite features (naming the sample index) or C <= 0.
[[nodiscard]] TrainResult train(std::span<const Sample> samples, const TrainOptions& options = {});

/// 0.5 * |sum alpha_i y_i x_i|^2 - sum alpha_i.
[[nodiscard]] double dual_objective(std::span<const Sample> samples, std::span<const double> alphas);

/// Largest violation of the per-sample optimality conditions of (alphas, model):
/// alpha = 0 needs y f(x) >= 1, alpha = C needs y f(x) <= 1, otherwise y f(x) = 1.
[[nodiscard]] double kkt_residual(std::span<const Sample> samples, std::span<const double> alphas,
                                  const SvmModel& model, double c);

struct Prediction {
  PatternLabel label = PatternLabel::Stand;
  double score = 0.0;
};

/// score = w.x + b; Fall iff score > 0. Throws std::invalid_argument on dimension mismatch.
[[nodiscard]] Prediction predict(const SvmModel& model, std::span<const double> features);

/// Text format "svm-v1": dimension, C, bias, weights (shortest round-trip decimals), class counts.
void save_model(std::ostream& out, const SvmModel& model);
void save_model(const std::filesystem::path& path, const SvmModel& model);
/// Throws std::runtime_error on malformed input.
[[nodiscard]] SvmModel load_model(std::istream& in);
[[nodiscard]] SvmModel load_model(const std::filesystem::path& path);

}  // namespace sentinel
