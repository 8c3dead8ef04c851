#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sentinel/background_model.hpp"
#include "sentinel/frame.hpp"
#include "sentinel/svm.hpp"

namespace sentinel {

inline constexpr int kProjectionBins = 16;
inline constexpr int kFeatureDim = 2 * kProjectionBins + 3;

/// [0,16) column-sum projection, [16,32) row-sum projection, then aspect h/w,
/// fill (area / bbox area) and centroid height (centroid y / ROI height).
using FeatureVector = std::array<double, kFeatureDim>;

inline constexpr int kAspectIndex = 2 * kProjectionBins;
inline constexpr int kFillIndex = kAspectIndex + 1;
inline constexpr int kCentroidIndex = kAspectIndex + 2;

/// Resamples a profile of any length onto `bins` bins by overlap-weighted (proportional)
/// binning and normalizes to unit sum. An all-zero profile stays zero.
[[nodiscard]] std::vector<double> resample_profile(std::span<const long> profile, int bins);

/// Features of the silhouette (set mask pixels) inside `roi`; nullopt when it is empty.
/// Throws ConfigError when `roi` leaves the mask.
[[nodiscard]] std::optional<FeatureVector> extract_features(const ForegroundMask& mask, const Rect& roi);

[[nodiscard]] Sample make_sample(const FeatureVector& features, PatternLabel label);

struct ConfusionCounts {
  long fall_as_fall = 0;
  long fall_as_stand = 0;
  long stand_as_fall = 0;
  long stand_as_stand = 0;

  [[nodiscard]] long total() const { return fall_as_fall + fall_as_stand + stand_as_fall + stand_as_stand; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Recall per class and the share of wrong predictions among everything predicted as that
/// class. Zero denominators give 0.
struct EvalReport {
  ConfusionCounts counts;
  double fall_recall = 0.0;
  double stand_recall = 0.0;
  double fall_error = 0.0;
  double stand_error = 0.0;
};

[[nodiscard]] EvalReport make_report(const ConfusionCounts& counts);
[[nodiscard]] EvalReport evaluate(const SvmModel& model, std::span<const Sample> samples);

/// Four rows: prediction of fall, prediction of stand, error of fall, error of stand.
[[nodiscard]] std::string render_eval_table(const EvalReport& report, const std::string& column = "Result");
/// Machine-readable form: metric<TAB>value lines plus the confusion counts.
[[nodiscard]] std::string render_eval_tsv(const EvalReport& report);

struct DayFrame {
  ForegroundMask mask;
  std::string snapshot;
};

struct FrameClassification {
  std::string snapshot;
  std::optional<PatternLabel> label;  ///< nullopt: empty silhouette, skipped
  double score = 0.0;
};

/// Appends each classified frame's snapshot name to fall.list, stand.list or skip.list.
class DayClassifier {
 public:
  /// Truncates the lists in `out_dir`. Throws IoError when they cannot be created.
  DayClassifier(SvmModel model, Rect roi, const std::filesystem::path& out_dir);
  FrameClassification classify(const ForegroundMask& mask, std::string snapshot);
  /// Throws IoError on a write failure.
  void flush();

 private:
  SvmModel model_;
  Rect roi_;
  std::filesystem::path dir_;
  std::ofstream fall_;
  std::ofstream stand_;
  std::ofstream skip_;
};

/// Classifies every frame and writes fall.list, stand.list and skip.list into `out_dir`
/// (truncating old lists). Throws IoError when the lists cannot be written.
std::vector<FrameClassification> classify_day(const SvmModel& model, std::span<const DayFrame> frames,
                                              const Rect& roi, const std::filesystem::path& out_dir);

struct DatasetEntry {
  PatternLabel label = PatternLabel::Stand;
  std::filesystem::path mask_file;
};

/// Lines `label<TAB>mask_file`; blank lines and '#' comments are skipped; relative paths
/// resolve against the dataset's directory. Throws ConfigError on a malformed line.
[[nodiscard]] std::vector<DatasetEntry> read_dataset(const std::filesystem::path& path);

/// PGM: non-zero is foreground. PPM: non-zero luma is foreground.
[[nodiscard]] ForegroundMask load_mask(const std::filesystem::path& path);

struct LoadedSamples {
  std::vector<Sample> samples;
  std::vector<std::filesystem::path> skipped;  ///< empty silhouettes
};

/// Feature samples for every dataset entry; `roi` defaults to the whole mask.
[[nodiscard]] LoadedSamples load_samples(std::span<const DatasetEntry> entries, std::optional<Rect> roi = {});

}  // namespace sentinel
