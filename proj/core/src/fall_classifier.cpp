#include "sentinel/fall_classifier.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sentinel/error.hpp"
#include "sentinel/pnm.hpp"

namespace sentinel {

std::vector<double> resample_profile(std::span<const long> profile, int bins) {
  std::vector<double> out(static_cast<std::size_t>(bins), 0.0);
  const long n = static_cast<long>(profile.size());
  if (n == 0 || bins <= 0) return out;
  // In units of 1/(n*bins): element c spans [c*bins, (c+1)*bins), bin b spans [b*n, (b+1)*n).
  for (long c = 0; c < n; ++c) {
    if (profile[c] == 0) continue;
    const long lo = c * bins;
    const long hi = lo + bins;
    for (long b = lo / n; b < bins && b * n < hi; ++b) {
      const long overlap = std::min(hi, (b + 1) * n) - std::max(lo, b * n);
      if (overlap > 0) out[b] += static_cast<double>(profile[c]) * static_cast<double>(overlap);
    }
  }
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  if (total > 0.0) {
    for (auto& v : out) v /= total;
  }
  return out;
}

std::optional<FeatureVector> extract_features(const ForegroundMask& mask, const Rect& roi) {
  if (roi.w <= 0 || roi.h <= 0 || !roi.fits_within(mask.width, mask.height)) {
    throw ConfigError("ROI does not fit the mask");
  }
  std::vector<long> cols(roi.w, 0), rows(roi.h, 0);
  long area = 0;
  long y_sum = 0;
  int min_x = roi.w, max_x = -1, min_y = roi.h, max_y = -1;
  for (int y = 0; y < roi.h; ++y) {
    for (int x = 0; x < roi.w; ++x) {
      if (!mask.at(roi.x + x, roi.y + y)) continue;
      ++cols[x];
      ++rows[y];
      ++area;
      y_sum += y;
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
    }
  }
  if (area == 0) return std::nullopt;

  FeatureVector f{};
  const auto h_proj = resample_profile(cols, kProjectionBins);
  const auto v_proj = resample_profile(rows, kProjectionBins);
  std::copy(h_proj.begin(), h_proj.end(), f.begin());
  std::copy(v_proj.begin(), v_proj.end(), f.begin() + kProjectionBins);
  const double bw = max_x - min_x + 1;
  const double bh = max_y - min_y + 1;
  f[kAspectIndex] = bh / bw;
  f[kFillIndex] = static_cast<double>(area) / (bw * bh);
  // Pixel centres, so a full ROI sits at 0.5.
  f[kCentroidIndex] = (static_cast<double>(y_sum) / static_cast<double>(area) + 0.5) / roi.h;
  return f;
}

Sample make_sample(const FeatureVector& features, PatternLabel label) {
  return Sample{{features.begin(), features.end()}, label};
}

EvalReport make_report(const ConfusionCounts& c) {
  auto ratio = [](long num, long den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); };
  EvalReport r;
  r.counts = c;
  r.fall_recall = ratio(c.fall_as_fall, c.fall_as_fall + c.fall_as_stand);
  r.stand_recall = ratio(c.stand_as_stand, c.stand_as_stand + c.stand_as_fall);
  r.fall_error = ratio(c.stand_as_fall, c.fall_as_fall + c.stand_as_fall);
  r.stand_error = ratio(c.fall_as_stand, c.stand_as_stand + c.fall_as_stand);
  return r;
}

EvalReport evaluate(const SvmModel& model, std::span<const Sample> samples) {
  ConfusionCounts c;
  for (const auto& s : samples) {
    const bool predicted_fall = predict(model, s.features).label == PatternLabel::Fall;
    if (s.label == PatternLabel::Fall) {
      ++(predicted_fall ? c.fall_as_fall : c.fall_as_stand);
    } else {
      ++(predicted_fall ? c.stand_as_fall : c.stand_as_stand);
    }
  }
  return make_report(c);
}

std::string render_eval_table(const EvalReport& r, const std::string& column) {
  const std::pair<const char*, double> rows[] = {
      {"Fall prediction rate", r.fall_recall},
      {"Stand prediction rate", r.stand_recall},
      {"Fall error rate", r.fall_error},
      {"Stand error rate", r.stand_error},
  };
  std::string out = fmt::format("{:<24}{:>10}\n", "Value", column);
  for (const auto& [name, value] : rows) out += fmt::format("{:<24}{:>9.2f}%\n", name, 100.0 * value);
  return out;
}

std::string render_eval_tsv(const EvalReport& r) {
  std::string out = "metric\tvalue\n";
  out += fmt::format("fall_prediction\t{:.6f}\n", r.fall_recall);
  out += fmt::format("stand_prediction\t{:.6f}\n", r.stand_recall);
  out += fmt::format("fall_error\t{:.6f}\n", r.fall_error);
  out += fmt::format("stand_error\t{:.6f}\n", r.stand_error);
  out += fmt::format("fall_as_fall\t{}\n", r.counts.fall_as_fall);
  out += fmt::format("fall_as_stand\t{}\n", r.counts.fall_as_stand);
  out += fmt::format("stand_as_fall\t{}\n", r.counts.stand_as_fall);
  out += fmt::format("stand_as_stand\t{}\n", r.counts.stand_as_stand);
  return out;
}

DayClassifier::DayClassifier(SvmModel model, Rect roi, const std::filesystem::path& out_dir)
    : model_(std::move(model)), roi_(roi), dir_(out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  fall_.open(out_dir / "fall.list", std::ios::trunc);
  stand_.open(out_dir / "stand.list", std::ios::trunc);
  skip_.open(out_dir / "skip.list", std::ios::trunc);
  if (!fall_ || !stand_ || !skip_) throw IoError("cannot write routing lists in " + out_dir.string());
}

FrameClassification DayClassifier::classify(const ForegroundMask& mask, std::string snapshot) {
  FrameClassification fc{std::move(snapshot), std::nullopt, 0.0};
  if (auto features = extract_features(mask, roi_)) {
    const auto p = predict(model_, *features);
    fc.label = p.label;
    fc.score = p.score;
    (p.label == PatternLabel::Fall ? fall_ : stand_) << fc.snapshot << '\n';
  } else {
    skip_ << fc.snapshot << '\n';
  }
  return fc;
}

void DayClassifier::flush() {
  fall_.flush();
  stand_.flush();
  skip_.flush();
  if (!fall_ || !stand_ || !skip_) throw IoError("write failure on routing lists in " + dir_.string());
}

std::vector<FrameClassification> classify_day(const SvmModel& model, std::span<const DayFrame> frames,
                                              const Rect& roi, const std::filesystem::path& out_dir) {
  DayClassifier classifier(model, roi, out_dir);
  std::vector<FrameClassification> result;
  result.reserve(frames.size());
  for (const auto& frame : frames) result.push_back(classifier.classify(frame.mask, frame.snapshot));
  classifier.flush();
  return result;
}

std::vector<DatasetEntry> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path.string());
  const auto base = path.parent_path();
  std::vector<DatasetEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: expected label<TAB>mask_file", path.string(), line_no));
    }
    const auto label = parse_pattern_label(line.substr(0, tab));
    if (!label) {
      throw ConfigError(fmt::format("{}:{}: unknown label '{}'", path.string(), line_no, line.substr(0, tab)));
    }
    std::filesystem::path file = line.substr(tab + 1);
    if (file.empty()) throw ConfigError(fmt::format("{}:{}: empty mask path", path.string(), line_no));
    if (file.is_relative()) file = base / file;
    entries.push_back(DatasetEntry{*label, std::move(file)});
  }
  return entries;
}

ForegroundMask load_mask(const std::filesystem::path& path) {
  const auto image = read_pnm_file(path);
  if (const auto* gray = std::get_if<GrayFrame>(&image)) return image_to_mask(*gray);
  return image_to_mask(to_gray(std::get<ColorFrame>(image)));
}

LoadedSamples load_samples(std::span<const DatasetEntry> entries, std::optional<Rect> roi) {
  LoadedSamples out;
  for (const auto& entry : entries) {
    const auto mask = load_mask(entry.mask_file);
    const Rect r = roi.value_or(Rect{0, 0, mask.width, mask.height});
    if (auto f = extract_features(mask, r)) {
      out.samples.push_back(make_sample(*f, entry.label));
    } else {
      spdlog::warn("empty silhouette in {}, skipped", entry.mask_file.string());
      out.skipped.push_back(entry.mask_file);
    }
  }
  return out;
}

}  // namespace sentinel
