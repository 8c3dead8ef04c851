#include "sentinel/cli.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <stdexcept>

#include "sentinel/config.hpp"
#include "sentinel/error.hpp"
#include "sentinel/fall_classifier.hpp"
#include "sentinel/frame_source.hpp"
#include "sentinel/ini.hpp"
#include "sentinel/monitor.hpp"
#include "sentinel/pnm.hpp"
#include "sentinel/recorder.hpp"
#include "sentinel/simulator.hpp"

namespace sentinel::cli {

namespace {

std::optional<Rect> parse_roi_option(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::vector<long long> v;
  std::string token;
  for (char c : text + ",") {
    if (c != ',') {
      token += c;
      continue;
    }
    const auto n = parse_integer(token);
    if (!n) throw ConfigError("--roi expects x,y,w,h");
    v.push_back(*n);
    token.clear();
  }
  if (v.size() != 4) throw ConfigError("--roi expects x,y,w,h");
  return Rect{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]), static_cast<int>(v[3])};
}

int cmd_run(const std::string& config_path, bool wall_clock, std::ostream& out) {
  const auto config = load_config(config_path);
  if (config.source.dir.empty() && !config.scenario) {
    throw ConfigError("run needs [source] dir or a [scenario] to render");
  }
  RunOptions options;
  options.wall_clock = wall_clock;
  if (wall_clock) {
    options.start_epoch_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::system_clock::now().time_since_epoch())
                                 .count();
  }
  Monitor monitor(config, {}, options);
  std::unique_ptr<FrameSource> source;
  if (config.source.dir.empty()) {
    source = std::make_unique<ScenarioSource>(*config.scenario);
  } else {
    source = std::make_unique<DirectorySource>(config.source.dir, config.source.period_ms);
  }
  while (auto frame = source->next_frame()) monitor.process(*frame);
  const auto summary = monitor.finish();
  out << render_summary(summary);
  if (summary.record_failures > 0) {
    out << fmt::format("record failures: {}\n", summary.record_failures);
    return kExitIo;
  }
  return kExitOk;
}

int cmd_simulate(const std::string& script_path, const std::filesystem::path& out_dir, std::ostream& out) {
  const auto config = load_config(script_path);
  if (!config.scenario) throw ConfigError(script_path + ": no [scenario] section");
  const auto& script = *config.scenario;
  const auto frames = write_frames(script, out_dir);

  std::string oracle;
  try {
    ExpectedOutcome outcome;
    if (config.rois.empty()) {
      outcome.labels = expected_labels(script);
    } else {
      outcome = expected(script, config.rois, config.engine);
    }
    oracle = format_expected(outcome);
  } catch (const std::invalid_argument& e) {
    spdlog::warn("no event prediction: {}", e.what());
    oracle = fmt::format("# no event prediction: {}\n", e.what());
    ExpectedOutcome labels_only;
    labels_only.labels = expected_labels(script);
    oracle += format_expected(labels_only);
  }
  std::ofstream tsv(out_dir / "expected.tsv", std::ios::trunc);
  tsv << oracle;
  if (!tsv) throw IoError("cannot write " + (out_dir / "expected.tsv").string());
  out << fmt::format("wrote {} frames and expected.tsv to {}\n", frames.size(), out_dir.string());
  return kExitOk;
}

int cmd_train(const std::string& dataset, const std::string& model_path, const TrainOptions& options,
              const std::string& roi, std::ostream& out) {
  const auto entries = read_dataset(dataset);
  if (entries.empty()) throw ConfigError("dataset " + dataset + " is empty");
  const auto loaded = load_samples(entries, parse_roi_option(roi));
  const auto result = train(loaded.samples, options);
  save_model(std::filesystem::path(model_path), result.model);
  out << fmt::format("samples: {} fall, {} stand ({} skipped)\n", result.model.fall_count, result.model.stand_count,
                     loaded.skipped.size());
  out << fmt::format("objective: {:.6f}\n", result.objective);
  out << fmt::format("support vectors: {}\n", result.support_vectors);
  out << fmt::format("iterations: {} ({})\n", result.iterations, result.converged ? "converged" : "not converged");
  out << fmt::format("model: {}\n", model_path);
  return kExitOk;
}

int cmd_evaluate(const std::string& model_path, const std::string& dataset, std::string tsv_path,
                 const std::string& roi, std::ostream& out) {
  const auto model = load_model(std::filesystem::path(model_path));
  const auto entries = read_dataset(dataset);
  if (entries.empty()) throw ConfigError("dataset " + dataset + " is empty");
  const auto loaded = load_samples(entries, parse_roi_option(roi));
  if (loaded.samples.empty()) throw ConfigError("dataset " + dataset + " has no usable samples");
  if (loaded.samples.front().features.size() != model.dimension()) {
    throw ConfigError(fmt::format("feature dimension {} does not match model dimension {}",
                                  loaded.samples.front().features.size(), model.dimension()));
  }
  const auto report = evaluate(model, loaded.samples);
  out << render_eval_table(report, std::filesystem::path(dataset).stem().string());
  if (tsv_path.empty()) tsv_path = model_path + ".eval.tsv";
  std::ofstream tsv(tsv_path, std::ios::trunc);
  tsv << render_eval_tsv(report);
  if (!tsv) throw IoError("cannot write " + tsv_path);
  return kExitOk;
}

int cmd_report(const std::string& log, int days, std::ostream& out) {
  const auto stats = summarize(log, days);
  out << render_stats_table(stats);
  if (stats.malformed_lines > 0) out << fmt::format("malformed lines skipped: {}\n", stats.malformed_lines);
  return kExitOk;
}

int cmd_dump_frame(const std::string& config_path, const std::string& source_dir, const std::string& out_path,
                   std::ostream& out) {
  std::filesystem::path dir = source_dir;
  TimestampMs period = 100;
  if (dir.empty()) {
    if (config_path.empty()) throw ConfigError("dump-frame needs --config or --source");
    const auto config = load_config(config_path);
    dir = config.source.dir;
    period = config.source.period_ms;
  }
  DirectorySource source(dir, period);
  const auto frame = source.next_frame();
  if (!frame) throw IoError("no frames in " + dir.string());
  write_pnm_file(out_path, frame->color);
  out << fmt::format("frame 0 ({}x{}) written to {}\n", frame->color.width, frame->color.height, out_path);
  return kExitOk;
}

int cmd_notify_test(const std::string& config_path, const std::string& image, std::ostream& out) {
  const auto config = load_config(config_path);
  if (config.notify.webhook_url.empty()) throw ConfigError("[notify] webhook_url is not set");
  AlertCommand command;
  command.kind = AlertKind::SocialMessage;
  command.message = config.notify.message + " (test)";
  command.event.kind = EventKind::PhotoLink;
  command.snapshot = image;
  HttpWebhookTransport transport;
  SteadyClock clock;
  const auto result =
      deliver_social(command, transport, webhook_target_from_env(config.notify.webhook_url), config.notify.policy, clock);
  out << fmt::format("{} after {} attempt(s)", to_string(result.status), result.attempts);
  if (!result.last_error.empty()) out << ": " << result.last_error;
  out << '\n';
  return result.status == DeliveryStatus::Delivered ? kExitOk : kExitIo;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Home event monitor: ROI motion and photo events, notifications, posture classification"};
  app.name("sentinel");
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  std::string config_path;
  bool wall_clock = false;
  auto* run_cmd = app.add_subcommand("run", "Calibrate and process a frame directory or scenario");
  run_cmd->add_option("-c,--config", config_path, "Config file")->required();
  run_cmd->add_flag("--wall-clock", wall_clock, "Log wall-clock timestamps instead of stream time");

  std::string script_path, out_dir;
  auto* sim_cmd = app.add_subcommand("simulate", "Render a scenario script and its expected events");
  sim_cmd->add_option("script", script_path, "Scenario file")->required();
  sim_cmd->add_option("out_dir", out_dir, "Output directory")->required();

  std::string dataset, model_path, roi, tsv_path;
  TrainOptions train_options;
  auto* train_cmd = app.add_subcommand("train", "Train the fall/stand classifier");
  train_cmd->add_option("dataset", dataset, "label<TAB>mask_file list")->required();
  train_cmd->add_option("-m,--model", model_path, "Model output path")->required();
  train_cmd->add_option("--c", train_options.c, "Soft-margin penalty")->capture_default_str();
  train_cmd->add_option("--tolerance", train_options.tolerance, "Optimality tolerance")->capture_default_str();
  train_cmd->add_flag("--standardize", train_options.standardize, "Solve on z-scored features");
  train_cmd->add_option("--roi", roi, "x,y,w,h region of the masks (default: whole mask)");

  auto* eval_cmd = app.add_subcommand("evaluate", "Score a model on a labelled dataset");
  eval_cmd->add_option("model", model_path, "Model file")->required();
  eval_cmd->add_option("dataset", dataset, "label<TAB>mask_file list")->required();
  eval_cmd->add_option("--tsv", tsv_path, "TSV output (default: <model>.eval.tsv)");
  eval_cmd->add_option("--roi", roi, "x,y,w,h region of the masks (default: whole mask)");

  std::string log_path;
  int days = 1;
  auto* report_cmd = app.add_subcommand("report", "Per-kind event statistics of an events.log");
  report_cmd->add_option("log", log_path, "events.log")->required();
  report_cmd->add_option("-d,--days", days, "Experiment days")->capture_default_str();

  std::string source_dir, frame_out = "frame0.ppm";
  auto* dump_cmd = app.add_subcommand("dump-frame", "Write the first source frame for picking ROI coordinates");
  dump_cmd->add_option("-c,--config", config_path, "Config file (uses [source])");
  dump_cmd->add_option("-s,--source", source_dir, "Frame directory");
  dump_cmd->add_option("-o,--out", frame_out, "Output image")->capture_default_str();

  std::string image;
  auto* notify_cmd = app.add_subcommand("notify-test", "Send one test message to the configured webhook");
  notify_cmd->add_option("-c,--config", config_path, "Config file")->required();
  notify_cmd->add_option("--image", image, "Image to attach");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*run_cmd) return cmd_run(config_path, wall_clock, out);
    if (*sim_cmd) return cmd_simulate(script_path, out_dir, out);
    if (*train_cmd) {
      return cmd_train(dataset, model_path, train_options, roi, out);
    }
    if (*eval_cmd) return cmd_evaluate(model_path, dataset, tsv_path, roi, out);
    if (*report_cmd) return cmd_report(log_path, days, out);
    if (*dump_cmd) return cmd_dump_frame(config_path, source_dir, frame_out, out);
    if (*notify_cmd) return cmd_notify_test(config_path, image, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitConfig;
}

}  // namespace sentinel::cli
