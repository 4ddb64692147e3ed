#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <anchorkit/assignment.hpp>
#include <anchorkit/augmentation.hpp>
#include <anchorkit/eval.hpp>
#include <anchorkit/hcam.hpp>

namespace anchorkit::cli {

// Exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exit code 1. Carries the offending file and line when known.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& message, std::string file = {}, std::size_t line = 0)
      : std::runtime_error(message), file_(std::move(file)), line_(line) {}
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

struct CalibrationSettings {
  double start_scale = 8.0;
  double end_scale = 640.0;
  int max_iterations = 30;
  double tolerance = 0.05;
};

struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;
  MatchConfig match;
  int mst_min_short_side = 640;
  int mst_max_short_side = 1280;
  SseConfig sse;
  DasConfig das;
  HcamLossConfig hcam;
  CalibrationSettings calibration;
  EvalConfig eval;
};

// Reads a JSON config file. Unknown keys and type mismatches are usage errors.
RunConfig load_run_config(const std::string& path);

ThresholdGrid parse_grid(const std::string& name);

}  // namespace anchorkit::cli
