#pragma once

#include <fstream>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <anchorkit/serialization.hpp>
#include <anchorkit/widerface.hpp>

#include "run_config.hpp"

namespace CLI {
class App;
}

namespace anchorkit::cli {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::optional<std::string> format;
  std::string out;
  bool json_errors = false;
};

struct Context {
  GlobalOptions global;
  RunConfig config;
  std::ostream* err = nullptr;

  // Flag beats config file; stochastic commands refuse to run without one.
  std::uint64_t require_seed() const;
  std::string format(const std::string& fallback = "json") const;
  void warn(const std::string& message) const;
};

struct Command {
  CLI::App* app = nullptr;
  std::function<int(const Context&)> run;
};

Command add_anchors(CLI::App& parent);
Command add_assign(CLI::App& parent);
Command add_augment(CLI::App& parent);
Command add_scale_stats(CLI::App& parent);
Command add_calibrate(CLI::App& parent);
Command add_eval(CLI::App& parent);
Command add_hcam(CLI::App& parent);

// Writes to the given path, or stdout when empty. Files are opened in binary
// mode so output bytes do not depend on the platform.
class OutputSink {
 public:
  explicit OutputSink(const std::string& path);
  std::ostream& stream() { return *stream_; }
  void finish();

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

// Readers that attach the file name to any parse failure.
GroundTruthSet load_annotations(const std::string& path);
PredictionSet load_predictions(const std::string& path);
ScoreMap load_scores(const std::string& path);
AssignmentResult load_assignment(const std::string& path);
std::map<std::string, SubsetSpec> load_subsets(const std::string& path, const std::string& default_name);

// Optional per-image sizes from a JSON object {path: [width, height]}.
std::map<std::string, ImageSize> load_sizes(const std::string& path);

struct SizeOptions {
  std::optional<int> width;
  std::optional<int> height;
  std::string sizes_path;
};
void add_size_options(CLI::App& app, SizeOptions& opts);

// Size per image: the sizes file, then --width/--height, then nothing.
std::vector<std::optional<ImageSize>> resolve_sizes(const GroundTruthSet& set, const SizeOptions& opts);

// Smallest canvas holding every face of the image.
ImageSize face_extent(const ImageAnnotation& image);

// Runs a config validator, turning its complaint into a usage error.
void check_settings(const std::function<void()>& validate);

std::vector<double> parse_number_list(const std::string& text, const std::string& flag);

}  // namespace anchorkit::cli
