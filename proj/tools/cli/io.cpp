#include "io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace anchorkit::cli {

std::uint64_t Context::require_seed() const {
  if (global.seed) return *global.seed;
  if (config.seed) return *config.seed;
  throw UsageError("this command is stochastic and needs --seed (or \"seed\" in the config file)");
}

std::string Context::format(const std::string& fallback) const {
  if (global.format) return *global.format;
  if (config.format) return *config.format;
  return fallback;
}

void Context::warn(const std::string& message) const { *err << "warning: " << message << "\n"; }

OutputSink::OutputSink(const std::string& path) : path_(path), stream_(&std::cout) {
  if (path.empty()) return;
  file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*file_) throw DataError("cannot open output file '" + path + "'", path);
  stream_ = file_.get();
}

void OutputSink::finish() {
  stream_->flush();
  if (!*stream_) throw DataError("failed writing output" + (path_.empty() ? "" : " '" + path_ + "'"), path_);
}

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file '" + path + "'", path);
  return in;
}

template <typename Fn>
auto parse_file(const std::string& path, Fn&& fn) {
  std::ifstream in = open_input(path);
  try {
    return fn(in);
  } catch (const ParseError& e) {
    throw DataError(path + ": " + e.what(), path, e.line());
  } catch (const std::invalid_argument& e) {
    throw DataError(path + ": " + e.what(), path);
  }
}

}  // namespace

GroundTruthSet load_annotations(const std::string& path) {
  return parse_file(path, [](std::istream& in) { return parse_widerface_annotations(in); });
}

PredictionSet load_predictions(const std::string& path) {
  return parse_file(path, [](std::istream& in) { return parse_predictions(in); });
}

ScoreMap load_scores(const std::string& path) {
  return parse_file(path, [](std::istream& in) { return read_scores(in); });
}

AssignmentResult load_assignment(const std::string& path) {
  return parse_file(path, [](std::istream& in) { return read_assignment(in); });
}

std::map<std::string, SubsetSpec> load_subsets(const std::string& path, const std::string& default_name) {
  return parse_file(path, [&](std::istream& in) { return parse_subsets(in, default_name); });
}

std::map<std::string, ImageSize> load_sizes(const std::string& path) {
  return parse_file(path, [&](std::istream& in) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(1, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(1, "sizes must be an object of {path: [width, height]}");
    std::map<std::string, ImageSize> out;
    for (const auto& [key, value] : j.items()) {
      if (!value.is_array() || value.size() != 2 || !value[0].is_number_integer() ||
          !value[1].is_number_integer() || value[0].get<int>() < 1 || value[1].get<int>() < 1) {
        throw ParseError(1, "size of '" + key + "' must be [width, height] with positive integers");
      }
      out[key] = {value[0].get<int>(), value[1].get<int>()};
    }
    return out;
  });
}

void add_size_options(CLI::App& app, SizeOptions& opts) {
  app.add_option("--width", opts.width, "Image width applied to every image")->check(CLI::PositiveNumber);
  app.add_option("--height", opts.height, "Image height applied to every image")->check(CLI::PositiveNumber);
  app.add_option("--sizes", opts.sizes_path, "JSON object mapping image path to [width, height]");
}

std::vector<std::optional<ImageSize>> resolve_sizes(const GroundTruthSet& set, const SizeOptions& opts) {
  if (opts.width.has_value() != opts.height.has_value()) {
    throw UsageError("--width and --height must be given together");
  }
  std::map<std::string, ImageSize> table;
  if (!opts.sizes_path.empty()) table = load_sizes(opts.sizes_path);
  std::vector<std::optional<ImageSize>> out(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (auto it = table.find(set[i].path); it != table.end()) {
      out[i] = it->second;
    } else if (opts.width) {
      out[i] = ImageSize{*opts.width, *opts.height};
    }
  }
  return out;
}

ImageSize face_extent(const ImageAnnotation& image) {
  double x = 1.0;
  double y = 1.0;
  for (const Box& b : image.valid_boxes()) {
    x = std::max(x, b.x_max());
    y = std::max(y, b.y_max());
  }
  return {static_cast<int>(std::ceil(x)), static_cast<int>(std::ceil(y))};
}

void check_settings(const std::function<void()>& validate) {
  try {
    validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::vector<double> parse_number_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v)) {
      throw UsageError(flag + ": '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(flag + " needs at least one value");
  return out;
}

}  // namespace anchorkit::cli
