#include "run_config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace anchorkit::cli {
namespace {

using nlohmann::json;

// Walks one JSON object, tracking which keys were consumed so leftovers can be
// reported by their dotted path.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw UsageError("config: " + where() + " must be an object");
  }

  template <typename T>
  void read(const std::string& key, T& dst) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    try {
      dst = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw UsageError("config: " + child(key) + " has the wrong type");
    }
  }

  template <typename T>
  void read(const std::string& key, std::optional<T>& dst) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    if (j_.at(key).is_null()) {
      dst.reset();
      return;
    }
    T value{};
    read(key, value);
    dst = value;
  }

  std::optional<Section> section(const std::string& key) {
    if (!j_.contains(key)) return std::nullopt;
    seen_.insert(key);
    return Section(j_.at(key), child(key));
  }

  const json* raw(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw UsageError("config: unknown key '" + child(item.key()) + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "top level" : "'" + path_ + "'"; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_scale_ranges(const json& j, const std::string& path, std::array<ScaleRange, kNumLayers>& out) {
  if (!j.is_array() || j.size() != kNumLayers) {
    throw UsageError("config: " + path + " must list " + std::to_string(kNumLayers) + " [start, end] pairs");
  }
  for (std::size_t i = 0; i < kNumLayers; ++i) {
    const json& pair = j[i];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      throw UsageError("config: " + path + "[" + std::to_string(i) + "] must be [start, end]");
    }
    out[i] = {pair[0].get<double>(), pair[1].get<double>()};
  }
}

}  // namespace

ThresholdGrid parse_grid(const std::string& name) {
  if (name == "uniform") return ThresholdGrid::Uniform1000;
  if (name == "distinct") return ThresholdGrid::DistinctScores;
  throw UsageError("unknown threshold grid '" + name + "' (expected uniform or distinct)");
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config: " + path + " is not valid JSON (byte " + std::to_string(e.byte) + ")");
  }

  RunConfig cfg;
  Section top(root, "");
  top.read("seed", cfg.seed);
  top.read("format", cfg.format);
  if (cfg.format && *cfg.format != "json" && *cfg.format != "csv") {
    throw UsageError("config: format must be json or csv");
  }

  if (auto s = top.section("match")) {
    s->read("pos_iou_threshold", cfg.match.pos_iou_threshold);
    s->read("neg_iou_threshold", cfg.match.neg_iou_threshold);
    s->read("guarantee_best_anchor", cfg.match.guarantee_best_anchor);
    s->finish();
  }
  if (auto s = top.section("mst")) {
    s->read("min_short_side", cfg.mst_min_short_side);
    s->read("max_short_side", cfg.mst_max_short_side);
    s->finish();
  }
  if (auto s = top.section("sse")) {
    s->read("tr_p5", cfg.sse.tr_p5);
    s->read("tr_p6", cfg.sse.tr_p6);
    s->read("output_side", cfg.sse.output_side);
    s->read("pre_resize_min", cfg.sse.pre_resize_min);
    s->read("pre_resize_max", cfg.sse.pre_resize_max);
    if (const json* ranges = s->raw("scale_ranges")) {
      read_scale_ranges(*ranges, s->child("scale_ranges"), cfg.sse.scale_ranges);
    }
    s->finish();
  }
  if (auto s = top.section("das")) {
    s->read("r_th", cfg.das.r_th);
    s->read("output_side", cfg.das.output_side);
    s->finish();
  }
  if (auto s = top.section("hcam")) {
    s->read("gamma_balance", cfg.hcam.gamma_balance);
    s->read("focal_alpha", cfg.hcam.focal_alpha);
    s->read("focal_gamma", cfg.hcam.focal_gamma);
    s->read("confidence_threshold", cfg.hcam.confidence_threshold);
    s->read("neighborhood_sizes", cfg.hcam.neighborhood_sizes);
    s->finish();
  }
  if (auto s = top.section("calibration")) {
    s->read("start_scale", cfg.calibration.start_scale);
    s->read("end_scale", cfg.calibration.end_scale);
    s->read("max_iterations", cfg.calibration.max_iterations);
    s->read("tolerance", cfg.calibration.tolerance);
    s->finish();
  }
  if (auto s = top.section("eval")) {
    s->read("match_iou", cfg.eval.match_iou);
    s->read("nfa_threshold", cfg.eval.nfa_threshold);
    std::string grid;
    s->read("grid", grid);
    if (!grid.empty()) cfg.eval.grid = parse_grid(grid);
    bool nms = false;
    s->read("nms", nms);
    NmsConfig n;
    s->read("nms_iou", n.iou_threshold);
    s->read("pre_topk", n.pre_topk);
    s->read("post_topk", n.post_topk);
    if (nms) cfg.eval.nms = n;
    s->finish();
  }
  top.finish();
  return cfg;
}

}  // namespace anchorkit::cli
