#include <CLI11.hpp>

#include <nlohmann/json.hpp>

#include "io.hpp"

namespace anchorkit::cli {
namespace {

const ImageAnnotation& pick_image(const GroundTruthSet& set, const std::string& name, const std::string& path) {
  if (set.empty()) throw DataError(path + ": no images", path);
  if (name.empty()) {
    if (set.size() > 1) {
      throw UsageError("assign: " + path + " holds " + std::to_string(set.size()) + " images; choose one with --image");
    }
    return set.front();
  }
  for (const auto& image : set) {
    if (image.path == name || image_key(image.path) == name) return image;
  }
  throw DataError("assign: image '" + name + "' not found in " + path, path);
}

nlohmann::ordered_json stats_json(const AssignmentResult& r, const std::string& strategy) {
  nlohmann::ordered_json j;
  j["strategy"] = strategy;
  j["anchors"] = r.labels.size();
  j["gts"] = r.num_gts;
  nlohmann::ordered_json per_gt = nlohmann::ordered_json::object();
  for (std::size_t g = 0; g < r.num_gts; ++g) {
    const auto it = r.per_gt_counts.find(static_cast<int>(g));
    per_gt[std::to_string(g)] = it == r.per_gt_counts.end() ? 0 : it->second;
  }
  j["per_gt"] = per_gt;
  const auto layers = layer_match_stats(r);
  nlohmann::ordered_json lj = nlohmann::ordered_json::object();
  for (LayerId id : kAllLayers) {
    const auto& s = layers[layer_position(id)];
    nlohmann::ordered_json pg = nlohmann::ordered_json::object();
    for (const auto& [g, n] : s.per_gt) pg[std::to_string(g)] = n;
    lj[std::string(layer_name(id))] = {{"gts", s.gt_count}, {"anchors", s.anchor_count}, {"per_gt", pg}};
  }
  j["layers"] = lj;
  return j;
}

}  // namespace

Command add_assign(CLI::App& parent) {
  struct Options {
    std::string annotations;
    std::string image;
    int width = 0;
    int height = 0;
    std::string strategy = "standard";
    std::string scores;
    std::string stats;
    std::optional<double> pos_iou;
    std::optional<double> neg_iou;
    bool no_guarantee = false;
  };
  auto opts = std::make_shared<Options>();
  CLI::App* app = parent.add_subcommand("assign", "Label the anchors of one annotated image");
  app->add_option("--annotations", opts->annotations, "Wider Face annotation file")->required();
  app->add_option("--image", opts->image, "Image path or name (required when the file has several)");
  app->add_option("--width", opts->width, "Image width")->required();
  app->add_option("--height", opts->height, "Image height")->required();
  app->add_option("--strategy", opts->strategy, "standard or ali-ams")
      ->check(CLI::IsMember({"standard", "ali-ams"}));
  app->add_option("--scores", opts->scores, "Per-anchor scores, needed by ali-ams");
  app->add_option("--stats", opts->stats, "Write per-layer statistics as JSON here (default: stderr)");
  app->add_option("--pos-iou", opts->pos_iou, "Positive IoU threshold");
  app->add_option("--neg-iou", opts->neg_iou, "Negative IoU threshold");
  app->add_flag("--no-guarantee", opts->no_guarantee, "Skip the best-anchor guarantee");

  return {app, [opts](const Context& ctx) {
            MatchConfig match = ctx.config.match;
            if (opts->pos_iou) match.pos_iou_threshold = *opts->pos_iou;
            if (opts->neg_iou) match.neg_iou_threshold = *opts->neg_iou;
            if (opts->no_guarantee) match.guarantee_best_anchor = false;
            check_settings([&] { match.validate(); });
            if (opts->width < 1 || opts->height < 1) throw UsageError("assign: width and height must be positive");
            const bool ali = opts->strategy == "ali-ams";
            if (ali && opts->scores.empty()) throw UsageError("assign: strategy ali-ams requires --scores");

            const GroundTruthSet set = load_annotations(opts->annotations);
            const std::vector<Box> gts = pick_image(set, opts->image, opts->annotations).valid_boxes();
            const AnchorGrid grid(opts->width, opts->height);
            std::optional<ScoreMap> scores;
            if (!opts->scores.empty()) {
              scores = load_scores(opts->scores);
              if (scores->size() != grid.size()) {
                throw DataError(opts->scores + ": " + std::to_string(scores->size()) + " scores for " +
                                    std::to_string(grid.size()) + " anchors",
                                opts->scores);
              }
            }

            AssignmentResult result = standard_match(grid, gts, match);
            if (ali) result = ali_ams(result, grid, gts, *scores);

            OutputSink out(ctx.global.out);
            write_assignment(out.stream(), result, scores ? &*scores : nullptr);
            out.finish();

            const std::string stats = stats_json(result, opts->strategy).dump(2) + "\n";
            if (opts->stats.empty()) {
              *ctx.err << stats;
            } else {
              OutputSink s(opts->stats);
              s.stream() << stats;
              s.finish();
            }
            return 0;
          }};
}

}  // namespace anchorkit::cli
