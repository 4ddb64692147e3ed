#include <CLI11.hpp>

#include <algorithm>

#include <nlohmann/json.hpp>

#include "io.hpp"

namespace anchorkit::cli {
namespace {

void require_size(const ScoreMap& scores, const AssignmentResult& assignment, const std::string& path) {
  if (scores.size() != assignment.labels.size()) {
    throw DataError(path + ": " + std::to_string(scores.size()) + " scores for " +
                        std::to_string(assignment.labels.size()) + " anchors",
                    path);
  }
}

}  // namespace

Command add_hcam(CLI::App& parent) {
  struct Options {
    std::string main_scores;
    std::string prog_scores;
    std::string assignment;
    std::string masks;
    std::string labels;
    std::optional<double> threshold;
    std::optional<double> gamma;
    std::optional<double> alpha;
    std::optional<double> focal_gamma;
    std::optional<std::string> neighborhoods;
  };
  auto opts = std::make_shared<Options>();
  CLI::App* app =
      parent.add_subcommand("hcam", "Attention masks, discrepancy labels and the combined loss for one image");
  app->add_option("--main", opts->main_scores, "Main-branch anchor scores")->required();
  app->add_option("--prog", opts->prog_scores, "Progressive-branch anchor scores")->required();
  app->add_option("--assignment", opts->assignment, "Assignment file from the assign command")->required();
  app->add_option("--masks", opts->masks, "Write attention masks here, one block per neighborhood size");
  app->add_option("--labels", opts->labels, "Write discrepancy labels here");
  app->add_option("--threshold", opts->threshold, "High-confidence score threshold");
  app->add_option("--gamma", opts->gamma, "Weight of the progressive loss");
  app->add_option("--alpha", opts->alpha, "Focal alpha");
  app->add_option("--focal-gamma", opts->focal_gamma, "Focal gamma");
  app->add_option("--neighborhoods", opts->neighborhoods, "Comma-separated odd neighborhood sizes");

  return {app, [opts](const Context& ctx) {
            HcamLossConfig cfg = ctx.config.hcam;
            if (opts->threshold) cfg.confidence_threshold = *opts->threshold;
            if (opts->gamma) cfg.gamma_balance = *opts->gamma;
            if (opts->alpha) cfg.focal_alpha = *opts->alpha;
            if (opts->focal_gamma) cfg.focal_gamma = *opts->focal_gamma;
            if (opts->neighborhoods) {
              cfg.neighborhood_sizes.clear();
              for (double v : parse_number_list(*opts->neighborhoods, "--neighborhoods")) {
                if (v != static_cast<int>(v)) throw UsageError("--neighborhoods: sizes must be integers");
                cfg.neighborhood_sizes.push_back(static_cast<int>(v));
              }
            }
            check_settings([&] { cfg.validate(); });

            const AssignmentResult assignment = load_assignment(opts->assignment);
            const ScoreMap main = load_scores(opts->main_scores);
            const ScoreMap prog = load_scores(opts->prog_scores);
            require_size(main, assignment, opts->main_scores);
            require_size(prog, assignment, opts->prog_scores);

            const HighConfidenceSets high = select_high_confidence(main, assignment, cfg.confidence_threshold);
            std::vector<std::size_t> positions = high.correct_positive;
            positions.insert(positions.end(), high.false_negative.begin(), high.false_negative.end());
            std::sort(positions.begin(), positions.end());

            const auto y_hc = discrepancy_labels(main, assignment, cfg.confidence_threshold);
            const double main_loss =
                focal_loss(main.values(), focal_targets(assignment), cfg.focal_alpha, cfg.focal_gamma);
            const double prog_loss = focal_loss(prog.values(), focal_targets(y_hc), cfg.focal_alpha, cfg.focal_gamma);
            const double loss = hcam_loss(main, prog, assignment, y_hc, cfg);

            nlohmann::ordered_json j;
            j["loss"] = loss;
            j["main_loss"] = main_loss;
            j["progressive_loss"] = prog_loss;
            j["gamma"] = cfg.gamma_balance;
            j["high_confidence"] = {{"correct_positive", high.correct_positive.size()},
                                    {"false_negative", high.false_negative.size()}};
            std::size_t counts[3] = {0, 0, 0};
            for (DiscrepancyLabel l : y_hc) ++counts[static_cast<int>(l) + 1];
            j["y_hc"] = {{"positive", counts[2]}, {"negative", counts[1]}, {"ignore", counts[0]}};

            std::unique_ptr<OutputSink> mask_out;
            if (!opts->masks.empty()) mask_out = std::make_unique<OutputSink>(opts->masks);
            nlohmann::ordered_json ones = nlohmann::ordered_json::object();
            for (int n : cfg.neighborhood_sizes) {
              const auto masks = attention_masks(assignment.grid, positions, n);
              std::size_t total = 0;
              for (const auto& m : masks) total += m.count_ones();
              ones[std::to_string(n)] = total;
              if (mask_out) write_masks(mask_out->stream(), assignment.grid, masks);
            }
            if (mask_out) mask_out->finish();
            j["mask_ones"] = ones;

            if (!opts->labels.empty()) {
              OutputSink l(opts->labels);
              write_discrepancy_labels(l.stream(), y_hc);
              l.finish();
            }
            OutputSink out(ctx.global.out);
            out.stream() << j.dump(2) << "\n";
            out.finish();
            return 0;
          }};
}

}  // namespace anchorkit::cli
