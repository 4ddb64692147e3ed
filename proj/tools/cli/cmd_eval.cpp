#include <CLI11.hpp>

#include "io.hpp"

namespace anchorkit::cli {

Command add_eval(CLI::App& parent) {
  struct Options {
    std::string gt;
    std::string predictions;
    std::string subsets;
    std::string subset_name = "subset";
    std::string csv;
    std::optional<std::string> grid;
    std::optional<double> match_iou;
    std::optional<double> nfa_threshold;
    bool nms = false;
  };
  auto opts = std::make_shared<Options>();
  CLI::App* app = parent.add_subcommand("eval", "Score detections against ground truth (AP, PR curve, NFA)");
  app->add_option("--gt", opts->gt, "Wider Face annotation file")->required();
  app->add_option("--predictions", opts->predictions, "Detections in the same layout")->required();
  app->add_option("--subsets", opts->subsets, "JSON subset file, flat or keyed by subset name");
  app->add_option("--subset-name", opts->subset_name, "Name for a flat subset file")->capture_default_str();
  app->add_option("--csv", opts->csv, "Also write the PR curve as CSV here");
  app->add_option("--grid", opts->grid, "Threshold grid")->check(CLI::IsMember({"uniform", "distinct"}));
  app->add_option("--iou", opts->match_iou, "Match IoU threshold");
  app->add_option("--nfa-threshold", opts->nfa_threshold, "Score above which unmatched detections count as false alarms");
  app->add_flag("--nms", opts->nms, "Run NMS (top 5000, IoU 0.6, keep 750) on each image first");

  return {app, [opts](const Context& ctx) {
            EvalConfig cfg = ctx.config.eval;
            if (opts->grid) cfg.grid = parse_grid(*opts->grid);
            if (opts->match_iou) cfg.match_iou = *opts->match_iou;
            if (opts->nfa_threshold) cfg.nfa_threshold = *opts->nfa_threshold;
            if (opts->nms && !cfg.nms) cfg.nms = NmsConfig{};
            if (!(cfg.match_iou > 0.0 && cfg.match_iou <= 1.0)) throw UsageError("eval: --iou must be in (0, 1]");

            const GroundTruthSet gts = load_annotations(opts->gt);
            const PredictionSet preds = load_predictions(opts->predictions);
            std::map<std::string, SubsetSpec> subsets;
            if (!opts->subsets.empty()) subsets = load_subsets(opts->subsets, opts->subset_name);

            EvalReport report;
            try {
              report = evaluate(gts, preds, subsets, cfg);
            } catch (const UnknownImageError& e) {
              throw DataError(std::string(e.what()), opts->predictions);
            } catch (const std::invalid_argument& e) {
              throw DataError(e.what());
            }

            OutputSink out(ctx.global.out);
            if (ctx.format() == "csv") {
              write_report_csv(out.stream(), report);
            } else {
              out.stream() << report_to_json(report).dump() << "\n";
            }
            out.finish();
            if (!opts->csv.empty()) {
              OutputSink csv(opts->csv);
              write_report_csv(csv.stream(), report);
              csv.finish();
            }
            return 0;
          }};
}

}  // namespace anchorkit::cli
