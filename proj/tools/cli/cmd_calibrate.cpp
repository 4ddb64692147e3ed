#include <CLI11.hpp>

#include <nlohmann/json.hpp>

#include "io.hpp"

namespace anchorkit::cli {

Command add_calibrate(CLI::App& parent) {
  struct Options {
    std::string annotations;
    std::string layer = "p2";
    double ratio = 0.0;
    SizeOptions sizes;
    std::optional<double> start_scale;
    std::optional<double> end_scale;
    std::optional<int> max_iterations;
    std::optional<double> tolerance;
  };
  auto opts = std::make_shared<Options>();
  CLI::App* app =
      parent.add_subcommand("calibrate", "Bisect the face scale that matches a target share of faces to a layer");
  app->add_option("--annotations", opts->annotations, "Wider Face annotation file")->required();
  app->add_option("--layer", opts->layer, "Target layer p2..p7")->capture_default_str();
  app->add_option("--ratio", opts->ratio, "Target share of faces matched to the layer")->required();
  add_size_options(*app, opts->sizes);
  app->add_option("--start-scale", opts->start_scale, "Lower end of the scale interval");
  app->add_option("--end-scale", opts->end_scale, "Upper end of the scale interval");
  app->add_option("--max-iterations", opts->max_iterations, "Bisection step cap");
  app->add_option("--tolerance", opts->tolerance, "Accepted |achieved - target|");

  return {app, [opts](const Context& ctx) {
            const auto layer = parse_layer(opts->layer);
            if (!layer) throw UsageError("calibrate: unknown layer '" + opts->layer + "'");
            const CalibrationSettings& s = ctx.config.calibration;
            CalibrationConfig cfg;
            cfg.target_layer = *layer;
            cfg.target_ratio = opts->ratio;
            cfg.start_scale = opts->start_scale.value_or(s.start_scale);
            cfg.end_scale = opts->end_scale.value_or(s.end_scale);
            cfg.max_iterations = opts->max_iterations.value_or(s.max_iterations);
            cfg.tolerance = opts->tolerance.value_or(s.tolerance);
            cfg.match = ctx.config.match;
            cfg.seed = ctx.require_seed();
            check_settings([&] {
              cfg.validate();
              cfg.match.validate();
            });

            const GroundTruthSet set = load_annotations(opts->annotations);
            cfg.image_sizes = resolve_sizes(set, opts->sizes);
            CalibrationState state;
            try {
              state = calibrate_scale_control(set, cfg);
            } catch (const std::invalid_argument& e) {
              throw DataError(opts->annotations + ": " + e.what(), opts->annotations);
            }

            OutputSink out(ctx.global.out);
            if (ctx.format() == "csv") {
              out.stream() << "iteration,scale,ratio\n";
              for (std::size_t i = 0; i < state.trace.size(); ++i) {
                out.stream() << i << "," << format_double(state.trace[i].scale) << ","
                             << format_double(state.trace[i].ratio) << "\n";
              }
            } else {
              nlohmann::ordered_json j;
              j["layer"] = layer_name(state.target_layer);
              j["target_ratio"] = state.target_ratio;
              j["start_scale"] = state.start_scale;
              j["end_scale"] = state.end_scale;
              j["scale"] = state.scale;
              j["achieved_ratio"] = state.achieved_ratio;
              j["iterations"] = state.iterations;
              j["converged"] = state.converged;
              j["note"] = state.note;
              nlohmann::ordered_json trace = nlohmann::ordered_json::array();
              for (const auto& step : state.trace) trace.push_back({step.scale, step.ratio});
              j["trace"] = trace;
              out.stream() << j.dump(2) << "\n";
            }
            out.finish();
            if (!state.converged) {
              ctx.warn("calibration did not converge after " + std::to_string(state.iterations) +
                       " steps; best ratio " + format_double(state.achieved_ratio) +
                       (state.note.empty() ? "" : " (" + state.note + ")"));
            }
            return 0;
          }};
}

}  // namespace anchorkit::cli
