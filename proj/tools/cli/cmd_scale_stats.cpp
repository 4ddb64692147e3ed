#include <CLI11.hpp>

#include <nlohmann/json.hpp>

#include "io.hpp"

namespace anchorkit::cli {

Command add_scale_stats(CLI::App& parent) {
  struct Options {
    std::string annotations;
    std::string thresholds = "8,16,20,32,64,128,256,512";
  };
  auto opts = std::make_shared<Options>();
  CLI::App* app = parent.add_subcommand("scale-stats", "Cumulative fraction of faces below scale thresholds");
  app->add_option("--annotations", opts->annotations, "Wider Face annotation file")->required();
  app->add_option("--thresholds", opts->thresholds, "Comma-separated scale thresholds")->capture_default_str();

  return {app, [opts](const Context& ctx) {
            const std::vector<double> thresholds = parse_number_list(opts->thresholds, "--thresholds");
            const std::string format = ctx.format("csv");
            const GroundTruthSet set = load_annotations(opts->annotations);
            const auto points = scale_distribution(set, thresholds);

            OutputSink out(ctx.global.out);
            if (format == "csv") {
              out.stream() << "threshold,fraction\n";
              for (const auto& p : points) out.stream() << format_double(p.threshold) << "," << format_double(p.fraction) << "\n";
            } else {
              nlohmann::ordered_json j = nlohmann::ordered_json::array();
              for (const auto& p : points) j.push_back({{"threshold", p.threshold}, {"fraction", p.fraction}});
              out.stream() << j.dump(2) << "\n";
            }
            out.finish();
            return 0;
          }};
}

}  // namespace anchorkit::cli
