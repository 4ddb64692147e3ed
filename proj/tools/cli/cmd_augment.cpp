#include <CLI11.hpp>

#include <array>

#include <nlohmann/json.hpp>

#include "io.hpp"

namespace anchorkit::cli {

Command add_augment(CLI::App& parent) {
  struct Options {
    std::string annotations;
    std::string strategy;
    std::size_t samples = 0;
    std::string summary;
    SizeOptions sizes;
    std::optional<double> tr_p5;
    std::optional<double> tr_p6;
    std::optional<double> r_th;
    std::optional<int> output_side;
  };
  auto opts = std::make_shared<Options>();
  CLI::App* app = parent.add_subcommand("augment", "Draw transform plans and summarize their target layers");
  app->add_option("--annotations", opts->annotations, "Wider Face annotation file")->required();
  app->add_option("--strategy", opts->strategy, "mst, rsc, das or sse")
      ->required()
      ->check(CLI::IsMember({"mst", "rsc", "das", "sse"}));
  app->add_option("--n-samples", opts->samples, "Plans to draw, cycling through the images (default: one each)");
  app->add_option("--summary", opts->summary, "Write the frequency summary here (default: stderr)");
  add_size_options(*app, opts->sizes);
  app->add_option("--tr-p5", opts->tr_p5, "SSE probability of targeting p5");
  app->add_option("--tr-p6", opts->tr_p6, "SSE probability of targeting p6");
  app->add_option("--r-th", opts->r_th, "DAS upper bound on the resize ratio");
  app->add_option("--output-side", opts->output_side, "Side of the square output for SSE and DAS");

  return {app, [opts](const Context& ctx) {
            const Strategy strategy = *parse_strategy(opts->strategy);
            SseConfig sse = ctx.config.sse;
            DasConfig das = ctx.config.das;
            if (opts->tr_p5) sse.tr_p5 = *opts->tr_p5;
            if (opts->tr_p6) sse.tr_p6 = *opts->tr_p6;
            if (opts->r_th) das.r_th = *opts->r_th;
            if (opts->output_side) sse.output_side = das.output_side = *opts->output_side;
            const int mst_min = ctx.config.mst_min_short_side;
            const int mst_max = ctx.config.mst_max_short_side;
            check_settings([&] {
              sse.validate();
              das.validate();
              if (mst_min < 1 || mst_max < mst_min) throw std::invalid_argument("mst short side range is empty");
            });
            Rng rng(ctx.require_seed());

            const GroundTruthSet set = load_annotations(opts->annotations);
            if (set.empty()) throw DataError(opts->annotations + ": no images", opts->annotations);
            const auto sizes = resolve_sizes(set, opts->sizes);
            std::vector<std::vector<Box>> faces(set.size());
            for (std::size_t i = 0; i < set.size(); ++i) faces[i] = set[i].valid_boxes();
            const std::size_t n = opts->samples == 0 ? set.size() : opts->samples;

            std::array<std::size_t, kNumLayers> counts{};
            std::size_t targeted = 0;
            std::size_t fallbacks = 0;
            OutputSink out(ctx.global.out);
            for (std::size_t k = 0; k < n; ++k) {
              const std::size_t i = k % set.size();
              const ImageSize size = sizes[i] ? *sizes[i] : face_extent(set[i]);
              TransformPlan plan;
              switch (strategy) {
                case Strategy::Mst: plan = mst_plan(size, rng, mst_min, mst_max); break;
                case Strategy::Rsc: plan = rsc_plan(size, rng); break;
                case Strategy::Das: plan = das_plan(size, faces[i], das, rng); break;
                case Strategy::Sse: plan = sse_plan(size, faces[i], sse, rng); break;
              }
              if (plan.target_layer) {
                ++counts[layer_position(*plan.target_layer)];
                ++targeted;
              }
              if (plan.fallback_rsc) ++fallbacks;
              nlohmann::ordered_json record;
              record["image"] = set[i].path;
              const nlohmann::ordered_json fields = plan_to_json(plan);
              for (const auto& [key, value] : fields.items()) record[key] = value;
              out.stream() << record.dump() << "\n";
            }
            out.finish();

            std::string summary;
            if (ctx.format() == "csv") {
              summary = "layer,count,frequency\n";
              for (LayerId id : kAllLayers) {
                const std::size_t c = counts[layer_position(id)];
                summary += std::string(layer_name(id)) + "," + std::to_string(c) + "," +
                           format_double(targeted ? static_cast<double>(c) / static_cast<double>(targeted) : 0.0) +
                           "\n";
              }
            } else {
              nlohmann::ordered_json j;
              j["strategy"] = opts->strategy;
              j["samples"] = n;
              j["targeted"] = targeted;
              j["fallback_rsc"] = fallbacks;
              nlohmann::ordered_json freq = nlohmann::ordered_json::object();
              for (LayerId id : kAllLayers) {
                const std::size_t c = counts[layer_position(id)];
                freq[std::string(layer_name(id))] = {
                    {"count", c},
                    {"frequency", targeted ? static_cast<double>(c) / static_cast<double>(targeted) : 0.0}};
              }
              j["target_layers"] = freq;
              summary = j.dump(2) + "\n";
            }
            if (opts->summary.empty()) {
              *ctx.err << summary;
            } else {
              OutputSink s(opts->summary);
              s.stream() << summary;
              s.finish();
            }
            return 0;
          }};
}

}  // namespace anchorkit::cli
