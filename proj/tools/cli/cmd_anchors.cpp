#include <CLI11.hpp>

#include "io.hpp"

namespace anchorkit::cli {

Command add_anchors(CLI::App& parent) {
  struct Options {
    int width = 0;
    int height = 0;
  };
  auto opts = std::make_shared<Options>();
  CLI::App* app = parent.add_subcommand("anchors", "Emit the anchor grid of an image as line records");
  app->add_option("width", opts->width, "Image width")->required();
  app->add_option("height", opts->height, "Image height")->required();

  return {app, [opts](const Context& ctx) {
            if (opts->width < 1 || opts->height < 1) {
              throw UsageError("anchors: width and height must be positive, got " + std::to_string(opts->width) +
                               "x" + std::to_string(opts->height));
            }
            OutputSink out(ctx.global.out);
            write_anchor_grid(out.stream(), AnchorGrid(opts->width, opts->height));
            out.finish();
            return 0;
          }};
}

}  // namespace anchorkit::cli
