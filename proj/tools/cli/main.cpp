#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <string_view>

#include <anchorkit/flat_api.hpp>
#include <nlohmann/json.hpp>

#include "io.hpp"

using namespace anchorkit::cli;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

int report(bool json_errors, int code, const std::string& message, const std::string& file = {},
           std::size_t line = 0) {
  if (json_errors) {
    nlohmann::ordered_json j;
    j["kind"] = code == kExitUsage ? "usage" : "data";
    j["code"] = code;
    j["message"] = message;
    if (!file.empty()) j["file"] = file;
    if (line > 0) j["line"] = line;
    std::cerr << nlohmann::ordered_json{{"error", j}}.dump() << "\n";
  } else {
    std::cerr << "anchorkit: error: " << message << "\n";
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  // Known before parsing so that parse failures honor it too.
  const bool json_errors =
      std::any_of(argv + 1, argv + argc, [](const char* a) { return std::string_view(a) == "--json-errors"; });

  CLI::App app{"Anchor assignment, augmentation planning, attention masks and detection evaluation."};
  app.set_version_flag("--version", std::string(anchorkit::flat::version()));
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx;
  ctx.err = &std::cerr;
  GlobalOptions& g = ctx.global;
  app.add_option("--seed", g.seed, "Seed for every random draw");
  app.add_option("--config", g.config_path, "JSON run configuration; flags override it");
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", g.out, "Output file (default: stdout)");
  app.add_flag("--json-errors", g.json_errors, "Print errors as JSON on stderr");

  const std::vector<Command> commands = {add_anchors(app),     add_assign(app),    add_augment(app),
                                         add_scale_stats(app), add_calibrate(app), add_eval(app),
                                         add_hcam(app)};

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (json_errors) return report(true, kExitUsage, e.what());
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (!g.config_path.empty()) ctx.config = load_run_config(g.config_path);
    for (const Command& c : commands) {
      if (c.app->parsed()) return c.run(ctx);
    }
    return report(json_errors, kExitUsage, "no subcommand given");
  } catch (const UsageError& e) {
    return report(json_errors, kExitUsage, e.what());
  } catch (const DataError& e) {
    return report(json_errors, kExitData, e.what(), e.file(), e.line());
  } catch (const anchorkit::ParseError& e) {
    return report(json_errors, kExitData, e.what(), {}, e.line());
  } catch (const std::exception& e) {
    return report(json_errors, kExitData, e.what());
  }
}
