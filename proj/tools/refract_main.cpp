#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "refract/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"near-field refractor construction, verification and certification"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::int64_t seed_override = -1;
  int threads_override = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (default: out)");
    sub->add_option("--seed", seed_override, "override the config seed");
    sub->add_option("--threads", threads_override, "override the config thread count");
  };

  add_common(app.add_subcommand("solve", "fit oval constants to the target masses"));
  add_common(app.add_subcommand("verify", "run the closed-form vs oracle battery"));
  add_common(app.add_subcommand("mtw-certify", "sample the A3 form and report its sign"));
  add_common(app.add_subcommand("trace", "per-ray table for an analytic radial fixture"));
  add_common(app.add_subcommand("r-convexity", "refraction-cone connectivity probe"));

  CLI11_PARSE(app, argc, argv);

  try {
    refract::Command cmd = refract::parse_command(app.get_subcommands().front()->get_name());
    refract::RunConfig cfg = refract::load_config(config_path, cmd);
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (threads_override > 0) cfg.threads = threads_override;
    refract::RunOutcome outcome = refract::run(cfg, out_dir);
    std::cout << outcome.summary;
    return outcome.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
