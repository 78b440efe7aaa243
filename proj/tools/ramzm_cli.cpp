#include <iostream>

#include <CLI11.hpp>

#include "ramzm/cli_io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Ring-assisted Mach-Zehnder link analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ramzm::kToolVersion);

  ramzm::CommandOptions opt;
  std::string config;
  std::string out_dir = ".";
  std::string modulator;

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"report", "Gain, noise figure, intercepts and SFDR at one bias point"},
      {"sweep", "One- or two-axis parameter sweep, one table per metric"},
      {"two-tone", "Simulated two-tone test with fitted intercepts"},
      {"optimize", "Grid search for the best bias under constraints"},
      {"null-bias", "Gain versus laser power and MZM bias at constant photocurrent"},
  };
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    sub->add_option("--metric", opt.metrics, "Metric(s) to compute; objective for optimize");
    sub->add_flag("--numeric", opt.numeric, "Use finite-difference coefficients");
    sub->add_option("--format", opt.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    sub->add_option("--modulator", modulator,
                    "Override the drive: ramzm-matched, ramzm-lumped, mzm-single, mzm-push-pull");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ramzm::exit_code::kConfig;
  }

  if (!config.empty()) opt.config_path = config;
  opt.out_dir = out_dir;
  if (!modulator.empty()) opt.modulator = modulator;
  return ramzm::run_command(app.get_subcommands().front()->get_name(), opt, std::cout, std::cerr);
}
