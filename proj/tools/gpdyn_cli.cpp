// Command line front end: run <config>, compare <dir>..., validate <config>.
// Exit codes: 0 ok, 1 configuration error, 2 runtime abort.

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "gpdyn/gpdyn.h"

namespace {

int exit_code(gpd_status s) {
  switch (s) {
    case GPD_OK:
      return 0;
    case GPD_CONFIG_ERROR:
    case GPD_INVALID_ARGUMENT:
      return 1;
    default:
      return 2;
  }
}

int report(gpd_status s) {
  if (s != GPD_OK) std::fprintf(stderr, "error: %s\n", gpd_last_error());
  return exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonadiabatic dynamics around a conical intersection (gpdyn " + std::string(gpd_version()) + ")"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gpd_version()));
  app.footer("Set GPDYN_WORKERS to override the trajectory worker count.");

  std::string config_path;
  std::string output_dir;
  bool verbose = false;
  auto* run = app.add_subcommand("run", "Execute a run configuration (JSON or a previous run.meta)");
  run->add_option("config", config_path, "configuration file")->required();
  run->add_option("-o,--output-dir", output_dir, "override output_dir from the configuration");
  run->add_flag("-v,--verbose", verbose, "progress messages on stderr");

  std::vector<std::string> dirs;
  double x_lo = 1.0;
  double x_hi = 4.0;
  double off_axis = 0.3;
  std::string table_path;
  auto* compare = app.add_subcommand("compare", "Align P(t) across run directories");
  compare->add_option("dirs", dirs, "run directories")->required()->expected(1, -1);
  compare->add_option("--x-lo", x_lo, "nodal window lower x")->capture_default_str();
  compare->add_option("--x-hi", x_hi, "nodal window upper x")->capture_default_str();
  compare->add_option("--off-axis", off_axis, "|y| threshold of the off-axis band")->capture_default_str();
  compare->add_option("-o,--output", table_path, "write the table to a file instead of stdout");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a configuration without running it");
  validate->add_option("config", validate_path, "configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (*run) {
    return report(gpd_run_config(config_path.c_str(), output_dir.empty() ? nullptr : output_dir.c_str(), verbose));
  }
  if (*compare) {
    std::vector<const char*> ptrs;
    for (const auto& d : dirs) ptrs.push_back(d.c_str());
    return report(gpd_compare(ptrs.data(), ptrs.size(), x_lo, x_hi, off_axis,
                              table_path.empty() ? nullptr : table_path.c_str()));
  }
  const gpd_status s = gpd_validate_config(validate_path.c_str());
  if (s == GPD_OK) std::printf("%s: ok\n", validate_path.c_str());
  return report(s);
}
