#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "resv/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Online resource reservation with job transfers: simulator and regret harness"};
  app.set_version_flag("--version", resv::artifact_version());
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> outdir;
  unsigned workers = 0;
  auto* run = app.add_subcommand("run", "Run every (policy, seed) pair of a config");
  run->add_option("config", config_path, "Experiment config (JSON) or a run manifest")->required();
  run->add_option("--seed", seed, "Run a single seed instead of the config's list");
  run->add_option("--outdir", outdir, "Override the output directory");
  run->add_option("--workers", workers, "Worker threads (default: hardware concurrency)");

  std::vector<std::string> files;
  double compare_delta = 0.05;
  std::optional<std::string> summary;
  auto* compare = app.add_subcommand("compare", "Summarize run CSVs that share a request sequence");
  compare->add_option("files", files, "Run CSV files")->required()->expected(2, -1);
  compare->add_option("--delta", compare_delta, "Confidence parameter for the regret bound");
  compare->add_option("--out", summary, "Also write the summary table to this CSV");

  std::string bound_config;
  double bound_delta = 0.05;
  auto* bound = app.add_subcommand("bound", "Print theta, |A|, eta and the regret bound");
  bound->add_option("config", bound_config, "Experiment config (JSON)")->required();
  bound->add_option("--delta", bound_delta, "Confidence parameter in (0, 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : resv::kExitValidation;
  }

  if (*run) return resv::cmd_run(config_path, resv::RunOverrides{seed, outdir, workers}, std::cout, std::cerr);
  if (*compare) {
    std::vector<std::filesystem::path> paths(files.begin(), files.end());
    std::optional<std::filesystem::path> out;
    if (summary) out = *summary;
    return resv::cmd_compare(paths, compare_delta, out, std::cout, std::cerr);
  }
  return resv::cmd_bound(bound_config, bound_delta, std::cout, std::cerr);
}
