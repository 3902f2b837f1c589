#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "resv/config.hpp"
#include "resv/harness.hpp"

namespace resv {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2 };

std::string artifact_version();

/// t, action_index, res_*, req_*, cost_res, cost_trf, cost_vio, cost_total,
/// regret, p_dist_l2; one row per slot.
void write_csv(const RunRecord& record, std::size_t n_servers, std::ostream& out);

struct CsvSummary {
  std::vector<std::string> header;
  std::vector<double> regret;
  std::vector<double> p_dist;
};
CsvSummary read_csv(const std::filesystem::path& path);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  /// 0 picks the hardware concurrency.
  unsigned workers = 0;
};

/// Runs every (policy, seed) pair, writing <outdir>/<policy>_<seed>.csv and
/// <outdir>/manifest.json.
int cmd_run(const std::filesystem::path& config_path, const RunOverrides& overrides, std::ostream& out,
            std::ostream& err);

/// Summarizes two or more run CSVs produced from the same request sequence.
int cmd_compare(const std::vector<std::filesystem::path>& files, double delta,
                const std::optional<std::filesystem::path>& summary_path, std::ostream& out, std::ostream& err);

/// Prints theta, |A|, eta, and the regret bound for the configured horizon.
int cmd_bound(const std::filesystem::path& config_path, double delta, std::ostream& out, std::ostream& err);

inline constexpr double kConvergenceThreshold = 1e-3;
inline constexpr std::size_t kConvergenceWindow = 100;

}  // namespace resv
