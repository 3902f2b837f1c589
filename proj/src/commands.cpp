#include "resv/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "resv/ew_policy.hpp"

#ifndef RESV_VERSION
#define RESV_VERSION "dev"
#endif

namespace resv {

namespace fs = std::filesystem;
using nlohmann::json;

std::string artifact_version() { return RESV_VERSION; }

namespace {

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string hex64(std::uint64_t x) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, x);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  return cells;
}

std::string csv_name(const std::string& policy, std::uint64_t seed) {
  return policy + "_" + std::to_string(seed) + ".csv";
}

}  // namespace

void write_csv(const RunRecord& record, std::size_t n_servers, std::ostream& out) {
  out << "t,action_index";
  for (std::size_t n = 1; n <= n_servers; ++n) out << ",res_" << n;
  for (std::size_t n = 1; n <= n_servers; ++n) out << ",req_" << n;
  out << ",cost_res,cost_trf,cost_vio,cost_total,regret,p_dist_l2\n";
  for (const StepRow& row : record.rows) {
    out << row.t << ',' << row.action;
    for (int v : row.reservation) out << ',' << v;
    for (int v : row.request) out << ',' << v;
    out << ',' << fmt_double(row.cost.reservation) << ',' << fmt_double(row.cost.transfer) << ','
        << fmt_double(row.cost.violation) << ',' << fmt_double(row.cost.total) << ',' << fmt_double(row.regret)
        << ',' << fmt_double(row.p_dist_l2) << '\n';
  }
}

CsvSummary read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  CsvSummary out;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  out.header = split_csv_line(line);
  const auto column = [&](const std::string& name) {
    const auto it = std::find(out.header.begin(), out.header.end(), name);
    if (it == out.header.end()) throw std::runtime_error(path.string() + ": missing column " + name);
    return static_cast<std::size_t>(it - out.header.begin());
  };
  const std::size_t regret_col = column("regret");
  const std::size_t dist_col = column("p_dist_l2");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != out.header.size()) throw std::runtime_error(path.string() + ": ragged row");
    out.regret.push_back(std::stod(cells[regret_col]));
    out.p_dist.push_back(std::stod(cells[dist_col]));
  }
  return out;
}

int cmd_run(const fs::path& config_path, const RunOverrides& overrides, std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  try {
    config = load_config(config_path);
    if (overrides.seed) config.seeds = {*overrides.seed};
    if (overrides.output_dir) config.output_dir = *overrides.output_dir;
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    const Instance& inst = config.instance;
    const fs::path outdir = config.output_dir;
    fs::create_directories(outdir);

    const double theta = theta_bound(inst.space, inst.requests, inst.model);
    CostTable table(inst.space, inst.model);

    struct Job {
      std::size_t policy;
      std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::size_t p = 0; p < config.policies.size(); ++p) {
      for (std::uint64_t seed : config.seeds) jobs.push_back({p, seed});
    }
    std::vector<json> entries(jobs.size());

    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    auto worker = [&] {
      for (std::size_t k = next++; k < jobs.size(); k = next++) {
        try {
          RunSpec spec{inst, config.policies[jobs[k].policy], config.scenario, config.horizon, jobs[k].seed, theta};
          const RunRecord record = run_experiment(spec, &table);
          const std::string file = csv_name(record.policy, record.seed);
          std::ofstream csv(outdir / file, std::ios::binary);
          write_csv(record, inst.space.dims(), csv);
          if (!csv) throw std::runtime_error("failed writing " + (outdir / file).string());
          entries[k] = json{{"file", file},
                            {"policy", record.policy},
                            {"kind", to_string(spec.policy.kind)},
                            {"seed", record.seed},
                            {"scenario_hash", hex64(record.scenario_hash)},
                            {"eta", record.eta},
                            {"rows", record.rows.size()},
                            {"evaluations", record.evaluations},
                            {"final_regret", record.final_regret()},
                            {"hindsight_action", record.hindsight_action},
                            {"policy_seconds", record.policy_seconds},
                            {"ledger_seconds", record.ledger_seconds}};
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(overrides.workers ? overrides.workers
                                                                               : std::thread::hardware_concurrency(),
                                                             static_cast<unsigned>(jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    json manifest{{"artifact_version", artifact_version()},
                  {"config", to_json(config)},
                  {"space_size", inst.space.cardinality()},
                  {"theta", theta},
                  {"runs", entries}};
    std::ofstream mf(outdir / "manifest.json");
    mf << manifest.dump(2) << '\n';
    if (!mf) throw std::runtime_error("failed writing manifest");

    out << "wrote " << jobs.size() << " run(s) and manifest.json to " << outdir.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_compare(const std::vector<fs::path>& files, double delta, const std::optional<fs::path>& summary_path,
                std::ostream& out, std::ostream& err) {
  if (files.size() < 2) {
    err << "compare needs at least two run files\n";
    return kExitValidation;
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    err << "delta must lie in (0, 1)\n";
    return kExitValidation;
  }

  struct Row {
    std::string file;
    std::string policy;
    std::uint64_t seed = 0;
    std::string hash;
    double final_regret = 0.0;
    std::optional<std::uint64_t> converged;
    double policy_seconds = 0.0;
    double bound = 0.0;
  };
  std::vector<Row> rows;
  std::map<fs::path, json> manifests;

  try {
    for (const fs::path& file : files) {
      const fs::path manifest_path = file.parent_path() / "manifest.json";
      auto it = manifests.find(manifest_path);
      if (it == manifests.end()) {
        std::ifstream in(manifest_path);
        if (!in) {
          err << file.string() << ": no manifest.json next to the run file\n";
          return kExitValidation;
        }
        it = manifests.emplace(manifest_path, json::parse(in)).first;
      }
      const json& manifest = it->second;
      const std::string name = file.filename().string();
      const auto& runs = manifest.at("runs");
      const auto entry = std::find_if(runs.begin(), runs.end(), [&](const json& r) { return r.at("file") == name; });
      if (entry == runs.end()) {
        err << file.string() << ": not listed in " << manifest_path.string() << '\n';
        return kExitValidation;
      }
      const CsvSummary csv = read_csv(file);
      Row row;
      row.file = file.string();
      row.policy = entry->at("policy").get<std::string>();
      row.seed = entry->at("seed").get<std::uint64_t>();
      row.hash = entry->at("scenario_hash").get<std::string>();
      row.final_regret = csv.regret.empty() ? 0.0 : csv.regret.back();
      row.converged = convergence_step(csv.p_dist, kConvergenceThreshold, kConvergenceWindow);
      row.policy_seconds = entry->at("policy_seconds").get<double>();
      const std::uint64_t horizon = std::max<std::uint64_t>(csv.regret.size(), 1);
      row.bound = regret_bound(horizon, manifest.at("theta").get<double>(), manifest.at("space_size").get<std::uint64_t>(),
                               delta);
      rows.push_back(std::move(row));
    }
  } catch (const std::exception& e) {
    err << "compare failed: " << e.what() << '\n';
    return kExitRuntime;
  }

  for (const Row& row : rows) {
    if (row.hash != rows.front().hash) {
      err << "scenario mismatch: " << row.file << " (" << row.hash << ") vs " << rows.front().file << " ("
          << rows.front().hash << ")\n";
      return kExitValidation;
    }
  }

  std::ostringstream table;
  table << "file,policy,seed,final_regret,convergence_step,policy_seconds,bound,within_bound,d_regret,d_convergence\n";
  const auto conv_text = [](const std::optional<std::uint64_t>& c) { return c ? std::to_string(*c) : std::string("none"); };
  for (const Row& row : rows) {
    const Row& base = rows.front();
    std::string d_conv = "n/a";
    if (row.converged && base.converged) {
      d_conv = std::to_string(static_cast<std::int64_t>(*row.converged) - static_cast<std::int64_t>(*base.converged));
    } else if (!row.converged && !base.converged) {
      d_conv = "0";
    }
    table << row.file << ',' << row.policy << ',' << row.seed << ',' << fmt_double(row.final_regret) << ','
          << conv_text(row.converged) << ',' << fmt_double(row.policy_seconds) << ',' << fmt_double(row.bound) << ','
          << (row.final_regret <= row.bound ? "pass" : "fail") << ',' << fmt_double(row.final_regret - base.final_regret)
          << ',' << d_conv << '\n';
  }
  out << table.str();
  if (summary_path) {
    std::ofstream summary(*summary_path);
    summary << table.str();
    if (!summary) {
      err << "failed writing " << summary_path->string() << '\n';
      return kExitRuntime;
    }
  }
  return kExitOk;
}

int cmd_bound(const fs::path& config_path, double delta, std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  try {
    config = load_config(config_path);
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta: must lie in (0, 1)");
    if (config.horizon == 0) throw ConfigError("horizon: the bound needs T >= 1");
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << '\n';
    return kExitValidation;
  }
  try {
    const Instance& inst = config.instance;
    const double theta = theta_bound(inst.space, inst.requests, inst.model);
    const std::uint64_t size = inst.space.cardinality();
    out << std::setprecision(12);
    out << "theta " << theta << '\n';
    out << "space_size " << size << '\n';
    out << "horizon " << config.horizon << '\n';
    out << "eta " << default_eta(size, config.horizon) << '\n';
    out << "delta " << delta << '\n';
    out << "bound " << regret_bound(config.horizon, theta, size, delta) << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "bound failed: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace resv
