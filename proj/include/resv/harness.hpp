#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "resv/model.hpp"
#include "resv/policy.hpp"
#include "resv/random.hpp"

namespace resv {

// ---------------------------------------------------------------------------
// Problem instance and scenarios

struct Instance {
  ActionSpace space;
  RequestBounds requests;
  CostModel model;
};

/// Three servers, reservations and requests in [1, 5], quadratic costs:
/// f^R = f^V = 0.5x^2, transfers 0.2x^2 except 0.3x^2 between servers 1 and 3.
Instance reference_instance();

enum class ScenarioKind { kIidUniform, kIidCategorical, kPiecewiseConstant };

struct Scenario {
  ScenarioKind kind = ScenarioKind::kIidUniform;
  /// kIidCategorical: weight per request-box index.
  std::vector<double> weights;
  /// kPiecewiseConstant: slots per block.
  std::uint64_t period = 0;
  /// kPiecewiseConstant: vectors cycled block by block. Empty means each
  /// block draws a vector uniformly from the request box.
  std::vector<std::vector<int>> block_vectors;
};

std::vector<RequestVector> generate_requests(const Scenario& scenario, const IntegerBox& request_box,
                                             std::uint64_t horizon, Rng& rng);

/// FNV-1a over the request sequence; equal sequences hash equal.
std::uint64_t sequence_hash(std::span<const RequestVector> requests);

// ---------------------------------------------------------------------------
// Cost lookups shared by the ledger

/// Memoized per-request cost columns: column(b)[a] = C(a, b) with the
/// optimal transfer plan. Safe for concurrent use.
class CostTable {
 public:
  CostTable(ActionSpace space, CostModel model);

  std::shared_ptr<const std::vector<CostBreakdown>> column(const RequestVector& request) const;
  /// Fills every column of the request box.
  void precompute(const IntegerBox& request_box) const;
  std::size_t columns() const;

 private:
  ActionSpace space_;
  CostModel model_;
  std::vector<std::vector<int>> actions_;
  mutable std::shared_mutex mutex_;
  mutable std::map<std::vector<int>, std::shared_ptr<const std::vector<CostBreakdown>>> columns_;
};

// ---------------------------------------------------------------------------
// Regret accounting

class RegretLedger {
 public:
  explicit RegretLedger(std::size_t actions);

  /// Adds one slot: every action's cost under the slot's request, and the
  /// cost the policy actually paid.
  void record(std::span<const CostBreakdown> column, double incurred);

  const std::vector<double>& cumulative() const { return cumulative_; }
  double incurred() const { return incurred_; }
  const std::vector<double>& regret_curve() const { return regret_curve_; }
  std::uint64_t slots() const { return regret_curve_.size(); }

  /// Incurred cost minus the best fixed action's cumulative cost.
  double regret() const;

 private:
  std::vector<double> cumulative_;
  double incurred_ = 0.0;
  std::vector<double> regret_curve_;
};

/// Exact argmin of the cumulative costs; ties go to the lowest index.
std::pair<std::size_t, double> hindsight_best(const RegretLedger& ledger);

/// (9 theta^2 / 8 + 1) sqrt(T log|A|) + 3 theta sqrt(log(1/delta) T / 2).
double regret_bound(std::uint64_t horizon, double theta, std::uint64_t space_size, double delta);

/// First slot t (1-based) with distance[t..t+window-1] all below threshold.
std::optional<std::uint64_t> convergence_step(std::span<const double> distances, double threshold = 1e-3,
                                              std::size_t window = 100);

// ---------------------------------------------------------------------------
// Runs

enum class PolicyKind { kEwFull, kEwDiscounted, kEwExplore, kRlBandit };

std::string to_string(PolicyKind kind);
std::optional<PolicyKind> policy_kind_from_string(const std::string& text);

struct PolicySpec {
  PolicyKind kind = PolicyKind::kEwFull;
  std::string name;
  std::optional<double> eta;  // default sqrt(log|A| / T)
  double discount = 0.99;     // kEwDiscounted
  std::size_t budget = 10;    // kEwExplore
  bool placeholder_redraw = false;
  double beta = 0.1;
  double tau = 0.005;
  double q_init = 0.0;

  /// Display name used for output files.
  std::string label() const;
};

struct RunSpec {
  Instance instance;
  PolicySpec policy;
  Scenario scenario;
  std::uint64_t horizon = 0;
  std::uint64_t seed = 0;
  /// Cost bound used for placeholders; computed exhaustively when unset.
  std::optional<double> theta;
};

struct StepRow {
  std::uint64_t t = 0;
  std::size_t action = 0;
  std::vector<int> reservation;
  std::vector<int> request;
  CostBreakdown cost;
  double regret = 0.0;
  double p_dist_l2 = 0.0;
};

struct RunRecord {
  std::string policy;
  std::uint64_t seed = 0;
  std::uint64_t horizon = 0;
  double eta = 0.0;
  double theta = 0.0;
  std::uint64_t scenario_hash = 0;
  std::vector<StepRow> rows;
  std::vector<double> final_cumulative;
  std::size_t hindsight_action = 0;
  double hindsight_cost = 0.0;
  std::size_t evaluations = 0;
  /// Largest |sum(P^t) - 1| over all slots.
  double max_normalization_error = 0.0;
  double policy_seconds = 0.0;
  double ledger_seconds = 0.0;

  double final_regret() const { return rows.empty() ? 0.0 : rows.back().regret; }
};

/// Builds the policy described by `spec` for an instance. `theta` is only
/// used by the exploring policy.
std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const Instance& instance, std::uint64_t horizon,
                                    double theta, std::uint64_t seed);

/// Resolved step size for a policy.
double resolved_eta(const PolicySpec& spec, const Instance& instance, std::uint64_t horizon);

/// Runs T slots of reserve -> observe -> transfer -> pay. `table` may be
/// shared between runs on the same instance.
RunRecord run_experiment(const RunSpec& spec, const CostTable* table = nullptr);

}  // namespace resv
