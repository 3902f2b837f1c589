#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "resv/model.hpp"

namespace resv {

/// Jobs moved between servers after requests arrive. delta(n, m) counts jobs
/// sent from overloaded server n to server m with spare reservations.
class TransferPlan {
 public:
  TransferPlan() = default;
  explicit TransferPlan(std::size_t n) : n_(n), delta_(n * n, 0) {}

  std::size_t n_servers() const { return n_; }
  int operator()(std::size_t from, std::size_t to) const { return delta_[from * n_ + to]; }
  int& operator()(std::size_t from, std::size_t to) { return delta_[from * n_ + to]; }

  /// Row-major view; lexicographic order on this is the tie-break order.
  std::span<const int> flat() const { return delta_; }

  int sent_from(std::size_t n) const;
  int received_by(std::size_t m) const;

  friend bool operator==(const TransferPlan&, const TransferPlan&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<int> delta_;
};

struct TransferSolution {
  TransferPlan plan;
  double transfer_cost = 0.0;
  double violation_cost = 0.0;
  double objective = 0.0;
};

/// Deficit (b - a)^+ and surplus (a - b)^+ per server.
struct Imbalance {
  std::vector<int> deficit;
  std::vector<int> surplus;
};
Imbalance imbalance(std::span<const int> a, std::span<const int> b);

/// True when the plan satisfies the diagonal, per-edge, and both aggregate
/// caps for (a, b).
bool is_feasible(const TransferPlan& plan, std::span<const int> a, std::span<const int> b);

/// Evaluates the transfer and violation cost of a plan. Unserved demand is
/// clamped at zero before f^V is applied.
TransferSolution evaluate_plan(TransferPlan plan, std::span<const int> a, std::span<const int> b,
                               const CostModel& model);

/// Exact minimum-cost transfer plan. Ties are broken towards the
/// lexicographically smallest flattened plan.
TransferSolution solve_transfer(std::span<const int> a, std::span<const int> b, const CostModel& model);

inline constexpr std::uint64_t kDefaultOracleLimit = 10'000'000;

/// Exhaustive enumeration of every feasible plan with the same tie-break as
/// solve_transfer. Throws std::length_error when the search space exceeds
/// `limit` plans.
TransferSolution brute_force_transfer(std::span<const int> a, std::span<const int> b,
                                      const CostModel& model,
                                      std::uint64_t limit = kDefaultOracleLimit);

/// Objectives closer than this (relative to max(1, |objective|)) are ties.
inline constexpr double kTieTolerance = 1e-9;

}  // namespace resv
