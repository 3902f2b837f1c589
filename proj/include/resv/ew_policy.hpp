#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "resv/policy.hpp"

namespace resv {

/// Exponential-weights state. Weights are kept in the log domain:
/// log_weights[a] = -eta * accumulated[a], where accumulated holds the
/// (optionally discounted) cost history D[a] <- W * (D[a] + c[a]).
struct PolicyState {
  std::vector<double> log_weights;
  std::vector<double> accumulated;
  double eta = 0.0;
  double discount = 1.0;
  std::uint64_t t = 1;
};

/// sqrt(log|A| / T).
double default_eta(std::uint64_t space_size, std::uint64_t horizon);

PolicyState ew_init(std::size_t space_size, double eta, double discount = 1.0);

/// Folds one slot's per-action costs into the weights and advances t.
/// Throws std::invalid_argument on a length mismatch or NaN cost.
void ew_update(PolicyState& state, std::span<const double> costs);

Distribution distribution(const PolicyState& state);

/// Full-information policy: after each slot every action's cost is evaluated
/// and folded into the weights. discount < 1 gives the discounted variant.
class ExpWeightsPolicy final : public Policy {
 public:
  ExpWeightsPolicy(std::size_t space_size, CostEvaluator evaluator, double eta, double discount,
                   std::uint64_t seed);

  std::size_t select() override;
  const Distribution& distribution() const override { return current_; }
  void observe(std::size_t action, const RequestVector& request) override;
  std::size_t evaluations() const override { return evaluations_; }

  const PolicyState& state() const { return state_; }

 private:
  PolicyState state_;
  CostEvaluator evaluator_;
  Rng rng_;
  Distribution current_;
  std::vector<double> costs_;
  std::size_t evaluations_ = 0;
};

/// Per-(action, slot) cost store for the budget-limited policy. Each entry is
/// missing, a placeholder draw, or an evaluated cost; the last two never
/// overlap. Entries not yet evaluated also sit in a pool for uniform sampling.
class CostCache {
 public:
  enum class Entry : std::uint8_t { kMissing, kPlaceholder, kEvaluated };

  explicit CostCache(std::size_t actions);

  std::size_t actions() const { return actions_; }
  std::size_t slots() const { return slots_; }

  /// Registers a new slot with every action missing.
  void add_slot();

  Entry entry(std::size_t action, std::size_t slot) const { return state_[key(action, slot)]; }
  double value(std::size_t action, std::size_t slot) const { return value_[key(action, slot)]; }

  void set_placeholder(std::size_t action, std::size_t slot, double value);
  void set_evaluated(std::size_t action, std::size_t slot, double cost);

  double evaluated_sum(std::size_t action) const { return evaluated_sum_[action]; }
  double placeholder_sum(std::size_t action) const { return placeholder_sum_[action]; }
  std::size_t unevaluated(std::size_t action) const { return unevaluated_[action]; }

  /// Sum over evaluated entries of one action, recomputed from scratch.
  double recompute_evaluated_sum(std::size_t action) const;
  std::size_t evaluated_count() const { return evaluated_count_; }
  std::size_t pool_size() const { return pool_.size(); }

  /// Removes and returns a uniformly chosen unevaluated (action, slot).
  std::pair<std::size_t, std::size_t> take_unevaluated(Rng& rng);

 private:
  std::size_t key(std::size_t action, std::size_t slot) const { return slot * actions_ + action; }
  void drop_from_pool(std::size_t key);

  static constexpr std::uint32_t kNotPooled = 0xffffffffu;

  std::size_t actions_;
  std::size_t slots_ = 0;
  std::vector<Entry> state_;
  std::vector<double> value_;
  std::vector<std::uint32_t> pool_;
  std::vector<std::uint32_t> pool_pos_;
  std::vector<double> evaluated_sum_;
  std::vector<double> placeholder_sum_;
  std::vector<std::size_t> unevaluated_;
  std::size_t evaluated_count_ = 0;
};

/// Budget-limited policy: at most `budget` cost evaluations per slot. The
/// played action's cost is always evaluated, plus budget - 1 uniformly drawn
/// unevaluated (action, past slot) combinations. Unevaluated combinations
/// contribute a uniform draw from [0, 3 * theta].
///
/// By default each placeholder is drawn once and kept until the combination
/// is evaluated. With redraw_placeholders every placeholder is redrawn at
/// every slot, which costs O(|A| * t) per slot.
class ExploringExpWeightsPolicy final : public Policy {
 public:
  ExploringExpWeightsPolicy(std::size_t space_size, CostEvaluator evaluator, double eta, double theta,
                            std::size_t budget, bool redraw_placeholders, std::uint64_t seed);

  std::size_t select() override;
  const Distribution& distribution() const override { return current_; }
  void observe(std::size_t action, const RequestVector& request) override;
  std::size_t evaluations() const override { return evaluations_; }

  const CostCache& cache() const { return cache_; }
  const std::vector<double>& log_weights() const { return log_weights_; }

 private:
  void evaluate(std::size_t action, std::size_t slot);

  CostEvaluator evaluator_;
  double eta_;
  double placeholder_max_;
  std::size_t budget_;
  bool redraw_;
  Rng select_rng_;
  Rng explore_rng_;
  CostCache cache_;
  std::vector<RequestVector> history_;
  std::size_t filled_slots_ = 0;
  std::vector<double> log_weights_;
  Distribution current_;
  std::size_t evaluations_ = 0;
};

}  // namespace resv
