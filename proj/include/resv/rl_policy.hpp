#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "resv/policy.hpp"

namespace resv {

// n-armed bandit with a single state: incremental value estimates and
// softmax (Boltzmann) selection. Rewards are negated costs, so estimates
// stay at or below zero once the initial value is zero.
struct BanditState {
  std::vector<double> q_values;
  double beta = 0.1;
  double tau = 0.005;
};

BanditState rl_init(std::size_t space_size, double beta, double tau, double q_init = 0.0);

/// softmax(q / tau), max-subtracted.
Distribution rl_distribution(const BanditState& state);

std::size_t rl_select(const BanditState& state, Rng& rng);

/// Q(a) <- Q(a) + beta * (reward - Q(a)). Throws on NaN reward.
void rl_update(BanditState& state, std::size_t action, double reward);

class BanditPolicy final : public Policy {
 public:
  BanditPolicy(std::size_t space_size, CostEvaluator evaluator, double beta, double tau, double q_init,
               std::uint64_t seed);

  std::size_t select() override;
  const Distribution& distribution() const override { return current_; }
  void observe(std::size_t action, const RequestVector& request) override;
  std::size_t evaluations() const override { return evaluations_; }

  const BanditState& state() const { return state_; }

 private:
  BanditState state_;
  CostEvaluator evaluator_;
  Rng rng_;
  Distribution current_;
  std::size_t evaluations_ = 0;
};

}  // namespace resv
