#include "resv/rl_policy.hpp"

#include <cmath>
#include <stdexcept>

namespace resv {

BanditState rl_init(std::size_t space_size, double beta, double tau, double q_init) {
  if (space_size == 0) throw std::invalid_argument("action space is empty");
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0, 1]");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
  if (!std::isfinite(q_init)) throw std::invalid_argument("q_init must be finite");
  return BanditState{std::vector<double>(space_size, q_init), beta, tau};
}

Distribution rl_distribution(const BanditState& state) {
  std::vector<double> scaled(state.q_values.size());
  for (std::size_t a = 0; a < scaled.size(); ++a) scaled[a] = state.q_values[a] / state.tau;
  return softmax(scaled);
}

std::size_t rl_select(const BanditState& state, Rng& rng) { return sample(rl_distribution(state), rng); }

void rl_update(BanditState& state, std::size_t action, double reward) {
  if (std::isnan(reward)) throw std::invalid_argument("reward is NaN");
  if (action >= state.q_values.size()) throw std::out_of_range("action index outside the action space");
  double& q = state.q_values[action];
  q += state.beta * (reward - q);
}

BanditPolicy::BanditPolicy(std::size_t space_size, CostEvaluator evaluator, double beta, double tau,
                           double q_init, std::uint64_t seed)
    : state_(rl_init(space_size, beta, tau, q_init)),
      evaluator_(std::move(evaluator)),
      rng_(make_rng(seed, Stream::kSelection)),
      current_(rl_distribution(state_)) {}

std::size_t BanditPolicy::select() {
  current_ = rl_distribution(state_);
  return sample(current_, rng_);
}

void BanditPolicy::observe(std::size_t action, const RequestVector& request) {
  const double cost = evaluator_(action, request);
  ++evaluations_;
  rl_update(state_, action, -cost);
}

}  // namespace resv
