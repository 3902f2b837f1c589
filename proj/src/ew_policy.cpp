#include "resv/ew_policy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace resv {

double default_eta(std::uint64_t space_size, std::uint64_t horizon) {
  if (space_size == 0 || horizon == 0) throw std::invalid_argument("eta needs |A| >= 1 and T >= 1");
  return std::sqrt(std::log(static_cast<double>(space_size)) / static_cast<double>(horizon));
}

PolicyState ew_init(std::size_t space_size, double eta, double discount) {
  if (space_size == 0) throw std::invalid_argument("action space is empty");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be positive");
  if (!(discount > 0.0 && discount <= 1.0)) throw std::invalid_argument("discount must lie in (0, 1]");
  PolicyState state;
  state.log_weights.assign(space_size, 0.0);
  state.accumulated.assign(space_size, 0.0);
  state.eta = eta;
  state.discount = discount;
  state.t = 1;
  return state;
}

void ew_update(PolicyState& state, std::span<const double> costs) {
  if (costs.size() != state.log_weights.size()) {
    throw std::invalid_argument("cost vector has " + std::to_string(costs.size()) + " entries, expected " +
                                std::to_string(state.log_weights.size()));
  }
  for (double c : costs) {
    if (std::isnan(c)) throw std::invalid_argument("cost vector contains NaN");
  }
  for (std::size_t a = 0; a < costs.size(); ++a) {
    state.accumulated[a] = state.discount * (state.accumulated[a] + costs[a]);
    state.log_weights[a] = -state.eta * state.accumulated[a];
  }
  ++state.t;
}

Distribution distribution(const PolicyState& state) { return softmax(state.log_weights); }

ExpWeightsPolicy::ExpWeightsPolicy(std::size_t space_size, CostEvaluator evaluator, double eta,
                                   double discount, std::uint64_t seed)
    : state_(ew_init(space_size, eta, discount)),
      evaluator_(std::move(evaluator)),
      rng_(make_rng(seed, Stream::kSelection)),
      current_(resv::distribution(state_)),
      costs_(space_size) {}

std::size_t ExpWeightsPolicy::select() {
  current_ = resv::distribution(state_);
  return sample(current_, rng_);
}

void ExpWeightsPolicy::observe(std::size_t /*action*/, const RequestVector& request) {
  for (std::size_t a = 0; a < costs_.size(); ++a) costs_[a] = evaluator_(a, request);
  evaluations_ += costs_.size();
  ew_update(state_, costs_);
}

CostCache::CostCache(std::size_t actions)
    : actions_(actions),
      evaluated_sum_(actions, 0.0),
      placeholder_sum_(actions, 0.0),
      unevaluated_(actions, 0) {
  if (actions == 0) throw std::invalid_argument("cost cache needs at least one action");
}

void CostCache::add_slot() {
  const std::size_t base = slots_ * actions_;
  if (base + actions_ >= kNotPooled) throw std::length_error("cost cache exceeds 2^32 entries");
  state_.resize(base + actions_, Entry::kMissing);
  value_.resize(base + actions_, 0.0);
  pool_pos_.resize(base + actions_);
  for (std::size_t a = 0; a < actions_; ++a) {
    pool_pos_[base + a] = static_cast<std::uint32_t>(pool_.size());
    pool_.push_back(static_cast<std::uint32_t>(base + a));
    ++unevaluated_[a];
  }
  ++slots_;
}

void CostCache::set_placeholder(std::size_t action, std::size_t slot, double value) {
  const std::size_t k = key(action, slot);
  if (state_[k] == Entry::kEvaluated) throw std::logic_error("placeholder for an evaluated combination");
  if (state_[k] == Entry::kPlaceholder) placeholder_sum_[action] -= value_[k];
  state_[k] = Entry::kPlaceholder;
  value_[k] = value;
  placeholder_sum_[action] += value;
}

void CostCache::set_evaluated(std::size_t action, std::size_t slot, double cost) {
  const std::size_t k = key(action, slot);
  if (state_[k] == Entry::kEvaluated) throw std::logic_error("combination evaluated twice");
  if (state_[k] == Entry::kPlaceholder) placeholder_sum_[action] -= value_[k];
  state_[k] = Entry::kEvaluated;
  value_[k] = cost;
  evaluated_sum_[action] += cost;
  --unevaluated_[action];
  ++evaluated_count_;
  if (pool_pos_[k] != kNotPooled) drop_from_pool(k);
}

double CostCache::recompute_evaluated_sum(std::size_t action) const {
  double sum = 0.0;
  for (std::size_t s = 0; s < slots_; ++s) {
    if (entry(action, s) == Entry::kEvaluated) sum += value(action, s);
  }
  return sum;
}

void CostCache::drop_from_pool(std::size_t k) {
  const std::uint32_t pos = pool_pos_[k];
  const std::uint32_t moved = pool_.back();
  pool_[pos] = moved;
  pool_pos_[moved] = pos;
  pool_.pop_back();
  pool_pos_[k] = kNotPooled;
}

std::pair<std::size_t, std::size_t> CostCache::take_unevaluated(Rng& rng) {
  if (pool_.empty()) throw std::logic_error("no unevaluated combinations left");
  const std::uint32_t k = pool_[uniform_index(rng, pool_.size())];
  drop_from_pool(k);
  return {k % actions_, k / actions_};
}

ExploringExpWeightsPolicy::ExploringExpWeightsPolicy(std::size_t space_size, CostEvaluator evaluator,
                                                     double eta, double theta, std::size_t budget,
                                                     bool redraw_placeholders, std::uint64_t seed)
    : evaluator_(std::move(evaluator)),
      eta_(eta),
      placeholder_max_(3.0 * theta),
      budget_(budget),
      redraw_(redraw_placeholders),
      select_rng_(make_rng(seed, Stream::kSelection)),
      explore_rng_(make_rng(seed, Stream::kExploration)),
      cache_(space_size),
      log_weights_(space_size, 0.0),
      current_(softmax(log_weights_)) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be positive");
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw std::invalid_argument("theta must be nonnegative");
  if (budget == 0) throw std::invalid_argument("evaluation budget K must be at least 1");
}

std::size_t ExploringExpWeightsPolicy::select() {
  const std::size_t actions = cache_.actions();
  if (redraw_) {
    for (std::size_t a = 0; a < actions; ++a) {
      // Combinations of the current slot do not exist yet; every other
      // unevaluated combination gets a fresh draw.
      double drawn = 0.0;
      for (std::size_t s = 0; s < cache_.slots(); ++s) {
        if (cache_.entry(a, s) != CostCache::Entry::kEvaluated) drawn += placeholder_max_ * uniform01(explore_rng_);
      }
      log_weights_[a] = -eta_ * (cache_.evaluated_sum(a) + drawn);
    }
  } else {
    for (; filled_slots_ < cache_.slots(); ++filled_slots_) {
      for (std::size_t a = 0; a < actions; ++a) {
        if (cache_.entry(a, filled_slots_) == CostCache::Entry::kMissing) {
          cache_.set_placeholder(a, filled_slots_, placeholder_max_ * uniform01(explore_rng_));
        }
      }
    }
    for (std::size_t a = 0; a < actions; ++a) {
      log_weights_[a] = -eta_ * (cache_.evaluated_sum(a) + cache_.placeholder_sum(a));
    }
  }
  current_ = softmax(log_weights_);
  return sample(current_, select_rng_);
}

void ExploringExpWeightsPolicy::evaluate(std::size_t action, std::size_t slot) {
  cache_.set_evaluated(action, slot, evaluator_(action, history_[slot]));
  ++evaluations_;
}

void ExploringExpWeightsPolicy::observe(std::size_t action, const RequestVector& request) {
  if (action >= cache_.actions()) throw std::out_of_range("action index outside the action space");
  history_.push_back(request);
  cache_.add_slot();
  const std::size_t slot = cache_.slots() - 1;
  evaluate(action, slot);
  for (std::size_t k = 1; k < budget_ && cache_.pool_size() > 0; ++k) {
    const auto [a, s] = cache_.take_unevaluated(explore_rng_);
    evaluate(a, s);
  }
}

}  // namespace resv
