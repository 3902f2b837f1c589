#include "resv/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "resv/model.hpp"

namespace resv {

CostEvaluator make_exact_evaluator(const ActionSpace& space, const CostModel& model) {
  std::vector<std::vector<int>> actions;
  actions.reserve(space.cardinality());
  for (std::uint64_t i = 0; i < space.cardinality(); ++i) actions.push_back(space.decode(i));
  return [actions = std::move(actions), model](std::size_t action, const RequestVector& request) {
    return total_cost(actions.at(action), request.values, model).total;
  };
}

Distribution softmax(std::span<const double> scores) {
  Distribution out{std::vector<double>(scores.size())};
  if (scores.empty()) return out;
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    out.probs[k] = std::exp(scores[k] - top);
    sum += out.probs[k];
  }
  for (double& p : out.probs) p /= sum;
  return out;
}

std::size_t sample(const Distribution& dist, Rng& rng) {
  if (dist.probs.empty()) throw std::invalid_argument("cannot sample from an empty distribution");
  const double u = uniform01(rng);
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < dist.probs.size(); ++k) {
    if (dist.probs[k] <= 0.0) continue;
    cumulative += dist.probs[k];
    last_positive = k;
    if (u < cumulative) return k;
  }
  // Rounding left the total slightly below u.
  return last_positive;
}

double l2_distance(const Distribution& p, const Distribution& q) {
  if (p.probs.size() != q.probs.size()) throw std::invalid_argument("distributions differ in size");
  double sum = 0.0;
  for (std::size_t k = 0; k < p.probs.size(); ++k) {
    const double d = p.probs[k] - q.probs[k];
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace resv
