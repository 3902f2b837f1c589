#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "resv/model.hpp"
#include "resv/random.hpp"

namespace resv {

/// Probability vector over action indices.
struct Distribution {
  std::vector<double> probs;
};

/// Total cost C(a, b) of action index a under request b.
using CostEvaluator = std::function<double(std::size_t action, const RequestVector& request)>;

/// Evaluator that solves the transfer problem exactly on every call.
CostEvaluator make_exact_evaluator(const ActionSpace& space, const CostModel& model);

/// Softmax of `scores` with max-subtraction. Entries far below the maximum
/// may underflow to exactly zero.
Distribution softmax(std::span<const double> scores);

/// Inverse-CDF draw over ascending index.
std::size_t sample(const Distribution& dist, Rng& rng);

/// Euclidean distance between two distributions of equal size.
double l2_distance(const Distribution& p, const Distribution& q);

/// Online reservation policy driven by the slot loop: select() picks the
/// reservation for the current slot, observe() reveals the request.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::size_t select() = 0;
  /// Distribution used by the most recent select().
  virtual const Distribution& distribution() const = 0;
  virtual void observe(std::size_t action, const RequestVector& request) = 0;
  /// Number of C(a, b) evaluations performed so far.
  virtual std::size_t evaluations() const = 0;
};

}  // namespace resv
