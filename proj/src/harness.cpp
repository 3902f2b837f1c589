#include "resv/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "resv/ew_policy.hpp"
#include "resv/rl_policy.hpp"

namespace resv {

Instance reference_instance() {
  const Polynomial half_square({0.0, 0.0, 0.5});
  const Polynomial near({0.0, 0.0, 0.2});
  const Polynomial far({0.0, 0.0, 0.3});
  std::vector<std::vector<Polynomial>> transfer = {
      {Polynomial{}, near, far},
      {near, Polynomial{}, near},
      {far, near, Polynomial{}},
  };
  return Instance{
      ActionSpace({1, 1, 1}, {5, 5, 5}),
      RequestBounds{{1, 1, 1}, std::vector<int>{5, 5, 5}},
      CostModel(std::vector<Polynomial>(3, half_square), std::vector<Polynomial>(3, half_square),
                std::move(transfer)),
  };
}

std::vector<RequestVector> generate_requests(const Scenario& scenario, const IntegerBox& request_box,
                                             std::uint64_t horizon, Rng& rng) {
  std::vector<RequestVector> out;
  out.reserve(horizon);
  switch (scenario.kind) {
    case ScenarioKind::kIidUniform: {
      for (std::uint64_t t = 0; t < horizon; ++t) {
        RequestVector b{std::vector<int>(request_box.dims())};
        for (std::size_t n = 0; n < request_box.dims(); ++n) {
          const auto width = static_cast<std::uint64_t>(request_box.hi()[n] - request_box.lo()[n]) + 1;
          b.values[n] = request_box.lo()[n] + static_cast<int>(uniform_index(rng, width));
        }
        out.push_back(std::move(b));
      }
      break;
    }
    case ScenarioKind::kIidCategorical: {
      if (scenario.weights.size() != request_box.cardinality()) {
        throw std::invalid_argument("categorical weights must cover every request vector");
      }
      std::vector<double> cdf(scenario.weights.size());
      double total = 0.0;
      for (std::size_t k = 0; k < cdf.size(); ++k) {
        if (!(scenario.weights[k] >= 0.0) || !std::isfinite(scenario.weights[k])) {
          throw std::invalid_argument("categorical weights must be finite and nonnegative");
        }
        total += scenario.weights[k];
        cdf[k] = total;
      }
      if (!(total > 0.0)) throw std::invalid_argument("categorical weights sum to zero");
      for (std::uint64_t t = 0; t < horizon; ++t) {
        const double u = uniform01(rng) * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) --it;
        while (scenario.weights[static_cast<std::size_t>(it - cdf.begin())] == 0.0) --it;
        out.push_back(RequestVector{request_box.decode(static_cast<std::uint64_t>(it - cdf.begin()))});
      }
      break;
    }
    case ScenarioKind::kPiecewiseConstant: {
      if (scenario.period == 0) throw std::invalid_argument("piecewise-constant period must be positive");
      for (const auto& v : scenario.block_vectors) {
        if (!request_box.contains(v)) throw std::invalid_argument("block vector outside the request bounds");
      }
      RequestVector current;
      for (std::uint64_t t = 0; t < horizon; ++t) {
        if (t % scenario.period == 0) {
          const std::uint64_t block = t / scenario.period;
          if (scenario.block_vectors.empty()) {
            current.values = request_box.decode(uniform_index(rng, request_box.cardinality()));
          } else {
            current.values = scenario.block_vectors[block % scenario.block_vectors.size()];
          }
        }
        out.push_back(current);
      }
      break;
    }
  }
  return out;
}

std::uint64_t sequence_hash(std::span<const RequestVector> requests) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t word) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (word >> (8 * byte)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  mix(requests.size());
  for (const auto& r : requests) {
    mix(r.values.size());
    for (int v : r.values) mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
  }
  return h;
}

CostTable::CostTable(ActionSpace space, CostModel model) : space_(std::move(space)), model_(std::move(model)) {
  actions_.reserve(space_.cardinality());
  for (std::uint64_t i = 0; i < space_.cardinality(); ++i) actions_.push_back(space_.decode(i));
}

std::shared_ptr<const std::vector<CostBreakdown>> CostTable::column(const RequestVector& request) const {
  {
    std::shared_lock lock(mutex_);
    auto it = columns_.find(request.values);
    if (it != columns_.end()) return it->second;
  }
  auto fresh = std::make_shared<std::vector<CostBreakdown>>();
  fresh->reserve(actions_.size());
  for (const auto& a : actions_) fresh->push_back(total_cost(a, request.values, model_));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = columns_.emplace(request.values, std::move(fresh));
  return it->second;
}

void CostTable::precompute(const IntegerBox& request_box) const {
  for (std::uint64_t j = 0; j < request_box.cardinality(); ++j) column(RequestVector{request_box.decode(j)});
}

std::size_t CostTable::columns() const {
  std::shared_lock lock(mutex_);
  return columns_.size();
}

RegretLedger::RegretLedger(std::size_t actions) : cumulative_(actions, 0.0) {}

void RegretLedger::record(std::span<const CostBreakdown> column, double incurred) {
  if (column.size() != cumulative_.size()) throw std::invalid_argument("cost column size differs from |A|");
  for (std::size_t a = 0; a < column.size(); ++a) cumulative_[a] += column[a].total;
  incurred_ += incurred;
  regret_curve_.push_back(regret());
}

double RegretLedger::regret() const { return incurred_ - hindsight_best(*this).second; }

std::pair<std::size_t, double> hindsight_best(const RegretLedger& ledger) {
  const auto& cum = ledger.cumulative();
  if (cum.empty()) return {0, 0.0};
  const auto it = std::min_element(cum.begin(), cum.end());
  return {static_cast<std::size_t>(it - cum.begin()), *it};
}

double regret_bound(std::uint64_t horizon, double theta, std::uint64_t space_size, double delta) {
  if (horizon == 0) throw std::invalid_argument("horizon must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (space_size == 0) throw std::invalid_argument("action space is empty");
  if (!(theta >= 0.0)) throw std::invalid_argument("theta must be nonnegative");
  const double t = static_cast<double>(horizon);
  const double log_a = std::log(static_cast<double>(space_size));
  return (9.0 * theta * theta / 8.0 + 1.0) * std::sqrt(t * log_a) +
         3.0 * theta * std::sqrt(0.5 * std::log(1.0 / delta) * t);
}

std::optional<std::uint64_t> convergence_step(std::span<const double> distances, double threshold,
                                              std::size_t window) {
  if (window == 0) throw std::invalid_argument("window must be positive");
  std::size_t run = 0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    run = distances[i] < threshold ? run + 1 : 0;
    if (run == window) return i + 2 - window;
  }
  return std::nullopt;
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kEwFull:
      return "ew_full";
    case PolicyKind::kEwDiscounted:
      return "ew_discounted";
    case PolicyKind::kEwExplore:
      return "ew_explore";
    case PolicyKind::kRlBandit:
      return "rl_bandit";
  }
  return "unknown";
}

std::optional<PolicyKind> policy_kind_from_string(const std::string& text) {
  for (PolicyKind k : {PolicyKind::kEwFull, PolicyKind::kEwDiscounted, PolicyKind::kEwExplore,
                       PolicyKind::kRlBandit}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string PolicySpec::label() const {
  if (!name.empty()) return name;
  if (kind == PolicyKind::kEwExplore) return "ew_explore_k" + std::to_string(budget);
  return to_string(kind);
}

double resolved_eta(const PolicySpec& spec, const Instance& instance, std::uint64_t horizon) {
  if (spec.eta) return *spec.eta;
  return default_eta(instance.space.cardinality(), std::max<std::uint64_t>(horizon, 1));
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const Instance& instance, std::uint64_t horizon,
                                    double theta, std::uint64_t seed) {
  const std::size_t actions = instance.space.cardinality();
  CostEvaluator evaluator = make_exact_evaluator(instance.space, instance.model);
  const double eta = resolved_eta(spec, instance, horizon);
  switch (spec.kind) {
    case PolicyKind::kEwFull:
      return std::make_unique<ExpWeightsPolicy>(actions, std::move(evaluator), eta, 1.0, seed);
    case PolicyKind::kEwDiscounted:
      return std::make_unique<ExpWeightsPolicy>(actions, std::move(evaluator), eta, spec.discount, seed);
    case PolicyKind::kEwExplore:
      return std::make_unique<ExploringExpWeightsPolicy>(actions, std::move(evaluator), eta, theta, spec.budget,
                                                         spec.placeholder_redraw, seed);
    case PolicyKind::kRlBandit:
      return std::make_unique<BanditPolicy>(actions, std::move(evaluator), spec.beta, spec.tau, spec.q_init,
                                            seed);
  }
  throw std::invalid_argument("unknown policy kind");
}

RunRecord run_experiment(const RunSpec& spec, const CostTable* table) {
  const Instance& inst = spec.instance;
  const IntegerBox request_box = inst.requests.box();
  if (request_box.dims() != inst.space.dims() || inst.model.n_servers() != inst.space.dims()) {
    throw std::invalid_argument("instance dimensions disagree");
  }
  const double theta = spec.theta ? *spec.theta : theta_bound(inst.space, inst.requests, inst.model);

  std::unique_ptr<CostTable> own_table;
  if (table == nullptr) {
    own_table = std::make_unique<CostTable>(inst.space, inst.model);
    table = own_table.get();
  }

  Rng scenario_rng = make_rng(spec.seed, Stream::kScenario);
  const std::vector<RequestVector> requests = generate_requests(spec.scenario, request_box, spec.horizon,
                                                                scenario_rng);

  RunRecord record;
  record.policy = spec.policy.label();
  record.seed = spec.seed;
  record.horizon = spec.horizon;
  record.eta = resolved_eta(spec.policy, inst, spec.horizon);
  record.theta = theta;
  record.scenario_hash = sequence_hash(requests);
  record.rows.reserve(spec.horizon);

  std::unique_ptr<Policy> policy = make_policy(spec.policy, inst, spec.horizon, theta, spec.seed);
  RegretLedger ledger(inst.space.cardinality());
  Distribution previous;

  using Clock = std::chrono::steady_clock;
  Clock::duration policy_time{};
  Clock::duration ledger_time{};

  for (std::uint64_t t = 1; t <= spec.horizon; ++t) {
    const RequestVector& request = requests[t - 1];

    auto start = Clock::now();
    const std::size_t action = policy->select();
    policy_time += Clock::now() - start;

    const Distribution& current = policy->distribution();
    const double mass = std::accumulate(current.probs.begin(), current.probs.end(), 0.0);
    record.max_normalization_error = std::max(record.max_normalization_error, std::abs(mass - 1.0));
    const double moved = t == 1 ? 0.0 : l2_distance(current, previous);
    previous = current;

    start = Clock::now();
    const auto column = table->column(request);
    const CostBreakdown paid = (*column)[action];
    ledger.record(*column, paid.total);
    ledger_time += Clock::now() - start;

    start = Clock::now();
    policy->observe(action, request);
    policy_time += Clock::now() - start;

    record.rows.push_back(StepRow{t, action, inst.space.decode(action), request.values, paid, ledger.regret(),
                                  moved});
  }

  record.final_cumulative = ledger.cumulative();
  std::tie(record.hindsight_action, record.hindsight_cost) = hindsight_best(ledger);
  record.evaluations = policy->evaluations();
  record.policy_seconds = std::chrono::duration<double>(policy_time).count();
  record.ledger_seconds = std::chrono::duration<double>(ledger_time).count();
  return record;
}

}  // namespace resv
