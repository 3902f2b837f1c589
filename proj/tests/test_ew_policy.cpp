#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "resv/ew_policy.hpp"
#include "resv/harness.hpp"

using namespace resv;

namespace {

double mass(const Distribution& d) { return std::accumulate(d.probs.begin(), d.probs.end(), 0.0); }

// Costs that depend only on the action: action 0 is free, action k costs k.
CostEvaluator index_cost() {
  return [](std::size_t a, const RequestVector&) { return static_cast<double>(a); };
}

}  // namespace

TEST_CASE("ew_init") {
  const PolicyState s = ew_init(125, 0.1);
  const Distribution d = distribution(s);
  for (double p : d.probs) CHECK(p == doctest::Approx(0.008));
  CHECK(s.t == 1);
  CHECK(distribution(ew_init(1, 0.1)).probs == std::vector<double>{1.0});
  CHECK(default_eta(125, 10000) == doctest::Approx(0.021973424).epsilon(1e-8));
  CHECK_THROWS_AS(ew_init(3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ew_init(3, 0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ew_init(3, 0.1, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(ew_init(0, 0.1), std::invalid_argument);
}

TEST_CASE("ew_update closed forms") {
  SUBCASE("constant costs keep the uniform distribution") {
    PolicyState s = ew_init(5, 0.3);
    ew_update(s, std::vector<double>(5, 7.0));
    for (double p : distribution(s).probs) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(s.t == 2);
  }

  SUBCASE("two actions, one unit of cost") {
    PolicyState s = ew_init(2, 1.0);
    ew_update(s, std::vector<double>{0.0, 1.0});
    const double z = 1.0 + std::exp(-1.0);
    const Distribution d = distribution(s);
    CHECK(d.probs[0] == doctest::Approx(1.0 / z).epsilon(1e-12));
    CHECK(d.probs[1] == doctest::Approx(std::exp(-1.0) / z).epsilon(1e-12));
    CHECK(d.probs[0] == doctest::Approx(0.7311).epsilon(1e-4));
    CHECK(d.probs[1] == doctest::Approx(0.2689).epsilon(1e-4));
  }

  SUBCASE("discounted unroll") {
    PolicyState s = ew_init(2, 1.0, 0.5);
    ew_update(s, std::vector<double>{0.0, 2.0});
    ew_update(s, std::vector<double>{0.0, 0.0});
    // Direct sum: W^2 * 2 + W * 0 = 0.5.
    CHECK(s.accumulated[1] == doctest::Approx(0.5));
    const Distribution d = distribution(s);
    CHECK(d.probs[1] / d.probs[0] == doctest::Approx(std::exp(-0.5)));
  }

  SUBCASE("bad input") {
    PolicyState s = ew_init(3, 1.0);
    CHECK_THROWS_AS(ew_update(s, std::vector<double>{1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(ew_update(s, std::vector<double>{1.0, NAN, 2.0}), std::invalid_argument);
  }
}

TEST_CASE("property: recursion matches the direct weighted sum") {
  std::mt19937 gen(31);
  std::uniform_real_distribution<double> cost(0.0, 112.5);
  for (double discount : {1.0, 0.5, 0.9}) {
    PolicyState s = ew_init(6, 0.05, discount);
    std::vector<std::vector<double>> history;
    for (int t = 0; t < 100; ++t) {
      std::vector<double> c(6);
      for (double& x : c) x = cost(gen);
      history.push_back(c);
      ew_update(s, c);
    }
    const std::size_t steps = history.size();
    for (std::size_t a = 0; a < 6; ++a) {
      double direct = 0.0;
      for (std::size_t k = 0; k < steps; ++k) direct += std::pow(discount, double(steps - k)) * history[k][a];
      CHECK(std::abs(s.log_weights[a] - (-0.05 * direct)) <= 1e-9);
    }
  }
}

TEST_CASE("property: shifting every cost leaves the distribution unchanged") {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> cost(0.0, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> c(10);
    for (double& x : c) x = cost(gen);
    std::vector<double> shifted = c;
    const double shift = cost(gen);
    for (double& x : shifted) x += shift;
    PolicyState a = ew_init(10, 0.02);
    PolicyState b = ew_init(10, 0.02);
    ew_update(a, c);
    ew_update(b, shifted);
    const Distribution da = distribution(a);
    const Distribution db = distribution(b);
    for (std::size_t k = 0; k < 10; ++k) CHECK(std::abs(da.probs[k] - db.probs[k]) <= 1e-12);
  }
}

TEST_CASE("monotone separation on two actions") {
  PolicyState s = ew_init(2, 0.1);
  double previous = distribution(s).probs[0];
  for (int t = 0; t < 300; ++t) {
    ew_update(s, std::vector<double>{0.0, 0.3});
    const double p = distribution(s).probs[0];
    CHECK(p > previous);
    previous = p;
  }
}

TEST_CASE("softmax is stable for extreme log weights") {
  const Distribution uniform = softmax(std::vector<double>(4, -1e6));
  for (double p : uniform.probs) CHECK(p == 0.25);
  const Distribution spread = softmax(std::vector<double>{0.0, -1e300, -800.0});
  CHECK(spread.probs[0] == 1.0);
  CHECK(spread.probs[1] == 0.0);
  CHECK(mass(spread) == 1.0);
}

TEST_CASE("sampling") {
  SUBCASE("degenerate distribution") {
    Rng rng = make_rng(1, Stream::kSelection);
    const Distribution d{{0.0, 0.0, 1.0, 0.0}};
    for (int i = 0; i < 1000; ++i) CHECK(sample(d, rng) == 2);
  }

  SUBCASE("fixed seed gives a fixed sequence") {
    const Distribution d = softmax(std::vector<double>{0.1, -0.4, 0.3, 0.0});
    Rng r1 = make_rng(42, Stream::kSelection);
    Rng r2 = make_rng(42, Stream::kSelection);
    for (int i = 0; i < 100; ++i) CHECK(sample(d, r1) == sample(d, r2));
  }

  SUBCASE("uniform frequencies stay within 5 sigma") {
    const std::size_t k = 125;
    const int draws = 1'000'000;
    const Distribution d{std::vector<double>(k, 1.0 / k)};
    Rng rng = make_rng(2024, Stream::kSelection);
    std::vector<int> counts(k, 0);
    for (int i = 0; i < draws; ++i) ++counts[sample(d, rng)];
    const double p = 1.0 / k;
    const double sigma = std::sqrt(draws * p * (1 - p));
    for (int c : counts) CHECK(std::abs(c - draws * p) <= 5 * sigma);
  }
}

TEST_CASE("full-information policy concentrates on the best fixed action") {
  ExpWeightsPolicy policy(4, index_cost(), 0.05, 1.0, 3);
  const RequestVector b{{1}};
  // t = 1 samples from the uniform distribution.
  policy.select();
  for (double p : policy.distribution().probs) CHECK(p == 0.25);
  double previous = 0.0;
  for (int t = 0; t < 400; ++t) {
    const std::size_t a = policy.select();
    CHECK(policy.distribution().probs[0] >= previous);
    previous = policy.distribution().probs[0];
    policy.observe(a, b);
  }
  CHECK(previous > 0.999);
  CHECK(policy.evaluations() == 4 * 400);
}

TEST_CASE("exploring policy") {
  const Instance inst = reference_instance();
  const std::size_t actions = inst.space.cardinality();
  const CostEvaluator exact = make_exact_evaluator(inst.space, inst.model);
  Rng scenario = make_rng(8, Stream::kScenario);
  const auto requests = generate_requests(Scenario{}, inst.requests.box(), 150, scenario);
  const double eta = default_eta(actions, 10000);

  SUBCASE("a budget covering every new combination reproduces the full policy") {
    ExpWeightsPolicy full(actions, exact, eta, 1.0, 17);
    ExploringExpWeightsPolicy explore(actions, exact, eta, 37.5, actions, false, 17);
    for (const auto& b : requests) {
      const std::size_t a1 = full.select();
      const std::size_t a2 = explore.select();
      CHECK(a1 == a2);
      for (std::size_t k = 0; k < actions; ++k) {
        CHECK(full.distribution().probs[k] == explore.distribution().probs[k]);
      }
      full.observe(a1, b);
      explore.observe(a2, b);
    }
    CHECK(explore.cache().pool_size() == 0);
  }

  SUBCASE("zero theta behaves like the full policy") {
    const CostModel zero = CostModel::zero(3);
    const CostEvaluator free = make_exact_evaluator(inst.space, zero);
    ExpWeightsPolicy full(actions, free, eta, 1.0, 4);
    ExploringExpWeightsPolicy explore(actions, free, eta, 0.0, 3, false, 4);
    for (const auto& b : requests) {
      const std::size_t a1 = full.select();
      CHECK(a1 == explore.select());
      full.observe(a1, b);
      explore.observe(a1, b);
    }
  }

  SUBCASE("budget and cache bookkeeping") {
    const std::size_t budget = 10;
    ExploringExpWeightsPolicy explore(actions, exact, eta, 37.5, budget, false, 9);
    for (std::size_t t = 0; t < requests.size(); ++t) {
      const std::size_t before = explore.evaluations();
      const std::size_t a = explore.select();
      CHECK(std::abs(mass(explore.distribution()) - 1.0) <= 1e-9);
      explore.observe(a, requests[t]);
      CHECK(explore.evaluations() - before == budget);
      CHECK(explore.cache().entry(a, t) == CostCache::Entry::kEvaluated);
    }
    const CostCache& cache = explore.cache();
    CHECK(cache.evaluated_count() == budget * requests.size());
    for (std::size_t a = 0; a < actions; ++a) {
      CHECK(cache.evaluated_sum(a) == doctest::Approx(cache.recompute_evaluated_sum(a)));
      for (std::size_t s = 0; s + 1 < cache.slots(); ++s) {
        const auto e = cache.entry(a, s);
        CHECK(e != CostCache::Entry::kMissing);
        if (e == CostCache::Entry::kEvaluated) {
          CHECK(cache.value(a, s) == doctest::Approx(exact(a, requests[s])));
        } else {
          CHECK(cache.value(a, s) >= 0.0);
          CHECK(cache.value(a, s) <= 112.5);
        }
      }
    }
  }

  SUBCASE("budget larger than the remaining pool evaluates everything") {
    ExploringExpWeightsPolicy explore(actions, exact, eta, 37.5, 1000, false, 2);
    const std::size_t a = explore.select();
    explore.observe(a, requests[0]);
    CHECK(explore.evaluations() == actions);
    CHECK(explore.cache().pool_size() == 0);
  }

  SUBCASE("literal redraw mode keeps the contract") {
    ExploringExpWeightsPolicy explore(actions, exact, eta, 37.5, 5, true, 2);
    for (std::size_t t = 0; t < 30; ++t) {
      const std::size_t a = explore.select();
      CHECK(std::abs(mass(explore.distribution()) - 1.0) <= 1e-9);
      explore.observe(a, requests[t]);
    }
    CHECK(explore.evaluations() == 5 * 30);
    CHECK(explore.cache().evaluated_count() == 5 * 30);
  }

  SUBCASE("same seed, same run") {
    ExploringExpWeightsPolicy p1(actions, exact, eta, 37.5, 5, false, 77);
    ExploringExpWeightsPolicy p2(actions, exact, eta, 37.5, 5, false, 77);
    for (std::size_t t = 0; t < 60; ++t) {
      const std::size_t a = p1.select();
      CHECK(a == p2.select());
      p1.observe(a, requests[t]);
      p2.observe(a, requests[t]);
    }
    CHECK(p1.log_weights() == p2.log_weights());
  }

  SUBCASE("invalid parameters") {
    CHECK_THROWS_AS(ExploringExpWeightsPolicy(actions, exact, eta, 37.5, 0, false, 1), std::invalid_argument);
    CHECK_THROWS_AS(ExploringExpWeightsPolicy(actions, exact, -1.0, 37.5, 5, false, 1), std::invalid_argument);
  }
}

TEST_CASE("cost cache audit after 1000 slots") {
  CostCache cache(7);
  Rng rng = make_rng(3, Stream::kExploration);
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> cost(0.0, 20.0);
  for (int t = 0; t < 1000; ++t) {
    cache.add_slot();
    for (std::size_t a = 0; a < 7; ++a) {
      if (gen() % 2 == 0) cache.set_placeholder(a, cache.slots() - 1, cost(gen));
    }
    for (int k = 0; k < 4 && cache.pool_size() > 0; ++k) {
      const auto [a, s] = cache.take_unevaluated(rng);
      cache.set_evaluated(a, s, cost(gen));
    }
  }
  for (std::size_t a = 0; a < 7; ++a) {
    CHECK(cache.evaluated_sum(a) == doctest::Approx(cache.recompute_evaluated_sum(a)).epsilon(1e-12));
    double placeholders = 0.0;
    for (std::size_t s = 0; s < cache.slots(); ++s) {
      if (cache.entry(a, s) == CostCache::Entry::kPlaceholder) placeholders += cache.value(a, s);
    }
    CHECK(cache.placeholder_sum(a) == doctest::Approx(placeholders).epsilon(1e-9));
  }
  CHECK(cache.evaluated_count() == 4000);
  CHECK(cache.pool_size() == 7 * 1000 - 4000);
  for (std::size_t s = 0; s < cache.slots(); ++s) {
    if (cache.entry(0, s) == CostCache::Entry::kEvaluated) {
      CHECK_THROWS_AS(cache.set_evaluated(0, s, 1.0), std::logic_error);
      CHECK_THROWS_AS(cache.set_placeholder(0, s, 1.0), std::logic_error);
      break;
    }
  }
}
