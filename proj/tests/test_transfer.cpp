#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "resv/harness.hpp"
#include "resv/transfer.hpp"

using namespace resv;

namespace {

struct RandomInstance {
  std::vector<int> a;
  std::vector<int> b;
  CostModel model;
};

// Coefficients on a 0.1 grid so that exact ties between plans are common.
Polynomial random_polynomial(std::mt19937& gen, bool zero_constant) {
  std::uniform_int_distribution<int> degree(0, 3);
  std::uniform_int_distribution<int> tenth(0, 6);
  std::vector<double> c(degree(gen) + 1);
  for (double& x : c) x = tenth(gen) / 10.0;
  if (zero_constant) c[0] = 0.0;
  return Polynomial(c);
}

RandomInstance random_instance(std::mt19937& gen) {
  std::uniform_int_distribution<int> servers(2, 4);
  std::uniform_int_distribution<int> level(1, 5);
  const auto n = static_cast<std::size_t>(servers(gen));
  RandomInstance out;
  std::vector<Polynomial> res;
  std::vector<Polynomial> vio;
  std::vector<std::vector<Polynomial>> trf(n, std::vector<Polynomial>(n));
  for (std::size_t i = 0; i < n; ++i) {
    out.a.push_back(level(gen));
    out.b.push_back(level(gen));
    res.push_back(random_polynomial(gen, false));
    vio.push_back(random_polynomial(gen, true));
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) trf[i][j] = random_polynomial(gen, true);
    }
  }
  out.model = CostModel(std::move(res), std::move(vio), std::move(trf));
  return out;
}

}  // namespace

TEST_CASE("solve_transfer on named instances") {
  const CostModel model = reference_instance().model;

  SUBCASE("balanced request gives the zero plan") {
    const std::vector<int> a{2, 4, 3};
    const TransferSolution s = solve_transfer(a, a, model);
    CHECK(s.plan == TransferPlan(3));
    CHECK(s.objective == 0.0);
  }

  SUBCASE("two senders share one receiver") {
    const std::vector<int> a{1, 5, 1};
    const std::vector<int> b{3, 1, 3};
    // Oracle: every (delta_{1,2}, delta_{3,2}) pair within the caps.
    double best = 1e300;
    int best_x = -1;
    int best_y = -1;
    for (int x = 0; x <= 2; ++x) {
      for (int y = 0; y <= 2; ++y) {
        if (x + y > 4) continue;
        const double cost = 0.2 * x * x + 0.2 * y * y + 0.5 * (2 - x) * (2 - x) + 0.5 * (2 - y) * (2 - y);
        if (cost < best - 1e-12) {
          best = cost;
          best_x = x;
          best_y = y;
        }
      }
    }
    const TransferSolution s = solve_transfer(a, b, model);
    CHECK(s.objective == doctest::Approx(best));
    CHECK(s.plan(0, 1) == best_x);
    CHECK(s.plan(2, 1) == best_y);
    CHECK(s.objective == doctest::Approx(1.4));
    CHECK(s.objective < 0.5 * 4 + 0.5 * 4);        // zero plan
    CHECK(s.objective < 0.2 + 0.5 + 0.5 * 4 - 1e-9);  // only one sender moves jobs
    CHECK(is_feasible(s.plan, a, b));
  }

  SUBCASE("no receiver means no transfer") {
    const std::vector<int> a{1, 1, 1};
    const std::vector<int> b{4, 2, 5};
    const TransferSolution s = solve_transfer(a, b, model);
    CHECK(s.plan == TransferPlan(3));
    CHECK(brute_force_transfer(a, b, model).plan == TransferPlan(3));
  }
}

TEST_CASE("brute force refuses oversized searches") {
  const std::size_t n = 4;
  const Polynomial quad({0, 0, 1});
  std::vector<std::vector<Polynomial>> trf(n, std::vector<Polynomial>(n, quad));
  const CostModel model(std::vector<Polynomial>(n, quad), std::vector<Polynomial>(n, quad), trf);
  const std::vector<int> a{1, 1, 100, 100};
  const std::vector<int> b{100, 100, 1, 1};
  CHECK_THROWS_AS(brute_force_transfer(a, b, model, 1000), std::length_error);
  CHECK_NOTHROW(solve_transfer(a, b, model));
}

TEST_CASE("aggregate receiver cap binds") {
  // Two senders with deficit 3 each, one receiver with surplus 3. Per-edge
  // caps alone would allow 6 jobs into the receiver.
  const Polynomial tiny({0, 0.01});
  const Polynomial steep({0, 10});
  const std::vector<std::vector<Polynomial>> trf{{Polynomial{}, Polynomial{}, tiny},
                                                 {Polynomial{}, Polynomial{}, tiny},
                                                 {tiny, tiny, Polynomial{}}};
  const CostModel model({Polynomial{}, Polynomial{}, Polynomial{}}, {steep, steep, steep}, trf);
  const std::vector<int> a{1, 1, 4};
  const std::vector<int> b{4, 4, 1};
  const TransferSolution s = solve_transfer(a, b, model);
  CHECK(s.plan.received_by(2) == 3);
  CHECK(is_feasible(s.plan, a, b));
  CHECK(s.objective == doctest::Approx(brute_force_transfer(a, b, model).objective));
  // Lexicographic tie-break fills edge 1->3 with the least jobs consistent
  // with the optimum.
  CHECK(s.plan(0, 2) == 0);
  CHECK(s.plan(1, 2) == 3);
}

TEST_CASE("property: solver matches brute force on random instances") {
  std::mt19937 gen(20240611);
  for (int trial = 0; trial < 3000; ++trial) {
    const RandomInstance inst = random_instance(gen);
    const TransferSolution fast = solve_transfer(inst.a, inst.b, inst.model);
    const TransferSolution slow = brute_force_transfer(inst.a, inst.b, inst.model);
    CAPTURE(trial);
    REQUIRE(is_feasible(fast.plan, inst.a, inst.b));
    CHECK(fast.objective == doctest::Approx(slow.objective).epsilon(1e-12));
    CHECK(fast.plan == slow.plan);
    CHECK(fast.objective == fast.transfer_cost + fast.violation_cost);
    CHECK(fast.objective <= evaluate_plan(TransferPlan(inst.a.size()), inst.a, inst.b, inst.model).objective);
  }
}

TEST_CASE("property: extra surplus never raises the optimum") {
  std::mt19937 gen(7);
  for (int trial = 0; trial < 1000; ++trial) {
    RandomInstance inst = random_instance(gen);
    const double before = solve_transfer(inst.a, inst.b, inst.model).objective;
    std::uniform_int_distribution<std::size_t> pick(0, inst.a.size() - 1);
    const std::size_t m = pick(gen);
    inst.a[m] += 1 + static_cast<int>(gen() % 3);
    const double after = solve_transfer(inst.a, inst.b, inst.model).objective;
    CAPTURE(trial);
    CHECK(after <= before + 1e-9);
  }
}

TEST_CASE("property: relabeling servers preserves the optimum") {
  std::mt19937 gen(99);
  for (int trial = 0; trial < 500; ++trial) {
    const RandomInstance inst = random_instance(gen);
    const std::size_t n = inst.a.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);

    std::vector<int> a(n);
    std::vector<int> b(n);
    std::vector<Polynomial> res(n);
    std::vector<Polynomial> vio(n);
    std::vector<std::vector<Polynomial>> trf(n, std::vector<Polynomial>(n));
    for (std::size_t i = 0; i < n; ++i) {
      a[perm[i]] = inst.a[i];
      b[perm[i]] = inst.b[i];
      res[perm[i]] = inst.model.reservation(i);
      vio[perm[i]] = inst.model.violation(i);
      for (std::size_t j = 0; j < n; ++j) trf[perm[i]][perm[j]] = inst.model.transfer(i, j);
    }
    const CostModel relabeled(res, vio, trf);

    const TransferSolution original = solve_transfer(inst.a, inst.b, inst.model);
    const TransferSolution permuted = solve_transfer(a, b, relabeled);
    TransferPlan moved(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) moved(perm[i], perm[j]) = original.plan(i, j);
    }
    CAPTURE(trial);
    CHECK(permuted.objective == doctest::Approx(original.objective).epsilon(1e-12));
    CHECK(evaluate_plan(moved, a, b, relabeled).objective == doctest::Approx(permuted.objective).epsilon(1e-12));
  }
}
