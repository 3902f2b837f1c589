#include "resv/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace resv {

int TransferPlan::sent_from(std::size_t n) const {
  int sum = 0;
  for (std::size_t m = 0; m < n_; ++m) sum += (*this)(n, m);
  return sum;
}

int TransferPlan::received_by(std::size_t m) const {
  int sum = 0;
  for (std::size_t n = 0; n < n_; ++n) sum += (*this)(n, m);
  return sum;
}

Imbalance imbalance(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw std::invalid_argument("reservation and request differ in length");
  Imbalance out{std::vector<int>(a.size()), std::vector<int>(a.size())};
  for (std::size_t n = 0; n < a.size(); ++n) {
    out.deficit[n] = std::max(b[n] - a[n], 0);
    out.surplus[n] = std::max(a[n] - b[n], 0);
  }
  return out;
}

bool is_feasible(const TransferPlan& plan, std::span<const int> a, std::span<const int> b) {
  const std::size_t n_servers = a.size();
  if (plan.n_servers() != n_servers || b.size() != n_servers) return false;
  const Imbalance imb = imbalance(a, b);
  for (std::size_t n = 0; n < n_servers; ++n) {
    if (plan(n, n) != 0) return false;
    for (std::size_t m = 0; m < n_servers; ++m) {
      if (plan(n, m) < 0 || plan(n, m) > std::min(imb.deficit[n], imb.surplus[m])) return false;
    }
    if (plan.sent_from(n) > imb.deficit[n]) return false;
    if (plan.received_by(n) > imb.surplus[n]) return false;
  }
  return true;
}

TransferSolution evaluate_plan(TransferPlan plan, std::span<const int> a, std::span<const int> b,
                               const CostModel& model) {
  const std::size_t n_servers = a.size();
  TransferSolution out;
  for (std::size_t n = 0; n < n_servers; ++n) {
    for (std::size_t m = 0; m < n_servers; ++m) {
      if (n != m && plan(n, m) != 0) out.transfer_cost += model.transfer(n, m)(plan(n, m));
    }
    const int unserved = std::max(b[n] - a[n] - plan.sent_from(n), 0);
    out.violation_cost += model.violation(n)(unserved);
  }
  out.objective = out.transfer_cost + out.violation_cost;
  out.plan = std::move(plan);
  return out;
}

namespace {

// Residual transfer problem: senders with remaining deficit, receivers with
// remaining surplus, and the set of edges still free to carry flow.
struct Subproblem {
  std::vector<int> deficit;
  std::vector<int> surplus;
  std::vector<char> open;  // row-major N x N

  std::size_t n() const { return deficit.size(); }
  int edge_cap(std::size_t from, std::size_t to) const {
    if (!open[from * n() + to]) return 0;
    return std::min(deficit[from], surplus[to]);
  }
};

Subproblem make_subproblem(std::span<const int> a, std::span<const int> b) {
  Imbalance imb = imbalance(a, b);
  const std::size_t n = a.size();
  Subproblem sub{std::move(imb.deficit), std::move(imb.surplus), std::vector<char>(n * n, 1)};
  for (std::size_t i = 0; i < n; ++i) sub.open[i * n + i] = 0;
  return sub;
}

// Min-cost flow by successive shortest paths, one unit per augmentation.
// Every arc cost is convex in its flow (nonnegative-coefficient polynomials),
// so stopping at the first nonnegative shortest path gives the optimum over
// all flow values.
class ConvexFlow {
 public:
  ConvexFlow(const Subproblem& sub, const CostModel& model) : sub_(sub), model_(model) {
    const std::size_t n = sub.n();
    source_ = 0;
    sink_ = 2 * n + 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (sub.deficit[i] > 0) arcs_.push_back({source_, sender(i), sub.deficit[i], 0, Kind::kUnserved, i, 0});
      if (sub.surplus[i] > 0) arcs_.push_back({receiver(i), sink_, sub.surplus[i], 0, Kind::kSpare, i, 0});
      for (std::size_t j = 0; j < n; ++j) {
        const int cap = sub.edge_cap(i, j);
        if (cap > 0) arcs_.push_back({sender(i), receiver(j), cap, 0, Kind::kEdge, i, j});
      }
    }
  }

  void run() {
    const std::size_t nodes = sink_ + 1;
    std::vector<double> dist(nodes);
    std::vector<long> via(nodes);  // arc index + 1, negated for backward use
    while (true) {
      std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
      std::fill(via.begin(), via.end(), 0);
      dist[source_] = 0.0;
      for (std::size_t round = 0; round + 1 < nodes; ++round) {
        bool changed = false;
        for (std::size_t k = 0; k < arcs_.size(); ++k) {
          const Arc& arc = arcs_[k];
          if (arc.flow < arc.cap && dist[arc.from] + forward_cost(arc) < dist[arc.to] - kRelax) {
            dist[arc.to] = dist[arc.from] + forward_cost(arc);
            via[arc.to] = static_cast<long>(k) + 1;
            changed = true;
          }
          if (arc.flow > 0 && dist[arc.to] - backward_gain(arc) < dist[arc.from] - kRelax) {
            dist[arc.from] = dist[arc.to] - backward_gain(arc);
            via[arc.from] = -(static_cast<long>(k) + 1);
            changed = true;
          }
        }
        if (!changed) break;
      }
      if (!(dist[sink_] < -kRelax)) return;
      for (std::size_t node = sink_; node != source_;) {
        const long tag = via[node];
        Arc& arc = arcs_[static_cast<std::size_t>(std::labs(tag) - 1)];
        if (tag > 0) {
          ++arc.flow;
          node = arc.from;
        } else {
          --arc.flow;
          node = arc.to;
        }
      }
    }
  }

  /// Flow on each sender -> receiver edge, row-major.
  std::vector<int> edge_flows() const {
    const std::size_t n = sub_.n();
    std::vector<int> flows(n * n, 0);
    for (const Arc& arc : arcs_) {
      if (arc.kind == Kind::kEdge) flows[arc.i * n + arc.j] = arc.flow;
    }
    return flows;
  }

 private:
  enum class Kind { kUnserved, kEdge, kSpare };
  struct Arc {
    std::size_t from;
    std::size_t to;
    int cap;
    int flow;
    Kind kind;
    std::size_t i;
    std::size_t j;
  };
  static constexpr double kRelax = 1e-12;

  std::size_t sender(std::size_t i) const { return 1 + i; }
  std::size_t receiver(std::size_t j) const { return 1 + sub_.n() + j; }

  // Cost of carrying unit number x + 1 on the arc.
  double marginal(const Arc& arc, int x) const {
    switch (arc.kind) {
      case Kind::kUnserved: {
        const Polynomial& f = model_.violation(arc.i);
        const int d = sub_.deficit[arc.i];
        return f(d - x - 1) - f(d - x);
      }
      case Kind::kEdge: {
        const Polynomial& f = model_.transfer(arc.i, arc.j);
        return f(x + 1) - f(x);
      }
      case Kind::kSpare:
        return 0.0;
    }
    return 0.0;
  }
  double forward_cost(const Arc& arc) const { return marginal(arc, arc.flow); }
  double backward_gain(const Arc& arc) const { return marginal(arc, arc.flow - 1); }

  const Subproblem& sub_;
  const CostModel& model_;
  std::size_t source_ = 0;
  std::size_t sink_ = 0;
  std::vector<Arc> arcs_;
};

double unserved_cost(const Subproblem& sub, const CostModel& model, std::span<const int> flows) {
  const std::size_t n = sub.n();
  double cost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    int out = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const int x = flows[i * n + j];
      if (x != 0) {
        out += x;
        cost += model.transfer(i, j)(x);
      }
    }
    cost += model.violation(i)(sub.deficit[i] - out);
  }
  return cost;
}

// Optimal objective of a residual problem.
double optimum(const Subproblem& sub, const CostModel& model) {
  const std::size_t n = sub.n();
  std::size_t active = 0;
  std::size_t only_from = 0;
  std::size_t only_to = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (sub.edge_cap(i, j) > 0) {
        ++active;
        only_from = i;
        only_to = j;
      }
    }
  }
  double base = 0.0;
  for (std::size_t i = 0; i < n; ++i) base += model.violation(i)(sub.deficit[i]);
  if (active == 0) return base;
  if (active == 1) {
    const Polynomial& ft = model.transfer(only_from, only_to);
    const Polynomial& fv = model.violation(only_from);
    const int d = sub.deficit[only_from];
    const double rest = base - fv(d);
    double best = std::numeric_limits<double>::infinity();
    for (int x = 0; x <= sub.edge_cap(only_from, only_to); ++x) best = std::min(best, ft(x) + fv(d - x));
    return rest + best;
  }
  ConvexFlow flow(sub, model);
  flow.run();
  return unserved_cost(sub, model, flow.edge_flows());
}

}  // namespace

TransferSolution solve_transfer(std::span<const int> a, std::span<const int> b, const CostModel& model) {
  const std::size_t n = a.size();
  if (b.size() != n || model.n_servers() != n) {
    throw std::invalid_argument("reservation/request length differs from the cost model");
  }
  Subproblem sub = make_subproblem(a, b);
  TransferPlan plan(n);

  bool any_edge = false;
  for (std::size_t i = 0; i < n && !any_edge; ++i) {
    for (std::size_t j = 0; j < n; ++j) any_edge = any_edge || sub.edge_cap(i, j) > 0;
  }
  if (!any_edge) return evaluate_plan(std::move(plan), a, b, model);

  const double best = optimum(sub, model);
  const double slack = kTieTolerance * std::max(1.0, std::abs(best));

  // Fix edges in row-major order to the smallest value that still admits an
  // optimal completion.
  double fixed = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const int cap = sub.edge_cap(i, j);
      if (cap == 0) continue;
      sub.open[i * n + j] = 0;
      bool accepted = false;
      for (int v = 0; v <= cap; ++v) {
        Subproblem trial = sub;
        trial.deficit[i] -= v;
        trial.surplus[j] -= v;
        const double edge = model.transfer(i, j)(v);
        if (fixed + edge + optimum(trial, model) <= best + slack) {
          plan(i, j) = v;
          fixed += edge;
          sub = std::move(trial);
          accepted = true;
          break;
        }
      }
      if (!accepted) throw std::logic_error("transfer solver lost the optimum while fixing edges");
    }
  }
  return evaluate_plan(std::move(plan), a, b, model);
}

TransferSolution brute_force_transfer(std::span<const int> a, std::span<const int> b, const CostModel& model,
                                      std::uint64_t limit) {
  const std::size_t n = a.size();
  if (b.size() != n || model.n_servers() != n) {
    throw std::invalid_argument("reservation/request length differs from the cost model");
  }
  const Imbalance imb = imbalance(a, b);
  struct Edge {
    std::size_t from;
    std::size_t to;
    int cap;
  };
  std::vector<Edge> edges;
  std::uint64_t plans = 1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const int cap = i == j ? 0 : std::min(imb.deficit[i], imb.surplus[j]);
      if (cap == 0) continue;
      edges.push_back({i, j, cap});
      const auto width = static_cast<std::uint64_t>(cap) + 1;
      if (plans > limit / width) {
        throw std::length_error("brute-force transfer search exceeds " + std::to_string(limit) + " plans");
      }
      plans *= width;
    }
  }

  // Odometer over edge values; the last edge turns fastest, so plans are
  // visited in ascending lexicographic order.
  auto for_each_feasible = [&](auto&& visit) {
    std::vector<int> values(edges.size(), 0);
    std::vector<int> sent(n, 0);
    std::vector<int> received(n, 0);
    while (true) {
      std::fill(sent.begin(), sent.end(), 0);
      std::fill(received.begin(), received.end(), 0);
      for (std::size_t k = 0; k < edges.size(); ++k) {
        sent[edges[k].from] += values[k];
        received[edges[k].to] += values[k];
      }
      bool ok = true;
      for (std::size_t s = 0; s < n && ok; ++s) ok = sent[s] <= imb.deficit[s] && received[s] <= imb.surplus[s];
      if (ok) {
        TransferPlan plan(n);
        for (std::size_t k = 0; k < edges.size(); ++k) plan(edges[k].from, edges[k].to) = values[k];
        if (visit(evaluate_plan(std::move(plan), a, b, model))) return;
      }
      std::size_t k = edges.size();
      while (k > 0 && values[k - 1] == edges[k - 1].cap) values[--k] = 0;
      if (k == 0) return;
      ++values[k - 1];
    }
  };

  double best = std::numeric_limits<double>::infinity();
  for_each_feasible([&](const TransferSolution& s) {
    best = std::min(best, s.objective);
    return false;
  });
  const double slack = kTieTolerance * std::max(1.0, std::abs(best));
  TransferSolution chosen;
  for_each_feasible([&](TransferSolution s) {
    if (s.objective <= best + slack) {
      chosen = std::move(s);
      return true;
    }
    return false;
  });
  return chosen;
}

}  // namespace resv
