#include "resv/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "resv/transfer.hpp"

namespace resv {

IntegerBox::IntegerBox(std::vector<int> lo, std::vector<int> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.empty()) throw std::invalid_argument("integer box needs at least one dimension");
  if (lo_.size() != hi_.size()) throw std::invalid_argument("lower and upper bounds differ in length");
  cardinality_ = 1;
  for (std::size_t n = 0; n < lo_.size(); ++n) {
    if (lo_[n] < 0) throw std::invalid_argument("bound " + std::to_string(n) + " is negative");
    if (hi_[n] < lo_[n]) {
      throw std::invalid_argument("upper bound below lower bound at server " + std::to_string(n));
    }
    const auto width = static_cast<std::uint64_t>(hi_[n] - lo_[n]) + 1;
    if (cardinality_ > std::numeric_limits<std::uint64_t>::max() / width) {
      throw std::invalid_argument("integer box cardinality overflows");
    }
    cardinality_ *= width;
  }
}

bool IntegerBox::contains(std::span<const int> x) const {
  if (x.size() != lo_.size()) return false;
  for (std::size_t n = 0; n < x.size(); ++n) {
    if (x[n] < lo_[n] || x[n] > hi_[n]) return false;
  }
  return true;
}

std::uint64_t IntegerBox::encode(std::span<const int> x) const {
  if (!contains(x)) throw std::out_of_range("vector outside the integer box");
  std::uint64_t index = 0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const auto width = static_cast<std::uint64_t>(hi_[n] - lo_[n]) + 1;
    index = index * width + static_cast<std::uint64_t>(x[n] - lo_[n]);
  }
  return index;
}

std::vector<int> IntegerBox::decode(std::uint64_t index) const {
  if (index >= cardinality_) {
    throw std::out_of_range("index " + std::to_string(index) + " >= cardinality " +
                            std::to_string(cardinality_));
  }
  std::vector<int> x(lo_.size());
  for (std::size_t n = lo_.size(); n-- > 0;) {
    const auto width = static_cast<std::uint64_t>(hi_[n] - lo_[n]) + 1;
    x[n] = lo_[n] + static_cast<int>(index % width);
    index /= width;
  }
  return x;
}

ActionSpace::ActionSpace(std::vector<int> min_reservation, std::vector<int> max_reservation)
    : IntegerBox(min_reservation, max_reservation) {
  for (std::size_t n = 0; n < min_reservation.size(); ++n) {
    if (min_reservation[n] < 1) {
      throw std::invalid_argument("minimum reservation at server " + std::to_string(n) +
                                  " must be at least 1");
    }
  }
}

IntegerBox RequestBounds::box() const {
  if (!hi) throw std::invalid_argument("request_max is unset; the request space is unbounded");
  return IntegerBox(lo, *hi);
}

Polynomial::Polynomial(std::vector<double> coefficients) : coefficients_(std::move(coefficients)) {
  for (double c : coefficients_) {
    if (!std::isfinite(c) || c < 0.0) {
      throw std::invalid_argument("polynomial coefficients must be finite and nonnegative");
    }
  }
  while (!coefficients_.empty() && coefficients_.back() == 0.0) coefficients_.pop_back();
}

double Polynomial::operator()(int x) const {
  double value = 0.0;
  const double xd = static_cast<double>(x);
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) value = value * xd + *it;
  return value;
}

bool Polynomial::is_zero() const { return coefficients_.empty(); }

CostModel::CostModel(std::vector<Polynomial> reservation, std::vector<Polynomial> violation,
                     std::vector<std::vector<Polynomial>> transfer)
    : reservation_(std::move(reservation)), violation_(std::move(violation)), transfer_(std::move(transfer)) {
  const std::size_t n = reservation_.size();
  if (n == 0) throw std::invalid_argument("cost model needs at least one server");
  if (violation_.size() != n) throw std::invalid_argument("violation cost list length differs from N");
  if (transfer_.size() != n) throw std::invalid_argument("transfer cost matrix must be N x N");
  for (std::size_t i = 0; i < n; ++i) {
    if (transfer_[i].size() != n) throw std::invalid_argument("transfer cost matrix must be N x N");
    if (violation_[i].at_zero() != 0.0) {
      throw std::invalid_argument("violation cost at server " + std::to_string(i) + " must vanish at 0");
    }
    // Diagonal entries are never evaluated.
    transfer_[i][i] = Polynomial{};
    for (std::size_t j = 0; j < n; ++j) {
      if (transfer_[i][j].at_zero() != 0.0) {
        throw std::invalid_argument("transfer cost " + std::to_string(i) + "->" + std::to_string(j) +
                                    " must vanish at 0");
      }
    }
  }
}

CostModel CostModel::zero(std::size_t n) {
  return CostModel(std::vector<Polynomial>(n), std::vector<Polynomial>(n),
                   std::vector<std::vector<Polynomial>>(n, std::vector<Polynomial>(n)));
}

void CostModel::check_monotone(int max_argument) const {
  auto scan = [max_argument](const Polynomial& f, const std::string& what) {
    double previous = f(0);
    if (previous < 0.0) throw std::invalid_argument(what + " is negative at 0");
    for (int x = 1; x <= max_argument; ++x) {
      const double value = f(x);
      if (value < previous) throw std::invalid_argument(what + " decreases at " + std::to_string(x));
      previous = value;
    }
  };
  const std::size_t n = n_servers();
  for (std::size_t i = 0; i < n; ++i) {
    scan(reservation_[i], "reservation cost " + std::to_string(i));
    scan(violation_[i], "violation cost " + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) scan(transfer_[i][j], "transfer cost " + std::to_string(i) + "->" + std::to_string(j));
    }
  }
}

double reservation_cost(std::span<const int> a, const CostModel& model) {
  double sum = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) sum += model.reservation(n)(a[n]);
  return sum;
}

CostBreakdown total_cost(std::span<const int> a, std::span<const int> b, const CostModel& model) {
  if (a.size() != model.n_servers() || b.size() != model.n_servers()) {
    throw std::invalid_argument("reservation/request length differs from the cost model");
  }
  const TransferSolution solution = solve_transfer(a, b, model);
  CostBreakdown out;
  out.reservation = reservation_cost(a, model);
  out.transfer = solution.transfer_cost;
  out.violation = solution.violation_cost;
  out.total = out.reservation + out.transfer + out.violation;
  return out;
}

double theta_bound(const ActionSpace& space, const RequestBounds& requests, const CostModel& model) {
  const IntegerBox request_box = requests.box();
  if (request_box.dims() != space.dims()) {
    throw std::invalid_argument("request bounds and action space differ in dimension");
  }
  double theta = 0.0;
  for (std::uint64_t i = 0; i < space.cardinality(); ++i) {
    const std::vector<int> a = space.decode(i);
    theta = std::max(theta, std::abs(reservation_cost(a, model)));
    for (std::uint64_t j = 0; j < request_box.cardinality(); ++j) {
      const std::vector<int> b = request_box.decode(j);
      const TransferSolution s = solve_transfer(a, b, model);
      theta = std::max({theta, std::abs(s.transfer_cost), std::abs(s.violation_cost)});
    }
  }
  return theta;
}

}  // namespace resv
