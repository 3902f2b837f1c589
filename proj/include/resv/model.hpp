#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace resv {

/// Box of integer vectors lo[n] <= x[n] <= hi[n], enumerated in
/// lexicographic order with server 0 as the most significant digit.
class IntegerBox {
 public:
  IntegerBox() = default;
  IntegerBox(std::vector<int> lo, std::vector<int> hi);

  std::size_t dims() const { return lo_.size(); }
  std::uint64_t cardinality() const { return cardinality_; }
  const std::vector<int>& lo() const { return lo_; }
  const std::vector<int>& hi() const { return hi_; }

  bool contains(std::span<const int> x) const;
  std::uint64_t encode(std::span<const int> x) const;
  std::vector<int> decode(std::uint64_t index) const;

  friend bool operator==(const IntegerBox&, const IntegerBox&) = default;

 private:
  std::vector<int> lo_;
  std::vector<int> hi_;
  std::uint64_t cardinality_ = 0;
};

/// Reservation choices per server. Minimum reservation is at least one.
class ActionSpace : public IntegerBox {
 public:
  ActionSpace() = default;
  ActionSpace(std::vector<int> min_reservation, std::vector<int> max_reservation);

  std::size_t n_servers() const { return dims(); }
};

/// Request bounds per server. The upper bound may be left unset, in which
/// case the request space is unbounded and cannot be enumerated.
struct RequestBounds {
  std::vector<int> lo;
  std::optional<std::vector<int>> hi;

  /// Throws std::invalid_argument when hi is unset.
  IntegerBox box() const;
};

struct ReservationVector {
  std::vector<int> values;
};

struct RequestVector {
  std::vector<int> values;
};

/// Polynomial with nonnegative coefficients, coefficient i multiplying x^i.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coefficients);

  double operator()(int x) const;
  const std::vector<double>& coefficients() const { return coefficients_; }
  bool is_zero() const;
  double at_zero() const { return coefficients_.empty() ? 0.0 : coefficients_.front(); }

 private:
  std::vector<double> coefficients_;
};

struct CostBreakdown {
  double reservation = 0.0;
  double transfer = 0.0;
  double violation = 0.0;
  double total = 0.0;

  friend bool operator==(const CostBreakdown&, const CostBreakdown&) = default;
};

/// Reservation, violation, and per-edge transfer cost families for N servers.
/// Violation and transfer functions must vanish at zero.
class CostModel {
 public:
  CostModel() = default;
  CostModel(std::vector<Polynomial> reservation, std::vector<Polynomial> violation,
            std::vector<std::vector<Polynomial>> transfer);

  /// All-zero model for n servers.
  static CostModel zero(std::size_t n);

  std::size_t n_servers() const { return reservation_.size(); }
  const Polynomial& reservation(std::size_t n) const { return reservation_[n]; }
  const Polynomial& violation(std::size_t n) const { return violation_[n]; }
  const Polynomial& transfer(std::size_t from, std::size_t to) const { return transfer_[from][to]; }

  /// Finite-difference scan: throws std::invalid_argument if any function is
  /// negative or decreasing on [0, max_argument].
  void check_monotone(int max_argument) const;

 private:
  std::vector<Polynomial> reservation_;
  std::vector<Polynomial> violation_;
  std::vector<std::vector<Polynomial>> transfer_;
};

double reservation_cost(std::span<const int> a, const CostModel& model);
inline double reservation_cost(const ReservationVector& a, const CostModel& model) {
  return reservation_cost(a.values, model);
}

/// Reservation cost plus the transfer and violation costs of the optimal
/// transfer plan.
CostBreakdown total_cost(std::span<const int> a, std::span<const int> b, const CostModel& model);
inline CostBreakdown total_cost(const ReservationVector& a, const RequestVector& b,
                                const CostModel& model) {
  return total_cost(a.values, b.values, model);
}

/// Largest magnitude reached by any single cost component over every
/// (reservation, request) pair. Requires bounded requests.
double theta_bound(const ActionSpace& space, const RequestBounds& requests, const CostModel& model);

}  // namespace resv
