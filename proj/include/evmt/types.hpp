#ifndef EVMT_TYPES_HPP
#define EVMT_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace evmt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Ground-truth states, one per hypothesis: 1 marks a non-null, 0 a null.
using Truth = std::vector<std::uint8_t>;

/// Raised when a procedure is configured with out-of-range parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when user data violates a type invariant.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-hypothesis p-values; every entry finite and in [0, 1], n >= 1.
class PValueSet {
 public:
  explicit PValueSet(Vector values);
  PValueSet(std::initializer_list<double> values);

  const Vector& values() const noexcept { return values_; }
  Index size() const noexcept { return values_.size(); }
  double operator[](Index i) const { return values_[i]; }

 private:
  Vector values_;
};

/// Nonnegative finite per-hypothesis scores consumed by e-BH.
class EValueSet {
 public:
  explicit EValueSet(Vector values);
  EValueSet(std::initializer_list<double> values);

  static EValueSet zeros(Index n) { return EValueSet(Vector::Zero(n)); }

  const Vector& values() const noexcept { return values_; }
  Index size() const noexcept { return values_.size(); }
  double operator[](Index i) const { return values_[i]; }

 private:
  Vector values_;
};

/// Sorted, duplicate-free, zero-based hypothesis indices.
class RejectionSet {
 public:
  RejectionSet() = default;
  explicit RejectionSet(std::vector<Index> indices);

  const std::vector<Index>& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  bool contains(Index i) const;

  friend bool operator==(const RejectionSet&, const RejectionSet&) = default;

 private:
  std::vector<Index> indices_;
};

/// Outcome of a threshold search. `threshold` is empty when no candidate is
/// feasible, in which case nothing is rejected and m_at_T is zero.
struct ThresholdResult {
  std::optional<double> threshold;
  double m_at_T = 0.0;
  RejectionSet rejected;

  bool feasible() const noexcept { return threshold.has_value(); }
};

inline void require_probability_open(double a, const char* what) {
  if (!(a > 0.0 && a < 1.0))
    throw ConfigError(std::string(what) + " must lie in (0, 1)");
}

}  // namespace evmt

#endif  // EVMT_TYPES_HPP
