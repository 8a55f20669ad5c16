#include "evmt/types.hpp"

#include <algorithm>
#include <cmath>

namespace evmt {

namespace {

Vector from_list(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

PValueSet::PValueSet(Vector values) : values_(std::move(values)) {
  if (values_.size() < 1) throw InputError("p-value set must be non-empty");
  for (Index i = 0; i < values_.size(); ++i) {
    const double p = values_[i];
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
      throw InputError("p-value " + std::to_string(i + 1) +
                       " is outside [0, 1]");
  }
}

PValueSet::PValueSet(std::initializer_list<double> values)
    : PValueSet(from_list(values)) {}

EValueSet::EValueSet(Vector values) : values_(std::move(values)) {
  for (Index i = 0; i < values_.size(); ++i) {
    const double e = values_[i];
    if (!std::isfinite(e) || e < 0.0)
      throw InputError("e-value " + std::to_string(i + 1) +
                       " is negative or not finite");
  }
}

EValueSet::EValueSet(std::initializer_list<double> values)
    : EValueSet(from_list(values)) {}

RejectionSet::RejectionSet(std::vector<Index> indices)
    : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()),
                 indices_.end());
  if (!indices_.empty() && indices_.front() < 0)
    throw InputError("rejection index out of range");
}

bool RejectionSet::contains(Index i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

}  // namespace evmt
