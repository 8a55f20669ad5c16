#include "evmt/mirror.hpp"

#include <algorithm>

namespace evmt {

MirrorSweep::MirrorSweep(std::span<const double> a, std::span<const double> b,
                         double alpha, ThresholdDomain domain)
    : alpha_(alpha),
      domain_(domain),
      a_sorted_(a.begin(), a.end()),
      b_sorted_(b.begin(), b.end()) {
  std::sort(a_sorted_.begin(), a_sorted_.end());
  std::sort(b_sorted_.begin(), b_sorted_.end());

  cand_.reserve(a_sorted_.size() + b_sorted_.size());
  for (double v : a_sorted_)
    if (domain_.contains(v)) cand_.push_back(v);
  for (double v : b_sorted_)
    if (domain_.contains(v)) cand_.push_back(v);
  std::sort(cand_.begin(), cand_.end());
  cand_.erase(std::unique(cand_.begin(), cand_.end()), cand_.end());

  const std::size_t k_max = cand_.size();
  reject_.resize(k_max);
  mirror_.resize(k_max);
  last_plain_.assign(k_max, -1);
  for (auto& c : edited_count_) c.assign(k_max + 1, 0);

  std::size_t ia = 0, ib = 0;
  long last = -1;
  for (std::size_t k = 0; k < k_max; ++k) {
    const double c = cand_[k];
    while (ia < a_sorted_.size() && a_sorted_[ia] <= c) ++ia;
    while (ib < b_sorted_.size() && b_sorted_[ib] <= c) ++ib;
    reject_[k] = static_cast<long>(ia);
    mirror_[k] = static_cast<long>(ib);

    if (ratio_ok(1 + mirror_[k], reject_[k], alpha_)) {
      best_ = k;
      last = static_cast<long>(k);
    }
    last_plain_[k] = last;
    if (edited_ok(k, 0, 0)) best_swapped_ = k;
    for (int v = 0; v < 4; ++v)
      edited_count_[v][k + 1] =
          edited_count_[v][k] + (edited_ok(k, v & 1, v >> 1) ? 1 : 0);
  }
}

bool MirrorSweep::edited_ok(std::size_t k, int y, int z) const {
  return ratio_ok(mirror_[k] - z, reject_[k] + 1 + y, alpha_);
}

bool MirrorSweep::any_edited(std::size_t lo, std::size_t hi, int y,
                             int z) const {
  if (lo >= hi) return false;
  const auto& c = edited_count_[y + 2 * z];
  return c[hi] - c[lo] > 0;
}

std::optional<double> MirrorSweep::threshold() const {
  if (!best_) return std::nullopt;
  return cand_[*best_];
}

long MirrorSweep::mirror_count(double t) const {
  return 1 + static_cast<long>(
                 std::upper_bound(b_sorted_.begin(), b_sorted_.end(), t) -
                 b_sorted_.begin());
}

long MirrorSweep::reject_count(double t) const {
  return static_cast<long>(
      std::upper_bound(a_sorted_.begin(), a_sorted_.end(), t) -
      a_sorted_.begin());
}

std::optional<double> MirrorSweep::swapped_threshold(double b_j) const {
  const auto s = static_cast<std::size_t>(
      std::lower_bound(cand_.begin(), cand_.end(), b_j) - cand_.begin());
  // At or beyond b_j the edited ratio applies; below it nothing changes.
  if (best_swapped_ && *best_swapped_ >= s) return cand_[*best_swapped_];
  if (s == 0) return std::nullopt;
  const long k = last_plain_[s - 1];
  if (k < 0) return std::nullopt;
  return cand_[static_cast<std::size_t>(k)];
}

bool MirrorSweep::could_reach(double b_j) const {
  const auto s = static_cast<std::size_t>(
      std::lower_bound(cand_.begin(), cand_.end(), b_j) - cand_.begin());
  return any_edited(s, cand_.size(), 1, 1);
}

bool MirrorSweep::swapped_and_zeroed_reaches(double b_j, double a_i,
                                             double b_i) const {
  const auto pos = [this](double v) {
    return static_cast<std::size_t>(
        std::lower_bound(cand_.begin(), cand_.end(), v) - cand_.begin());
  };
  const std::size_t end = cand_.size();
  const std::size_t s = pos(b_j);
  // Below a_i the zeroed score adds a rejection (y = 1); from b_i on the
  // removed mirror score lowers the count (z = 1).
  const std::size_t split_a = std::max(s, std::min(pos(a_i), end));
  const std::size_t split_b = std::max(s, std::min(pos(b_i), end));

  std::array<std::size_t, 4> cuts{s, std::min(split_a, split_b),
                                  std::max(split_a, split_b), end};
  for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    const std::size_t lo = cuts[seg], hi = cuts[seg + 1];
    if (lo >= hi) continue;
    const int y = lo < split_a ? 1 : 0;
    const int z = lo >= split_b ? 1 : 0;
    if (any_edited(lo, hi, y, z)) return true;
  }
  return false;
}

std::optional<double> MirrorSweep::swapped_and_zeroed_threshold(
    double b_j, double a_i, double b_i) const {
  for (std::size_t k = cand_.size(); k-- > 0;) {
    const double c = cand_[k];
    const long y = c < a_i ? 1 : 0;
    const long z = c >= b_i ? 1 : 0;
    const long swap = c >= b_j ? 1 : 0;
    if (ratio_ok(1 + mirror_[k] - z - swap, reject_[k] + y + swap, alpha_))
      return c;
  }
  return std::nullopt;
}

}  // namespace evmt
