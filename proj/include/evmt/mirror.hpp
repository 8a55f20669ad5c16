#ifndef EVMT_MIRROR_HPP
#define EVMT_MIRROR_HPP

#include "evmt/types.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace evmt {

/// Feasibility test shared by every mirror-type threshold:
///   numerator / max(1, denominator) <= alpha.
inline bool ratio_ok(long numerator, long denominator, double alpha) {
  return static_cast<double>(numerator) /
             static_cast<double>(denominator > 1 ? denominator : 1) <=
         alpha;
}

/// Admissible threshold range [0, upper) or [0, upper].
struct ThresholdDomain {
  double upper = 0.5;
  bool inclusive = false;

  bool contains(double t) const {
    return t >= 0.0 && (inclusive ? t <= upper : t < upper);
  }
};

/// Step-function sweep for thresholds of the form
///
///   T = sup{ t in domain : (1 + #{b_j <= t}) / (1 v #{a_j <= t}) <= alpha },
///
/// where a_j is the rejection score of hypothesis j and b_j its mirrored
/// score (BC: a = p, b = 1 - p; FBC: a = phi(p), b = phi(1 - p)). The
/// supremum is taken over the jump points that fall inside the domain.
///
/// Beyond the plain threshold the sweep answers leave-one-out queries in
/// O(log n). Replacing p_j by min(p_j, 1 - p_j) when p_j > 1/2 swaps (a_j, b_j);
/// a_j then lies outside the domain, so the edit adds one to the rejection
/// count and removes one from the mirror count for every t >= b_j.
class MirrorSweep {
 public:
  MirrorSweep(std::span<const double> a, std::span<const double> b,
              double alpha, ThresholdDomain domain);

  std::optional<double> threshold() const;

  /// 1 + #{b_j <= t}.
  long mirror_count(double t) const;
  /// #{a_j <= t}.
  long reject_count(double t) const;

  /// Threshold after swapping (a_j, b_j) for a hypothesis whose a_j lies
  /// outside the domain. Callers must check that precondition.
  std::optional<double> swapped_threshold(double b_j) const;

  /// True when the instance with (a_j, b_j) swapped *and* hypothesis i's
  /// scores replaced by (0, out-of-domain) has a feasible threshold >= b_j.
  /// Equivalent to 1{b_j <= T_{j,i}}.
  bool swapped_and_zeroed_reaches(double b_j, double a_i, double b_i) const;

  /// Largest candidate of the original grid that is feasible for the double
  /// edit above, O(n). Evaluating the edited instance on the original grid
  /// keeps the value monotone in the edit; the indicator 1{b_j <= T} is the
  /// same as on the edited instance's own jump set.
  std::optional<double> swapped_and_zeroed_threshold(double b_j, double a_i,
                                                     double b_i) const;

  /// Whether any double edit of the kind above could reach b_j.
  bool could_reach(double b_j) const;

  const std::vector<double>& candidates() const noexcept { return cand_; }

 private:
  // Variants of the edited ratio at candidate k:
  //   (mb_k - z) / (r_k + 1 + y), variant index y + 2 z.
  bool edited_ok(std::size_t k, int y, int z) const;
  bool any_edited(std::size_t lo, std::size_t hi, int y, int z) const;

  double alpha_;
  ThresholdDomain domain_;
  std::vector<double> a_sorted_;
  std::vector<double> b_sorted_;
  std::vector<double> cand_;
  std::vector<long> reject_;  // #{a <= c_k}
  std::vector<long> mirror_;  // #{b <= c_k}, without the leading 1
  std::optional<std::size_t> best_;
  std::optional<std::size_t> best_swapped_;
  std::vector<long> last_plain_;                 // largest plain-feasible index <= k, or -1
  std::array<std::vector<int>, 4> edited_count_;  // prefix counts per variant
};

}  // namespace evmt

#endif  // EVMT_MIRROR_HPP
