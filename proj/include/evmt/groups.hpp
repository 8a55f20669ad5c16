#ifndef EVMT_GROUPS_HPP
#define EVMT_GROUPS_HPP

#include "evmt/procedures.hpp"

#include <optional>
#include <string>
#include <vector>

namespace evmt {

/// Disjoint cover of {0..n-1} by L non-empty groups.
class GroupPartition {
 public:
  /// Labels are zero-based and must use every value in 0..L-1.
  explicit GroupPartition(std::vector<int> labels,
                          std::vector<std::string> names = {});

  /// Groups numbered in order of first appearance.
  static GroupPartition from_names(const std::vector<std::string>& names);
  static GroupPartition single(Index n);
  /// Consecutive blocks of the given sizes.
  static GroupPartition blocks(const std::vector<Index>& sizes);

  Index size() const noexcept { return static_cast<Index>(labels_.size()); }
  int groups() const noexcept { return static_cast<int>(members_.size()); }
  int label(Index i) const { return labels_[static_cast<std::size_t>(i)]; }
  const std::vector<Index>& members(int g) const {
    return members_[static_cast<std::size_t>(g)];
  }
  Index group_size(int g) const {
    return static_cast<Index>(members(g).size());
  }
  const std::string& name(int g) const {
    return names_[static_cast<std::size_t>(g)];
  }

  /// Values of v at the members of group g.
  Vector restrict(const Vector& v, int g) const;

 private:
  std::vector<int> labels_;
  std::vector<std::vector<Index>> members_;
  std::vector<std::string> names_;
};

enum class WeightScheme { Unit, SizeAdjusted, Adaptive };

/// BC threshold of each group at level alpha; rejections use global indices.
std::vector<ThresholdResult> groupwise_bc_thresholds(const PValueSet& pvals,
                                                     const GroupPartition& part,
                                                     double alpha);

/// BC threshold of i's group after p_i -> min(p_i, 1 - p_i).
std::optional<double> loo_group_threshold(const PValueSet& pvals,
                                          const GroupPartition& part,
                                          double alpha, Index i);

/// Per group: sum over j in the group of 1{1 - p_j <= T_{l,j}}.
std::vector<long> loo_mirror_counts(const PValueSet& pvals,
                                    const GroupPartition& part, double alpha);

Vector assemble_weights(const PValueSet& pvals, const GroupPartition& part,
                        const std::vector<ThresholdResult>& thresholds,
                        WeightScheme scheme, double alpha);

/// e_i = n_l w_i 1{p_i <= T_l} / (1 + #{j in G_l : 1 - p_j <= T_l}).
EValueSet group_evalues(const PValueSet& pvals, const GroupPartition& part,
                        const std::vector<ThresholdResult>& thresholds,
                        const Vector& weights);

struct GroupReport {
  std::vector<ThresholdResult> thresholds;
  std::vector<RejectionSet> group_rejected;  // final rejections within each group
  RejectionSet rejected;
  Vector weights;
  EValueSet evalues = EValueSet::zeros(0);
};

GroupReport run_algorithm1(const PValueSet& pvals, const GroupPartition& part,
                           double alpha, WeightScheme scheme);

struct GroupMetrics {
  FdpPower overall;
  std::vector<FdpPower> per_group;
};

GroupMetrics group_metrics(const RejectionSet& rejected, const Truth& truth,
                           const GroupPartition& part);

}  // namespace evmt

#endif  // EVMT_GROUPS_HPP
