#ifndef EVMT_STRUCTURE_HPP
#define EVMT_STRUCTURE_HPP

#include "evmt/groups.hpp"
#include "evmt/lfdr.hpp"

#include <cstdint>
#include <vector>

namespace evmt {

/// Random partition of {0..n-1} into G folds whose sizes differ by at most one.
GroupPartition random_split(Index n, int folds, std::uint64_t seed);

struct CrossFit {
  std::vector<LfdrModel> models;      // models[g] is fitted without fold g
  std::vector<RejectionFunction> phi;  // per hypothesis, from its fold's model
};

/// Fits one model per fold on the complement of that fold.
CrossFit cross_fit(const PValueSet& pvals, const CovariateSet& covars,
                   const GroupPartition& part, const EmOptions& options = {});

/// (1 - 1e-9) min_{i in fold} phi_i(1/2).
double fbc_upper_bound(const std::vector<RejectionFunction>& phi,
                       const std::vector<Index>& members);

/// FBC threshold of every fold at level alpha_fbc; rejections are global.
std::vector<ThresholdResult> fbc_group_thresholds(
    const PValueSet& pvals, const GroupPartition& part,
    const std::vector<RejectionFunction>& phi, double alpha_fbc);

/// Per fold: sum_j 1{phi_j(1 - p_j) <= T_{g,j}} where T_{g,j} replaces p_j by
/// min(p_j, 1 - p_j).
std::vector<long> fbc_loo_mirror_counts(const PValueSet& pvals,
                                        const GroupPartition& part,
                                        const std::vector<RejectionFunction>& phi,
                                        double alpha_fbc);

enum class StructureWeights { Unit, Full, Cheap };

/// Full weights refit the other folds' models with p_i replaced by each of
/// 0, 1/22, ..., 21/22, 1 and by the realized p_i, and take the largest
/// cross-fold mirror count.
Vector structure_weights(const PValueSet& pvals, const CovariateSet& covars,
                         const GroupPartition& part, const CrossFit& fit,
                         double alpha_fbc, StructureWeights mode,
                         const EmOptions& options = {});

/// e_i = n_g w_i 1{phi_i(p_i) <= T_g} / (1 + #{j in G_g : phi_j(1 - p_j) <= T_g}).
EValueSet structure_evalues(const PValueSet& pvals, const GroupPartition& part,
                            const std::vector<RejectionFunction>& phi,
                            const std::vector<ThresholdResult>& thresholds,
                            const Vector& weights);

struct StructureConfig {
  double alpha_ebh = 0.1;
  double alpha_fbc = 0.1 / 1.1;
  StructureWeights mode = StructureWeights::Cheap;
  int folds = 2;
  std::uint64_t seed = 1;
  EmOptions em;

  /// alpha_fbc = alpha / (1 + alpha).
  static StructureConfig defaults(double alpha_ebh, StructureWeights mode,
                                  std::uint64_t seed = 1);
  void validate() const;
};

struct StructureResult {
  GroupPartition partition = GroupPartition::single(1);
  CrossFit fit;
  std::vector<ThresholdResult> thresholds;
  Vector weights;
  EValueSet evalues = EValueSet::zeros(0);
  RejectionSet rejected;
};

StructureResult run_structure_adaptive(const PValueSet& pvals,
                                       const CovariateSet& covars,
                                       const StructureConfig& config);

}  // namespace evmt

#endif  // EVMT_STRUCTURE_HPP
