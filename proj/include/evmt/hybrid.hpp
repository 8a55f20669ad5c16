#ifndef EVMT_HYBRID_HPP
#define EVMT_HYBRID_HPP

#include "evmt/mirror.hpp"
#include "evmt/procedures.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace evmt {

enum class HybridMode { Averaged, Adaptive, FastAdaptive };

struct HybridConfig {
  double alpha_ebh = 0.05;
  double alpha_bh = 0.025;
  double alpha_bc = 0.025;
  HybridMode mode = HybridMode::Averaged;

  /// alpha/2 for the averaged mode, alpha/(1+alpha) for the adaptive modes.
  static HybridConfig defaults(double alpha_ebh, HybridMode mode);
  void validate() const;
};

/// e_i = 1{p_i <= T_BH} / T_BH with the plateau threshold.
EValueSet bh_evalues(const PValueSet& pvals, double alpha_bh);

/// e_i = n 1{p_i <= T_BC} / (1 + #{1 - p_j <= T_BC}).
EValueSet bc_evalues(const PValueSet& pvals, double alpha_bc);

/// Leave-one-out thresholds feeding the adaptive hybrid weights.
///   t_bh(i):  BH threshold on min(p, 1 - p) with position i set to 0
///   t_bc(j):  BC threshold with p_j -> min(p_j, 1 - p_j)
///   t_bc_pair(j, i): as t_bc(j) with additionally p_i -> 0
class LooThresholds {
 public:
  LooThresholds(const PValueSet& pvals, double alpha_bh, double alpha_bc);

  Index size() const noexcept { return static_cast<Index>(p_.size()); }
  double t_bh(Index i) const { return t_bh_[static_cast<std::size_t>(i)]; }
  double max_t_bh() const noexcept { return max_t_bh_; }
  std::optional<double> t_bc() const { return bc_.threshold(); }
  std::optional<double> t_bc(Index j) const;
  /// Threshold of the doubly edited instance over the original grid; O(n).
  std::optional<double> t_bc_pair(Index j, Index i) const;

  /// 1{1 - p_j <= T_BC}, 1{1 - p_j <= T_{BC,j}} and 1{1 - p_j <= T_{BC,j,i}}.
  bool mirror_hit(Index j) const;
  bool loo_hit(Index j) const;
  bool pair_hit(Index j, Index i) const;

  /// sum_{j != i} pair_hit(j, i) for every i; O(n k log n) where k counts
  /// the j whose mirror could be reached at all.
  std::vector<long> pair_hit_counts() const;
  /// sum_{j != i} loo_hit(j) for every i.
  std::vector<long> loo_hit_counts() const;

 private:
  std::vector<double> p_;
  std::vector<double> q_;
  double alpha_bc_;
  MirrorSweep bc_;
  std::vector<double> t_bh_;
  double max_t_bh_ = 0.0;
};

struct HybridWeights {
  Vector bh;
  Vector bc;
};

/// Leave-one-out weights with T_{BC,j,i} in the BH weight.
HybridWeights adaptive_weights(const PValueSet& pvals, const LooThresholds& loo);
/// Same with T_{BC,j} in place of T_{BC,j,i}.
HybridWeights fast_adaptive_weights(const PValueSet& pvals,
                                    const LooThresholds& loo);

struct HybridResult {
  RejectionSet rejected;
  EValueSet evalues = EValueSet::zeros(0);
  EValueSet e_bh = EValueSet::zeros(0);
  EValueSet e_bc = EValueSet::zeros(0);
  HybridWeights weights;
};

HybridResult run_hybrid(const PValueSet& pvals, const HybridConfig& config);

}  // namespace evmt

#endif  // EVMT_HYBRID_HPP
