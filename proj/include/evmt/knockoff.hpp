#ifndef EVMT_KNOCKOFF_HPP
#define EVMT_KNOCKOFF_HPP

#include "evmt/procedures.hpp"

#include <initializer_list>

namespace evmt {

/// Signed feature statistics W_j; finite, zeros allowed.
class KnockoffStatSet {
 public:
  explicit KnockoffStatSet(Vector w);
  KnockoffStatSet(std::initializer_list<double> w);

  const Vector& values() const noexcept { return w_; }
  Index size() const noexcept { return w_.size(); }
  double operator[](Index j) const { return w_[j]; }

 private:
  Vector w_;
};

/// T = min{ t in {|W_j| : W_j != 0} : (1 + #{W <= -t}) / (1 v #{W >= t}) <= alpha }.
/// m_at_T holds 1 + #{W <= -T}; rejections are {W >= T}.
ThresholdResult knockoff_threshold(const KnockoffStatSet& stats, double alpha_ko);

/// e_j = p 1{W_j >= T} / (1 + #{W_j <= -T}).
EValueSet knockoff_evalues(const KnockoffStatSet& stats, double alpha_ko);

struct KnockoffCombination {
  EValueSet e_a = EValueSet::zeros(0);
  EValueSet e_b = EValueSet::zeros(0);
  EValueSet evalues = EValueSet::zeros(0);
  RejectionSet rejected;
};

/// w1 e_a + w2 e_b with both families converted at alpha_ebh / 2, then e-BH.
KnockoffCombination combine_knockoffs(const KnockoffStatSet& a,
                                      const KnockoffStatSet& b,
                                      double alpha_ebh, double w1 = 0.5,
                                      double w2 = 0.5);

RejectionSet combine_and_select(const KnockoffStatSet& a,
                                const KnockoffStatSet& b, double alpha_ebh,
                                double w1 = 0.5, double w2 = 0.5);

}  // namespace evmt

#endif  // EVMT_KNOCKOFF_HPP
