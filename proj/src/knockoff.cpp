#include "evmt/knockoff.hpp"

#include "evmt/mirror.hpp"

#include <algorithm>
#include <vector>

namespace evmt {

KnockoffStatSet::KnockoffStatSet(Vector w) : w_(std::move(w)) {
  if (w_.size() == 0) throw InputError("knockoff statistics are empty");
  if (!w_.allFinite()) throw InputError("knockoff statistics must be finite");
}

KnockoffStatSet::KnockoffStatSet(std::initializer_list<double> w)
    : KnockoffStatSet(Vector(Eigen::Map<const Vector>(
          w.begin(), static_cast<Index>(w.size())))) {}

ThresholdResult knockoff_threshold(const KnockoffStatSet& stats,
                                   double alpha_ko) {
  require_probability_open(alpha_ko, "alpha_ko");
  const Vector& w = stats.values();
  std::vector<double> pos, neg, cand;  // pos: W > 0, neg: -W for W < 0
  for (double v : w) {
    if (v > 0) pos.push_back(v);
    if (v < 0) neg.push_back(-v);
    if (v != 0) cand.push_back(std::abs(v));
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  const auto at_least = [](const std::vector<double>& s, double t) {
    return static_cast<long>(s.end() - std::lower_bound(s.begin(), s.end(), t));
  };
  ThresholdResult r;
  for (double t : cand) {
    const long fp = 1 + at_least(neg, t);
    if (ratio_ok(fp, at_least(pos, t), alpha_ko)) {
      r.threshold = t;
      r.m_at_T = static_cast<double>(fp);
      std::vector<Index> sel;
      for (Index j = 0; j < w.size(); ++j)
        if (w[j] >= t) sel.push_back(j);
      r.rejected = RejectionSet(std::move(sel));
      break;
    }
  }
  return r;
}

EValueSet knockoff_evalues(const KnockoffStatSet& stats, double alpha_ko) {
  const auto t = knockoff_threshold(stats, alpha_ko);
  Vector e = Vector::Zero(stats.size());
  const double p = static_cast<double>(stats.size());
  for (Index j : t.rejected.indices()) e[j] = p / t.m_at_T;
  return EValueSet(std::move(e));
}

KnockoffCombination combine_knockoffs(const KnockoffStatSet& a,
                                      const KnockoffStatSet& b,
                                      double alpha_ebh, double w1, double w2) {
  require_probability_open(alpha_ebh, "alpha_ebh");
  if (!(w1 >= 0.0 && w2 >= 0.0) || w1 + w2 > 1.0)
    throw ConfigError("combination weights must be nonnegative with sum <= 1");
  if (a.size() != b.size())
    throw InputError("knockoff statistic families differ in length");
  KnockoffCombination out;
  out.e_a = knockoff_evalues(a, alpha_ebh / 2.0);
  out.e_b = knockoff_evalues(b, alpha_ebh / 2.0);
  out.evalues = EValueSet((w1 * out.e_a.values() + w2 * out.e_b.values()).eval());
  out.rejected = ebh_select(out.evalues, alpha_ebh);
  return out;
}

RejectionSet combine_and_select(const KnockoffStatSet& a,
                                const KnockoffStatSet& b, double alpha_ebh,
                                double w1, double w2) {
  return combine_knockoffs(a, b, alpha_ebh, w1, w2).rejected;
}

}  // namespace evmt
