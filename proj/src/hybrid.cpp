#include "evmt/hybrid.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace evmt {

namespace {

constexpr ThresholdDomain kBcDomain{0.5, false};

std::vector<double> to_std(const Vector& v) {
  return {v.data(), v.data() + v.size()};
}

std::vector<double> mirrored(const std::vector<double>& p) {
  std::vector<double> q(p.size());
  std::transform(p.begin(), p.end(), q.begin(),
                 [](double v) { return 1.0 - v; });
  return q;
}

// BH threshold on min(p, 1 - p) with one coordinate zeroed, for every
// coordinate. With s the sorted values and r the rank of the zeroed entry,
// the edited order statistics are 0, s_1..s_{r-1}, s_{r+1}..s_n.
std::vector<double> bh_loo_thresholds(const std::vector<double>& p,
                                      double alpha) {
  const auto n = static_cast<Index>(p.size());
  const double nd = static_cast<double>(n);
  std::vector<double> tilde(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) tilde[i] = std::min(p[i], 1.0 - p[i]);
  std::vector<Index> order(p.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index l, Index r) { return tilde[l] < tilde[r]; });
  const auto s = [&](Index k) { return tilde[order[k - 1]]; };  // one-based
  const auto ok = [&](double v, Index k) {
    return nd * v / static_cast<double>(k) <= alpha;
  };

  Index k_orig = 0;
  for (Index k = n; k >= 1; --k)
    if (ok(s(k), k)) {
      k_orig = k;
      break;
    }
  // shifted[r] = max{ 2 <= k <= r : s_{k-1} <= k alpha / n }, or 1.
  std::vector<Index> shifted(static_cast<std::size_t>(n) + 1, 1);
  for (Index r = 2; r <= n; ++r)
    shifted[r] = ok(s(r - 1), r) ? r : shifted[r - 1];

  std::vector<double> out(p.size());
  for (Index r = 1; r <= n; ++r) {
    const Index k = k_orig > r ? k_orig : shifted[r];
    out[static_cast<std::size_t>(order[r - 1])] =
        std::min(1.0, static_cast<double>(k) * alpha / nd);
  }
  return out;
}

}  // namespace

HybridConfig HybridConfig::defaults(double alpha_ebh, HybridMode mode) {
  require_probability_open(alpha_ebh, "alpha");
  HybridConfig c;
  c.alpha_ebh = alpha_ebh;
  c.mode = mode;
  const double base = mode == HybridMode::Averaged ? alpha_ebh / 2.0
                                                   : alpha_ebh / (1.0 + alpha_ebh);
  c.alpha_bh = base;
  c.alpha_bc = base;
  return c;
}

void HybridConfig::validate() const {
  require_probability_open(alpha_ebh, "alpha_ebh");
  require_probability_open(alpha_bh, "alpha_bh");
  require_probability_open(alpha_bc, "alpha_bc");
}

EValueSet bh_evalues(const PValueSet& pvals, double alpha_bh) {
  const auto spec = bh_spec(alpha_bh);
  return procedure_to_evalues(pvals, spec, solve_threshold(pvals, spec));
}

EValueSet bc_evalues(const PValueSet& pvals, double alpha_bc) {
  const auto spec = bc_spec(alpha_bc);
  return procedure_to_evalues(pvals, spec, solve_threshold(pvals, spec));
}

LooThresholds::LooThresholds(const PValueSet& pvals, double alpha_bh,
                             double alpha_bc)
    : p_(to_std(pvals.values())),
      q_(mirrored(p_)),
      alpha_bc_(alpha_bc),
      bc_(p_, q_, alpha_bc, kBcDomain),
      t_bh_(bh_loo_thresholds(p_, alpha_bh)) {
  require_probability_open(alpha_bh, "alpha_bh");
  require_probability_open(alpha_bc, "alpha_bc");
  max_t_bh_ = *std::max_element(t_bh_.begin(), t_bh_.end());
}

std::optional<double> LooThresholds::t_bc(Index j) const {
  const auto k = static_cast<std::size_t>(j);
  if (p_[k] > 0.5) return bc_.swapped_threshold(q_[k]);
  return bc_.threshold();
}

std::optional<double> LooThresholds::t_bc_pair(Index j, Index i) const {
  if (i == j) throw std::invalid_argument("pair threshold needs j != i");
  const auto k = static_cast<std::size_t>(j);
  const auto l = static_cast<std::size_t>(i);
  if (!(p_[k] > 0.5))
    return bc_.swapped_and_zeroed_threshold(2.0, p_[l], q_[l]);
  return bc_.swapped_and_zeroed_threshold(q_[k], p_[l], q_[l]);
}

bool LooThresholds::mirror_hit(Index j) const {
  const auto t = bc_.threshold();
  return t && q_[static_cast<std::size_t>(j)] <= *t;
}

bool LooThresholds::loo_hit(Index j) const {
  const auto k = static_cast<std::size_t>(j);
  if (!(p_[k] > 0.5)) return false;
  const auto t = bc_.swapped_threshold(q_[k]);
  return t && q_[k] <= *t;
}

bool LooThresholds::pair_hit(Index j, Index i) const {
  const auto k = static_cast<std::size_t>(j);
  if (i == j || !(p_[k] > 0.5)) return false;
  const auto l = static_cast<std::size_t>(i);
  return bc_.swapped_and_zeroed_reaches(q_[k], p_[l], q_[l]);
}

std::vector<long> LooThresholds::pair_hit_counts() const {
  const Index n = size();
  std::vector<Index> reachable;
  for (Index j = 0; j < n; ++j) {
    const auto k = static_cast<std::size_t>(j);
    if (p_[k] > 0.5 && bc_.could_reach(q_[k])) reachable.push_back(j);
  }
  std::vector<char> base(static_cast<std::size_t>(n), 0);
  for (Index j : reachable) base[static_cast<std::size_t>(j)] = loo_hit(j);

  std::vector<long> out(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    long c = 0;
    for (Index j : reachable) {
      if (j == i) continue;
      const bool hit = pair_hit(j, i);
      if (base[static_cast<std::size_t>(j)] && !hit)
        throw std::logic_error("zeroing a p-value shrank a BC threshold");
      c += hit;
    }
    out[static_cast<std::size_t>(i)] = c;
  }
  return out;
}

std::vector<long> LooThresholds::loo_hit_counts() const {
  const Index n = size();
  std::vector<char> hit(static_cast<std::size_t>(n));
  long total = 0;
  for (Index j = 0; j < n; ++j) {
    hit[static_cast<std::size_t>(j)] = loo_hit(j);
    total += hit[static_cast<std::size_t>(j)];
  }
  std::vector<long> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = total - hit[static_cast<std::size_t>(i)];
  return out;
}

namespace {

HybridWeights weights_from_counts(const LooThresholds& loo,
                                  const std::vector<long>& bh_counts) {
  const Index n = loo.size();
  const double nd = static_cast<double>(n);
  long mirror_total = 0;
  for (Index j = 0; j < n; ++j) mirror_total += loo.mirror_hit(j);

  HybridWeights w{Vector(n), Vector(n)};
  for (Index i = 0; i < n; ++i) {
    const double t = loo.t_bh(i);
    const double bh_tail =
        (1.0 + static_cast<double>(bh_counts[static_cast<std::size_t>(i)])) / nd;
    w.bh[i] = t / (t + bh_tail);
    const double bc_tail =
        (1.0 + static_cast<double>(mirror_total - loo.mirror_hit(i))) / nd;
    w.bc[i] = bc_tail / (loo.max_t_bh() + bc_tail);
  }
  return w;
}

}  // namespace

HybridWeights adaptive_weights(const PValueSet& pvals, const LooThresholds& loo) {
  if (pvals.size() != loo.size())
    throw InputError("leave-one-out thresholds built for a different input");
  return weights_from_counts(loo, loo.pair_hit_counts());
}

HybridWeights fast_adaptive_weights(const PValueSet& pvals,
                                    const LooThresholds& loo) {
  if (pvals.size() != loo.size())
    throw InputError("leave-one-out thresholds built for a different input");
  return weights_from_counts(loo, loo.loo_hit_counts());
}

HybridResult run_hybrid(const PValueSet& pvals, const HybridConfig& config) {
  config.validate();
  const Index n = pvals.size();
  HybridResult out;
  out.e_bh = bh_evalues(pvals, config.alpha_bh);
  out.e_bc = bc_evalues(pvals, config.alpha_bc);

  switch (config.mode) {
    case HybridMode::Averaged:
      out.weights = {Vector::Constant(n, 0.5), Vector::Constant(n, 0.5)};
      break;
    case HybridMode::Adaptive:
      out.weights = adaptive_weights(
          pvals, LooThresholds(pvals, config.alpha_bh, config.alpha_bc));
      break;
    case HybridMode::FastAdaptive:
      out.weights = fast_adaptive_weights(
          pvals, LooThresholds(pvals, config.alpha_bh, config.alpha_bc));
      break;
  }

  out.evalues = EValueSet(
      (out.weights.bh.cwiseProduct(out.e_bh.values()) +
       out.weights.bc.cwiseProduct(out.e_bc.values()))
          .eval());
  out.rejected = ebh_select(out.evalues, config.alpha_ebh);
  return out;
}

}  // namespace evmt
