#include "evmt/procedures.hpp"

#include "evmt/mirror.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace evmt {

namespace {

std::vector<double> sorted_values(const Vector& v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  return s;
}

RejectionSet indices_at_or_below(const Vector& scores, double t) {
  std::vector<Index> idx;
  for (Index i = 0; i < scores.size(); ++i)
    if (scores[i] <= t) idx.push_back(i);
  return RejectionSet(std::move(idx));
}

// BH and Storey share m(t) = n * scale * t with R_i(t) = 1{p_i <= t}.
ThresholdResult linear_threshold(const PValueSet& pvals, double alpha,
                                 double scale) {
  const Index n = pvals.size();
  const auto sorted = sorted_values(pvals.values());
  const double nscale = static_cast<double>(n) * scale;

  // Walk down the distinct grid values; the first feasible one is the grid
  // supremum. Its count k gives the plateau supremum k alpha / (n scale).
  Index k_hat = 0;
  for (Index k = n; k >= 1; --k) {
    const double t = sorted[k - 1];
    if (k < n && sorted[k] == t) continue;  // count ties at their last slot
    if (nscale * t / static_cast<double>(k) <= alpha) {
      k_hat = k;
      break;
    }
  }

  ThresholdResult out;
  if (k_hat == 0) return out;
  const double m = static_cast<double>(k_hat) * alpha;
  double t = m / nscale;
  if (t >= 1.0) {
    t = 1.0;
    out.m_at_T = nscale;
  } else {
    out.m_at_T = m;
  }
  out.threshold = t;
  out.rejected = indices_at_or_below(pvals.values(), sorted[k_hat - 1]);
  return out;
}

ThresholdResult mirror_threshold(const Vector& a, const Vector& b,
                                 double alpha, ThresholdDomain domain) {
  MirrorSweep sweep({a.data(), static_cast<std::size_t>(a.size())},
                    {b.data(), static_cast<std::size_t>(b.size())}, alpha,
                    domain);
  ThresholdResult out;
  const auto t = sweep.threshold();
  if (!t) return out;
  out.threshold = *t;
  out.m_at_T = static_cast<double>(sweep.mirror_count(*t));
  out.rejected = indices_at_or_below(a, *t);
  return out;
}

void fbc_scores(const PValueSet& pvals, const ProcedureSpec& spec, Vector& a,
                Vector& b) {
  const Index n = pvals.size();
  a.resize(n);
  b.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& phi = spec.rejection_functions[static_cast<std::size_t>(i)];
    a[i] = phi(pvals[i]);
    b[i] = phi(1.0 - pvals[i]);
  }
}

}  // namespace

void ProcedureSpec::validate(Index n) const {
  require_probability_open(alpha, "alpha");
  if (kind == Procedure::Storey && !(storey_lambda >= 0.0 && storey_lambda < 1.0))
    throw ConfigError("storey lambda must lie in [0, 1)");
  if (kind != Procedure::FBC) return;

  if (static_cast<Index>(rejection_functions.size()) != n)
    throw ConfigError("FBC needs one rejection function per hypothesis");
  double min_half = std::numeric_limits<double>::infinity();
  constexpr int kProbes = 21;
  for (const auto& phi : rejection_functions) {
    if (!phi) throw ConfigError("FBC rejection function is empty");
    double prev = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < kProbes; ++k) {
      const double v = phi(static_cast<double>(k) / (kProbes - 1));
      if (std::isnan(v) || v < prev)
        throw ConfigError("FBC rejection function is not monotone increasing");
      prev = v;
    }
    min_half = std::min(min_half, phi(0.5));
  }
  if (!(t_upper > 0.0 && t_upper < min_half))
    throw ConfigError("FBC t_upper must lie in (0, min_i phi_i(0.5))");
}

ProcedureSpec bh_spec(double alpha) {
  ProcedureSpec s;
  s.kind = Procedure::BH;
  s.alpha = alpha;
  return s;
}

ProcedureSpec storey_spec(double alpha, double lambda) {
  ProcedureSpec s;
  s.kind = Procedure::Storey;
  s.alpha = alpha;
  s.storey_lambda = lambda;
  return s;
}

ProcedureSpec bc_spec(double alpha) {
  ProcedureSpec s;
  s.kind = Procedure::BC;
  s.alpha = alpha;
  return s;
}

ProcedureSpec fbc_spec(double alpha, std::vector<RejectionMap> phi,
                       double t_upper) {
  ProcedureSpec s;
  s.kind = Procedure::FBC;
  s.alpha = alpha;
  s.rejection_functions = std::move(phi);
  s.t_upper = t_upper;
  return s;
}

double storey_pi0(const PValueSet& pvals, double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw ConfigError("storey lambda must lie in [0, 1)");
  const Index n = pvals.size();
  const auto r = (pvals.values().array() <= lambda).count();
  return (1.0 + static_cast<double>(n - r)) /
         ((1.0 - lambda) * static_cast<double>(n));
}

ThresholdResult solve_threshold(const PValueSet& pvals,
                                const ProcedureSpec& spec) {
  spec.validate(pvals.size());
  switch (spec.kind) {
    case Procedure::BH:
      return linear_threshold(pvals, spec.alpha, 1.0);
    case Procedure::Storey:
      return linear_threshold(pvals, spec.alpha,
                              storey_pi0(pvals, spec.storey_lambda));
    case Procedure::BC: {
      const Vector q = (1.0 - pvals.values().array()).matrix();
      return mirror_threshold(pvals.values(), q, spec.alpha, {0.5, false});
    }
    case Procedure::FBC: {
      Vector a, b;
      fbc_scores(pvals, spec, a, b);
      return mirror_threshold(a, b, spec.alpha, {spec.t_upper, true});
    }
  }
  throw std::logic_error("unknown procedure kind");
}

EValueSet procedure_to_evalues(const PValueSet& pvals,
                               const ProcedureSpec& spec,
                               const ThresholdResult& result) {
  const Index n = pvals.size();
  if (!result.feasible()) return EValueSet::zeros(n);
  if (!(result.m_at_T > 0.0))
    throw std::logic_error("feasible threshold with m(T) = 0");

  const double e = static_cast<double>(n) / result.m_at_T;
  Vector out = Vector::Zero(n);
  for (Index i : result.rejected.indices()) out[i] = e;
  (void)spec;
  return EValueSet(std::move(out));
}

RejectionSet ebh_select(const EValueSet& evals, double alpha) {
  require_probability_open(alpha, "alpha");
  const Index n = evals.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index l, Index r) {
    return evals[l] > evals[r];
  });

  Index k_hat = 0;
  for (Index i = n; i >= 1; --i) {
    if (evals[order[static_cast<std::size_t>(i - 1)]] >= ebh_cutoff(n, i, alpha)) {
      k_hat = i;
      break;
    }
  }
  if (k_hat == 0) return {};

  const double cutoff = evals[order[static_cast<std::size_t>(k_hat - 1)]];
  std::vector<Index> idx;
  for (Index i = 0; i < n; ++i)
    if (evals[i] >= cutoff) idx.push_back(i);
  return RejectionSet(std::move(idx));
}

FdpPower fdp_power(const RejectionSet& rejected, const Truth& truth) {
  std::vector<Index> all(truth.size());
  std::iota(all.begin(), all.end(), Index{0});
  return fdp_power(rejected, truth, all);
}

FdpPower fdp_power(const RejectionSet& rejected, const Truth& truth,
                   std::span<const Index> members) {
  if (!rejected.empty() &&
      rejected.indices().back() >= static_cast<Index>(truth.size()))
    throw InputError("rejection index exceeds truth length");
  long rejections = 0, false_rej = 0, true_rej = 0, non_null = 0;
  for (Index i : members) {
    if (i < 0 || i >= static_cast<Index>(truth.size()))
      throw InputError("truth vector shorter than hypothesis index");
    const bool alt = truth[static_cast<std::size_t>(i)] != 0;
    const bool rej = rejected.contains(i);
    non_null += alt;
    rejections += rej;
    false_rej += rej && !alt;
    true_rej += rej && alt;
  }
  FdpPower out;
  out.fdp = static_cast<double>(false_rej) /
            static_cast<double>(std::max(1L, rejections));
  out.power = static_cast<double>(true_rej) /
              static_cast<double>(std::max(1L, non_null));
  return out;
}

}  // namespace evmt
