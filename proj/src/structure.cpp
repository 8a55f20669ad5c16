#include "evmt/structure.hpp"

#include "evmt/mirror.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace evmt {

namespace {

// FBC scores of one fold: a = phi(p), b = phi(1 - p).
struct FoldSweep {
  std::vector<double> a;
  std::vector<double> b;
  double t_up;
  MirrorSweep sweep;

  FoldSweep(const Vector& p, const std::vector<Index>& members,
            const std::vector<RejectionFunction>& phi, double alpha)
      : a(scores(p, members, phi, false)),
        b(scores(p, members, phi, true)),
        t_up(fbc_upper_bound(phi, members)),
        sweep(a, b, alpha, ThresholdDomain{t_up, true}) {}

  static std::vector<double> scores(const Vector& p,
                                    const std::vector<Index>& members,
                                    const std::vector<RejectionFunction>& phi,
                                    bool mirror) {
    std::vector<double> s;
    s.reserve(members.size());
    for (Index i : members) {
      const auto& f = phi[static_cast<std::size_t>(i)];
      s.push_back(mirror ? f(1.0 - p[i]) : f(p[i]));
    }
    return s;
  }

  // sum_k 1{b_k <= T_{k}} with p_k -> min(p_k, 1 - p_k).
  long loo_hits(const Vector& p, const std::vector<Index>& members) const {
    long c = 0;
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (!(p[members[k]] > 0.5)) continue;
      const auto t = sweep.swapped_threshold(b[k]);
      c += t && b[k] <= *t;
    }
    return c;
  }
};

std::vector<RejectionFunction> fold_functions(const LfdrModel& model,
                                              const Matrix& design,
                                              const std::vector<Index>& members,
                                              std::vector<RejectionFunction> phi) {
  for (Index i : members)
    phi[static_cast<std::size_t>(i)] = model.rejection_function(design.row(i));
  return phi;
}

std::vector<Index> complement(const GroupPartition& part, int g) {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(part.size() - part.group_size(g)));
  for (Index i = 0; i < part.size(); ++i)
    if (part.label(i) != g) out.push_back(i);
  return out;
}

LfdrModel fit_on(const Vector& p, const CovariateSet& covars,
                 const std::vector<Index>& rows, const EmOptions& options,
                 const LfdrModel* warm) {
  return fit_lfdr_em(PValueSet(Vector(p(rows))), covars.subset(rows), options,
                     warm);
}

}  // namespace

GroupPartition random_split(Index n, int folds, std::uint64_t seed) {
  if (folds < 1) throw ConfigError("number of folds must be positive");
  if (n < folds) throw ConfigError("more folds than hypotheses");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < order.size(); ++k)
    labels[static_cast<std::size_t>(order[k])] = static_cast<int>(k % folds);
  return GroupPartition(std::move(labels));
}

CrossFit cross_fit(const PValueSet& pvals, const CovariateSet& covars,
                   const GroupPartition& part, const EmOptions& options) {
  if (part.size() != pvals.size() || covars.size() != pvals.size())
    throw InputError("p-values, covariates and partition differ in length");
  if (part.groups() < 2) throw ConfigError("cross-fitting needs at least two folds");
  const Matrix design = covars.design();
  CrossFit out;
  out.phi.resize(static_cast<std::size_t>(pvals.size()));
  for (int g = 0; g < part.groups(); ++g) {
    const auto rows = complement(part, g);
    if (static_cast<Index>(rows.size()) < 2 * (covars.dim() + 1))
      throw ConfigError("fold complement too small for the EM fit");
    out.models.push_back(fit_on(pvals.values(), covars, rows, options, nullptr));
    out.phi = fold_functions(out.models.back(), design, part.members(g),
                             std::move(out.phi));
  }
  return out;
}

double fbc_upper_bound(const std::vector<RejectionFunction>& phi,
                       const std::vector<Index>& members) {
  double lo = 1.0;
  for (Index i : members) lo = std::min(lo, phi[static_cast<std::size_t>(i)](0.5));
  return (1.0 - 1e-9) * lo;
}

std::vector<ThresholdResult> fbc_group_thresholds(
    const PValueSet& pvals, const GroupPartition& part,
    const std::vector<RejectionFunction>& phi, double alpha_fbc) {
  require_probability_open(alpha_fbc, "alpha_fbc");
  if (static_cast<Index>(phi.size()) != pvals.size() || part.size() != pvals.size())
    throw InputError("rejection functions do not match the p-values");
  std::vector<ThresholdResult> out;
  for (int g = 0; g < part.groups(); ++g) {
    const auto& members = part.members(g);
    const FoldSweep fs(pvals.values(), members, phi, alpha_fbc);
    ThresholdResult r;
    r.threshold = fs.sweep.threshold();
    if (r.threshold) {
      r.m_at_T = static_cast<double>(fs.sweep.mirror_count(*r.threshold));
      std::vector<Index> rej;
      for (std::size_t k = 0; k < members.size(); ++k)
        if (fs.a[k] <= *r.threshold) rej.push_back(members[k]);
      r.rejected = RejectionSet(std::move(rej));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<long> fbc_loo_mirror_counts(const PValueSet& pvals,
                                        const GroupPartition& part,
                                        const std::vector<RejectionFunction>& phi,
                                        double alpha_fbc) {
  std::vector<long> out;
  for (int g = 0; g < part.groups(); ++g) {
    const FoldSweep fs(pvals.values(), part.members(g), phi, alpha_fbc);
    out.push_back(fs.loo_hits(pvals.values(), part.members(g)));
  }
  return out;
}

Vector structure_weights(const PValueSet& pvals, const CovariateSet& covars,
                         const GroupPartition& part, const CrossFit& fit,
                         double alpha_fbc, StructureWeights mode,
                         const EmOptions& options) {
  const Index n = pvals.size();
  if (mode == StructureWeights::Unit) return Vector::Ones(n);
  if (static_cast<Index>(fit.phi.size()) != n || part.size() != n)
    throw InputError("cross-fit does not match the p-values");
  const auto thresholds = fbc_group_thresholds(pvals, part, fit.phi, alpha_fbc);
  const auto cheap = fbc_loo_mirror_counts(pvals, part, fit.phi, alpha_fbc);
  const long cheap_total = std::accumulate(cheap.begin(), cheap.end(), 0L);

  const bool full = mode == StructureWeights::Full;
  if (full && static_cast<int>(fit.models.size()) != part.groups())
    throw ConfigError("full weights need one fitted model per fold");
  const Matrix design = full ? covars.design() : Matrix();
  std::vector<std::vector<Index>> comps;
  if (full)
    for (int g = 0; g < part.groups(); ++g) comps.push_back(complement(part, g));

  EmOptions warm_opt = options;
  warm_opt.restarts = 0;

  Vector w(n);
  for (Index i = 0; i < n; ++i) {
    const int g = part.label(i);
    const auto& t = thresholds[static_cast<std::size_t>(g)];
    double own = 1.0;
    if (t.threshold) {
      own = t.m_at_T;  // 1 + #{j : b_j <= T}
      if (fit.phi[static_cast<std::size_t>(i)](1.0 - pvals[i]) <= *t.threshold)
        own -= 1.0;
    }
    long cross = cheap_total - cheap[static_cast<std::size_t>(g)];
    if (full) {
      Vector p = pvals.values();
      for (int k = 0; k <= 22; ++k) {
        p[i] = static_cast<double>(k) / 22.0;
        long s = 0;
        for (int h = 0; h < part.groups(); ++h) {
          if (h == g) continue;
          const auto& hm = fit.models[static_cast<std::size_t>(h)];
          const auto model = fit_on(p, covars, comps[static_cast<std::size_t>(h)],
                                    warm_opt, &hm);
          const auto phi = fold_functions(model, design, part.members(h), fit.phi);
          const FoldSweep fs(p, part.members(h), phi, alpha_fbc);
          s += fs.loo_hits(p, part.members(h));
        }
        cross = std::max(cross, s);
      }
    }
    const double scale =
        static_cast<double>(n) / static_cast<double>(part.group_size(g));
    w[i] = scale * own / (own + static_cast<double>(cross));
  }
  return w;
}

EValueSet structure_evalues(const PValueSet& pvals, const GroupPartition& part,
                            const std::vector<RejectionFunction>& phi,
                            const std::vector<ThresholdResult>& thresholds,
                            const Vector& weights) {
  Vector e = Vector::Zero(pvals.size());
  for (int g = 0; g < part.groups(); ++g) {
    const auto& t = thresholds[static_cast<std::size_t>(g)];
    if (!t.threshold) continue;
    const double ng = static_cast<double>(part.group_size(g));
    for (Index i : part.members(g))
      if (phi[static_cast<std::size_t>(i)](pvals[i]) <= *t.threshold)
        e[i] = ng * weights[i] / t.m_at_T;
  }
  return EValueSet(std::move(e));
}

StructureConfig StructureConfig::defaults(double alpha_ebh, StructureWeights mode,
                                          std::uint64_t seed) {
  require_probability_open(alpha_ebh, "alpha");
  StructureConfig c;
  c.alpha_ebh = alpha_ebh;
  c.alpha_fbc = alpha_ebh / (1.0 + alpha_ebh);
  c.mode = mode;
  c.seed = seed;
  return c;
}

void StructureConfig::validate() const {
  require_probability_open(alpha_ebh, "alpha_ebh");
  require_probability_open(alpha_fbc, "alpha_fbc");
  if (folds < 2) throw ConfigError("cross-fitting needs at least two folds");
}

StructureResult run_structure_adaptive(const PValueSet& pvals,
                                       const CovariateSet& covars,
                                       const StructureConfig& config) {
  config.validate();
  StructureResult out;
  out.partition = random_split(pvals.size(), config.folds, config.seed);
  out.fit = cross_fit(pvals, covars, out.partition, config.em);
  out.thresholds =
      fbc_group_thresholds(pvals, out.partition, out.fit.phi, config.alpha_fbc);
  out.weights = structure_weights(pvals, covars, out.partition, out.fit,
                                  config.alpha_fbc, config.mode, config.em);
  out.evalues = structure_evalues(pvals, out.partition, out.fit.phi,
                                  out.thresholds, out.weights);
  out.rejected = ebh_select(out.evalues, config.alpha_ebh);
  return out;
}

}  // namespace evmt
