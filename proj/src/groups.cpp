#include "evmt/groups.hpp"

#include "evmt/mirror.hpp"

#include <algorithm>
#include <map>

namespace evmt {

namespace {

constexpr ThresholdDomain kBcDomain{0.5, false};

struct GroupSweep {
  Vector a;
  Vector b;
  MirrorSweep sweep;

  GroupSweep(Vector p, double alpha)
      : a(std::move(p)),
        b((1.0 - a.array()).matrix()),
        sweep({a.data(), static_cast<std::size_t>(a.size())},
              {b.data(), static_cast<std::size_t>(b.size())}, alpha,
              kBcDomain) {}
};

}  // namespace

GroupPartition::GroupPartition(std::vector<int> labels,
                               std::vector<std::string> names)
    : labels_(std::move(labels)), names_(std::move(names)) {
  if (labels_.empty()) throw InputError("group partition is empty");
  const int max_label = *std::max_element(labels_.begin(), labels_.end());
  if (*std::min_element(labels_.begin(), labels_.end()) < 0)
    throw InputError("negative group label");
  members_.resize(static_cast<std::size_t>(max_label) + 1);
  for (std::size_t i = 0; i < labels_.size(); ++i)
    members_[static_cast<std::size_t>(labels_[i])].push_back(
        static_cast<Index>(i));
  for (std::size_t g = 0; g < members_.size(); ++g)
    if (members_[g].empty())
      throw InputError("group " + std::to_string(g + 1) + " is empty");
  if (names_.empty())
    for (std::size_t g = 0; g < members_.size(); ++g)
      names_.push_back(std::to_string(g + 1));
  if (names_.size() != members_.size())
    throw InputError("group name count does not match group count");
}

GroupPartition GroupPartition::from_names(const std::vector<std::string>& names) {
  std::map<std::string, int> ids;
  std::vector<std::string> order;
  std::vector<int> labels;
  labels.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty())
      throw InputError("empty group label in row " + std::to_string(i + 1));
    auto [it, fresh] = ids.emplace(names[i], static_cast<int>(order.size()));
    if (fresh) order.push_back(names[i]);
    labels.push_back(it->second);
  }
  return GroupPartition(std::move(labels), std::move(order));
}

GroupPartition GroupPartition::single(Index n) {
  return GroupPartition(std::vector<int>(static_cast<std::size_t>(n), 0));
}

GroupPartition GroupPartition::blocks(const std::vector<Index>& sizes) {
  std::vector<int> labels;
  for (std::size_t g = 0; g < sizes.size(); ++g)
    labels.insert(labels.end(), static_cast<std::size_t>(sizes[g]),
                  static_cast<int>(g));
  return GroupPartition(std::move(labels));
}

Vector GroupPartition::restrict(const Vector& v, int g) const {
  return v(members(g));
}

std::vector<ThresholdResult> groupwise_bc_thresholds(const PValueSet& pvals,
                                                     const GroupPartition& part,
                                                     double alpha) {
  require_probability_open(alpha, "alpha");
  if (part.size() != pvals.size())
    throw InputError("group partition and p-values differ in length");
  std::vector<ThresholdResult> out;
  out.reserve(static_cast<std::size_t>(part.groups()));
  for (int g = 0; g < part.groups(); ++g) {
    GroupSweep gs(part.restrict(pvals.values(), g), alpha);
    ThresholdResult r;
    if (const auto t = gs.sweep.threshold()) {
      r.threshold = t;
      r.m_at_T = static_cast<double>(gs.sweep.mirror_count(*t));
      std::vector<Index> idx;
      for (Index k = 0; k < gs.a.size(); ++k)
        if (gs.a[k] <= *t) idx.push_back(part.members(g)[static_cast<std::size_t>(k)]);
      r.rejected = RejectionSet(std::move(idx));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::optional<double> loo_group_threshold(const PValueSet& pvals,
                                          const GroupPartition& part,
                                          double alpha, Index i) {
  require_probability_open(alpha, "alpha");
  const int g = part.label(i);
  GroupSweep gs(part.restrict(pvals.values(), g), alpha);
  if (pvals[i] <= 0.5) return gs.sweep.threshold();
  return gs.sweep.swapped_threshold(1.0 - pvals[i]);
}

std::vector<long> loo_mirror_counts(const PValueSet& pvals,
                                    const GroupPartition& part, double alpha) {
  std::vector<long> out(static_cast<std::size_t>(part.groups()), 0);
  for (int g = 0; g < part.groups(); ++g) {
    GroupSweep gs(part.restrict(pvals.values(), g), alpha);
    long c = 0;
    for (Index k = 0; k < gs.a.size(); ++k) {
      if (!(gs.a[k] > 0.5)) continue;
      const auto t = gs.sweep.swapped_threshold(gs.b[k]);
      c += t && gs.b[k] <= *t;
    }
    out[static_cast<std::size_t>(g)] = c;
  }
  return out;
}

namespace {

long mirror_hits(const PValueSet& pvals, const std::vector<Index>& members,
                 const ThresholdResult& r) {
  if (!r.feasible()) return 0;
  long c = 0;
  for (Index j : members) c += (1.0 - pvals[j]) <= *r.threshold;
  return c;
}

}  // namespace

Vector assemble_weights(const PValueSet& pvals, const GroupPartition& part,
                        const std::vector<ThresholdResult>& thresholds,
                        WeightScheme scheme, double alpha) {
  const Index n = pvals.size();
  const int L = part.groups();
  Vector w = Vector::Ones(n);
  switch (scheme) {
    case WeightScheme::Unit:
      return w;
    case WeightScheme::SizeAdjusted:
      for (Index i = 0; i < n; ++i)
        w[i] = static_cast<double>(n) /
               (static_cast<double>(L) *
                static_cast<double>(part.group_size(part.label(i))));
      return w;
    case WeightScheme::Adaptive:
      break;
  }

  const auto loo = loo_mirror_counts(pvals, part, alpha);
  long loo_total = 0;
  for (long c : loo) loo_total += c;
  for (int g = 0; g < L; ++g) {
    const auto& r = thresholds[static_cast<std::size_t>(g)];
    const long hits = mirror_hits(pvals, part.members(g), r);
    const long others = loo_total - loo[static_cast<std::size_t>(g)];
    const double scale = static_cast<double>(n) /
                         static_cast<double>(part.group_size(g));
    for (Index i : part.members(g)) {
      const bool self = r.feasible() && (1.0 - pvals[i]) <= *r.threshold;
      const double own = 1.0 + static_cast<double>(hits - (self ? 1 : 0));
      w[i] = scale * own / (own + static_cast<double>(others));
    }
  }
  return w;
}

EValueSet group_evalues(const PValueSet& pvals, const GroupPartition& part,
                        const std::vector<ThresholdResult>& thresholds,
                        const Vector& weights) {
  Vector e = Vector::Zero(pvals.size());
  for (int g = 0; g < part.groups(); ++g) {
    const auto& r = thresholds[static_cast<std::size_t>(g)];
    if (!r.feasible()) continue;
    const double denom =
        1.0 + static_cast<double>(mirror_hits(pvals, part.members(g), r));
    const double ng = static_cast<double>(part.group_size(g));
    for (Index i : r.rejected.indices()) e[i] = ng * weights[i] / denom;
  }
  return EValueSet(std::move(e));
}

GroupReport run_algorithm1(const PValueSet& pvals, const GroupPartition& part,
                           double alpha, WeightScheme scheme) {
  GroupReport rep;
  rep.thresholds = groupwise_bc_thresholds(pvals, part, alpha);
  rep.weights = assemble_weights(pvals, part, rep.thresholds, scheme, alpha);
  rep.evalues = group_evalues(pvals, part, rep.thresholds, rep.weights);
  rep.rejected = ebh_select(rep.evalues, alpha);
  rep.group_rejected.resize(static_cast<std::size_t>(part.groups()));
  std::vector<std::vector<Index>> per(static_cast<std::size_t>(part.groups()));
  for (Index i : rep.rejected.indices())
    per[static_cast<std::size_t>(part.label(i))].push_back(i);
  for (int g = 0; g < part.groups(); ++g)
    rep.group_rejected[static_cast<std::size_t>(g)] =
        RejectionSet(std::move(per[static_cast<std::size_t>(g)]));
  return rep;
}

GroupMetrics group_metrics(const RejectionSet& rejected, const Truth& truth,
                           const GroupPartition& part) {
  if (static_cast<Index>(truth.size()) != part.size())
    throw InputError("truth vector and partition differ in length");
  GroupMetrics m;
  m.overall = fdp_power(rejected, truth);
  for (int g = 0; g < part.groups(); ++g)
    m.per_group.push_back(fdp_power(rejected, truth, part.members(g)));
  return m;
}

}  // namespace evmt
