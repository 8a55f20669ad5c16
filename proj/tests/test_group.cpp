#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "evmt/groups.hpp"

#include <random>

using namespace evmt;

namespace {

// Leave-one-out BC threshold by recomputation on the edited group.
std::optional<double> loo_oracle(const std::vector<double>& p,
                                 const GroupPartition& part, double alpha,
                                 Index i) {
  std::vector<double> sub;
  for (Index j : part.members(part.label(i)))
    sub.push_back(j == i ? std::min(p[i], 1.0 - p[i]) : p[j]);
  return oracle::bc(sub, alpha).t;
}

Vector adaptive_oracle(const std::vector<double>& p, const GroupPartition& part,
                       double alpha) {
  const Index n = part.size();
  std::vector<std::optional<double>> t(part.groups());
  for (int g = 0; g < part.groups(); ++g) {
    std::vector<double> sub;
    for (Index j : part.members(g)) sub.push_back(p[j]);
    t[g] = oracle::bc(sub, alpha).t;
  }
  std::vector<long> loo(part.groups(), 0);
  for (Index j = 0; j < n; ++j) {
    const auto tj = loo_oracle(p, part, alpha, j);
    loo[part.label(j)] += tj && (1.0 - p[j]) <= *tj;
  }
  Vector w(n);
  for (Index i = 0; i < n; ++i) {
    const int g = part.label(i);
    double own = 1.0;
    for (Index j : part.members(g))
      if (j != i && t[g] && (1.0 - p[j]) <= *t[g]) own += 1.0;
    double others = 0.0;
    for (int h = 0; h < part.groups(); ++h)
      if (h != g) others += static_cast<double>(loo[h]);
    w[i] = static_cast<double>(n) / part.group_size(g) * own / (own + others);
  }
  return w;
}

GroupPartition random_partition(std::mt19937_64& rng, Index n, int L) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels[i] = static_cast<int>(i % L);
  std::shuffle(labels.begin(), labels.end(), rng);
  return GroupPartition(labels);
}

// Symmetric-ish p-values with many mirrored large values.
std::vector<double> mirrored_pvalues(std::mt19937_64& rng, Index n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(static_cast<std::size_t>(n));
  for (auto& v : p) {
    const double r = u(rng);
    v = r < 0.3 ? 0.02 * u(rng) : (r < 0.45 ? 1.0 - 0.02 * u(rng) : u(rng));
  }
  return p;
}

}  // namespace

TEST_CASE("partition construction") {
  const auto part = GroupPartition::from_names({"b", "a", "b", "c"});
  CHECK(part.groups() == 3);
  CHECK(part.label(2) == 0);
  CHECK(part.name(1) == "a");
  CHECK(part.group_size(0) == 2);
  CHECK_THROWS_AS(GroupPartition({0, 2}), InputError);
  CHECK_THROWS_AS(GroupPartition::from_names({"a", ""}), InputError);
  CHECK_THROWS_AS(GroupPartition(std::vector<int>{}), InputError);
}

TEST_CASE("single group reduces to BC") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 5 + rep;
    const auto pv = mirrored_pvalues(rng, n);
    const auto p = fixture::to_set(pv);
    const auto part = GroupPartition::single(n);
    const auto bc = solve_threshold(p, bc_spec(0.2));
    const auto groups = groupwise_bc_thresholds(p, part, 0.2);
    CHECK(groups[0].threshold == bc.threshold);
    CHECK(groups[0].rejected == bc.rejected);
    for (auto scheme : {WeightScheme::Unit, WeightScheme::Adaptive}) {
      const auto rep1 = run_algorithm1(p, part, 0.2, scheme);
      CHECK(rep1.rejected == bc.rejected);
      if (scheme == WeightScheme::Adaptive)
        CHECK((rep1.weights.array() == 1.0).all());
    }
  }
}

TEST_CASE("toy example") {
  const auto p = fixture::to_set(fixture::toy_pvalues());
  const auto part = fixture::toy_partition();
  const auto t = groupwise_bc_thresholds(p, part, 0.05);
  REQUIRE(t[0].feasible());
  REQUIRE(t[1].feasible());
  CHECK(t[0].m_at_T == 1.0);
  CHECK(t[1].m_at_T == 1.0);
  CHECK(t[0].rejected.size() == 20);
  CHECK(t[1].rejected.size() == 20);

  const auto unit = run_algorithm1(p, part, 0.05, WeightScheme::Unit);
  CHECK(unit.rejected.empty());
  CHECK(unit.evalues[0] == 100.0);
  CHECK(unit.evalues[100] == 1000.0);

  const auto ada = run_algorithm1(p, part, 0.05, WeightScheme::Adaptive);
  CHECK(ada.weights[0] == doctest::Approx(11.0));
  CHECK(ada.weights[100] == doctest::Approx(1.1));
  CHECK(ada.evalues[0] == doctest::Approx(1100.0));
  CHECK(ada.evalues[100] == doctest::Approx(1100.0));
  CHECK(ada.rejected.size() == 40);
  CHECK(ada.group_rejected[0].size() == 20);

  const auto size = assemble_weights(p, part, t, WeightScheme::SizeAdjusted, 0.05);
  CHECK(size[0] == doctest::Approx(5.5));
  CHECK(size[100] == doctest::Approx(0.55));
}

TEST_CASE("all ones rejects nothing") {
  const auto p = fixture::to_set(std::vector<double>(12, 1.0));
  const auto part = GroupPartition::blocks({5, 7});
  for (auto scheme : {WeightScheme::Unit, WeightScheme::SizeAdjusted,
                      WeightScheme::Adaptive}) {
    const auto rep = run_algorithm1(p, part, 0.1, scheme);
    CHECK(rep.rejected.empty());
    CHECK_FALSE(rep.thresholds[0].feasible());
  }
}

TEST_CASE("leave-one-out group threshold") {
  const auto p = fixture::to_set({0.9, 0.01, 0.02});
  const auto part = GroupPartition::single(3);
  const auto t = loo_group_threshold(p, part, 0.5, 0);
  CHECK(t == oracle::bc({1.0 - 0.9, 0.01, 0.02}, 0.5).t);
  const auto base = solve_threshold(p, bc_spec(0.5)).threshold;
  CHECK(loo_group_threshold(p, part, 0.5, 1) == base);

  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 150; ++rep) {
    const Index n = 6 + rep % 40;
    const auto pv = mirrored_pvalues(rng, n);
    const auto ps = fixture::to_set(pv);
    const auto gp = random_partition(rng, n, 1 + rep % 3);
    const double alpha = 0.1 + 0.05 * (rep % 8);
    const auto thr = groupwise_bc_thresholds(ps, gp, alpha);
    for (Index i = 0; i < n; ++i) {
      const auto got = loo_group_threshold(ps, gp, alpha, i);
      CHECK(got == loo_oracle(pv, gp, alpha, i));
      const auto& tl = thr[gp.label(i)];
      if (tl.feasible() && pv[i] <= *tl.threshold) CHECK(got == tl.threshold);
    }
  }
}

TEST_CASE("adaptive weights match exhaustive recomputation") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 120; ++rep) {
    const Index n = 8 + rep % 50;
    const auto pv = mirrored_pvalues(rng, n);
    const auto ps = fixture::to_set(pv);
    const auto gp = random_partition(rng, n, 1 + rep % 4);
    const double alpha = 0.1 + 0.05 * (rep % 8);
    const auto thr = groupwise_bc_thresholds(ps, gp, alpha);
    const Vector w = assemble_weights(ps, gp, thr, WeightScheme::Adaptive, alpha);
    const Vector ref = adaptive_oracle(pv, gp, alpha);
    CHECK((w - ref).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((w.array() >= 0.0).all());

    const auto report = run_algorithm1(ps, gp, alpha, WeightScheme::Adaptive);
    for (int g = 0; g < gp.groups(); ++g)
      for (Index i : report.group_rejected[g].indices())
        CHECK(thr[g].rejected.contains(i));
  }
}

TEST_CASE("leave-one-out thresholds agree when both mirrors are reached") {
  std::mt19937_64 rng(31);
  long probes = 0;
  for (int rep = 0; rep < 300; ++rep) {
    const Index n = 10 + rep % 30;
    const auto pv = mirrored_pvalues(rng, n);
    const auto ps = fixture::to_set(pv);
    const auto gp = GroupPartition::single(n);
    const double alpha = 0.2 + 0.05 * (rep % 6);
    std::vector<std::optional<double>> t(n);
    for (Index i = 0; i < n; ++i) t[i] = loo_group_threshold(ps, gp, alpha, i);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) {
        if (!t[i] && !t[j]) continue;
        const double tmax = std::max(t[i].value_or(-1.0), t[j].value_or(-1.0));
        if (std::max(1.0 - pv[i], 1.0 - pv[j]) <= tmax) {
          ++probes;
          CHECK(t[i] == t[j]);
        }
      }
  }
  CHECK(probes > 100);
}

TEST_CASE("weighted e-values satisfy the expectation bound under uniform nulls") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto part = GroupPartition::blocks({30, 70});
  const int reps = 10000;
  std::vector<double> sum(3, 0.0), sum2(3, 0.0);
  for (int r = 0; r < reps; ++r) {
    std::vector<double> p(100);
    for (auto& v : p) v = u(rng);
    const auto ps = fixture::to_set(p);
    int k = 0;
    for (auto s : {WeightScheme::Unit, WeightScheme::SizeAdjusted, WeightScheme::Adaptive}) {
      const double x = run_algorithm1(ps, part, 0.5, s).evalues.values().sum() / 100.0;
      sum[k] += x;
      sum2[k++] += x * x;
    }
  }
  for (int k = 0; k < 3; ++k) {
    const double mean = sum[k] / reps;
    const double se = std::sqrt((sum2[k] / reps - mean * mean) / (reps - 1.0));
    CAPTURE(k);
    CHECK(mean > 0.1);
    CHECK(mean <= 1.0 + 3.0 * se);
  }
}
