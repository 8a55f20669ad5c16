#include "doctest.h"

#include "evmt/simulation.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdlib>

using namespace evmt;

namespace {

SimulationConfig small(Setting s, int reps) {
  auto c = SimulationConfig::defaults(s);
  c.replications = reps;
  c.seed = 99;
  return c;
}

std::string without_seconds(const MetricsReport& r) {
  auto j = nlohmann::json::parse(report_json(r));
  j.erase("seconds");
  return j.dump();
}

}  // namespace

TEST_CASE("names round-trip") {
  for (Setting s : {Setting::E1, Setting::E2, Setting::F1, Setting::F2, Setting::F3,
                    Setting::S1, Setting::S2, Setting::Struct, Setting::KnockSynth,
                    Setting::AllNull})
    CHECK(parse_setting(setting_name(s)) == s);
  CHECK(parse_setting("knock_synth") == Setting::KnockSynth);
  for (Method m : all_methods()) CHECK(parse_method(method_name(m)) == m);
  CHECK(all_methods().size() == 16);
  CHECK_THROWS_AS(parse_setting("E9"), ConfigError);
  CHECK_THROWS_AS(parse_method("eBH_3"), ConfigError);
}

TEST_CASE("default parameters") {
  const auto e1 = SimulationConfig::defaults(Setting::E1);
  CHECK(e1.param("n1") == 100);
  CHECK(e1.param("n1a") == 20);
  CHECK(e1.param("a1") == 4);
  CHECK(e1.param("b1") == 500);
  CHECK(e1.param("n2") == 1000);
  CHECK(e1.param("a2") == 0.1);
  CHECK(e1.replications == 1000);
  CHECK(e1.target_alpha == 0.05);
  const auto e2 = SimulationConfig::defaults(Setting::E2);
  CHECK(e2.param("a1") == 0.5);
  CHECK(e2.param("a2") == 0.5);
  const auto f2 = SimulationConfig::defaults(Setting::F2);
  CHECK(f2.param("n1a") == 1);
  CHECK(f2.param("a1") == 0.01);
  CHECK(f2.param("b1") == 5000);
  const auto f3 = SimulationConfig::defaults(Setting::F3);
  CHECK(f3.target_alpha == 0.2);
  CHECK(f3.param("n3") == 50);
  CHECK(f3.param("a4") == 0.3);
  const auto s2 = SimulationConfig::defaults(Setting::S2);
  CHECK(s2.param("n") == 3000);
  CHECK(s2.param("na") == 750);
  CHECK(s2.param("sigma") == 0.4);
  CHECK(s2.replications == 500);
  CHECK(SimulationConfig::defaults(Setting::Struct).param("a0") == 3.5);
}

TEST_CASE("config text") {
  const auto c = parse_config(
      "# campaign\n"
      "setting = S1\n"
      "reps = 12   # short\n"
      "seed = 7\n"
      "alpha = 0.1\n"
      "mu = 0.3\n"
      "methods = BH, BC\n");
  CHECK(c.setting == Setting::S1);
  CHECK(c.replications == 12);
  CHECK(c.seed == 7);
  CHECK(c.target_alpha == 0.1);
  CHECK(c.param("mu") == 0.3);
  CHECK(c.param("n") == 1000);
  CHECK(c.methods == std::vector<Method>{Method::BH, Method::BC});

  CHECK_THROWS_AS(parse_config("reps = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("setting = E1\nn9 = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("setting = E1\nreps = many\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("setting = E1\nreps = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("setting = E1\nn1a = 500\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("setting = E1\nalpha = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("setting = E1\na1 = 2x\n"), ConfigError);
  try {
    parse_config("setting = E1\n\njust words\n");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("generation is deterministic per replicate") {
  for (Setting s : {Setting::E1, Setting::F3, Setting::S1, Setting::Struct,
                    Setting::KnockSynth, Setting::AllNull}) {
    const auto c = small(s, 1);
    const auto a = generate(c, 3), b = generate(c, 3), other = generate(c, 4);
    CHECK(a.truth == b.truth);
    if (a.pvals) {
      CHECK(a.pvals->values() == b.pvals->values());
      CHECK(a.pvals->values() != other.pvals->values());
    } else {
      CHECK(a.knockoff->first.values() == b.knockoff->first.values());
      CHECK(a.knockoff->first.values() != other.knockoff->first.values());
    }
  }
}

TEST_CASE("generated data follow the stated designs") {
  const auto e1 = small(Setting::E1, 1);
  double alt_mean = 0.0, null_mean = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const auto d = generate(e1, r);
    REQUIRE(d.groups);
    CHECK(d.groups->group_size(0) == 100);
    CHECK(d.groups->group_size(1) == 1000);
    long alts = 0;
    for (auto t : d.truth) alts += t;
    CHECK(alts == 40);
    for (Index i = 0; i < 20; ++i) alt_mean += (*d.pvals)[i] / (20.0 * reps);
    for (Index i = 20; i < 100; ++i) null_mean += (*d.pvals)[i] / (80.0 * reps);
  }
  CHECK(alt_mean == doctest::Approx(4.0 / 504.0).epsilon(0.03));
  CHECK(null_mean == doctest::Approx(0.5).epsilon(0.02));

  // S1 alternatives: X ~ N(mu log n, 1) so the median p is 1 - Phi(mu log n).
  const auto s1 = small(Setting::S1, 1);
  std::vector<double> alt;
  for (int r = 0; r < 40; ++r) {
    const auto d = generate(s1, r);
    for (Index i = 0; i < 50; ++i) alt.push_back((*d.pvals)[i]);
  }
  std::nth_element(alt.begin(), alt.begin() + alt.size() / 2, alt.end());
  const double expect = 0.5 * std::erfc(0.4 * std::log(1000.0) / std::sqrt(2.0));
  CHECK(alt[alt.size() / 2] == doctest::Approx(expect).epsilon(0.15));

  // STRUCT signal fraction against E[1 - logistic(a0 + a1 x)] by quadrature.
  double expected = 0.0;
  for (int k = -8000; k < 8000; ++k) {
    const double x = (k + 0.5) * 1e-3;
    expected += (1.0 - logistic(3.5 + 2.5 * x)) * std::exp(-0.5 * x * x) * 1e-3 /
                std::sqrt(2.0 * 3.141592653589793);
  }
  double frac = 0.0;
  for (int r = 0; r < 20; ++r) {
    const auto d = generate(small(Setting::Struct, 1), r);
    REQUIRE(d.covars);
    CHECK(d.covars->dim() == 2);
    long alts = 0;
    for (auto t : d.truth) alts += t;
    frac += alts / 3000.0 / 20.0;
  }
  // sd of the mean is about sqrt(0.12 * 0.88 / 60000) = 0.0013
  CHECK(std::abs(frac - expected) < 0.006);

  const auto null = generate(small(Setting::AllNull, 1), 0);
  for (auto t : null.truth) CHECK(t == 0);
  CHECK(null.groups->groups() == 2);
}

TEST_CASE("methods") {
  const auto d = generate(small(Setting::E1, 1), 0);
  const auto com = apply_method(Method::BC_Com, d, 0.05, 1);
  CHECK(com.rejected == solve_threshold(*d.pvals, bc_spec(0.05)).rejected);
  const auto sep = apply_method(Method::BC_Sep, d, 0.05, 1);
  const auto thr = groupwise_bc_thresholds(*d.pvals, *d.groups, 0.05);
  CHECK(sep.rejected.size() == thr[0].rejected.size() + thr[1].rejected.size());
  const auto ada = apply_method(Method::eBH_Ada, d, 0.05, 1);
  REQUIRE(ada.evalues);
  CHECK(ada.rejected == ebh_select(*ada.evalues, 0.05));

  const auto s = generate(small(Setting::S1, 1), 0);
  CHECK_THROWS_AS(apply_method(Method::eBH_1, s, 0.05, 1), ConfigError);
  CHECK_THROWS_AS(apply_method(Method::KO_A, s, 0.05, 1), ConfigError);
  const auto bh = apply_method(Method::BH, s, 0.05, 1);
  CHECK(bh.rejected == solve_threshold(*s.pvals, bh_spec(0.05)).rejected);
}

TEST_CASE("campaign reports") {
  auto c = small(Setting::AllNull, 30);
  c.params["n"] = 40;
  c.target_alpha = 0.5;
  const auto r = run_campaign(c);
  CHECK(r.methods.size() == all_methods().size());
  for (const auto& m : r.methods) {
    CHECK(m.power.mean == 0.0);
    CHECK(m.fdr.mean >= 0.0);
    CHECK(m.fdr.mean <= 1.0);
    CHECK(m.group_fdr.size() == 2);
  }
  CHECK(r.at(Method::eBH_Ada).null_evalue_sum.has_value());
  CHECK_FALSE(r.at(Method::BC_Sep).null_evalue_sum.has_value());

  const auto csv = report_csv(r);
  CHECK(csv.rfind("setting,method,metric,value,se\n", 0) == 0);
  CHECK(csv.find("ALLNULL,KO_Hybrid,FDR,") != std::string::npos);
  const auto j = nlohmann::json::parse(report_json(r));
  CHECK(j["replications"] == 30);
  CHECK(j["methods"].size() == all_methods().size());
}

TEST_CASE("standard errors use the sample deviation") {
  auto c = small(Setting::E1, 25);
  c.methods = {Method::BC_Com};
  const auto r = run_campaign(c);
  double s = 0.0, s2 = 0.0;
  for (int k = 0; k < 25; ++k) {
    const auto d = generate(c, k);
    const double pw = fdp_power(apply_method(Method::BC_Com, d, 0.05, 0).rejected, d.truth).power;
    s += pw;
    s2 += pw * pw;
  }
  const double mean = s / 25.0;
  const double sd = std::sqrt((s2 - 25.0 * mean * mean) / 24.0);
  CHECK(r.at(Method::BC_Com).power.mean == doctest::Approx(mean));
  CHECK(r.at(Method::BC_Com).power.se == doctest::Approx(sd / 5.0));
}

TEST_CASE("reports do not depend on the worker count") {
  auto c = small(Setting::F3, 40);
  ::setenv("EVMT_THREADS", "1", 1);
  CHECK(worker_count() == 1);
  const auto one = without_seconds(run_campaign(c));
  ::setenv("EVMT_THREADS", "3", 1);
  CHECK(worker_count() == 3);
  const auto three = without_seconds(run_campaign(c));
  ::unsetenv("EVMT_THREADS");
  CHECK(one == three);
  c.seed = 100;
  CHECK(without_seconds(run_campaign(c)) != one);
}
