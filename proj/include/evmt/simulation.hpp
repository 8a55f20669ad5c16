#ifndef EVMT_SIMULATION_HPP
#define EVMT_SIMULATION_HPP

#include "evmt/groups.hpp"
#include "evmt/knockoff.hpp"
#include "evmt/lfdr.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace evmt {

enum class Setting { E1, E2, F1, F2, F3, S1, S2, Struct, KnockSynth, AllNull };

std::string_view setting_name(Setting s);
Setting parse_setting(std::string_view name);

enum class Method {
  BC_Com,
  BC_Sep,
  eBH_1,
  eBH_2,
  eBH_Ada,
  BH,
  Storey,
  BC,
  eBH_Ave,
  eBH_Ada_hybrid,
  fast_eBH_Ada,
  eBH_FBC,
  eBH_FBC_unit,
  KO_A,
  KO_B,
  KO_Hybrid,
};

std::string_view method_name(Method m);
Method parse_method(std::string_view name);
const std::vector<Method>& all_methods();

struct SimulationConfig {
  Setting setting = Setting::AllNull;
  std::map<std::string, double> params;  // complete after defaults()
  int replications = 1;
  std::uint64_t seed = 1;
  double target_alpha = 0.05;
  std::vector<Method> methods;

  /// Default design parameters, replication count, level and method list for `s`.
  static SimulationConfig defaults(Setting s);
  double param(const std::string& key) const;
  void validate() const;
};

/// `key = value` lines; `#` starts a comment. Keys: setting, reps, seed,
/// alpha, methods (comma list) and any parameter of the chosen setting.
SimulationConfig parse_config(std::string_view text);

struct Dataset {
  std::optional<PValueSet> pvals;
  Truth truth;
  std::optional<GroupPartition> groups;
  std::optional<CovariateSet> covars;
  std::optional<std::pair<KnockoffStatSet, KnockoffStatSet>> knockoff;

  Index size() const { return static_cast<Index>(truth.size()); }
};

/// Deterministic in (config.seed, replicate).
Dataset generate(const SimulationConfig& config, int replicate);

struct MethodOutcome {
  RejectionSet rejected;
  std::optional<EValueSet> evalues;
};

/// `seed` feeds any internal randomization (the cross-fitting split).
MethodOutcome apply_method(Method m, const Dataset& data, double alpha,
                           std::uint64_t seed);

struct Moment {
  double mean = 0.0;
  double se = 0.0;
};

struct MethodMetrics {
  Method method;
  Moment fdr;
  Moment power;
  Moment rejections;
  std::vector<Moment> group_fdr;
  std::vector<Moment> group_power;
  std::optional<Moment> null_evalue_sum;  // sum of e-values over the nulls
};

struct MetricsReport {
  Setting setting;
  int replications = 0;
  std::uint64_t seed = 0;
  double target_alpha = 0.0;
  Index n = 0;
  std::vector<MethodMetrics> methods;
  double seconds = 0.0;

  const MethodMetrics& at(Method m) const;
};

/// Worker count: EVMT_THREADS when set, otherwise the hardware concurrency.
int worker_count();

/// Replicates run on worker_count() threads; the reduction runs in
/// replicate order, so reports are identical for any thread count.
MetricsReport run_campaign(const SimulationConfig& config);

std::string report_json(const MetricsReport& report);
/// setting,method,metric,value,se
std::string report_csv(const MetricsReport& report);

}  // namespace evmt

#endif  // EVMT_SIMULATION_HPP
