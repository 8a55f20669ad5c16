#include "evmt/simulation.hpp"

#include "evmt/hybrid.hpp"
#include "evmt/structure.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <mutex>
#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>
#include <thread>

namespace evmt {

namespace {

constexpr std::array<std::pair<Setting, std::string_view>, 10> kSettings{{
    {Setting::E1, "E1"},
    {Setting::E2, "E2"},
    {Setting::F1, "F1"},
    {Setting::F2, "F2"},
    {Setting::F3, "F3"},
    {Setting::S1, "S1"},
    {Setting::S2, "S2"},
    {Setting::Struct, "STRUCT"},
    {Setting::KnockSynth, "KNOCK_SYNTH"},
    {Setting::AllNull, "ALLNULL"},
}};

constexpr std::array<std::pair<Method, std::string_view>, 16> kMethods{{
    {Method::BC_Com, "BC_Com"},
    {Method::BC_Sep, "BC_Sep"},
    {Method::eBH_1, "eBH_1"},
    {Method::eBH_2, "eBH_2"},
    {Method::eBH_Ada, "eBH_Ada"},
    {Method::BH, "BH"},
    {Method::Storey, "Storey"},
    {Method::BC, "BC"},
    {Method::eBH_Ave, "eBH_Ave"},
    {Method::eBH_Ada_hybrid, "eBH_Ada_hybrid"},
    {Method::fast_eBH_Ada, "fast_eBH_Ada"},
    {Method::eBH_FBC, "eBH_FBC"},
    {Method::eBH_FBC_unit, "eBH_FBC_unit"},
    {Method::KO_A, "KO_A"},
    {Method::KO_B, "KO_B"},
    {Method::KO_Hybrid, "KO_Hybrid"},
}};

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

using Params = std::map<std::string, double>;

Params group_params(const std::vector<std::array<double, 4>>& groups) {
  Params p;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto k = std::to_string(g + 1);
    p["n" + k] = groups[g][0];
    p["n" + k + "a"] = groups[g][1];
    p["a" + k] = groups[g][2];
    p["b" + k] = groups[g][3];
  }
  return p;
}

int group_count(Setting s) {
  switch (s) {
    case Setting::E1:
    case Setting::E2:
      return 2;
    case Setting::F1:
    case Setting::F2:
    case Setting::F3:
      return 4;
    default:
      return 0;
  }
}

double beta_draw(std::mt19937_64& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  const double x = ga(rng), y = gb(rng);
  return x / (x + y);
}

// Upper normal tail 1 - Phi(z).
double upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

Index count_of(const SimulationConfig& c, const std::string& key) {
  return static_cast<Index>(std::llround(c.param(key)));
}

std::mt19937_64 replicate_rng(std::uint64_t seed, int replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate)};
  return std::mt19937_64(seq);
}

const GroupPartition& need_groups(const Dataset& d) {
  if (!d.groups) throw ConfigError("method needs a group partition");
  return *d.groups;
}

const PValueSet& need_pvalues(const Dataset& d) {
  if (!d.pvals) throw ConfigError("method needs p-values");
  return *d.pvals;
}

MethodOutcome from_evalues(EValueSet e, double alpha) {
  MethodOutcome out;
  out.rejected = ebh_select(e, alpha);
  out.evalues = std::move(e);
  return out;
}

MethodOutcome group_method(const Dataset& d, double alpha, WeightScheme w) {
  const auto r = run_algorithm1(need_pvalues(d), need_groups(d), alpha, w);
  return {r.rejected, r.evalues};
}

MethodOutcome hybrid_method(const Dataset& d, double alpha, HybridMode mode) {
  const auto r = run_hybrid(need_pvalues(d), HybridConfig::defaults(alpha, mode));
  return {r.rejected, r.evalues};
}

MethodOutcome structure_method(const Dataset& d, double alpha,
                               StructureWeights w, std::uint64_t seed) {
  const auto& p = need_pvalues(d);
  const CovariateSet covars = d.covars ? *d.covars : CovariateSet::empty(p.size());
  const auto r = run_structure_adaptive(p, covars, StructureConfig::defaults(alpha, w, seed));
  return {r.rejected, r.evalues};
}

const std::pair<KnockoffStatSet, KnockoffStatSet>& need_knockoff(const Dataset& d) {
  if (!d.knockoff) throw ConfigError("method needs knockoff statistics");
  return *d.knockoff;
}

struct Accumulator {
  double s = 0.0, s2 = 0.0;
  void add(double v) {
    s += v;
    s2 += v * v;
  }
  Moment moment(int reps) const {
    const double r = static_cast<double>(reps);
    const double mean = s / r;
    const double var = reps > 1 ? std::max(0.0, (s2 - r * mean * mean) / (r - 1.0)) : 0.0;
    return {mean, std::sqrt(var / r)};
  }
};

struct ReplicateResult {
  // Per method: fdp, power, rejections, then fdp/power per group, then the
  // null e-value sum when available.
  std::vector<std::vector<double>> values;
  std::vector<char> has_evalues;
};

ReplicateResult run_replicate(const SimulationConfig& c, int rep) {
  const Dataset d = generate(c, rep);
  ReplicateResult out;
  const int groups = d.groups ? d.groups->groups() : 0;
  for (Method m : c.methods) {
    const auto o = apply_method(m, d, c.target_alpha,
                                c.seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(rep) + 1)));
    std::vector<double> v;
    const auto all = fdp_power(o.rejected, d.truth);
    v.push_back(all.fdp);
    v.push_back(all.power);
    v.push_back(static_cast<double>(o.rejected.size()));
    for (int g = 0; g < groups; ++g) {
      const auto gm = fdp_power(o.rejected, d.truth, d.groups->members(g));
      v.push_back(gm.fdp);
      v.push_back(gm.power);
    }
    double null_sum = 0.0;
    if (o.evalues)
      for (Index i = 0; i < o.evalues->size(); ++i)
        if (!d.truth[static_cast<std::size_t>(i)]) null_sum += (*o.evalues)[i];
    v.push_back(null_sum);
    out.values.push_back(std::move(v));
    out.has_evalues.push_back(o.evalues.has_value());
  }
  return out;
}

}  // namespace

std::string_view setting_name(Setting s) {
  for (const auto& [k, v] : kSettings)
    if (k == s) return v;
  throw ConfigError("unknown setting");
}

Setting parse_setting(std::string_view name) {
  const auto u = upper(trim(name));
  for (const auto& [k, v] : kSettings)
    if (v == u) return k;
  throw ConfigError("unknown setting '" + std::string(name) + "'");
}

std::string_view method_name(Method m) {
  for (const auto& [k, v] : kMethods)
    if (k == m) return v;
  throw ConfigError("unknown method");
}

Method parse_method(std::string_view name) {
  const auto t = trim(name);
  for (const auto& [k, v] : kMethods)
    if (v == t) return k;
  throw ConfigError("unknown method '" + t + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> all = [] {
    std::vector<Method> v;
    for (const auto& kv : kMethods) v.push_back(kv.first);
    return v;
  }();
  return all;
}

SimulationConfig SimulationConfig::defaults(Setting s) {
  SimulationConfig c;
  c.setting = s;
  const std::vector<Method> fair{Method::BC_Com, Method::BC_Sep, Method::eBH_1,
                                 Method::eBH_2, Method::eBH_Ada};
  const std::vector<Method> hybrid{Method::BH, Method::Storey, Method::BC,
                                   Method::eBH_Ave, Method::eBH_Ada_hybrid,
                                   Method::fast_eBH_Ada};
  switch (s) {
    case Setting::E1:
      c.params = group_params({{100, 20, 4, 500}, {1000, 20, 0.1, 500}});
      break;
    case Setting::E2:
      c.params = group_params({{100, 20, 0.5, 500}, {1000, 20, 0.5, 500}});
      break;
    case Setting::F1:
      c.params = group_params({{100, 20, 0.1, 500}, {100, 20, 0.1, 500},
                               {1000, 20, 0.1, 500}, {1000, 20, 0.1, 500}});
      break;
    case Setting::F2:
      c.params = group_params({{100, 1, 0.01, 5000}, {100, 20, 0.1, 500},
                               {100, 20, 0.1, 500}, {100, 20, 0.1, 500}});
      break;
    case Setting::F3:
      c.params = group_params({{50, 2, 0.1, 500}, {100, 2, 0.1, 500},
                               {50, 4, 0.2, 500}, {100, 4, 0.3, 500}});
      c.target_alpha = 0.2;
      break;
    case Setting::S1:
      c.params = {{"n", 1000}, {"na", 50}, {"mu", 0.4}, {"sigma", 1.0}};
      break;
    case Setting::S2:
      c.params = {{"n", 3000}, {"na", 750}, {"mu", 0.285}, {"sigma", 0.4}};
      break;
    case Setting::Struct:
      c.params = {{"n", 3000}, {"a0", 3.5}, {"a1", 2.5}, {"af", 1.0}, {"mu", 3.0}};
      c.target_alpha = 0.1;
      break;
    case Setting::KnockSynth:
      c.params = {{"p", 200}, {"na", 40}, {"mu", 3.0}, {"mub", 0.0}};
      c.target_alpha = 0.2;
      break;
    case Setting::AllNull:
      c.params = {{"n", 200}};
      c.target_alpha = 0.1;
      break;
  }
  switch (s) {
    case Setting::E1:
    case Setting::E2:
    case Setting::F1:
    case Setting::F2:
    case Setting::F3:
      c.replications = 1000;
      c.methods = fair;
      break;
    case Setting::S1:
    case Setting::S2:
      c.replications = 500;
      c.methods = hybrid;
      break;
    case Setting::Struct:
      c.replications = 100;
      c.methods = {Method::BH, Method::Storey, Method::eBH_FBC, Method::eBH_FBC_unit};
      break;
    case Setting::KnockSynth:
      c.replications = 1000;
      c.methods = {Method::KO_A, Method::KO_B, Method::KO_Hybrid};
      break;
    case Setting::AllNull:
      c.replications = 10000;
      c.methods = all_methods();
      break;
  }
  return c;
}

double SimulationConfig::param(const std::string& key) const {
  const auto it = params.find(key);
  if (it == params.end()) throw ConfigError("missing parameter '" + key + "'");
  return it->second;
}

void SimulationConfig::validate() const {
  if (replications < 1) throw ConfigError("replications must be at least 1");
  require_probability_open(target_alpha, "alpha");
  if (methods.empty()) throw ConfigError("no methods selected");
  const auto defaults_for = defaults(setting);
  for (const auto& [k, v] : defaults_for.params) {
    (void)v;
    if (!params.count(k)) throw ConfigError("missing parameter '" + k + "'");
  }
  for (const auto& [k, v] : params) {
    if (!defaults_for.params.count(k))
      throw ConfigError("parameter '" + k + "' does not apply to " +
                        std::string(setting_name(setting)));
    if (!std::isfinite(v)) throw ConfigError("parameter '" + k + "' is not finite");
  }
  const auto positive_count = [&](const std::string& k, bool allow_zero) {
    const double v = param(k);
    if (v != std::floor(v) || v < (allow_zero ? 0.0 : 1.0))
      throw ConfigError("parameter '" + k + "' must be a count");
  };
  for (int g = 1; g <= group_count(setting); ++g) {
    const auto k = std::to_string(g);
    positive_count("n" + k, false);
    positive_count("n" + k + "a", true);
    if (param("n" + k + "a") > param("n" + k))
      throw ConfigError("group " + k + " has more alternatives than hypotheses");
    if (!(param("a" + k) > 0.0 && param("b" + k) > 0.0))
      throw ConfigError("beta parameters of group " + k + " must be positive");
  }
  switch (setting) {
    case Setting::S1:
    case Setting::S2:
      positive_count("n", false);
      positive_count("na", true);
      if (param("na") > param("n")) throw ConfigError("na exceeds n");
      if (!(param("sigma") > 0.0)) throw ConfigError("sigma must be positive");
      break;
    case Setting::Struct:
      positive_count("n", false);
      if (param("n") < 8) throw ConfigError("STRUCT needs n >= 8 for cross-fitting");
      break;
    case Setting::KnockSynth:
      positive_count("p", false);
      positive_count("na", true);
      if (param("na") > param("p")) throw ConfigError("na exceeds p");
      break;
    case Setting::AllNull:
      positive_count("n", false);
      if (param("n") < 8) throw ConfigError("ALLNULL needs n >= 8");
      break;
    default:
      break;
  }
}

SimulationConfig parse_config(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  std::vector<std::pair<std::string, std::string>> entries;
  std::optional<Setting> setting;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    auto key = trim(std::string_view(t).substr(0, eq));
    auto value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
    if (key == "setting") {
      setting = parse_setting(value);
    } else {
      entries.emplace_back(key, value);
    }
  }
  if (!setting) throw ConfigError("config does not name a setting");
  auto c = SimulationConfig::defaults(*setting);
  for (const auto& [key, value] : entries) {
    try {
      if (key == "reps" || key == "replications") {
        c.replications = std::stoi(value);
      } else if (key == "seed") {
        c.seed = std::stoull(value);
      } else if (key == "alpha") {
        c.target_alpha = std::stod(value);
      } else if (key == "methods") {
        c.methods.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) c.methods.push_back(parse_method(item));
      } else {
        if (!c.params.count(key))
          throw ConfigError("parameter '" + key + "' does not apply to " +
                            std::string(setting_name(*setting)));
        std::size_t used = 0;
        c.params[key] = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
    }
  }
  c.validate();
  return c;
}

Dataset generate(const SimulationConfig& c, int replicate) {
  c.validate();
  auto rng = replicate_rng(c.seed, replicate);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset d;

  switch (c.setting) {
    case Setting::E1:
    case Setting::E2:
    case Setting::F1:
    case Setting::F2:
    case Setting::F3: {
      std::vector<Index> sizes;
      std::vector<double> p;
      for (int g = 1; g <= group_count(c.setting); ++g) {
        const auto k = std::to_string(g);
        const Index ng = count_of(c, "n" + k), na = count_of(c, "n" + k + "a");
        const double a = c.param("a" + k), b = c.param("b" + k);
        sizes.push_back(ng);
        for (Index i = 0; i < ng; ++i) {
          const bool alt = i < na;
          p.push_back(alt ? beta_draw(rng, a, b) : unif(rng));
          d.truth.push_back(alt);
        }
      }
      d.pvals = PValueSet(Vector(Eigen::Map<const Vector>(p.data(), static_cast<Index>(p.size()))));
      d.groups = GroupPartition::blocks(sizes);
      break;
    }
    case Setting::S1:
    case Setting::S2: {
      const Index n = count_of(c, "n"), na = count_of(c, "na");
      const double mu = c.param("mu") * std::log(static_cast<double>(n));
      const double sigma = c.param("sigma");
      Vector p(n);
      for (Index i = 0; i < n; ++i) {
        const bool alt = i < na;
        p[i] = upper_tail(alt ? mu + sigma * normal(rng) : normal(rng));
        d.truth.push_back(alt);
      }
      d.pvals = PValueSet(std::move(p));
      break;
    }
    case Setting::Struct: {
      const Index n = count_of(c, "n");
      const double a0 = c.param("a0"), a1 = c.param("a1"), af = c.param("af"),
                   mu = c.param("mu");
      Matrix x(n, 2);
      Vector p(n);
      for (Index i = 0; i < n; ++i) {
        x(i, 0) = normal(rng);
        x(i, 1) = normal(rng);
        const double pi = logistic(a0 + a1 * x(i, 0));
        const bool alt = unif(rng) < 1.0 - pi;
        const double eta = 2.0 * logistic(af * x(i, 1));
        p[i] = upper_tail(normal(rng) + (alt ? eta * mu : 0.0));
        d.truth.push_back(alt);
      }
      d.pvals = PValueSet(std::move(p));
      d.covars = CovariateSet(std::move(x));
      break;
    }
    case Setting::KnockSynth: {
      const Index p = count_of(c, "p"), na = count_of(c, "na");
      const double mu = c.param("mu"), mub = c.param("mub");
      Vector wa(p), wb(p);
      for (Index j = 0; j < p; ++j) {
        const bool alt = j < na;
        d.truth.push_back(alt);
        for (auto [w, m] : {std::pair<Vector*, double>{&wa, mu}, {&wb, mub}}) {
          const double z = normal(rng);
          (*w)[j] = alt ? m + z : (unif(rng) < 0.5 ? -std::abs(z) : std::abs(z));
        }
      }
      d.knockoff.emplace(KnockoffStatSet(std::move(wa)), KnockoffStatSet(std::move(wb)));
      break;
    }
    case Setting::AllNull: {
      const Index n = count_of(c, "n");
      Vector p(n), wa(n), wb(n);
      Matrix x(n, 1);
      for (Index i = 0; i < n; ++i) {
        p[i] = unif(rng);
        x(i, 0) = normal(rng);
        for (Vector* w : {&wa, &wb}) {
          const double z = std::abs(normal(rng));
          (*w)[i] = unif(rng) < 0.5 ? -z : z;
        }
      }
      d.truth.assign(static_cast<std::size_t>(n), 0);
      d.pvals = PValueSet(std::move(p));
      d.groups = GroupPartition::blocks({n / 2, n - n / 2});
      d.covars = CovariateSet(std::move(x));
      d.knockoff.emplace(KnockoffStatSet(std::move(wa)), KnockoffStatSet(std::move(wb)));
      break;
    }
  }
  return d;
}

MethodOutcome apply_method(Method m, const Dataset& d, double alpha,
                           std::uint64_t seed) {
  require_probability_open(alpha, "alpha");
  switch (m) {
    case Method::BC_Com:
    case Method::BC:
      return {solve_threshold(need_pvalues(d), bc_spec(alpha)).rejected, std::nullopt};
    case Method::BC_Sep: {
      std::vector<Index> all;
      for (const auto& t : groupwise_bc_thresholds(need_pvalues(d), need_groups(d), alpha))
        all.insert(all.end(), t.rejected.indices().begin(), t.rejected.indices().end());
      std::sort(all.begin(), all.end());
      return {RejectionSet(std::move(all)), std::nullopt};
    }
    case Method::eBH_1:
      return group_method(d, alpha, WeightScheme::Unit);
    case Method::eBH_2:
      return group_method(d, alpha, WeightScheme::SizeAdjusted);
    case Method::eBH_Ada:
      return group_method(d, alpha, WeightScheme::Adaptive);
    case Method::BH: {
      const auto& p = need_pvalues(d);
      const auto spec = bh_spec(alpha);
      return from_evalues(procedure_to_evalues(p, spec, solve_threshold(p, spec)), alpha);
    }
    case Method::Storey: {
      const auto& p = need_pvalues(d);
      const auto spec = storey_spec(alpha);
      return {solve_threshold(p, spec).rejected, std::nullopt};
    }
    case Method::eBH_Ave:
      return hybrid_method(d, alpha, HybridMode::Averaged);
    case Method::eBH_Ada_hybrid:
      return hybrid_method(d, alpha, HybridMode::Adaptive);
    case Method::fast_eBH_Ada:
      return hybrid_method(d, alpha, HybridMode::FastAdaptive);
    case Method::eBH_FBC:
      return structure_method(d, alpha, StructureWeights::Cheap, seed);
    case Method::eBH_FBC_unit:
      return structure_method(d, alpha, StructureWeights::Unit, seed);
    case Method::KO_A:
      return from_evalues(knockoff_evalues(need_knockoff(d).first, alpha), alpha);
    case Method::KO_B:
      return from_evalues(knockoff_evalues(need_knockoff(d).second, alpha), alpha);
    case Method::KO_Hybrid: {
      const auto& [a, b] = need_knockoff(d);
      const auto r = combine_knockoffs(a, b, alpha);
      return {r.rejected, r.evalues};
    }
  }
  throw ConfigError("unknown method");
}

const MethodMetrics& MetricsReport::at(Method m) const {
  for (const auto& mm : methods)
    if (mm.method == m) return mm;
  throw ConfigError("method '" + std::string(method_name(m)) + "' not in report");
}

int worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("EVMT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  return static_cast<int>(hw);
}

MetricsReport run_campaign(const SimulationConfig& c) {
  c.validate();
  const auto start = std::chrono::steady_clock::now();
  std::vector<ReplicateResult> results(static_cast<std::size_t>(c.replications));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    for (int r = next++; r < c.replications; r = next++) {
      try {
        results[static_cast<std::size_t>(r)] = run_replicate(c, r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = c.replications;
      }
    }
  };
  const int workers = std::min(worker_count(), c.replications);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  const Dataset shape = generate(c, 0);
  const int groups = shape.groups ? shape.groups->groups() : 0;
  MetricsReport rep;
  rep.setting = c.setting;
  rep.replications = c.replications;
  rep.seed = c.seed;
  rep.target_alpha = c.target_alpha;
  rep.n = shape.size();
  for (std::size_t k = 0; k < c.methods.size(); ++k) {
    const std::size_t width = 3 + 2 * static_cast<std::size_t>(groups) + 1;
    std::vector<Accumulator> acc(width);
    for (const auto& r : results)
      for (std::size_t v = 0; v < width; ++v) acc[v].add(r.values[k][v]);
    MethodMetrics mm{c.methods[k], acc[0].moment(c.replications),
                     acc[1].moment(c.replications), acc[2].moment(c.replications),
                     {}, {}, std::nullopt};
    for (int g = 0; g < groups; ++g) {
      mm.group_fdr.push_back(acc[3 + 2 * g].moment(c.replications));
      mm.group_power.push_back(acc[4 + 2 * g].moment(c.replications));
    }
    if (results.front().has_evalues[k]) mm.null_evalue_sum = acc[width - 1].moment(c.replications);
    rep.methods.push_back(std::move(mm));
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

std::string report_json(const MetricsReport& r) {
  using nlohmann::json;
  const auto moment = [](const Moment& m) { return json{{"mean", m.mean}, {"se", m.se}}; };
  json j;
  j["setting"] = setting_name(r.setting);
  j["replications"] = r.replications;
  j["seed"] = r.seed;
  j["alpha"] = r.target_alpha;
  j["n"] = r.n;
  j["seconds"] = r.seconds;
  j["methods"] = json::array();
  for (const auto& m : r.methods) {
    json e{{"method", method_name(m.method)},
           {"fdr", moment(m.fdr)},
           {"power", moment(m.power)},
           {"rejections", moment(m.rejections)}};
    for (std::size_t g = 0; g < m.group_fdr.size(); ++g) {
      e["group_fdr"].push_back(moment(m.group_fdr[g]));
      e["group_power"].push_back(moment(m.group_power[g]));
    }
    if (m.null_evalue_sum) e["null_evalue_sum"] = moment(*m.null_evalue_sum);
    j["methods"].push_back(std::move(e));
  }
  return j.dump(2);
}

std::string report_csv(const MetricsReport& r) {
  std::ostringstream out;
  out.precision(10);
  out << "setting,method,metric,value,se\n";
  const auto row = [&](std::string_view method, const std::string& metric, const Moment& m) {
    out << setting_name(r.setting) << ',' << method << ',' << metric << ',' << m.mean
        << ',' << m.se << '\n';
  };
  for (const auto& m : r.methods) {
    const auto name = method_name(m.method);
    row(name, "FDR", m.fdr);
    row(name, "POW", m.power);
    row(name, "REJ", m.rejections);
    for (std::size_t g = 0; g < m.group_fdr.size(); ++g) {
      row(name, "FDR_" + std::to_string(g + 1), m.group_fdr[g]);
      row(name, "POW_" + std::to_string(g + 1), m.group_power[g]);
    }
    if (m.null_evalue_sum) row(name, "NULL_E_SUM", *m.null_evalue_sum);
  }
  return out.str();
}

}  // namespace evmt
