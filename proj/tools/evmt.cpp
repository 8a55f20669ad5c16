// evmt: run multiple-testing procedures on CSV input or simulation campaigns.
#include "evmt/groups.hpp"
#include "evmt/hybrid.hpp"
#include "evmt/io.hpp"
#include "evmt/knockoff.hpp"
#include "evmt/simulation.hpp"
#include "evmt/structure.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace evmt;
using nlohmann::json;

namespace {

struct Options {
  std::string input;
  double alpha = 0.05;
  std::string out;
  std::string summary;
  std::optional<std::uint64_t> seed;
  std::string weights;
  double lambda = 0.5;
  int folds = 2;
  double w1 = 0.5, w2 = 0.5;
  std::string setting;
  std::optional<int> reps;
  std::string config;
  std::string methods;
  std::vector<std::string> params;
};

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  std::random_device rd;
  const std::uint64_t s = (std::uint64_t{rd()} << 32) ^ rd();
  std::cerr << "seed: " << s << '\n';
  return s;
}

json threshold_json(const ThresholdResult& t) {
  return {{"threshold", t.threshold ? json(*t.threshold) : json(nullptr)},
          {"m_at_T", t.m_at_T},
          {"rejections", t.rejected.size()}};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  return f;
}

// CSV goes to --out (or stdout); the summary to --summary, else to stdout
// when the CSV went to a file, else to stderr.
void emit(const Options& o, const std::string& csv, const json& summary) {
  const auto text = summary.dump(2) + "\n";
  if (o.out.empty()) std::cout << csv;
  else open_out(o.out) << csv;
  if (!o.summary.empty()) open_out(o.summary) << text;
  else (o.out.empty() ? std::cerr : std::cout) << text;
}

void emit_rows(const Options& o, const RejectionRows& rows, json summary,
               const InputTable* table) {
  const auto rejected = rows.rejection_set();
  summary["n"] = rows.size();
  summary["alpha"] = o.alpha;
  summary["rejections"] = rejected.size();
  if (table && table->truth) {
    const auto fp = fdp_power(rejected, *table->truth);
    summary["fdp"] = fp.fdp;
    summary["power"] = fp.power;
    if (table->groups) {
      const auto gm = group_metrics(rejected, *table->truth, *table->groups);
      json groups = json::array();
      for (int g = 0; g < table->groups->groups(); ++g)
        groups.push_back({{"group", table->groups->name(g)},
                          {"fdp", gm.per_group[g].fdp},
                          {"power", gm.per_group[g].power}});
      summary["group_metrics"] = groups;
    }
  }
  std::ostringstream csv;
  write_rejections(csv, rows);
  emit(o, csv.str(), summary);
}

const PValueSet& need_pvalues(const InputTable& t) {
  if (!t.pvals) throw InputError("input needs a 'pvalue' column");
  return *t.pvals;
}

const GroupPartition& need_groups(const InputTable& t) {
  if (!t.groups) throw InputError("input needs a 'group' column");
  return *t.groups;
}

void run_procedure(const Options& o, Procedure kind, const std::string& name) {
  const auto t = read_table(o.input);
  const auto& p = need_pvalues(t);
  const auto spec = kind == Procedure::BH     ? bh_spec(o.alpha)
                    : kind == Procedure::BC   ? bc_spec(o.alpha)
                                              : storey_spec(o.alpha, o.lambda);
  spec.validate(p.size());
  const auto r = solve_threshold(p, spec);
  json s = {{"command", name}};
  s.update(threshold_json(r));
  if (kind == Procedure::Storey) s["lambda"] = o.lambda;
  emit_rows(o, make_rows(p.size(), r.rejected, procedure_to_evalues(p, spec, r)), s, &t);
}

void run_fbc(const Options& o) {
  const auto t = read_table(o.input);
  const auto& p = need_pvalues(t);
  require_probability_open(o.alpha, "alpha");
  const auto covars = t.covars ? *t.covars : CovariateSet::empty(p.size());
  EmOptions em;
  em.seed = resolve_seed(o);
  const auto model = fit_lfdr_em(p, covars, em);
  const Matrix z = covars.design();
  std::vector<RejectionFunction> phi;
  std::vector<RejectionMap> maps;
  std::vector<Index> all;
  for (Index i = 0; i < p.size(); ++i) {
    phi.push_back(model.rejection_function(z.row(i)));
    maps.emplace_back(phi.back());
    all.push_back(i);
  }
  const auto spec = fbc_spec(o.alpha, std::move(maps), fbc_upper_bound(phi, all));
  const auto r = solve_threshold(p, spec);
  json s = {{"command", "fbc"}, {"seed", em.seed}, {"t_upper", spec.t_upper},
            {"beta_pi", std::vector<double>(model.beta_pi.begin(), model.beta_pi.end())},
            {"beta_kappa",
             std::vector<double>(model.beta_kappa.begin(), model.beta_kappa.end())}};
  s.update(threshold_json(r));
  emit_rows(o, make_rows(p.size(), r.rejected, procedure_to_evalues(p, spec, r)), s, &t);
}

void run_ebh(const Options& o) {
  const auto t = read_table(o.input);
  if (!t.evalues) throw InputError("input needs an 'evalue' column");
  require_probability_open(o.alpha, "alpha");
  const auto r = ebh_select(*t.evalues, o.alpha);
  emit_rows(o, make_rows(t.rows, r, t.evalues), {{"command", "ebh"}}, &t);
}

void run_groups(const Options& o) {
  const auto t = read_table(o.input);
  const auto& p = need_pvalues(t);
  const auto& part = need_groups(t);
  const std::string w = o.weights.empty() ? "adaptive" : o.weights;
  const auto scheme = w == "unit"       ? WeightScheme::Unit
                      : w == "size"     ? WeightScheme::SizeAdjusted
                      : w == "adaptive" ? WeightScheme::Adaptive
                                        : throw ConfigError("groups: --weights must be "
                                                            "unit, size or adaptive");
  const auto r = run_algorithm1(p, part, o.alpha, scheme);
  json groups = json::array();
  for (int g = 0; g < part.groups(); ++g) {
    auto entry = threshold_json(r.thresholds[g]);
    entry["group"] = part.name(g);
    entry["size"] = part.group_size(g);
    entry["rejections"] = r.group_rejected[g].size();
    entry["bc_rejections"] = r.thresholds[g].rejected.size();
    groups.push_back(entry);
  }
  emit_rows(o, make_rows(p.size(), r.rejected, r.evalues, r.weights),
            {{"command", "groups"}, {"weights", w}, {"groups", groups}}, &t);
}

void run_hybrid_cmd(const Options& o) {
  const auto t = read_table(o.input);
  const auto& p = need_pvalues(t);
  const std::string w = o.weights.empty() ? "adaptive" : o.weights;
  const auto mode = w == "averaged"   ? HybridMode::Averaged
                    : w == "adaptive" ? HybridMode::Adaptive
                    : w == "fast"     ? HybridMode::FastAdaptive
                                      : throw ConfigError("hybrid: --weights must be "
                                                          "averaged, adaptive or fast");
  const auto cfg = HybridConfig::defaults(o.alpha, mode);
  const auto r = run_hybrid(p, cfg);
  const auto tbh = solve_threshold(p, bh_spec(cfg.alpha_bh));
  const auto tbc = solve_threshold(p, bc_spec(cfg.alpha_bc));
  emit_rows(o, make_rows(p.size(), r.rejected, r.evalues, r.weights.bh),
            {{"command", "hybrid"},
             {"weights", w},
             {"alpha_bh", cfg.alpha_bh},
             {"alpha_bc", cfg.alpha_bc},
             {"bh", threshold_json(tbh)},
             {"bc", threshold_json(tbc)}},
            &t);
}

void run_adaptive(const Options& o) {
  const auto t = read_table(o.input);
  const auto& p = need_pvalues(t);
  if (!t.covars) throw InputError("input needs at least one covariate column (x...)");
  const std::string w = o.weights.empty() ? "cheap" : o.weights;
  const auto mode = w == "cheap"  ? StructureWeights::Cheap
                    : w == "full" ? StructureWeights::Full
                    : w == "unit" ? StructureWeights::Unit
                                  : throw ConfigError("adaptive: --weights must be "
                                                      "cheap, full or unit");
  auto cfg = StructureConfig::defaults(o.alpha, mode, resolve_seed(o));
  cfg.folds = o.folds;
  cfg.em.seed = cfg.seed;
  const auto r = run_structure_adaptive(p, *t.covars, cfg);
  json folds = json::array();
  for (int g = 0; g < r.partition.groups(); ++g) {
    auto entry = threshold_json(r.thresholds[g]);
    entry["size"] = r.partition.group_size(g);
    const auto& m = r.fit.models[g];
    entry["beta_pi"] = std::vector<double>(m.beta_pi.begin(), m.beta_pi.end());
    entry["beta_kappa"] = std::vector<double>(m.beta_kappa.begin(), m.beta_kappa.end());
    folds.push_back(entry);
  }
  emit_rows(o, make_rows(p.size(), r.rejected, r.evalues, r.weights),
            {{"command", "adaptive"},
             {"weights", w},
             {"seed", cfg.seed},
             {"alpha_fbc", cfg.alpha_fbc},
             {"folds", folds}},
            &t);
}

void run_knockoff(const Options& o) {
  const auto t = read_table(o.input);
  if (!t.w1 || !t.w2) throw InputError("input needs 'w1' and 'w2' columns");
  const auto r = combine_knockoffs(*t.w1, *t.w2, o.alpha, o.w1, o.w2);
  const double half = o.alpha / 2.0;
  emit_rows(o, make_rows(t.rows, r.rejected, r.evalues),
            {{"command", "knockoff-combine"},
             {"w1", o.w1},
             {"w2", o.w2},
             {"family_1", threshold_json(knockoff_threshold(*t.w1, half))},
             {"family_2", threshold_json(knockoff_threshold(*t.w2, half))}},
            &t);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

void run_simulate(const Options& o, bool alpha_given) {
  SimulationConfig c;
  if (!o.config.empty()) {
    c = parse_config(read_file(o.config));
    if (!o.setting.empty() && parse_setting(o.setting) != c.setting)
      throw ConfigError("--setting disagrees with the config file");
  } else {
    if (o.setting.empty()) throw ConfigError("simulate needs --setting or --config");
    c = SimulationConfig::defaults(parse_setting(o.setting));
  }
  if (o.reps) c.replications = *o.reps;
  if (alpha_given) c.target_alpha = o.alpha;
  c.seed = resolve_seed(o);
  if (!o.methods.empty()) {
    c.methods.clear();
    std::stringstream s(o.methods);
    for (std::string m; std::getline(s, m, ',');) c.methods.push_back(parse_method(m));
  }
  for (const auto& kv : o.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--param expects key=value");
    const auto key = kv.substr(0, eq);
    if (!c.params.count(key))
      throw ConfigError("unknown parameter '" + key + "' for " + std::string(setting_name(c.setting)));
    try {
      std::size_t used = 0;
      c.params[key] = std::stod(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument(kv);
    } catch (const std::logic_error&) {
      throw ConfigError("--param " + kv + ": value is not a number");
    }
  }
  c.validate();
  const auto report = run_campaign(c);
  emit(o, report_csv(report), json::parse(report_json(report)));
}

void add_common(CLI::App* cmd, Options& o, bool with_input = true) {
  if (with_input)
    cmd->add_option("--input", o.input, "CSV with a header row")->required();
  cmd->add_option("--alpha", o.alpha, "target FDR level");
  cmd->add_option("--out", o.out, "output CSV (default stdout)");
  cmd->add_option("--summary", o.summary, "summary JSON path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"e-value based multiple testing"};
  app.require_subcommand(1);
  Options o;

  auto* bh = app.add_subcommand("bh", "step-up p-value threshold");
  auto* storey = app.add_subcommand("storey", "BH with an estimated null proportion");
  auto* bc = app.add_subcommand("bc", "mirror-count threshold procedure");
  auto* fbc = app.add_subcommand("fbc", "flexible BC with a fitted local-fdr rejection function");
  auto* ebh = app.add_subcommand("ebh", "e-BH on an 'evalue' column");
  auto* groups = app.add_subcommand("groups", "group-wise BC assembled by e-BH");
  auto* hybrid = app.add_subcommand("hybrid", "BH/BC hybrid through e-BH");
  auto* adaptive = app.add_subcommand("adaptive", "covariate-adaptive cross-fitted FBC");
  auto* knock = app.add_subcommand("knockoff-combine", "combine two knockoff statistics");
  auto* sim = app.add_subcommand("simulate", "Monte Carlo campaign");

  for (auto* c : {bh, storey, bc, fbc, ebh, groups, hybrid, adaptive, knock}) add_common(c, o);
  add_common(sim, o, false);
  storey->add_option("--lambda", o.lambda, "null-proportion tuning parameter");
  for (auto* c : {groups, hybrid, adaptive})
    c->add_option("--weights", o.weights,
                  "groups: unit|size|adaptive; hybrid: averaged|adaptive|fast; "
                  "adaptive: cheap|full|unit");
  for (auto* c : {fbc, adaptive, sim}) c->add_option("--seed", o.seed, "random seed");
  adaptive->add_option("--folds", o.folds, "number of cross-fitting folds");
  knock->add_option("--w1", o.w1, "weight of the first family");
  knock->add_option("--w2", o.w2, "weight of the second family");
  sim->add_option("--setting", o.setting, "E1 E2 F1 F2 F3 S1 S2 STRUCT KNOCK_SYNTH ALLNULL");
  sim->add_option("--reps", o.reps, "replications");
  sim->add_option("--config", o.config, "key = value campaign file");
  sim->add_option("--methods", o.methods, "comma-separated method names");
  sim->add_option("--param", o.params, "generator parameter key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 3;
  }

  try {
    if (*bh) run_procedure(o, Procedure::BH, "bh");
    else if (*storey) run_procedure(o, Procedure::Storey, "storey");
    else if (*bc) run_procedure(o, Procedure::BC, "bc");
    else if (*fbc) run_fbc(o);
    else if (*ebh) run_ebh(o);
    else if (*groups) run_groups(o);
    else if (*hybrid) run_hybrid_cmd(o);
    else if (*adaptive) run_adaptive(o);
    else if (*knock) run_knockoff(o);
    else run_simulate(o, sim->count("--alpha") > 0);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
