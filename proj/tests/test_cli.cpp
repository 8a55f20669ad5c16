#include "doctest.h"
#include "fixtures.hpp"

#include "evmt/io.hpp"

#include "json.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace evmt;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string err;
};

fs::path workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("evmt_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

Run run(const std::string& args) {
  const auto err = workdir() / "stderr.txt";
  const std::string cmd = std::string(EVMT_CLI_PATH) + " " + args + " > " +
                          (workdir() / "stdout.txt").string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

fs::path write(const std::string& name, const std::string& text) {
  const auto p = workdir() / name;
  std::ofstream(p) << text;
  return p;
}

fs::path toy_csv() {
  const auto p = fixture::toy_pvalues();
  std::ostringstream s;
  s.precision(17);
  s << "pvalue,group,truth\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool first = i < 100;
    const bool signal = first ? i < 20 : i - 100 < 20;
    s << p[i] << ',' << (first ? "g1" : "g2") << ',' << signal << '\n';
  }
  return write("toy.csv", s.str());
}

fs::path mixed_csv() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  std::ostringstream s;
  s.precision(17);
  s << "pvalue,group,truth,x1,evalue,w1,w2\n";
  for (int i = 0; i < 300; ++i) {
    const bool alt = i % 6 == 0;
    const double p = alt ? std::pow(u(rng), 10.0) : u(rng);
    const double w = alt ? 3.0 + z(rng) : (u(rng) < 0.5 ? -1.0 : 1.0) * std::abs(z(rng));
    s << p << ',' << (i % 3 ? "a" : "b") << ',' << alt << ',' << z(rng) << ','
      << (alt ? 40.0 * u(rng) : 0.5 * u(rng)) << ',' << w << ',' << w + 0.3 * z(rng)
      << '\n';
  }
  return write("mixed.csv", s.str());
}

RejectionRows read_rows(const fs::path& p) {
  std::ifstream f(p);
  return parse_rejections(f, p.string());
}

}  // namespace

TEST_CASE("toy two-group input rejects all forty signals") {
  const auto in = toy_csv();
  const auto out = workdir() / "toy_out.csv";
  const auto sum = workdir() / "toy_sum.json";
  const auto r = run("groups --input " + in.string() + " --alpha 0.05 --weights adaptive --out " +
                     out.string() + " --summary " + sum.string());
  REQUIRE(r.code == 0);
  const auto rows = read_rows(out);
  CHECK(rows.size() == 1100);
  CHECK(rows.rejection_set().size() == 40);
  const auto j = nlohmann::json::parse(slurp(sum));
  CHECK(j["rejections"] == 40);
  CHECK(j["fdp"] == 0.0);
  CHECK(j["power"] == 1.0);
  CHECK(j["group_metrics"].size() == 2);
  CHECK((*rows.weights)[0] == doctest::Approx(11.0));

  CHECK(run("groups --input " + in.string() + " --alpha 0.05 --weights unit --out " +
            out.string() + " --summary " + sum.string())
            .code == 0);
  CHECK(read_rows(out).rejection_set().empty());
}

TEST_CASE("e-BH on zeros rejects nothing") {
  const auto in = write("zeros.csv", "evalue\n0\n0\n0\n0\n");
  const auto out = workdir() / "zeros_out.csv";
  const auto r = run("ebh --input " + in.string() + " --out " + out.string());
  CHECK(r.code == 0);
  const auto rows = read_rows(out);
  CHECK(rows.size() == 4);
  CHECK(rows.rejection_set().empty());
}

TEST_CASE("rejection files reproduce the summary counts") {
  const auto in = mixed_csv();
  const auto out = workdir() / "rt.csv";
  const auto sum = workdir() / "rt.json";
  const std::vector<std::string> commands = {
      "bh",         "storey --lambda 0.4",   "bc",
      "fbc --seed 2", "ebh",                 "groups --weights size",
      "groups",     "hybrid --weights averaged", "hybrid",
      "hybrid --weights fast", "adaptive --seed 4", "adaptive --seed 4 --weights unit",
      "adaptive --seed 4 --weights full --folds 3", "knockoff-combine"};
  for (const auto& c : commands) {
    CAPTURE(c);
    const double alpha = 0.2;
    const auto r = run(c + " --input " + in.string() + " --alpha 0.2 --out " + out.string() +
                       " --summary " + sum.string());
    REQUIRE(r.code == 0);
    const auto rows = read_rows(out);
    const auto j = nlohmann::json::parse(slurp(sum));
    CHECK(rows.size() == 300);
    CHECK(j["rejections"] == rows.rejection_set().size());
    REQUIRE(rows.evalues);
    CHECK(ebh_select(EValueSet(*rows.evalues), alpha) == rows.rejection_set());
  }
}

TEST_CASE("missing seeds are drawn and reported") {
  const auto in = mixed_csv();
  const auto r = run("adaptive --input " + in.string() + " --out " +
                     (workdir() / "s.csv").string());
  CHECK(r.code == 0);
  CHECK(r.err.find("seed: ") != std::string::npos);
}

TEST_CASE("simulate") {
  const auto a = workdir() / "sim_a.csv";
  const auto b = workdir() / "sim_b.csv";
  const auto sum = workdir() / "sim.json";
  const std::string base = "simulate --setting F3 --reps 20 --seed 7 --methods BC_Com,eBH_Ada";
  REQUIRE(run(base + " --out " + a.string() + " --summary " + sum.string()).code == 0);
  REQUIRE(run(base + " --out " + b.string()).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).rfind("setting,method,metric,value,se\n", 0) == 0);
  CHECK(slurp(a).find("F3,eBH_Ada,POW,") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(sum));
  CHECK(j["replications"] == 20);
  CHECK(j["alpha"] == 0.2);

  const auto cfg = write("camp.cfg", "setting = S1\nreps = 3\nmu = 0.5\nmethods = BH\n");
  CHECK(run("simulate --config " + cfg.string() + " --seed 1 --alpha 0.1 --out " +
            a.string() + " --summary " + sum.string())
            .code == 0);
  const auto k = nlohmann::json::parse(slurp(sum));
  CHECK(k["alpha"] == 0.1);
  CHECK(k["methods"].size() == 1);
}

TEST_CASE("misuse yields a diagnostic and a nonzero exit") {
  const auto in = mixed_csv();
  const auto good = "--input " + in.string();
  const auto bad = write("bad.csv", "pvalue,group\n0.1,a\n1.7,b\n");
  const auto ragged = write("ragged.csv", "pvalue,group\n0.1,a\n0.2\n");
  const auto nop = write("nop.csv", "group\na\n");
  struct Case {
    std::string args;
    int code;
  };
  const std::vector<Case> cases = {
      {"", 3},
      {"frobnicate", 3},
      {"bh", 3},
      {"bh " + good + " --alpha 0", 3},
      {"bh " + good + " --alpha 1", 3},
      {"bh " + good + " --alpha abc", 3},
      {"bh " + good + " --bogus", 3},
      {"bh --input /nonexistent/x.csv", 2},
      {"bh --input " + bad.string(), 2},
      {"bc --input " + ragged.string(), 2},
      {"bh --input " + nop.string(), 2},
      {"storey " + good + " --lambda 1", 3},
      {"groups " + good + " --weights fast", 3},
      {"hybrid " + good + " --weights cheap", 3},
      {"adaptive " + good + " --weights size", 3},
      {"adaptive " + good + " --folds 1", 3},
      {"adaptive " + good + " --seed -4", 3},
      {"adaptive --input " + bad.string(), 2},
      {"knockoff-combine " + good + " --w1 0.8 --w2 0.8", 3},
      {"knockoff-combine --input " + bad.string(), 2},
      {"ebh --input " + nop.string(), 2},
      {"groups --input " + write("ng.csv", "pvalue\n0.1\n").string(), 2},
      {"simulate", 3},
      {"simulate --setting E7", 3},
      {"simulate --setting E1 --reps 0", 3},
      {"simulate --setting E1 --methods BH,Nope", 3},
      {"simulate --setting E1 --param n1a=1000", 3},
      {"simulate --setting E1 --param nonsense", 3},
      {"simulate --config /nonexistent.cfg", 2},
      {"simulate --config " + write("bad.cfg", "setting = E1\nreps = x\n").string(), 3},
      {"bh " + good + " --out /nonexistent/dir/o.csv", 2},
  };
  for (const auto& c : cases) {
    CAPTURE(c.args);
    const auto r = run(c.args);
    CHECK(r.code == c.code);
    CHECK_FALSE(r.err.empty());
  }
  CHECK(run("bh " + good + " --out " + (workdir() / "ok.csv").string()).code == 0);
  CHECK(run("--help").code == 0);
}
