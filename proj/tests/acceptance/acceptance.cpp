// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli.hpp"
#include "qnet/qnet.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace qnet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::size_t g_markov_violations = 0;
std::size_t g_markov_ensembles = 0;

void note_markov(const StabilityVerdict& v) {
  g_markov_violations += v.markov_violations;
  ++g_markov_ensembles;
}

Scenario fixture(const char* name) { return load_scenario(std::string(QNET_SCENARIO_DIR) + "/" + name + ".json"); }

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double mean_avg_q(const DppEnsemble& e, std::size_t k) {
  double s = 0.0;
  for (const auto& m : e.metrics) s += m.avg_q[k];
  return s / static_cast<double>(e.metrics.size());
}

Outcome ac1(std::size_t threads) {
  const auto ens = run_dpp_ensemble(bb1_scenario(0.3, 0.5), {}, 101, 1000000, 20, threads);
  note_markov(estimate_verdict(ens.series[0]));
  const double m = mean_avg_q(ens, 0);
  const double expected = bb1_closed_form(0.3, 0.5).mean_backlog;
  const double rel = std::abs(m - expected) / expected;
  return {rel <= 0.05, "mean backlog " + num(m) + " vs " + num(expected) + " (rel err " + num(rel) + ")"};
}

Outcome ac2(std::size_t threads) {
  const auto ens = run_dpp_ensemble(bb1_scenario(0.6, 0.5), {}, 102, 1000000, 20, threads);
  const auto& s = ens.series[0];
  note_markov(estimate_verdict(s));
  const std::size_t idx = s.checkpoint_index(s.horizon() - 1);
  const double t = static_cast<double>(s.horizon() - 1);
  double lo = 1e300, hi = -1e300;
  for (const auto& p : s.paths()) {
    lo = std::min(lo, p.checkpoint_values[idx] / t);
    hi = std::max(hi, p.checkpoint_values[idx] / t);
  }
  return {lo >= 0.09 && hi <= 0.11, "per-path Q(t)/t in [" + num(lo) + ", " + num(hi) + "]"};
}

Outcome ac3(std::size_t threads) {
  const auto ens = run_dpp_ensemble(bb1_scenario(0.5, 0.5), {}, 103, 1000000, 20, threads);
  const auto v = estimate_verdict(ens.series[0]);
  note_markov(v);
  const bool ok = v.rate_slope <= 0.01 && !v.strongly_stable;
  return {ok, "median Q(t)/t " + num(v.rate_slope) + ", plateau change " + num(v.plateau_change) +
                  " (strongly stable: " + (v.strongly_stable ? "yes" : "no") + ")"};
}

Outcome cex(const std::string& name, std::size_t H, std::size_t reps, std::uint64_t seed, std::size_t threads) {
  const auto ens = counterexample_ensemble(name, seed, H, reps, threads);
  const auto v = estimate_verdict(ens, counterexample_thresholds());
  note_markov(v);
  const auto rep = check_signature(name, ens);
  std::string d;
  for (const auto& c : rep.checks) d += (d.empty() ? "" : "; ") + c.name + "=" + num(c.value);
  return {rep.passed(), d};
}

Outcome ac4(std::size_t threads) { return cex("rate-not-mean", 41, 100000, 104, threads); }

Outcome ac5(std::size_t threads) { return cex("mean-not-rate", 201, 100000, 105, threads); }

Outcome ac6(std::size_t threads) { return cex("strong-not-rate", (std::size_t{1} << 20) + 1, 1, 106, threads); }

Outcome ac7() {
  const Scenario s = fixture("downlink2");
  const CompiledScenario cs(s);
  Xoshiro256 rng(107);
  std::size_t agree = 0;
  const std::size_t n = 10000;
  const std::vector<double> uniform(s.n_states(), 1.0 / static_cast<double>(s.n_states()));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t w = rng.categorical(uniform);
    std::vector<double> q(s.n_queues), z(s.n_constraints());
    for (auto& x : q) x = std::floor(200.0 * rng.uniform());
    for (auto& x : z) x = 100.0 * rng.uniform();
    const double V = 1000.0 * rng.uniform();
    const std::size_t ref = oracle::brute_force_argmin(s, w, q, z, V);
    agree += dpp_select_action(s, w, CompositeState(q, z), {V}) == ref && cs.select(w, q, z, V) == ref;
  }
  return {agree == n, std::to_string(agree) + "/" + std::to_string(n) + " agree"};
}

Outcome ac8() {
  bool ok = true;
  std::string d;
  for (const char* name : {"bb1", "downlink2", "tandem3"}) {
    const Scenario s = fixture(name);
    if (s.n_states() > 3) continue;
    const auto r = solve_fopt(s);
    const auto g = oracle::grid_fopt(s, stationary_distribution(s.chain).pi, 1000, 1e-12);
    const double tol = 1e-3 * (1.0 + std::abs(r.f_opt));
    const bool agree = r.feasible && g.feasible && std::abs(r.f_opt - g.f_opt) <= tol;
    ok = ok && agree;
    d += std::string(d.empty() ? "" : "; ") + name + " simplex " + num(r.f_opt) + " grid " + num(g.f_opt);
  }
  return {ok, d};
}

Outcome ac9(std::size_t threads) {
  const Scenario s = fixture("downlink2");
  const auto cap = solve_fopt(s);
  if (!(cap.d_max > 0.0)) return {false, "d_max is zero"};
  const auto drift = drift_constants(s, cap.d_max);
  const double eps = cap.d_max / 4.0;
  const std::size_t H = (std::size_t{1} << 20) + 1, reps = 8;
  bool ok = true;
  std::string d;
  double prev_cost = 0.0, prev_se = 0.0;
  bool first = true;
  for (double V : {1.0, 10.0, 100.0}) {
    const auto ens = run_dpp_ensemble(s, {V}, 109, H, reps, threads);
    double cost = 0.0, cost2 = 0.0, backlog = 0.0, worst_g = -1e300, worst_slope = 0.0;
    for (const auto& m : ens.metrics) {
      cost += m.avg_cost;
      cost2 += m.avg_cost * m.avg_cost;
      backlog += m.avg_backlog;
      for (double g : m.avg_g) worst_g = std::max(worst_g, g);
    }
    const double R = static_cast<double>(reps);
    cost /= R;
    backlog /= R;
    const double se = std::sqrt(std::max(cost2 / R - cost * cost, 0.0) / (R - 1.0));
    for (const auto& series : ens.series) {
      const auto v = estimate_verdict(series);
      note_markov(v);
      worst_slope = std::max(worst_slope, v.rate_slope);
    }
    const auto pb = performance_bounds(s, V, eps, drift, cap.f_opt);
    const bool a = worst_g <= 0.01;
    const bool b = worst_slope <= 0.01;
    const bool c = cost >= cap.f_opt - 3.0 * se - 1e-9 && (first || cost <= prev_cost + 3.0 * std::hypot(se, prev_se));
    const bool dd = backlog <= pb.backlog_bound && cost <= pb.cost_bound;
    ok = ok && a && b && c && dd;
    d += (first ? "" : "; ") + std::string("V=") + num(V) + " cost " + num(cost) + "±" + num(se) + " (f_opt " +
         num(cap.f_opt) + ", bound " + num(pb.cost_bound) + ") backlog " + num(backlog) + " (bound " +
         num(pb.backlog_bound) + ") max g " + num(worst_g) + " max slope " + num(worst_slope);
    prev_cost = cost;
    prev_se = se;
    first = false;
  }
  return {ok, d};
}

Outcome ac10() {
  return {g_markov_violations == 0 && g_markov_ensembles > 0,
          std::to_string(g_markov_violations) + " violations over " + std::to_string(g_markov_ensembles) +
              " ensembles"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qnetlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return qnetlab::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome ac11(const fs::path& root) {
  const std::string dl = std::string(QNET_SCENARIO_DIR) + "/downlink2.json";
  const std::string bb = std::string(QNET_SCENARIO_DIR) + "/bb1.json";
  const std::vector<std::vector<std::string>> commands{
      {"simulate", dl, "--horizon", "20000", "--reps", "6", "--V", "10", "--seed", "7", "--trace-reps", "2"},
      {"sweep-v", dl, "--horizon", "20000", "--reps", "2", "--seed", "7"},
      {"capacity", dl, "--lambda-grid", "0.5,1,1.5"},
      {"counterexample", "mean-not-rate", "--reps", "2000", "--seed", "7"},
      {"bb1", "--horizon", "20000", "--reps", "3", "--seed", "7"},
      {"simulate", bb, "--horizon", "5000", "--reps", "4", "--seed", "3", "--trace-reps", "4"},
  };
  std::size_t compared = 0;
  std::vector<std::string> bad;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    std::vector<fs::path> dirs;
    for (const char* run : {"a", "b", "c"}) {
      const fs::path dir = root / ("cmd" + std::to_string(i)) / run;
      fs::remove_all(dir);
      auto args = commands[i];
      args.insert(args.end(), {"--out", dir.string()});
      if (std::string(run) == "c" && args[0] != "capacity") args.insert(args.end(), {"--threads", "3"});
      if (cli(args) > 1) bad.push_back(args[0] + " failed");
      dirs.push_back(dir);
    }
    for (const auto& e : fs::directory_iterator(dirs[0])) {
      const auto name = e.path().filename();
      const auto ref = slurp(e.path());
      for (std::size_t k = 1; k < dirs.size(); ++k) {
        ++compared;
        if (slurp(dirs[k] / name) != ref) bad.push_back(commands[i][0] + "/" + name.string());
      }
    }
  }
  // The stability command on a trace written above.
  const fs::path trace = root / "cmd5" / "a" / "trace.csv";
  std::string first;
  for (const char* run : {"a", "b"}) {
    const fs::path dir = root / "stability" / run;
    fs::remove_all(dir);
    if (cli({"stability", trace.string(), "--min-horizon", "100", "--out", dir.string()}) != 0)
      bad.push_back("stability failed");
    const auto body = slurp(dir / "curves_Q_1.csv") + slurp(dir / "verdict.txt");
    if (first.empty())
      first = body;
    else if (body != first)
      bad.push_back("stability output differs");
    ++compared;
  }
  std::string d = std::to_string(compared) + " file comparisons";
  for (const auto& b : bad) d += "; mismatch " + b;
  return {bad.empty() && compared > 0, d};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance suite");
  std::string out = "acceptance_out";
  std::size_t threads = default_threads();
  app.add_option("--out", out, "Scratch directory for CLI outputs");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(out);

  struct Item {
    const char* id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Item> items{
      {"AC1", "bb1 golden backlog", [&] { return ac1(threads); }},
      {"AC2", "overload slope", [&] { return ac2(threads); }},
      {"AC3", "boundary rate stability", [&] { return ac3(threads); }},
      {"AC4", "rate stable, not mean-rate stable", [&] { return ac4(threads); }},
      {"AC5", "mean-rate stable, not rate stable", [&] { return ac5(threads); }},
      {"AC6", "strongly stable, not rate stable", [&] { return ac6(threads); }},
      {"AC7", "argmin oracle equivalence", [] { return ac7(); }},
      {"AC8", "simplex vs grid search", [] { return ac8(); }},
      {"AC9", "drift-plus-penalty property suite", [&] { return ac9(threads); }},
      {"AC10", "Markov tail invariant", [] { return ac10(); }},
      {"AC11", "byte-identical reruns", [&] { return ac11(fs::path(out)); }},
  };

  std::ofstream summary(fs::path(out) / "acceptance.txt");
  int failures = 0;
  for (const auto& item : items) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = item.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream line;
    line << item.id << " " << (o.pass ? "PASS" : "FAIL") << " " << item.title << ": " << o.detail << " ["
         << num(secs) << " s]";
    std::cout << line.str() << std::endl;
    summary << line.str() << "\n";
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
