#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "qnet/qnet.hpp"

namespace qnetlab {
namespace {

using qnet::fmt;

/// A usage or input problem; reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Report {
 public:
  template <class T>
  void add(const std::string& key, const T& value) {
    if constexpr (std::is_convertible_v<T, std::string>) {
      lines_.emplace_back(key, std::string(value));
    } else {
      lines_.emplace_back(key, fmt(value));
    }
  }
  std::string str() const {
    std::string s;
    for (const auto& [k, v] : lines_) s += k + "=" + v + "\n";
    return s;
  }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

std::filesystem::path prepare_out(const std::string& dir) {
  std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  return p;
}

std::string join(const std::vector<double>& v, const char* sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + fmt(v[i]);
  return s;
}

struct Common {
  std::string scenario;
  std::uint64_t seed = 1;
  std::size_t horizon = 0;
  std::size_t reps = 0;
  std::string mode = "respect";
  std::string out = ".";
  std::vector<double> lambda;
  double mu = -1.0;
  std::size_t threads = 1;
};

void add_common(CLI::App* c, Common& o, bool scenario = true) {
  if (scenario) c->add_option("scenario", o.scenario, "Scenario JSON file")->required();
  c->add_option("--seed", o.seed, "Master seed");
  c->add_option("--out", o.out, "Output directory");
  c->add_option("--threads", o.threads, "Worker threads (output does not depend on it)")->check(CLI::PositiveNumber);
}

void add_overrides(CLI::App* c, Common& o) {
  c->add_option("--lambda", o.lambda, "Arrival rate(s); one value or one per queue")->delimiter(',');
  c->add_option("--mu", o.mu, "Pr[second network state] for two-state scenarios");
  c->add_option("--mode", o.mode, "respect | clamped")->check(CLI::IsMember({"respect", "clamped"}));
}

qnet::Scenario load(const Common& o) {
  qnet::Scenario s = qnet::load_scenario(o.scenario);
  if (!o.lambda.empty()) qnet::override_rates(s, o.lambda);
  if (o.mu >= 0.0) qnet::override_service_probability(s, o.mu);
  qnet::validate(s);
  return s;
}

void require_horizon(std::size_t h) {
  if (h < 2) throw UsageError("--horizon must be at least 2");
}

// ---------------------------------------------------------------------------
// verdict output

void add_verdict(Report& r, const std::string& p, const qnet::StabilityVerdict& v) {
  r.add(p + "horizon", v.horizon);
  r.add(p + "reps", v.n_reps);
  r.add(p + "final_t", v.final_t);
  r.add(p + "rate_slope", v.rate_slope);
  r.add(p + "mean_rate_slope", v.mean_rate_slope);
  r.add(p + "mean_backlog", v.mean_backlog);
  r.add(p + "strong_metric", v.strong_metric);
  r.add(p + "strong_previous", v.strong_previous);
  r.add(p + "plateau_change", v.plateau_change);
  r.add(p + "m_max", v.m_max);
  r.add(p + "g_at_m_max", v.g.back());
  r.add(p + "tail_drift", v.tail_drift);
  r.add(p + "tail_nonzero_fraction", v.tail_nonzero_fraction);
  if (v.max_net_input_rate) r.add(p + "max_net_input_rate", *v.max_net_input_rate);
  r.add(p + "markov_violations", v.markov_violations);
  r.add(p + "rate_stable", v.rate_stable);
  r.add(p + "mean_rate_stable", v.mean_rate_stable ? fmt(*v.mean_rate_stable) : std::string("n/a"));
  r.add(p + "steady_state_stable", v.steady_state_stable);
  r.add(p + "strongly_stable", v.strongly_stable);
}

std::string curves_csv(const qnet::StabilityVerdict& v) {
  std::string s = "M,g,h_mean,h_p05,h_p95\n";
  for (std::size_t i = 0; i < v.grid.size(); ++i)
    s += fmt(v.grid[i]) + "," + fmt(v.g[i]) + "," + fmt(v.h_mean[i]) + "," + fmt(v.h_p05[i]) + "," + fmt(v.h_p95[i]) +
         "\n";
  return s;
}

std::string summary_line(const std::string& name, const qnet::StabilityVerdict& v) {
  auto word = [](bool b) { return b ? "stable" : "unstable"; };
  std::string s = name + ": rate=" + word(v.rate_stable) + " mean-rate=" +
                  (v.mean_rate_stable ? word(*v.mean_rate_stable) : "n/a") +
                  " steady-state=" + word(v.steady_state_stable) + " strong=" + word(v.strongly_stable) +
                  " slope=" + fmt(v.rate_slope) + " mean_backlog=" + fmt(v.mean_backlog);
  return s + "\n";
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOpts {
  Common c;
  double V = 0.0;
  std::size_t trace_stride = 0;
  std::size_t trace_reps = 1;
  std::size_t min_horizon = 1000;
};

std::string trace_header(const qnet::Scenario& s, bool with_rep) {
  std::string h = with_rep ? "rep,t" : "t";
  for (std::size_t k = 0; k < s.n_queues; ++k) h += ",Q_" + std::to_string(k + 1);
  for (std::size_t l = 0; l < s.n_constraints(); ++l) h += ",Z_" + std::to_string(l + 1);
  h += ",omega,action";
  for (std::size_t m = 0; m < s.n_attributes; ++m) h += ",x_" + std::to_string(m + 1);
  h += ",f";
  for (std::size_t l = 0; l < s.n_constraints(); ++l) h += ",g_" + std::to_string(l + 1);
  return h + "\n";
}

int cmd_simulate(const SimulateOpts& o, std::ostream& out) {
  require_horizon(o.c.horizon);
  if (o.c.reps == 0) throw UsageError("--reps must be at least 1");
  if (!(o.V >= 0.0)) throw UsageError("--V must be non-negative");
  const qnet::Scenario s = load(o.c);
  const qnet::DppConfig cfg{o.V, 0.0, qnet::parse_service_mode(o.c.mode)};
  const auto dir = prepare_out(o.c.out);
  const auto ens = qnet::run_dpp_ensemble(s, cfg, o.c.seed, o.c.horizon, o.c.reps, o.c.threads);

  // Per-slot trace of the first replications.
  const std::size_t stride = o.trace_stride ? o.trace_stride : std::max<std::size_t>(1, o.c.horizon / 100000);
  const std::size_t trace_reps = std::min(o.trace_reps, o.c.reps);
  const bool with_rep = trace_reps > 1;
  std::string trace = trace_header(s, with_rep);
  const qnet::CompiledScenario cs(s);
  for (std::size_t r = 0; r < trace_reps; ++r) {
    qnet::run_dpp_path(cs, cfg, o.c.seed, o.c.horizon, r, [&](const qnet::SlotView& v) {
      if (v.t % stride != 0) return;
      if (with_rep) trace += fmt(r) + ",";
      trace += fmt(v.t);
      for (double q : v.q) trace += "," + fmt(q);
      for (double z : v.z) trace += "," + fmt(z);
      trace += "," + fmt(v.omega) + "," + fmt(v.action);
      for (double x : v.x) trace += "," + fmt(x);
      trace += "," + fmt(v.f);
      for (double g : v.g) trace += "," + fmt(g);
      trace += "\n";
    });
  }
  write_file(dir / "trace.csv", trace);

  Report rep;
  rep.add("command", "simulate");
  rep.add("scenario", s.name);
  rep.add("seed", fmt(static_cast<std::size_t>(o.c.seed)));
  rep.add("horizon", o.c.horizon);
  rep.add("reps", o.c.reps);
  rep.add("V", o.V);
  rep.add("mode", o.c.mode);
  rep.add("lambda", join(s.rates()));

  const double R = static_cast<double>(o.c.reps);
  double cost = 0.0, cost_sq = 0.0, backlog = 0.0;
  std::vector<double> g(s.n_constraints(), 0.0), q(s.n_queues, 0.0);
  for (const auto& m : ens.metrics) {
    cost += m.avg_cost;
    cost_sq += m.avg_cost * m.avg_cost;
    backlog += m.avg_backlog;
    for (std::size_t l = 0; l < g.size(); ++l) g[l] += m.avg_g[l];
    for (std::size_t k = 0; k < q.size(); ++k) q[k] += m.avg_q[k];
  }
  cost /= R;
  rep.add("avg_cost", cost);
  rep.add("avg_cost_se", o.c.reps > 1 ? std::sqrt(std::max(0.0, cost_sq / R - cost * cost) / (R - 1.0)) : 0.0);
  rep.add("avg_backlog", backlog / R);
  for (std::size_t k = 0; k < q.size(); ++k) rep.add("avg_Q_" + std::to_string(k + 1), q[k] / R);
  for (std::size_t l = 0; l < g.size(); ++l) rep.add("avg_g_" + std::to_string(l + 1), g[l] / R);

  out << "simulate " << s.name << ": horizon=" << o.c.horizon << " reps=" << o.c.reps << " V=" << fmt(o.V)
      << " avg_backlog=" << fmt(backlog / R) << " avg_cost=" << fmt(cost) << "\n";
  if (o.c.horizon >= o.min_horizon) {
    qnet::StabilityThresholds th;
    th.min_horizon = o.min_horizon;
    bool all = true;
    for (std::size_t i = 0; i < ens.names.size(); ++i) {
      const auto v = qnet::estimate_verdict(ens.series[i], th);
      add_verdict(rep, ens.names[i] + ".", v);
      write_file(dir / ("curves_" + ens.names[i] + ".csv"), curves_csv(v));
      out << summary_line(ens.names[i], v);
      all = all && v.rate_stable && v.mean_rate_stable.value_or(true) && v.steady_state_stable && v.strongly_stable;
    }
    rep.add("all_stable", all);
  } else {
    rep.add("verdict", "skipped: horizon below " + fmt(o.min_horizon));
    out << "verdict skipped: horizon below " << o.min_horizon << "\n";
  }
  write_file(dir / "verdict.txt", rep.str());
  return 0;
}

// ---------------------------------------------------------------------------
// sweep-v

struct SweepOpts {
  Common c;
  std::vector<double> V{1.0, 10.0, 100.0};
  double epsilon = 0.0;
};

int cmd_sweep(const SweepOpts& o, std::ostream& out) {
  require_horizon(o.c.horizon);
  if (o.c.reps == 0) throw UsageError("--reps must be at least 1");
  const qnet::Scenario s = load(o.c);
  const auto cap = qnet::solve_fopt(s);
  if (!cap.feasible) throw UsageError("lambda_in_capacity=false: arrival rates lie outside the capacity region");
  if (!(cap.d_max > 0.0)) throw UsageError("d_max=0: arrival rates lie on the boundary of the capacity region");
  const auto drift = qnet::drift_constants(s, cap.d_max);
  const double eps = o.epsilon > 0.0 ? o.epsilon : cap.d_max / 4.0;
  const auto dir = prepare_out(o.c.out);
  const auto mode = qnet::parse_service_mode(o.c.mode);

  std::string csv = "V,avg_backlog,avg_cost";
  for (std::size_t l = 0; l < s.n_constraints(); ++l) csv += ",g_" + std::to_string(l + 1);
  csv += ",backlog_bound,cost_bound\n";
  Report rep;
  rep.add("command", "sweep-v");
  rep.add("scenario", s.name);
  rep.add("seed", fmt(static_cast<std::size_t>(o.c.seed)));
  rep.add("horizon", o.c.horizon);
  rep.add("reps", o.c.reps);
  rep.add("mode", o.c.mode);
  rep.add("lambda", join(s.rates()));
  rep.add("f_opt", cap.f_opt);
  rep.add("d_max", cap.d_max);
  rep.add("B", drift.B);
  rep.add("D", drift.D);
  rep.add("T", drift.T);
  rep.add("epsilon", eps);
  for (double V : o.V) {
    if (!(V >= 0.0)) throw UsageError("--V entries must be non-negative");
    const auto ens = qnet::run_dpp_ensemble(s, {V, 0.0, mode}, o.c.seed, o.c.horizon, o.c.reps, o.c.threads);
    const auto pb = qnet::performance_bounds(s, V, eps, drift, cap.f_opt);
    const double R = static_cast<double>(o.c.reps);
    double backlog = 0.0, cost = 0.0, cost_sq = 0.0;
    std::vector<double> g(s.n_constraints(), 0.0);
    for (const auto& m : ens.metrics) {
      backlog += m.avg_backlog;
      cost += m.avg_cost;
      cost_sq += m.avg_cost * m.avg_cost;
      for (std::size_t l = 0; l < g.size(); ++l) g[l] += m.avg_g[l];
    }
    backlog /= R;
    cost /= R;
    for (auto& x : g) x /= R;
    csv += fmt(V) + "," + fmt(backlog) + "," + fmt(cost);
    for (double x : g) csv += "," + fmt(x);
    csv += "," + fmt(pb.backlog_bound) + "," + fmt(pb.cost_bound) + "\n";

    const std::string p = "V=" + fmt(V) + ".";
    rep.add(p + "avg_cost_se", o.c.reps > 1 ? std::sqrt(std::max(0.0, cost_sq / R - cost * cost) / (R - 1.0)) : 0.0);
    rep.add(p + "c0", pb.c0);
    rep.add(p + "T_eps", pb.T_eps);
    for (std::size_t i = 0; i < ens.names.size(); ++i) {
      qnet::StabilityThresholds th;
      th.min_horizon = 2;
      const auto v = qnet::estimate_verdict(ens.series[i], th);
      rep.add(p + ens.names[i] + ".rate_slope", v.rate_slope);
    }
    out << "V=" << fmt(V) << " avg_backlog=" << fmt(backlog) << " (bound " << fmt(pb.backlog_bound)
        << ") avg_cost=" << fmt(cost) << " (bound " << fmt(pb.cost_bound) << ")\n";
  }
  write_file(dir / "sweep.csv", csv);
  write_file(dir / "sweep_report.txt", rep.str());
  return 0;
}

// ---------------------------------------------------------------------------
// capacity

struct CapacityOpts {
  Common c;
  std::vector<double> grid;
};

int cmd_capacity(const CapacityOpts& o, std::ostream& out) {
  const qnet::Scenario s = load(o.c);
  const auto dir = prepare_out(o.c.out);
  const auto cap = qnet::solve_fopt(s);
  Report rep;
  rep.add("command", "capacity");
  rep.add("scenario", s.name);
  rep.add("lambda", join(s.rates()));
  rep.add("feasible", cap.feasible);
  rep.add("lambda_in_capacity", cap.feasible);
  rep.add("f_opt", cap.f_opt);
  rep.add("d_max", cap.d_max);
  rep.add("routing_outer_bound", cap.outer_bound);
  std::string binding;
  for (std::size_t i = 0; i < cap.binding_constraints.size(); ++i)
    binding += (i ? ";" : "") + cap.binding_constraints[i];
  rep.add("binding", binding);
  if (cap.feasible) {
    for (std::size_t w = 0; w < s.n_states(); ++w)
      for (std::size_t a = 0; a < s.actions[w].size(); ++a)
        rep.add("policy." + s.omega_names[w] + "." + s.actions[w][a].name, cap.policy[w][a]);
  }
  if (cap.d_max > 0.0) {
    const auto drift = qnet::drift_constants(s, cap.d_max);
    const auto sum = qnet::validate(s);
    rep.add("B", drift.B);
    rep.add("D", drift.D);
    rep.add("T", drift.T);
    rep.add("c0", 4.0 * sum.f_max / cap.d_max + 1.0);
  }
  write_file(dir / "capacity.txt", rep.str());
  out << rep.str();

  if (!o.grid.empty()) {
    const auto base = s.rates();
    std::string csv = "scale";
    for (std::size_t k = 0; k < s.n_queues; ++k) csv += ",lambda_" + std::to_string(k + 1);
    csv += ",feasible,f_opt,d_max\n";
    for (double scale : o.grid) {
      std::vector<double> lam = base;
      for (auto& x : lam) x *= scale;
      const auto r = qnet::solve_fopt(s, lam);
      csv += fmt(scale) + "," + join(lam) + "," + fmt(r.feasible) + "," + fmt(r.f_opt) + "," + fmt(r.d_max) + "\n";
    }
    write_file(dir / "capacity_sweep.csv", csv);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// stability

struct StabilityOpts {
  std::string csv;
  std::string column = "Q_1";
  std::string out = ".";
  std::size_t min_horizon = 1000;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string x;
  while (std::getline(ss, x, ',')) f.push_back(x);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  return f;
}

int cmd_stability(const StabilityOpts& o, std::ostream& out) {
  std::ifstream in(o.csv);
  if (!in) throw UsageError("cannot open " + o.csv);
  std::string line;
  if (!std::getline(in, line)) throw UsageError(o.csv + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  auto find = [&](const std::string& n) -> long {
    const auto it = std::find(header.begin(), header.end(), n);
    return it == header.end() ? -1 : static_cast<long>(it - header.begin());
  };
  const long tcol = find("t"), rcol = find("rep"), qcol = find(o.column);
  if (tcol < 0) throw UsageError(o.csv + ": no 't' column");
  if (qcol < 0) throw UsageError(o.csv + ": no '" + o.column + "' column");

  std::vector<std::string> rep_order;
  std::map<std::string, std::vector<double>> paths;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != header.size()) throw UsageError(o.csv + ":" + fmt(lineno) + ": wrong number of fields");
    const std::string r = rcol >= 0 ? f[rcol] : "0";
    auto [it, fresh] = paths.try_emplace(r);
    if (fresh) rep_order.push_back(r);
    std::size_t t = 0;
    double q = 0.0;
    try {
      t = std::stoul(f[tcol]);
      q = std::stod(f[qcol]);
    } catch (const std::exception&) {
      throw UsageError(o.csv + ":" + fmt(lineno) + ": unparsable number");
    }
    if (t != it->second.size())
      throw UsageError(o.csv + ":" + fmt(lineno) + ": t must run 0,1,2,... within each replication");
    it->second.push_back(q);
  }
  if (rep_order.empty()) throw UsageError(o.csv + ": no data rows");
  const std::size_t H = paths[rep_order[0]].size();
  require_horizon(H);
  qnet::EnsembleSummary ens(H);
  for (const auto& r : rep_order) {
    if (paths[r].size() != H) throw UsageError(o.csv + ": replications have different lengths");
    ens.add(paths[r]);
  }
  qnet::StabilityThresholds th;
  th.min_horizon = o.min_horizon;
  const auto v = qnet::estimate_verdict(ens, th);
  const auto dir = prepare_out(o.out);
  Report rep;
  rep.add("command", "stability");
  rep.add("column", o.column);
  add_verdict(rep, o.column + ".", v);
  write_file(dir / "verdict.txt", rep.str());
  write_file(dir / ("curves_" + o.column + ".csv"), curves_csv(v));
  out << summary_line(o.column, v);
  return 0;
}

// ---------------------------------------------------------------------------
// counterexample

struct CexOpts {
  std::string name;
  std::uint64_t seed = 1;
  std::size_t reps = 100000;
  std::size_t horizon = 0;
  std::string out = ".";
  std::size_t threads = 1;
};

int cmd_counterexample(const CexOpts& o, std::ostream& out) {
  const std::size_t H = o.horizon ? o.horizon : qnet::default_counterexample_horizon(o.name);
  qnet::check_counterexample_horizon(o.name, H);
  if (o.reps == 0) throw UsageError("--reps must be at least 1");
  const std::size_t reps = o.name == "strong-not-rate" ? 1 : o.reps;
  const auto ens = qnet::counterexample_ensemble(o.name, o.seed, H, reps, o.threads);
  const auto v = qnet::estimate_verdict(ens, qnet::counterexample_thresholds());
  const auto sig = qnet::check_signature(o.name, ens);
  const auto dir = prepare_out(o.out);

  std::string csv = "t,mean_Q,mean_Q_over_t,median_Q_over_t\n";
  for (const auto& c : v.slopes)
    csv += fmt(c.t) + "," + fmt(ens.ensemble_mean(c.t)) + "," + fmt(c.mean) + "," + fmt(c.median) + "\n";
  write_file(dir / "checkpoints.csv", csv);
  write_file(dir / "curves_Q.csv", curves_csv(v));

  Report rep;
  rep.add("command", "counterexample");
  rep.add("name", o.name);
  rep.add("seed", fmt(static_cast<std::size_t>(o.seed)));
  add_verdict(rep, "Q.", v);
  for (const auto& c : sig.checks) {
    rep.add("check." + c.name + ".value", c.value);
    rep.add("check." + c.name + ".expected", c.expected);
    rep.add("check." + c.name + ".tolerance", c.tolerance);
    rep.add("check." + c.name + ".passed", c.passed);
  }
  rep.add("signature_passed", sig.passed());
  write_file(dir / "verdict.txt", rep.str());
  out << summary_line(o.name, v);
  for (const auto& c : sig.checks)
    out << "  " << (c.passed ? "ok   " : "FAIL ") << c.name << " value=" << fmt(c.value)
        << " expected=" << fmt(c.expected) << "\n";
  return sig.passed() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// bb1

struct BB1Opts {
  double lambda = 0.3;
  double mu = 0.5;
  std::uint64_t seed = 1;
  std::size_t horizon = 0;
  std::size_t reps = 20;
  std::string out = ".";
  std::size_t threads = 1;
};

int cmd_bb1(const BB1Opts& o, std::ostream& out) {
  Report rep;
  rep.add("command", "bb1");
  rep.add("lambda", o.lambda);
  rep.add("mu", o.mu);
  const auto cf = qnet::bb1_closed_form(o.lambda, o.mu);
  rep.add("Q_bar", cf.mean_backlog);
  rep.add("W_bar", cf.mean_delay);
  if (o.horizon > 0) {
    require_horizon(o.horizon);
    const auto s = qnet::bb1_scenario(o.lambda, o.mu);
    const auto ens = qnet::run_dpp_ensemble(s, {}, o.seed, o.horizon, o.reps, o.threads);
    double m = 0.0;
    for (const auto& x : ens.metrics) m += x.avg_q[0];
    m /= static_cast<double>(o.reps);
    rep.add("seed", fmt(static_cast<std::size_t>(o.seed)));
    rep.add("horizon", o.horizon);
    rep.add("reps", o.reps);
    rep.add("measured_Q_bar", m);
    rep.add("relative_error", std::abs(m - cf.mean_backlog) / cf.mean_backlog);
  }
  write_file(prepare_out(o.out) / "bb1.txt", rep.str());
  out << rep.str();
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete-time queueing network laboratory", "qnetlab"};
  app.require_subcommand(1);

  SimulateOpts sim;
  sim.c.horizon = 100000;
  sim.c.reps = 100;
  auto* simulate = app.add_subcommand("simulate", "Run the drift-plus-penalty controller and classify stability");
  add_common(simulate, sim.c);
  add_overrides(simulate, sim.c);
  simulate->add_option("--horizon", sim.c.horizon, "Slots per replication");
  simulate->add_option("--reps", sim.c.reps, "Replications");
  simulate->add_option("--V", sim.V, "Penalty weight");
  simulate->add_option("--trace-stride", sim.trace_stride, "Write every n-th slot to trace.csv");
  simulate->add_option("--trace-reps", sim.trace_reps, "Replications written to trace.csv");
  simulate->add_option("--min-horizon", sim.min_horizon, "Shortest horizon that gets a verdict");

  SweepOpts sw;
  sw.c.horizon = 100000;
  sw.c.reps = 4;
  auto* sweep = app.add_subcommand("sweep-v", "Sweep the penalty weight V and compare with the bounds");
  add_common(sweep, sw.c);
  add_overrides(sweep, sw.c);
  sweep->add_option("--horizon", sw.c.horizon, "Slots per replication");
  sweep->add_option("--reps", sw.c.reps, "Replications per V");
  sweep->add_option("--V", sw.V, "Comma-separated V values")->delimiter(',');
  sweep->add_option("--epsilon", sw.epsilon, "Epsilon of the cost bound (default d_max/4)");

  CapacityOpts cp;
  auto* capacity = app.add_subcommand("capacity", "Solve the capacity linear program");
  add_common(capacity, cp.c);
  add_overrides(capacity, cp.c);
  capacity->add_option("--lambda-grid", cp.grid, "Scale factors applied to lambda (writes capacity_sweep.csv)")
      ->delimiter(',');

  StabilityOpts st;
  auto* stability = app.add_subcommand("stability", "Classify stability from a trace CSV");
  stability->add_option("csv", st.csv, "CSV with a 't' column, optional 'rep' column")->required();
  stability->add_option("--column", st.column, "Backlog column");
  stability->add_option("--out", st.out, "Output directory");
  stability->add_option("--min-horizon", st.min_horizon, "Shortest accepted horizon");

  CexOpts cx;
  auto* cex = app.add_subcommand("counterexample", "Regenerate a separating example and check its signature");
  cex->add_option("name", cx.name, "rate-not-mean | mean-not-rate | strong-not-rate")->required();
  cex->add_option("--seed", cx.seed, "Master seed");
  cex->add_option("--reps", cx.reps, "Replications");
  cex->add_option("--horizon", cx.horizon, "Path length (default depends on the example)");
  cex->add_option("--out", cx.out, "Output directory");
  cex->add_option("--threads", cx.threads, "Worker threads")->check(CLI::PositiveNumber);

  BB1Opts bb;
  auto* bb1 = app.add_subcommand("bb1", "Closed-form Bernoulli/Bernoulli/1 values, optionally simulated");
  bb1->add_option("--lambda", bb.lambda, "Arrival probability");
  bb1->add_option("--mu", bb.mu, "Service probability");
  bb1->add_option("--seed", bb.seed, "Master seed");
  bb1->add_option("--horizon", bb.horizon, "Simulate with this many slots (0 = closed form only)");
  bb1->add_option("--reps", bb.reps, "Replications");
  bb1->add_option("--out", bb.out, "Output directory");
  bb1->add_option("--threads", bb.threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*sweep) return cmd_sweep(sw, out);
    if (*capacity) return cmd_capacity(cp, out);
    if (*stability) return cmd_stability(st, out);
    if (*cex) return cmd_counterexample(cx, out);
    if (*bb1) return cmd_bb1(bb, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const qnet::ScenarioError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace qnetlab
