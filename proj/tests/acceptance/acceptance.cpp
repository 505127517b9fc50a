// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: enachi_acceptance [--out DIR] [--only C4,C7]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "enachi/lambert_w.hpp"
#include "enachi/sim_engine.hpp"
#include "enachi/trace_io.hpp"
#include "enachi/verifier.hpp"

namespace fs = std::filesystem;
using namespace enachi;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// Drift checks of criterion 7 collect here while criteria 4 and 5 run.
struct DriftTally {
  int traces = 0;
  long long frames = 0;
  int violations = 0;
  double min_slack = 1e300;
  void add(const RunSummary& s, double budget) {
    const DriftReport r = drift_bound_check(bound_trace(s.trace), budget);
    ++traces;
    frames += r.frames;
    violations += r.violations;
    min_slack = std::min(min_slack, r.min_slack);
  }
};
DriftTally g_drift;

SimConfig table_one() {
  SimConfig c;  // defaults are the Table-I values
  c.users = 1;
  return c;
}

// ---------------------------------------------------------------------------

Result c1_outer_kkt() {
  const auto t0 = Clock::now();
  const OracleReport r = outer_kkt_oracle(1, 200, 100000);
  const double t = seconds_since(t0);
  return {r.pass && t < 30.0, "draws=200 interior=" + std::to_string(r.interior) +
                                  " max_err=" + fmt("%.3g", r.max_error) +
                                  " tol=" + fmt("%.3g", r.tolerance) + " time=" + fmt("%.1fs", t)};
}

Result c2_inner_kkt() {
  const OracleReport r = inner_kkt_oracle(2, 200, 100000);
  const CurvatureReport c = inner_curvature_check(2, 200);
  return {r.pass && c.pass && c.max_rel_error <= 1e-4,
          "draws=200 max_err=" + fmt("%.3g", r.max_error) + " tol=" + fmt("%.3g", r.tolerance) +
              " curvature_rel_err=" + fmt("%.3g", c.max_rel_error) +
              " nonneg=" + std::to_string(c.non_negative)};
}

Result c3_lambert() {
  long double worst = 0.0L;
  for (int i = 0; i < 10000; ++i) {
    const long double x = std::pow(10.0L, -8.0L + 14.0L * i / 9999.0L);
    const long double w = lambert_w0l(x);
    worst = std::max(worst, std::fabs(w * std::exp(w) - x));
  }
  const double w0 = lambert_w0(0.0);
  const double we = lambert_w0(std::numbers::e);
  const bool ok = worst <= 1e-10L && std::abs(w0) <= 1e-12 && std::abs(we - 1.0) <= 1e-12;
  return {ok, "points=10000 max_residual=" + fmt("%.3g", static_cast<double>(worst)) +
                  " |W(0)|=" + fmt("%.1g", std::abs(w0)) +
                  " |W(e)-1|=" + fmt("%.1g", std::abs(we - 1.0))};
}

Result c4_energy_tracking() {
  const auto t0 = Clock::now();
  SimConfig c = table_one();
  c.frames = 10000;
  double worst_e = 0.0, worst_q = 0.0;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    c.seed = seed;
    const RunSummary s = run_simulation(c, true);
    const double qm = s.final_queues[0] / c.frames;
    worst_e = std::max(worst_e, s.mean_energy);
    worst_q = std::max(worst_q, qm);
    ok = ok && s.mean_energy <= 1.05 * c.energy_budget && qm <= 1e-3;
    g_drift.add(s, c.energy_budget);
  }
  const double t = seconds_since(t0);
  return {ok && t < 120.0, "seeds=10 M=10000 max_mean_energy=" + fmt("%.4f", worst_e) +
                               " (<= " + fmt("%.4f", 1.05 * c.energy_budget) + ") max_QM/M=" +
                               fmt("%.3g", worst_q) + " time=" + fmt("%.1fs", t)};
}

Result c5_v_tradeoff() {
  const std::vector<double> grid = {1, 10, 50, 100, 1000};
  SimConfig c = table_one();
  c.frame_deadline = 0.2;  // at 300 ms the budget never binds
  c.frames = 10000;
  std::vector<double> acc, energy;
  const int before = g_drift.violations;
  for (double V : grid) {
    c.V = V;
    double a = 0.0, e = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      c.seed = seed;
      const RunSummary s = run_simulation(c, true);
      a += s.mean_accuracy / 10.0;
      e += s.mean_energy / 10.0;
      g_drift.add(s, c.energy_budget);
    }
    acc.push_back(a);
    energy.push_back(e);
  }
  bool mono = true;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    mono = mono && acc[i] >= acc[i - 1] && energy[i] >= energy[i - 1];
  }
  // middle band: V = 10 -> 50 -> 100
  bool strict = false;
  for (std::size_t i = 2; i <= 3; ++i) {
    strict = strict || acc[i] > acc[i - 1] || energy[i] > energy[i - 1];
  }
  std::string d = "T=200ms seeds=10 M=10000 acc=";
  for (double a : acc) d += fmt("%.5f/", a);
  d.back() = ' ';
  d += "energy=";
  for (double e : energy) d += fmt("%.4f/", e);
  d.back() = ' ';
  const int violations = g_drift.violations - before;
  d += "violations=" + std::to_string(violations);
  return {mono && strict && violations == 0, d};
}

Result c6_gap_bounds() {
  VerifyOptions o;
  double worst_acc = 1e300, worst_energy = 1e300, worst_t = 0.0;
  long long space = 0;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto t0 = Clock::now();
    const TinyReport r = verify_tiny_instance(seed, 1);
    const double t = seconds_since(t0);
    worst_t = std::max(worst_t, t);
    space = r.decision_space;
    ok = ok && r.pass && r.offline.evaluated == r.decision_space && t < 300.0;
    worst_acc = std::min(worst_acc, r.gap.accuracy_slack);
    for (double s : r.gap.energy_slack) worst_energy = std::min(worst_energy, s);
  }
  return {ok && worst_acc >= 0.0 && worst_energy >= 0.0,
          "instances=10 decisions=" + std::to_string(space) +
              " min_accuracy_slack=" + fmt("%.4g", worst_acc) +
              " min_energy_slack=" + fmt("%.4g", worst_energy) +
              " max_time=" + fmt("%.2fs", worst_t)};
}

Result c7_drift() {
  return {g_drift.traces == 60 && g_drift.violations == 0,
          "traces=" + std::to_string(g_drift.traces) + " frames=" +
              std::to_string(g_drift.frames) + " violations=" + std::to_string(g_drift.violations) +
              " min_slack=" + fmt("%.3g", g_drift.min_slack)};
}

struct Cell {
  double acc = 0.0, energy = 0.0, success = 0.0;
};

Cell mean_cell(SimConfig c, int seeds) {
  Cell out;
  for (int s = 1; s <= seeds; ++s) {
    c.seed = static_cast<std::uint64_t>(s);
    const RunSummary r = run_simulation(c, false);
    out.acc += r.mean_accuracy / seeds;
    out.energy += r.mean_energy / seeds;
    out.success += r.success_rate / seeds;
  }
  return out;
}

Result c8_baselines(const fs::path& out_dir) {
  const std::vector<double> deadlines = {0.1, 0.15, 0.2, 0.25, 0.3};
  const std::vector<std::string> baselines = {"edge-only", "fixed:1", "fixed:2",
                                              "fixed:3",   "fixed:4", "device-only"};
  SimConfig c = table_one();
  c.frames = 2000;
  const int seeds = 5;
  std::ofstream csv(out_dir / "baselines.csv");
  csv << "deadline,policy,accuracy,energy,success\n";

  // Accuracy without any features: the clipped surrogate at beta = 0.
  double a_zero = 0.0;
  for (int s : c.model().split_points()) {
    if (!c.model().is_fully_local(s)) a_zero = std::max(a_zero, c.model().accuracy(s, 0.0));
  }

  int dominated = 0;
  bool have_tstar = false, below_ok = true;
  int below = 0;
  std::string d;
  for (double T : deadlines) {
    c.frame_deadline = T;
    c.policy = parse_policy("enachi");
    const Cell e = mean_cell(c, seeds);
    csv << fmt_num(T) << ",enachi," << fmt_num(e.acc) << ',' << fmt_num(e.energy) << ','
        << fmt_num(e.success) << '\n';
    bool all = true;
    for (const auto& b : baselines) {
      c.policy = parse_policy(b);
      const Cell x = mean_cell(c, seeds);
      csv << fmt_num(T) << ',' << b << ',' << fmt_num(x.acc) << ',' << fmt_num(x.energy) << ','
          << fmt_num(x.success) << '\n';
      const bool better = e.acc > x.acc + 0.01;
      const bool equal_cheaper = std::abs(e.acc - x.acc) <= 0.01 && e.energy <= x.energy;
      all = all && (better || equal_cheaper);
      if (b == "device-only") {
        if (x.success > 0.0) {
          have_tstar = true;
        } else if (!have_tstar) {
          ++below;
          below_ok = below_ok && e.acc > a_zero + 0.05;
        }
      }
    }
    if (all) ++dominated;
    d += fmt("%g:", T * 1000) + (all ? "ok" : "no") + fmt("(%.3f) ", e.acc);
  }
  // T* is the first grid deadline where device-only succeeds; at least one
  // grid point must lie below it.
  const bool feasibility = have_tstar && below > 0 && below_ok;
  d += "deadlines_below_T*=" + std::to_string(below) + " dominated=" + std::to_string(dominated) +
       "/5";
  return {feasibility && dominated >= 3, d};
}

Result c9_scalability(const fs::path& out_dir) {
  const std::vector<int> grid = {5, 10, 15, 20, 25};
  SimConfig c = table_one();
  c.frame_deadline = 0.2;
  c.total_bandwidth = 2e7;
  c.frames = 1500;
  const int seeds = 3;
  std::ofstream csv(out_dir / "scalability.csv");
  csv << "users,policy,accuracy,energy\n";
  std::map<std::string, std::vector<double>> energy;
  for (const char* pol : {"enachi", "myopic"}) {
    c.policy = parse_policy(pol);
    for (int n : grid) {
      c.users = n;
      const Cell x = mean_cell(c, seeds);
      energy[pol].push_back(x.energy);
      csv << n << ',' << pol << ',' << fmt_num(x.acc) << ',' << fmt_num(x.energy) << '\n';
    }
  }
  const auto& e = energy["enachi"];
  const auto& m = energy["myopic"];
  const double lo = *std::min_element(e.begin(), e.end());
  const double hi = *std::max_element(e.begin(), e.end());
  const double spread = (hi - lo) / lo;
  bool grows = true;
  for (std::size_t i = 1; i < m.size(); ++i) grows = grows && m[i] > m[i - 1];
  std::string d = "enachi=";
  for (double x : e) d += fmt("%.4f/", x);
  d.back() = ' ';
  d += "spread=" + fmt("%.1f%%", 100.0 * spread) + " myopic=";
  for (double x : m) d += fmt("%.6f/", x);
  d.back() = ' ';
  return {spread < 0.15 && grows, d};
}

Result c10_determinism(const fs::path& out_dir) {
  SimConfig c = table_one();
  c.frame_deadline = 0.2;
  c.users = 3;
  c.total_bandwidth = 6e6;
  c.frames = 300;
  c.seed = 17;
  auto write = [&](const fs::path& p) {
    std::ofstream os(p, std::ios::binary);
    write_trace(os, run_simulation(c, true).trace);
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  bool ok = true;
  std::size_t bytes = 0;
  for (int round = 0; round < 2; ++round) {
    const fs::path a = out_dir / ("trace_r" + std::to_string(round) + "_a.csv");
    const fs::path b = out_dir / ("trace_r" + std::to_string(round) + "_b.csv");
    write(a);
    write(b);
    const std::string sa = slurp(a), sb = slurp(b);
    ok = ok && !sa.empty() && sa == sb;
    bytes = sa.size();
  }
  return {ok, "checks=2 bytes=" + std::to_string(bytes)};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path out_dir = "acceptance_out";
  std::set<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out" && i + 1 < argc) {
      out_dir = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(item);
    } else {
      std::fprintf(stderr, "usage: %s [--out DIR] [--only C1,C2,...]\n", argv[0]);
      return 2;
    }
  }
  fs::create_directories(out_dir);

  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"C1 outer KKT oracle", c1_outer_kkt},
      {"C2 inner KKT oracle + curvature", c2_inner_kkt},
      {"C3 Lambert W residual", c3_lambert},
      {"C4 energy constraint tracking", c4_energy_tracking},
      {"C5 V trade-off", c5_v_tradeoff},
      {"C6 optimality-gap bounds, tiny instances", c6_gap_bounds},
      {"C7 drift inequality on C4/C5 traces", c7_drift},
      {"C8 baseline dominance / feasibility", [&] { return c8_baselines(out_dir); }},
      {"C9 scalability trend", [&] { return c9_scalability(out_dir); }},
      {"C10 determinism", [&] { return c10_determinism(out_dir); }},
  };

  std::ofstream summary(out_dir / "acceptance.csv");
  summary << "criterion,pass,seconds,detail\n";
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const std::string id = name.substr(0, name.find(' '));
    // C7 reads the traces of C4 and C5
    if (!only.empty() && !only.contains(id) &&
        !(id != "C7" && only.contains("C7") && (id == "C4" || id == "C5"))) {
      continue;
    }
    const auto t0 = Clock::now();
    Result r;
    try {
      r = run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double t = seconds_since(t0);
    if (!r.pass) ++failed;
    std::printf("%-4s %-40s %s  %s [%.1fs]\n", r.pass ? "PASS" : "FAIL", name.c_str(),
                "|", r.detail.c_str(), t);
    std::fflush(stdout);
    summary << id << ',' << (r.pass ? 1 : 0) << ',' << fmt("%.2f", t) << ",\"" << r.detail
            << "\"\n";
  }
  std::printf("%s: %d failed\n", failed ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED", failed);
  return failed ? 1 : 0;
}
