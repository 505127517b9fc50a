// enachi: run, sweep and verify from the command line.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "enachi/config.hpp"
#include "enachi/lambert_w.hpp"
#include "enachi/sim_engine.hpp"
#include "enachi/trace_io.hpp"
#include "enachi/verifier.hpp"

namespace fs = std::filesystem;
using namespace enachi;

namespace {

SimConfig base_config(const std::string& path) {
  if (path.empty()) return SimConfig{};
  return load_config(path);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad grid value '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("--grid must list at least one value");
  return out;
}

// "1,2,5" or "1-10".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& s : split_list(text)) {
    const auto dash = s.find('-');
    if (dash != std::string::npos && dash > 0) {
      const auto lo = std::stoull(s.substr(0, dash));
      const auto hi = std::stoull(s.substr(dash + 1));
      if (hi < lo) throw std::invalid_argument("bad seed range '" + s + "'");
      for (auto x = lo; x <= hi; ++x) out.push_back(x);
    } else {
      out.push_back(std::stoull(s));
    }
  }
  if (out.empty()) throw std::invalid_argument("--seeds must list at least one seed");
  return out;
}

void apply_axis(SimConfig& c, const std::string& axis, double value) {
  if (axis == "deadline") {
    c.frame_deadline = value;
  } else if (axis == "bandwidth") {
    c.total_bandwidth = value;
  } else if (axis == "users") {
    c.users = static_cast<int>(value);
    if (c.users != value) throw std::invalid_argument("users grid values must be integers");
    if (c.path_loss_gain.size() > 1) c.path_loss_gain.resize(1);
  } else if (axis == "V") {
    c.V = value;
  } else {
    throw std::invalid_argument("unknown axis '" + axis + "' (deadline, bandwidth, users, V)");
  }
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
  return os;
}

// Runs jobs on a small pool; results land at their own index.
template <typename F>
void parallel_for(std::size_t count, int threads, F&& job) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double broken_lambert(double x) { return 1.05 * lambert_w0(x) + 0.01; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-timescale split-inference scheduling simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> policy;
  std::optional<int> frames;

  auto* run = app.add_subcommand("run", "simulate one configuration");
  run->add_option("--config", config_path, "JSON configuration file");
  run->add_option("--seed", seed, "override the configured seed");
  run->add_option("--out", out, "output directory (trace.csv, summary.csv)")->default_val("out");
  run->add_option("--policy", policy, "enachi, edge-only, device-only, fixed:<s>, myopic");
  run->add_option("--frames", frames, "override the number of frames");
  bool no_trace = false;
  run->add_flag("--no-trace", no_trace, "skip trace.csv");

  auto* sweep = app.add_subcommand("sweep", "sweep one axis over policies and seeds");
  std::string axis, grid, policies = "enachi", seeds = "1-10";
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  sweep->add_option("--config", config_path, "JSON configuration file");
  sweep->add_option("--axis", axis, "deadline, bandwidth, users or V")->required();
  sweep->add_option("--grid", grid, "comma-separated axis values")->required();
  sweep->add_option("--policy", policies, "comma-separated policies")->default_val("enachi");
  sweep->add_option("--seeds", seeds, "seed list, e.g. 1-10 or 1,3,7")->default_val("1-10");
  sweep->add_option("--seed", seed, "single seed (replaces --seeds)");
  sweep->add_option("--frames", frames, "override the number of frames");
  sweep->add_option("--out", out, "output CSV")->default_val("sweep.csv");
  sweep->add_option("--threads", threads, "worker threads");

  auto* verify = app.add_subcommand("verify", "run oracles and bound checks");
  int tiny = 10;
  bool inject = false;
  // own variable: default_val would otherwise fill the shared optional
  std::uint64_t verify_seed = 1;
  verify->add_option("--seed", verify_seed, "base seed")->default_val(1);
  verify->add_option("--out", out, "report CSV")->default_val("verify.csv");
  verify->add_option("--tiny", tiny, "number of tiny instances");
  verify->add_option("--threads", threads, "enumeration threads");
  verify->add_flag("--inject-fault", inject, "use a corrupted Lambert-W in the KKT oracle");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      SimConfig c = base_config(config_path);
      if (seed) c.seed = *seed;
      if (policy) c.policy = parse_policy(*policy);
      if (frames) c.frames = *frames;
      const RunSummary s = run_simulation(c, !no_trace);
      fs::create_directories(out);
      {
        auto os = open_out(fs::path(out) / "summary.csv");
        os << summary_header() << '\n';
        write_summary_row(os, to_string(c.policy), c.seed, s);
      }
      if (!no_trace) {
        auto os = open_out(fs::path(out) / "trace.csv");
        write_trace(os, s.trace);
      }
      std::cout << summary_header() << '\n';
      write_summary_row(std::cout, to_string(c.policy), c.seed, s);
      return 0;
    }

    if (sweep->parsed()) {
      const SimConfig base = base_config(config_path);
      const auto values = parse_grid(grid);
      const auto pols = split_list(policies);
      const auto seed_list = seed ? std::vector<std::uint64_t>{*seed} : parse_seeds(seeds);
      if (pols.empty()) throw std::invalid_argument("--policy must list at least one policy");
      for (const auto& p : pols) (void)parse_policy(p);
      {
        SimConfig probe = base;
        apply_axis(probe, axis, values.front());
      }

      const std::size_t per_cell = seed_list.size();
      const std::size_t cells = values.size() * pols.size();
      std::vector<RunSummary> results(cells * per_cell);
      parallel_for(results.size(), threads, [&](std::size_t i) {
        const std::size_t cell = i / per_cell;
        SimConfig c = base;
        apply_axis(c, axis, values[cell / pols.size()]);
        c.policy = parse_policy(pols[cell % pols.size()]);
        c.seed = seed_list[i % per_cell];
        if (frames) c.frames = *frames;
        results[i] = run_simulation(c, false);
      });

      auto os = open_out(out);
      os << sweep_header() << '\n';
      for (std::size_t cell = 0; cell < cells; ++cell) {
        std::vector<RunSummary> runs(results.begin() + static_cast<std::ptrdiff_t>(cell * per_cell),
                                     results.begin() +
                                         static_cast<std::ptrdiff_t>((cell + 1) * per_cell));
        const auto row =
            aggregate(axis, values[cell / pols.size()], pols[cell % pols.size()], runs);
        write_sweep_row(os, row);
        write_sweep_row(std::cout, row);
      }
      return 0;
    }

    if (verify->parsed()) {
      VerifyOptions o;
      o.seed = verify_seed;
      o.tiny_instances = tiny;
      o.threads = threads;
      if (inject) o.lambert = broken_lambert;
      const VerifyReport r = run_verifier(o);
      auto os = open_out(out);
      write_report(os, r);
      write_report(std::cout, r);
      return r.pass ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "enachi: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
