#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

#include "enachi/channel.hpp"
#include "enachi/cost_model.hpp"
#include "enachi/verifier.hpp"

// Only cost-model and profile primitives are used here, never scheduler code,
// so the enumeration is an independent reference.

namespace enachi {

TinyInstance make_tiny_instance(std::uint64_t seed) {
  TinyInstance inst;
  inst.profile = std::make_shared<const DnnProfile>(default_profile());
  inst.splits = {0, 3, inst.profile->last_layer()};
  inst.power_levels = {0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
  inst.bandwidth_shares = {{0.25, 0.75}, {0.5, 0.5}, {0.75, 0.25}};
  const double mean_gain = path_loss_gain_from_distance(1000.0, 3.76, 128.1, 1000.0);
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> fade(1.0);
  inst.gains.assign(static_cast<std::size_t>(inst.frames),
                    std::vector<double>(static_cast<std::size_t>(inst.users)));
  for (auto& frame : inst.gains) {
    for (double& g : frame) g = mean_gain * std::max(fade(rng), 1e-6);
  }
  return inst;
}

namespace {

struct UserChoice {
  int split;
  double power;
  double accuracy;
  double energy;
};

std::vector<UserChoice> user_choices(const TinyInstance& inst, int m, int n, double share) {
  const DnnProfile& prof = *inst.profile;
  std::vector<UserChoice> out;
  for (int s : inst.splits) {
    const double t_local = local_delay(local_workload(prof, s), inst.cpu_hz);
    const double t_edge = edge_delay(edge_workload(prof, s), inst.edge_hz);
    const double e_local = local_energy(inst.chip_alpha, inst.cpu_hz, local_workload(prof, s));
    const double t_tr = inst.frame_deadline - t_local - t_edge;
    if (t_tr < 0.0) continue;
    if (prof.is_fully_local(s)) {
      out.push_back({s, 0.0, prof.full_model_accuracy(), e_local});
      continue;
    }
    const double omega = share * inst.total_bandwidth;
    const double h = inst.gains[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)];
    for (double p : inst.power_levels) {
      const double bits = omega * t_tr * std::log2(1.0 + h * p / inst.noise_power);
      const double beta = std::min(1.0, bits / prof.total_feature_bits(s));
      out.push_back({s, p, prof.accuracy(s, beta), e_local + p * t_tr});
    }
  }
  return out;
}

struct Flat {
  std::vector<double> acc;
  std::vector<double> energy;  // [option * users + n]
};

}  // namespace

std::vector<TinyOption> enumerate_frame(const TinyInstance& inst, int m) {
  if (inst.users < 1 || inst.users > 2) throw std::invalid_argument("tiny instance: 1 or 2 users");
  if (m < 0 || m >= inst.frames) throw std::invalid_argument("tiny instance: frame out of range");
  std::vector<TinyOption> out;
  for (std::size_t b = 0; b < inst.bandwidth_shares.size(); ++b) {
    const auto& share = inst.bandwidth_shares[b];
    if (static_cast<int>(share.size()) != inst.users) {
      throw std::invalid_argument("tiny instance: share vector size must equal users");
    }
    const auto first = user_choices(inst, m, 0, share[0]);
    const auto second = inst.users == 2 ? user_choices(inst, m, 1, share[1])
                                        : std::vector<UserChoice>{{-1, 0.0, 0.0, 0.0}};
    for (const auto& a : first) {
      for (const auto& c : second) {
        TinyOption o;
        o.share = static_cast<int>(b);
        o.split.push_back(a.split);
        o.power.push_back(a.power);
        o.accuracy.push_back(a.accuracy);
        o.energy.push_back(a.energy);
        if (inst.users == 2) {
          o.split.push_back(c.split);
          o.power.push_back(c.power);
          o.accuracy.push_back(c.accuracy);
          o.energy.push_back(c.energy);
        }
        double sum = 0.0;
        for (double x : o.accuracy) sum += x;
        o.mean_accuracy = sum / inst.users;
        out.push_back(std::move(o));
      }
    }
  }
  return out;
}

OfflineResult offline_optimum(const TinyInstance& inst, int threads) {
  const int M = inst.frames;
  const int N = inst.users;
  std::vector<std::vector<TinyOption>> options;
  std::vector<Flat> flat(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    options.push_back(enumerate_frame(inst, m));
    auto& f = flat[static_cast<std::size_t>(m)];
    for (const auto& o : options.back()) {
      f.acc.push_back(o.mean_accuracy);
      for (double e : o.energy) f.energy.push_back(e);
    }
  }
  const double cap = M * inst.budget;

  struct Best {
    double value = -std::numeric_limits<double>::infinity();
    std::vector<int> pick;
    long long evaluated = 0;
  };

  // Depth-first over frames 1..M-1 for a fixed slice of frame-0 options.
  auto search = [&](std::size_t begin, std::size_t end, Best& best) {
    std::vector<int> pick(static_cast<std::size_t>(M), 0);
    std::vector<double> used(static_cast<std::size_t>(N), 0.0);
    auto rec = [&](auto&& self, int m, double acc) -> void {
      const auto& f = flat[static_cast<std::size_t>(m)];
      const std::size_t count = f.acc.size();
      const std::size_t lo = m == 0 ? begin : 0;
      const std::size_t hi = m == 0 ? end : count;
      for (std::size_t i = lo; i < hi; ++i) {
        pick[static_cast<std::size_t>(m)] = static_cast<int>(i);
        const double* e = &f.energy[i * static_cast<std::size_t>(N)];
        if (m + 1 == M) {
          ++best.evaluated;
          bool ok = true;
          for (int n = 0; n < N; ++n) ok = ok && used[static_cast<std::size_t>(n)] + e[n] <= cap;
          const double total = acc + f.acc[i];
          if (ok && total > best.value) {
            best.value = total;
            best.pick = pick;
          }
          continue;
        }
        for (int n = 0; n < N; ++n) used[static_cast<std::size_t>(n)] += e[n];
        self(self, m + 1, acc + f.acc[i]);
        for (int n = 0; n < N; ++n) used[static_cast<std::size_t>(n)] -= e[n];
      }
    };
    rec(rec, 0, 0.0);
  };

  const std::size_t first = flat.front().acc.size();
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(first)));
  std::vector<Best> part(static_cast<std::size_t>(workers));
  if (workers == 1) {
    search(0, first, part[0]);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      const std::size_t b = first * static_cast<std::size_t>(w) / workers;
      const std::size_t e = first * static_cast<std::size_t>(w + 1) / workers;
      pool.emplace_back([&, b, e, w] { search(b, e, part[static_cast<std::size_t>(w)]); });
    }
    for (auto& t : pool) t.join();
  }

  // Slices are in enumeration order; strict > keeps the earliest optimum.
  OfflineResult r;
  Best best;
  for (const auto& p : part) {
    best.evaluated += p.evaluated;
    if (p.value > best.value) {
      best.value = p.value;
      best.pick = p.pick;
    }
  }
  r.evaluated = best.evaluated;
  r.feasible = !best.pick.empty();
  if (r.feasible) {
    r.total_accuracy = best.value;
    for (int m = 0; m < M; ++m) {
      r.sequence.push_back(
          options[static_cast<std::size_t>(m)][static_cast<std::size_t>(best.pick[m])]);
    }
  }
  return r;
}

BoundTrace grid_enachi(const TinyInstance& inst, std::vector<TinyOption>* chosen) {
  BoundTrace t;
  std::vector<double> q(static_cast<std::size_t>(inst.users), 0.0);
  for (int m = 0; m < inst.frames; ++m) {
    const auto options = enumerate_frame(inst, m);
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < options.size(); ++i) {
      double v = inst.V * options[i].mean_accuracy;
      for (int n = 0; n < inst.users; ++n) {
        v -= q[static_cast<std::size_t>(n)] * (options[i].energy[static_cast<std::size_t>(n)] -
                                               inst.budget);
      }
      if (v > best_value) {
        best_value = v;
        best = i;
      }
    }
    const TinyOption& o = options[best];
    if (chosen) chosen->push_back(o);
    std::vector<double> next(q.size());
    for (std::size_t n = 0; n < q.size(); ++n) {
      next[n] = std::max(q[n] + o.energy[n] - inst.budget, 0.0);
    }
    t.energy.push_back(o.energy);
    t.estimated.push_back(o.energy);
    t.queue.push_back(q);
    t.queue_next.push_back(next);
    t.accuracy.push_back(o.mean_accuracy);
    t.xi.push_back(0.0);
    q = next;
  }
  return t;
}

TinyReport verify_tiny_instance(std::uint64_t seed, int threads) {
  const TinyInstance inst = make_tiny_instance(seed);
  TinyReport r;
  r.seed = seed;
  r.decision_space = 1;
  for (int m = 0; m < inst.frames; ++m) {
    r.decision_space *= static_cast<long long>(enumerate_frame(inst, m).size());
  }
  r.offline = offline_optimum(inst, threads);

  const BoundTrace enachi = grid_enachi(inst);
  BoundTrace offline;
  for (const auto& o : r.offline.sequence) {
    offline.energy.push_back(o.energy);
    offline.estimated.push_back(o.energy);
    offline.accuracy.push_back(o.mean_accuracy);
    offline.xi.push_back(0.0);
  }
  const BoundConstants k = bound_constants({&enachi, &offline}, inst.budget);
  r.gap = gap_bound_check(enachi, r.offline.total_accuracy, k, inst.V, inst.budget);
  r.drift = drift_bound_check(enachi, inst.budget);
  r.pass = r.offline.feasible && r.gap.pass && r.drift.pass;
  return r;
}

}  // namespace enachi
