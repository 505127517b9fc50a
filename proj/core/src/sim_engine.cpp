#include "enachi/sim_engine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <stdexcept>

namespace enachi {

double local_delay(double workload_macs, double cpu_hz) {
  if (!(workload_macs >= 0.0) || !(cpu_hz > 0.0)) {
    throw std::invalid_argument("local_delay: workload >= 0 and frequency > 0 required");
  }
  return workload_macs / cpu_hz;
}

double local_energy(double chip_alpha, double cpu_hz, double workload_macs) {
  if (!(chip_alpha >= 0.0) || !(cpu_hz > 0.0) || !(workload_macs >= 0.0)) {
    throw std::invalid_argument("local_energy: invalid arguments");
  }
  return chip_alpha * cpu_hz * cpu_hz * workload_macs;
}

double edge_delay(double workload_macs, double edge_hz) {
  if (!(workload_macs >= 0.0) || !(edge_hz > 0.0)) {
    throw std::invalid_argument("edge_delay: workload >= 0 and frequency > 0 required");
  }
  return workload_macs / edge_hz;
}

Policy parse_policy(std::string_view text) {
  Policy p;
  if (text == "enachi") {
    p.kind = Policy::Kind::kEnachi;
  } else if (text == "edge-only") {
    p.kind = Policy::Kind::kEdgeOnly;
  } else if (text == "device-only") {
    p.kind = Policy::Kind::kDeviceOnly;
  } else if (text == "myopic") {
    p.kind = Policy::Kind::kMyopic;
  } else if (text.starts_with("fixed:")) {
    p.kind = Policy::Kind::kFixed;
    const auto num = text.substr(6);
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), p.fixed_split);
    if (ec != std::errc{} || ptr != num.data() + num.size() || num.empty()) {
      throw std::invalid_argument("bad fixed split in policy '" + std::string(text) + "'");
    }
  } else {
    throw std::invalid_argument("unknown policy '" + std::string(text) + "'");
  }
  return p;
}

std::string to_string(const Policy& p) {
  switch (p.kind) {
    case Policy::Kind::kEnachi: return "enachi";
    case Policy::Kind::kEdgeOnly: return "edge-only";
    case Policy::Kind::kDeviceOnly: return "device-only";
    case Policy::Kind::kMyopic: return "myopic";
    case Policy::Kind::kFixed: return "fixed:" + std::to_string(p.fixed_split);
  }
  return "unknown";
}

std::vector<int> allowed_splits(const Policy& p, const DnnProfile& profile) {
  switch (p.kind) {
    case Policy::Kind::kEdgeOnly: return {0};
    case Policy::Kind::kDeviceOnly: return {profile.last_layer()};
    case Policy::Kind::kFixed:
      if (!profile.has_split(p.fixed_split)) {
        throw std::invalid_argument("policy: split " + std::to_string(p.fixed_split) +
                                    " is not a split point");
      }
      return {p.fixed_split};
    case Policy::Kind::kEnachi:
    case Policy::Kind::kMyopic: break;
  }
  return profile.split_points();
}

void SimConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("config: ") + what);
  };
  need(users >= 1, "users must be >= 1");
  need(frames >= 1, "frames must be >= 1");
  need(frame_deadline > 0.0, "frame_deadline must be > 0");
  need(slot > 0.0 && slot <= frame_deadline, "slot must be in (0, frame_deadline]");
  need(total_bandwidth > 0.0, "total_bandwidth must be > 0");
  need(V > 0.0, "V must be > 0");
  need(v > 0.0, "v must be > 0");
  need(energy_budget >= 0.0, "energy_budget must be >= 0");
  need(p_max > 0.0 && p_min > 0.0 && p_min <= p_max, "need 0 < p_min <= p_max");
  need(!h_threshold || *h_threshold >= 0.0, "h_threshold must be >= 0");
  need(h_threshold_fraction >= 0.0, "h_threshold_fraction must be >= 0");
  need(cpu_hz > 0.0 && edge_hz > 0.0, "frequencies must be > 0");
  need(chip_alpha >= 0.0, "chip_alpha must be >= 0");
  need(noise_power > 0.0, "noise_power must be > 0");
  need(path_loss_gain.empty() || path_loss_gain.size() == 1 ||
           path_loss_gain.size() == static_cast<std::size_t>(users),
       "path_loss_gain needs 0, 1 or `users` entries");
  for (double g : path_loss_gain) need(g > 0.0, "path_loss_gain entries must be > 0");
  need(distance_m > 0.0, "distance_m must be > 0");
  need(difficulty_sigma >= 0.0, "difficulty_sigma must be >= 0");
  need(num_classes >= 2, "num_classes must be >= 2");
  need(kappa > 0.0, "kappa must be > 0");
  need(max_iterations >= 1 && greedy_passes >= 1, "iteration limits must be >= 1");
  need(eps_conv > 0.0, "eps_conv must be > 0");
  (void)allowed_splits(policy, model());
}

const DnnProfile& SimConfig::model() const {
  if (profile) return *profile;
  static const DnnProfile fallback = default_profile();
  return fallback;
}

double SimConfig::gain_of(int user) const {
  if (path_loss_gain.size() == 1) return path_loss_gain.front();
  if (!path_loss_gain.empty()) return path_loss_gain.at(static_cast<std::size_t>(user));
  return path_loss_gain_from_distance(distance_m, path_loss_exponent, path_loss_ref_db,
                                      path_loss_ref_m);
}

double SimConfig::threshold() const {
  return h_threshold ? *h_threshold : h_threshold_fraction * max_entropy(num_classes);
}

UtilityParams SimConfig::utility_params() const {
  UtilityParams u;
  u.V = V;
  u.energy_budget = energy_budget;
  u.p_max = p_max;
  u.p_min = p_min;
  u.total_bandwidth = total_bandwidth;
  u.frame_deadline = frame_deadline;
  u.noise_power = noise_power;
  u.edge_hz = edge_hz;
  u.unit_bandwidth = unit_bandwidth;
  u.eps_conv = eps_conv;
  u.max_iterations = max_iterations;
  u.greedy_passes = greedy_passes;
  return u;
}

InnerParams SimConfig::inner_params() const {
  InnerParams p;
  p.v = v;
  p.slot = slot;
  p.p_max = p_max;
  p.noise_power = noise_power;
  p.h_threshold = threshold();
  p.num_classes = num_classes;
  p.kappa = kappa;
  return p;
}

int SimConfig::slots_per_frame() const {
  return std::max(1, static_cast<int>(std::floor(frame_deadline / slot + 1e-9)));
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::kThreshold: return "threshold";
    case Outcome::kDeadline: return "deadline";
    case Outcome::kExhausted: return "exhausted";
    case Outcome::kLocal: return "local";
    case Outcome::kInfeasible: return "infeasible";
  }
  return "unknown";
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum Stream { kChannelStream = 1, kDifficultyStream = 2, kOutcomeStream = 3 };

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, int user, int frame, int stream) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(user)));
  h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(frame)));
  return splitmix64(h ^ static_cast<std::uint64_t>(stream));
}

FrameEnvironment draw_environment(const SimConfig& config, int frame) {
  FrameEnvironment env;
  const int slots = config.slots_per_frame();
  for (int n = 0; n < config.users; ++n) {
    ChannelModelConfig cc;
    cc.path_loss_gain = config.gain_of(n);
    cc.rayleigh = config.rayleigh;
    cc.noise_power = config.noise_power;
    cc.seed = derive_seed(config.seed, n, frame, kChannelStream);
    env.channels.push_back(sample_frame(cc, slots));

    double d = 1.0;
    if (config.difficulty_sigma > 0.0) {
      std::mt19937_64 rng(derive_seed(config.seed, n, frame, kDifficultyStream));
      std::lognormal_distribution<double> dist(0.0, config.difficulty_sigma);
      d = dist(rng);
    }
    env.difficulty.push_back(d);

    std::mt19937_64 rng(derive_seed(config.seed, n, frame, kOutcomeStream));
    env.uniform.push_back(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
  }
  return env;
}

std::vector<TaskDecision> baseline_policy(const SimConfig& config,
                                          const std::vector<double>& queues,
                                          const FrameEnvironment& env) {
  std::vector<UserState> users(static_cast<std::size_t>(config.users));
  for (int n = 0; n < config.users; ++n) {
    auto& u = users[static_cast<std::size_t>(n)];
    u.queue = config.policy.kind == Policy::Kind::kMyopic ? 0.0
                                                          : queues[static_cast<std::size_t>(n)];
    u.frame_gain = env.channels[static_cast<std::size_t>(n)].frame_gain;
    u.cpu_hz = config.cpu_hz;
    u.chip_alpha = config.chip_alpha;
  }
  const auto allowed = allowed_splits(config.policy, config.model());
  return greedy_partition_search(config.model(), users, config.utility_params(), allowed);
}

SimState initial_state(const SimConfig& config) {
  SimState s;
  s.queues.assign(static_cast<std::size_t>(config.users), 0.0);
  return s;
}

FrameResult run_frame(SimState& state, const SimConfig& config) {
  const DnnProfile& profile = config.model();
  const FrameEnvironment env = draw_environment(config, state.frame);
  const auto decisions = baseline_policy(config, state.queues, env);
  const InnerParams inner = config.inner_params();

  FrameResult fr;
  fr.frame = state.frame;
  fr.users.resize(static_cast<std::size_t>(config.users));
  for (int n = 0; n < config.users; ++n) {
    const auto i = static_cast<std::size_t>(n);
    UserFrameResult& r = fr.users[i];
    r.decision = decisions[i];
    r.queue_before = state.queues[i];
    r.difficulty = env.difficulty[i];
    r.frame_gain = env.channels[i].frame_gain;
    const TaskDecision& d = decisions[i];

    if (!d.feasible) {
      r.outcome = Outcome::kInfeasible;
    } else if (profile.is_fully_local(d.split)) {
      r.outcome = Outcome::kLocal;
      r.success = true;
      r.t_local = d.t_local;
      r.e_local = d.local_energy;
      r.e_estimated = d.estimated_energy;
      r.beta = 1.0;
      r.accuracy = profile.full_model_accuracy();
    } else {
      const auto tx = run_frame_transmission(d, env.channels[i], profile, env.difficulty[i], inner);
      switch (tx.reason) {
        case StopReason::kThreshold: r.outcome = Outcome::kThreshold; break;
        case StopReason::kExhausted: r.outcome = Outcome::kExhausted; break;
        case StopReason::kDeadline: r.outcome = Outcome::kDeadline; break;
      }
      r.success = tx.reason != StopReason::kDeadline;
      r.t_local = d.t_local;
      r.t_edge = d.t_edge;
      r.t_tr = tx.slots_used * config.slot;
      r.e_local = d.local_energy;
      r.e_tr = tx.energy;
      r.e_estimated = d.estimated_energy;
      r.beta = tx.beta;
      r.accuracy = profile.accuracy(d.split, tx.beta);
      r.slots_used = tx.slots_used;
      r.window = tx.window;
      r.power_sum = tx.power_sum;
      r.final_power_queue = tx.final_queue;
      // Telescoping of the power queue: sum p <= K p_ref + q_K.
      if (r.power_sum > tx.slots_used * d.ref_power + tx.final_queue + 1e-9 * (1.0 + r.power_sum)) {
        throw std::logic_error("power queue tracking bound violated");
      }
    }
    r.e_total = r.e_local + r.e_tr;
    r.accuracy_strict = r.success ? r.accuracy : 0.0;
    r.realized = config.bernoulli ? (env.uniform[i] < r.accuracy ? 1.0 : 0.0) : r.accuracy;
    state.queues[i] =
        update_energy_queue({state.queues[i]}, r.e_total, config.energy_budget).backlog;
    r.queue_after = state.queues[i];
  }
  ++state.frame;
  return fr;
}

namespace {

struct Accumulator {
  int frames = 0;
  int users = 0;
  double acc = 0.0, strict = 0.0, realized = 0.0, success = 0.0;
  std::vector<double> energy;

  explicit Accumulator(int n) : users(n), energy(static_cast<std::size_t>(n), 0.0) {}

  void add(const FrameResult& fr) {
    ++frames;
    double a = 0.0, s = 0.0, r = 0.0, ok = 0.0;
    for (std::size_t i = 0; i < fr.users.size(); ++i) {
      const auto& u = fr.users[i];
      a += u.accuracy;
      s += u.accuracy_strict;
      r += u.realized;
      ok += u.success ? 1.0 : 0.0;
      energy[i] += u.e_total;
    }
    const double n = static_cast<double>(fr.users.size());
    acc += a / n;
    strict += s / n;
    realized += r / n;
    success += ok / n;
  }

  RunSummary finish() const {
    RunSummary s;
    s.frames = frames;
    s.users = users;
    const double m = frames > 0 ? static_cast<double>(frames) : 1.0;
    s.mean_accuracy = acc / m;
    s.mean_accuracy_strict = strict / m;
    s.mean_realized = realized / m;
    s.success_rate = success / m;
    double total = 0.0;
    for (double e : energy) {
      s.user_mean_energy.push_back(e / m);
      total += e / m;
    }
    s.mean_energy = users > 0 ? total / users : 0.0;
    return s;
  }
};

}  // namespace

RunSummary run_simulation(const SimConfig& config, bool keep_trace) {
  config.validate();
  SimState state = initial_state(config);
  Accumulator accum(config.users);
  std::vector<FrameResult> trace;
  if (keep_trace) trace.reserve(static_cast<std::size_t>(config.frames));
  for (int m = 0; m < config.frames; ++m) {
    FrameResult fr = run_frame(state, config);
    accum.add(fr);
    if (keep_trace) trace.push_back(std::move(fr));
  }
  RunSummary s = accum.finish();
  s.final_queues = state.queues;
  s.trace = std::move(trace);
  return s;
}

RunSummary summarize(const std::vector<FrameResult>& trace, int users) {
  Accumulator accum(users);
  for (const auto& fr : trace) accum.add(fr);
  RunSummary s = accum.finish();
  if (!trace.empty()) {
    for (const auto& u : trace.back().users) s.final_queues.push_back(u.queue_after);
  }
  return s;
}

}  // namespace enachi
