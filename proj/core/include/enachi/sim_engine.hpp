#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "enachi/channel.hpp"
#include "enachi/cost_model.hpp"
#include "enachi/inner_controller.hpp"
#include "enachi/model_profile.hpp"
#include "enachi/outer_scheduler.hpp"

namespace enachi {

struct Policy {
  enum class Kind { kEnachi, kEdgeOnly, kDeviceOnly, kFixed, kMyopic };
  Kind kind = Kind::kEnachi;
  int fixed_split = 0;  // only for kFixed
};

/// "enachi", "edge-only", "device-only", "fixed:<s>", "myopic".
[[nodiscard]] Policy parse_policy(std::string_view text);
[[nodiscard]] std::string to_string(const Policy& p);

/// Split points a policy may choose from.
[[nodiscard]] std::vector<int> allowed_splits(const Policy& p, const DnnProfile& profile);

struct SimConfig {
  int users = 1;
  int frames = 1000;
  double frame_deadline = 0.3;
  double slot = 1e-3;
  double total_bandwidth = 3e6;

  double V = 50.0;
  double v = 5.0;
  double energy_budget = 0.25;
  double p_max = 2.0;
  double p_min = 1e-6;
  /// Absolute uncertainty threshold; unset means h_threshold_fraction * ln(L).
  std::optional<double> h_threshold;
  double h_threshold_fraction = 0.1;

  double cpu_hz = 2e9;
  double chip_alpha = 1e-28;
  double edge_hz = 2e10;
  double noise_power = 1e-13;

  /// Per-user mean channel gain. Empty: derived from distance_m. One value is
  /// shared by every user.
  std::vector<double> path_loss_gain;
  double distance_m = 1000.0;
  /// PL_dB = 128.1 + 37.6 log10(d / 1 km).
  double path_loss_exponent = 3.76;
  double path_loss_ref_db = 128.1;
  double path_loss_ref_m = 1000.0;
  bool rayleigh = true;

  /// Sample difficulty d ~ LogNormal(0, difficulty_sigma); 0 means d = 1.
  double difficulty_sigma = 0.5;
  int num_classes = 1000;
  double kappa = 1.0;
  /// Draw correct / wrong with probability A instead of scoring A directly.
  bool bernoulli = false;

  double unit_bandwidth = 0.0;
  double eps_conv = 1e-6;
  int max_iterations = 50;
  int greedy_passes = 1;

  Policy policy;
  std::uint64_t seed = 1;
  /// Null means default_profile().
  std::shared_ptr<const DnnProfile> profile;

  /// Throws std::invalid_argument on inconsistent values.
  void validate() const;
  [[nodiscard]] const DnnProfile& model() const;
  [[nodiscard]] double gain_of(int user) const;
  [[nodiscard]] double threshold() const;
  [[nodiscard]] UtilityParams utility_params() const;
  [[nodiscard]] InnerParams inner_params() const;
  [[nodiscard]] int slots_per_frame() const;
};

enum class Outcome { kThreshold, kDeadline, kExhausted, kLocal, kInfeasible };
[[nodiscard]] std::string_view to_string(Outcome o);

struct UserFrameResult {
  TaskDecision decision;
  Outcome outcome = Outcome::kInfeasible;
  bool success = false;
  double t_local = 0.0;
  double t_tr = 0.0;  // slots_used * t_slot
  double t_edge = 0.0;
  double e_local = 0.0;
  double e_tr = 0.0;
  double e_total = 0.0;
  /// E_local + p_ref * T_tr as predicted by the scheduler.
  double e_estimated = 0.0;
  double beta = 0.0;
  /// Surrogate accuracy at the received fraction.
  double accuracy = 0.0;
  /// Same, but 0 when the frame failed.
  double accuracy_strict = 0.0;
  /// Score actually credited: accuracy, or a Bernoulli draw of it.
  double realized = 0.0;
  double queue_before = 0.0;
  double queue_after = 0.0;
  double difficulty = 1.0;
  double frame_gain = 0.0;
  int slots_used = 0;
  int window = 0;
  double power_sum = 0.0;
  double final_power_queue = 0.0;
};

struct FrameResult {
  int frame = 0;
  std::vector<UserFrameResult> users;
};

/// Per-(seed, user, frame, stream) seed so that policies sharing a seed see
/// identical channels and difficulties.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, int user, int frame, int stream);

/// Draws of the environment for one frame, independent of decisions.
struct FrameEnvironment {
  std::vector<ChannelState> channels;
  std::vector<double> difficulty;
  std::vector<double> uniform;  // Bernoulli draws
};

[[nodiscard]] FrameEnvironment draw_environment(const SimConfig& config, int frame);

/// Scheduler decision under a policy. Myopic sees zero energy queues.
[[nodiscard]] std::vector<TaskDecision> baseline_policy(const SimConfig& config,
                                                        const std::vector<double>& queues,
                                                        const FrameEnvironment& env);

struct SimState {
  int frame = 0;
  std::vector<double> queues;
};

[[nodiscard]] SimState initial_state(const SimConfig& config);

/// One frame end to end: scheduling, transmission, accounting, queue update.
/// Advances state.
[[nodiscard]] FrameResult run_frame(SimState& state, const SimConfig& config);

struct RunSummary {
  int frames = 0;
  int users = 0;
  double mean_accuracy = 0.0;
  double mean_accuracy_strict = 0.0;
  double mean_realized = 0.0;
  double success_rate = 0.0;
  double mean_energy = 0.0;  // over users and frames
  std::vector<double> user_mean_energy;
  std::vector<double> final_queues;
  std::vector<FrameResult> trace;
};

/// Runs config.frames frames from an empty state.
[[nodiscard]] RunSummary run_simulation(const SimConfig& config, bool keep_trace = true);

/// Recomputes the summary statistics from a trace.
[[nodiscard]] RunSummary summarize(const std::vector<FrameResult>& trace, int users);

}  // namespace enachi
