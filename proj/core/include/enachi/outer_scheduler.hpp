#pragma once

#include <span>
#include <vector>

#include "enachi/model_profile.hpp"

namespace enachi {

/// Below this backlog (J for energy, W for power) a queue counts as empty and
/// the controller transmits at p_max.
inline constexpr double kQueueFloor = 1e-9;
/// Floor applied to unit-bandwidth rewards before proportional sharing.
inline constexpr double kRewardFloor = 1e-9;

struct EnergyQueue {
  double backlog = 0.0;
};

/// Q' = max(Q + E - E_budget, 0).
[[nodiscard]] EnergyQueue update_energy_queue(EnergyQueue q, double realized_energy,
                                              double budget);

/// Task-level control parameters shared by every user in a frame.
struct UtilityParams {
  double V = 50.0;
  double energy_budget = 0.25;
  double p_max = 2.0;
  /// Smallest admissible reference power; the per-frame problem keeps p > 0.
  double p_min = 1e-6;
  double total_bandwidth = 3e6;
  double frame_deadline = 0.3;
  double noise_power = 1e-13;
  double edge_hz = 2e10;
  /// Bandwidth at which unit rewards are evaluated; <= 0 means the equal share
  /// total_bandwidth / (number of transmitting users).
  double unit_bandwidth = 0.0;
  double eps_conv = 1e-6;
  int max_iterations = 50;
  int greedy_passes = 1;
};

/// What the scheduler knows about one user at the start of a frame.
struct UserState {
  double queue = 0.0;
  double frame_gain = 1e-12;
  double cpu_hz = 2e9;
  double chip_alpha = 1e-28;
};

struct TaskDecision {
  int split = 0;
  double bandwidth = 0.0;
  double ref_power = 0.0;
  /// T - t_local - t_edge.
  double tr_deadline = 0.0;
  /// Batch start relative to the frame start, T - max_n t_edge.
  double batch_start_offset = 0.0;
  bool feasible = false;

  double t_local = 0.0;
  double t_edge = 0.0;
  double local_energy = 0.0;
  double predicted_beta = 0.0;
  double predicted_accuracy = 0.0;
  /// E_local + ref_power * tr_deadline.
  double estimated_energy = 0.0;
  double utility = 0.0;
};

/// Everything about (user, split) that does not depend on bandwidth or power.
struct SplitCandidate {
  int split = 0;
  bool fully_local = false;
  bool feasible = false;
  const SurrogateCoefficients* coeffs = nullptr;
  double full_accuracy = 0.0;
  double total_bits = 0.0;
  double t_local = 0.0;
  double t_edge = 0.0;
  double tr_deadline = 0.0;
  double local_energy = 0.0;
  double gain = 0.0;
  double noise = 0.0;
  double queue = 0.0;
  double V = 0.0;
  double p_min = 0.0;
  double p_max = 0.0;
};

/// The candidate keeps a pointer into profile; profile must outlive it.
[[nodiscard]] SplitCandidate make_candidate(const DnnProfile& profile, int split,
                                            const UserState& user, const UtilityParams& params);

/// Fraction of split maps deliverable in the window at constant power,
///   omega * T_tr * log2(1 + h p / sigma^2) / (b_total D L^h L^w), clipped to [0, 1].
[[nodiscard]] double predicted_beta(double bandwidth, double tr_deadline, double gain,
                                    double power, double noise, double total_bits);

/// Closed-form KKT reference power from the Lambert-W expression, clipped to
/// [p_min, p_max]. Returns p_max when queue < kQueueFloor.
/// Throws std::invalid_argument for non-positive physical inputs.
/// `lambert` overrides the principal-branch solver (null: lambert_w0).
[[nodiscard]] double kkt_reference_power(const SurrogateCoefficients& coeffs, double V,
                                         double queue, double gain, double noise,
                                         double bandwidth, double tr_deadline,
                                         double total_bits, double p_min, double p_max,
                                         double (*lambert)(double) = nullptr);

/// Reference power actually used by the scheduler. The closed form maximizes
/// the smooth utility; with accuracy clipped to [0, 1] the maximizer is either
/// that point restricted to the range where the clipped curve is active, or
/// p_min when no positive accuracy is worth its energy.
[[nodiscard]] double reference_power(const SplitCandidate& cand, double bandwidth);

/// V * A(s, beta) - Q * (E_local + p * T_tr). Fully local candidates ignore
/// bandwidth and power. Throws std::invalid_argument on infeasible candidates.
[[nodiscard]] double utility(const SplitCandidate& cand, double bandwidth, double ref_power);

/// Utility at the unit bandwidth, floored at kRewardFloor.
[[nodiscard]] double unit_bandwidth_reward(const SplitCandidate& cand, double ref_power,
                                           double unit_bandwidth);

/// omega_n = omega * Phi_n / sum(Phi). The rounding residue goes to the largest
/// share so the result sums to total exactly. Throws for rewards below the floor.
[[nodiscard]] std::vector<double> proportional_bandwidth(std::span<const double> rewards,
                                                         double total_bandwidth);

struct Allocation {
  std::vector<double> bandwidth;
  std::vector<double> ref_power;
  std::vector<double> utility;
  double total_utility = 0.0;
  double initial_utility = 0.0;
  int iterations = 0;
};

/// Alternating bandwidth / reference-power allocation for fixed splits.
/// Fully-local and infeasible candidates take no bandwidth. Returns the best
/// iterate observed, which is never worse than the initialization.
[[nodiscard]] Allocation allocate_resources(std::span<const SplitCandidate> candidates,
                                            const UtilityParams& params);

/// Coordinate-wise greedy split selection: each user in turn tries every
/// allowed split with the others held fixed, keeping the best total utility
/// (ties to the smaller split). An empty allowed list means all split points.
/// Users without a feasible split get feasible = false.
[[nodiscard]] std::vector<TaskDecision> greedy_partition_search(
    const DnnProfile& profile, std::span<const UserState> users, const UtilityParams& params,
    std::span<const int> allowed_splits = {});

/// T - max(edge delays); T when the list is empty.
[[nodiscard]] double batch_deadline(std::span<const double> edge_delays, double frame_deadline);

}  // namespace enachi
