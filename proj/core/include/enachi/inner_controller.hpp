#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "enachi/channel.hpp"
#include "enachi/model_profile.hpp"
#include "enachi/outer_scheduler.hpp"

namespace enachi {

struct PowerQueue {
  double backlog = 0.0;
};

/// q' = max(q + p_used - p_ref, 0).
[[nodiscard]] PowerQueue update_power_queue(PowerQueue q, double p_used, double p_ref);

/// Per-slot power maximizing v * omega * t_slot * log2(1 + h p / sigma^2) / (D L^h L^w) - q p:
///   p = v * omega * t_slot / (q * ln2 * D * L^h * L^w) - sigma^2 / h.
/// Returns p_max when q < kQueueFloor, 0 (idle slot) when the stationary point
/// is not positive, otherwise the stationary point clipped to p_max.
[[nodiscard]] double slot_power(double v, double bandwidth, double slot_s, double q,
                                int quant_bits, int map_h, int map_w, double gain, double noise,
                                double p_max);

/// The min(capacity, remaining) most important maps of split s not yet sent.
[[nodiscard]] std::vector<int> select_packet(const DnnProfile& profile, int s,
                                             const std::set<int>& already_sent,
                                             long long capacity);

/// Entropy of a uniform posterior over num_classes labels, ln(L).
[[nodiscard]] double max_entropy(int num_classes);

/// H_max * d * (1 - I_cum / I_total)^kappa, where I_cum is the importance mass
/// of the received maps.
[[nodiscard]] double synthetic_uncertainty(const DnnProfile& profile, int s,
                                           const std::set<int>& received, double difficulty,
                                           int num_classes = 1000, double kappa = 1.0);

/// Same model from the received mass fraction directly.
[[nodiscard]] double uncertainty_from_mass(double h_max, double difficulty, double mass_fraction,
                                           double kappa);

enum class StopReason { kThreshold, kDeadline, kExhausted };

[[nodiscard]] std::string_view to_string(StopReason r);

struct InnerParams {
  double v = 5.0;
  double slot = 1e-3;
  double p_max = 2.0;
  double noise_power = 1e-13;
  /// Absolute uncertainty threshold in nats.
  double h_threshold = 0.690775527898214;  // 0.1 * ln(1000)
  int num_classes = 1000;
  double kappa = 1.0;
};

struct SlotRecord {
  int slot = 0;
  double gain = 0.0;
  double power = 0.0;
  long long capacity = 0;
  std::vector<int> packet;
  /// Size of the cumulative set after this slot.
  int cumulative = 0;
  double uncertainty = 0.0;
  double queue = 0.0;  // power queue after the update
  bool stop = false;
};

struct TransmissionResult {
  StopReason reason = StopReason::kDeadline;
  /// Slots in the admissible window, floor((batch start - t_local) / t_slot).
  int window = 0;
  int slots_used = 0;
  int maps_sent = 0;
  double beta = 0.0;
  double energy = 0.0;
  double power_sum = 0.0;
  double final_queue = 0.0;
  double final_uncertainty = 0.0;
  std::vector<SlotRecord> log;
};

/// Slot loop for one user in one frame. The window ends at the batch start so
/// the edge can finish before the deadline. Before slot 1 (and after every
/// slot) the stop rule is checked in order: all maps sent, uncertainty at or
/// below the threshold, window exhausted.
/// Throws std::invalid_argument for infeasible or fully-local decisions.
[[nodiscard]] TransmissionResult run_frame_transmission(const TaskDecision& decision,
                                                        const ChannelState& channel,
                                                        const DnnProfile& profile,
                                                        double difficulty,
                                                        const InnerParams& params,
                                                        bool keep_log = false);

/// One log record per line: slot,gain,power,capacity,cumulative,uncertainty,queue,stop,packet
/// with the packet written as space-separated indices.
[[nodiscard]] std::string format_log(const TransmissionResult& result);

}  // namespace enachi
