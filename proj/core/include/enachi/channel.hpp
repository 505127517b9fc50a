#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace enachi {

struct ChannelModelConfig {
  /// Mean large-scale power gain of the uplink (dimensionless).
  double path_loss_gain = 1e-12;
  bool rayleigh = true;
  std::uint64_t seed = 1;
  /// Total noise power sigma^2 in W (not rescaled with bandwidth).
  double noise_power = 1e-13;
};

/// Large-scale gain from a log-distance law:
///   PL_dB = reference_loss_db + 10 * exponent * log10(distance / reference_distance).
[[nodiscard]] double path_loss_gain_from_distance(double distance_m, double exponent,
                                                  double reference_loss_db,
                                                  double reference_distance_m = 1.0);

struct ChannelState {
  std::vector<double> slot_gains;
  /// Frame-level estimate used by the task-level scheduler: the mean gain.
  double frame_gain = 0.0;
};

/// Seeded per-user gain generator. One stream serves one frame loop.
class ChannelStream {
 public:
  explicit ChannelStream(const ChannelModelConfig& config);

  /// Draws n_slots gains h_k = path_loss_gain * g_k with g_k ~ Exp(1) under
  /// Rayleigh fading and g_k = 1 otherwise. Throws for n_slots < 1.
  ChannelState sample_frame(int n_slots);

  [[nodiscard]] const ChannelModelConfig& config() const { return config_; }

 private:
  ChannelModelConfig config_;
  std::mt19937_64 rng_;
  std::exponential_distribution<double> fading_{1.0};
};

/// One-shot draw from a fresh stream seeded by config.seed.
[[nodiscard]] ChannelState sample_frame(const ChannelModelConfig& config, int n_slots);

/// Shannon rate omega * log2(1 + h p / sigma^2) in bit/s. Arguments must be > 0
/// except power, which may be 0 (rate 0).
[[nodiscard]] double shannon_rate(double bandwidth_hz, double gain, double power_w,
                                  double noise_power);

/// Number of whole feature maps that fit in one slot:
///   floor(rate * t_slot / (D * L^h * L^w)).
[[nodiscard]] long long packet_capacity(double rate_bps, double slot_s, int quant_bits,
                                        int map_h, int map_w);

}  // namespace enachi
