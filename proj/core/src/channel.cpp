#include "enachi/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace enachi {

double path_loss_gain_from_distance(double distance_m, double exponent,
                                    double reference_loss_db, double reference_distance_m) {
  if (!(distance_m > 0.0) || !(reference_distance_m > 0.0) || !(exponent > 0.0)) {
    throw std::invalid_argument("path loss: distance, reference distance, exponent must be > 0");
  }
  const double loss_db =
      reference_loss_db + 10.0 * exponent * std::log10(distance_m / reference_distance_m);
  return std::pow(10.0, -loss_db / 10.0);
}

ChannelStream::ChannelStream(const ChannelModelConfig& config)
    : config_(config), rng_(config.seed) {
  if (!(config.path_loss_gain > 0.0)) {
    throw std::invalid_argument("channel: path_loss_gain must be > 0");
  }
  if (!(config.noise_power > 0.0)) throw std::invalid_argument("channel: noise_power must be > 0");
}

ChannelState ChannelStream::sample_frame(int n_slots) {
  if (n_slots < 1) throw std::invalid_argument("sample_frame: n_slots must be >= 1");
  ChannelState state;
  state.frame_gain = config_.path_loss_gain;
  state.slot_gains.resize(static_cast<std::size_t>(n_slots), config_.path_loss_gain);
  if (config_.rayleigh) {
    for (double& h : state.slot_gains) {
      double g = fading_(rng_);
      // Exp(1) can return exactly 0; gains must stay positive.
      while (!(g > 0.0)) g = fading_(rng_);
      h = config_.path_loss_gain * g;
    }
  }
  return state;
}

ChannelState sample_frame(const ChannelModelConfig& config, int n_slots) {
  ChannelStream stream(config);
  return stream.sample_frame(n_slots);
}

double shannon_rate(double bandwidth_hz, double gain, double power_w, double noise_power) {
  if (!(bandwidth_hz > 0.0) || !(gain > 0.0) || !(noise_power > 0.0) || !(power_w >= 0.0)) {
    throw std::invalid_argument("shannon_rate: bandwidth, gain, noise must be > 0, power >= 0");
  }
  return bandwidth_hz * std::log2(1.0 + gain * power_w / noise_power);
}

long long packet_capacity(double rate_bps, double slot_s, int quant_bits, int map_h,
                          int map_w) {
  if (!(rate_bps >= 0.0) || !(slot_s > 0.0) || quant_bits < 1 || map_h < 1 || map_w < 1) {
    throw std::invalid_argument("packet_capacity: invalid arguments");
  }
  const double map_bits =
      static_cast<double>(quant_bits) * static_cast<double>(map_h) * static_cast<double>(map_w);
  // The relative nudge keeps exact multiples (rate * t_slot == k maps) from
  // rounding down to k - 1.
  return static_cast<long long>(std::floor(rate_bps * slot_s / map_bits * (1.0 + 1e-12)));
}

}  // namespace enachi
