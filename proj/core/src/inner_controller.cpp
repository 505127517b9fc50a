#include "enachi/inner_controller.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace enachi {

PowerQueue update_power_queue(PowerQueue q, double p_used, double p_ref) {
  if (!(q.backlog >= 0.0) || !std::isfinite(p_used) || !std::isfinite(p_ref)) {
    throw std::invalid_argument("update_power_queue: invalid arguments");
  }
  return {std::max(q.backlog + p_used - p_ref, 0.0)};
}

double slot_power(double v, double bandwidth, double slot_s, double q, int quant_bits, int map_h,
                  int map_w, double gain, double noise, double p_max) {
  if (!(v > 0.0) || !(bandwidth > 0.0) || !(slot_s > 0.0) || !(q >= 0.0) || quant_bits < 1 ||
      map_h < 1 || map_w < 1 || !(gain > 0.0) || !(noise > 0.0) || !(p_max > 0.0)) {
    throw std::invalid_argument("slot_power: invalid arguments");
  }
  if (q < kQueueFloor) return p_max;
  const double map_bits =
      static_cast<double>(quant_bits) * static_cast<double>(map_h) * static_cast<double>(map_w);
  const double p = v * bandwidth * slot_s / (q * std::numbers::ln2 * map_bits) - noise / gain;
  if (!(p > 0.0)) return 0.0;
  return std::min(p, p_max);
}

std::vector<int> select_packet(const DnnProfile& profile, int s, const std::set<int>& already_sent,
                               long long capacity) {
  if (capacity < 0) throw std::invalid_argument("select_packet: capacity must be >= 0");
  std::vector<int> packet;
  for (int idx : profile.order(s)) {
    if (static_cast<long long>(packet.size()) >= capacity) break;
    if (!already_sent.contains(idx)) packet.push_back(idx);
  }
  return packet;
}

double max_entropy(int num_classes) {
  if (num_classes < 2) throw std::invalid_argument("max_entropy: need at least 2 classes");
  return std::log(static_cast<double>(num_classes));
}

double uncertainty_from_mass(double h_max, double difficulty, double mass_fraction, double kappa) {
  if (!(difficulty > 0.0) || !(kappa > 0.0) || !(h_max >= 0.0)) {
    throw std::invalid_argument("uncertainty: difficulty and kappa must be > 0");
  }
  const double rest = std::clamp(1.0 - mass_fraction, 0.0, 1.0);
  return h_max * difficulty * std::pow(rest, kappa);
}

double synthetic_uncertainty(const DnnProfile& profile, int s, const std::set<int>& received,
                             double difficulty, int num_classes, double kappa) {
  const auto& scores = profile.importance(s);
  double total = 0.0;
  for (double x : scores) total += x;
  double got = 0.0;
  for (int idx : received) {
    if (idx < 0 || idx >= static_cast<int>(scores.size())) {
      throw std::invalid_argument("synthetic_uncertainty: map index out of range");
    }
    got += scores[static_cast<std::size_t>(idx)];
  }
  const double frac = received.size() == scores.size() ? 1.0 : got / total;
  return uncertainty_from_mass(max_entropy(num_classes), difficulty, frac, kappa);
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::kThreshold: return "threshold";
    case StopReason::kDeadline: return "deadline";
    case StopReason::kExhausted: return "exhausted";
  }
  return "unknown";
}

TransmissionResult run_frame_transmission(const TaskDecision& decision,
                                          const ChannelState& channel, const DnnProfile& profile,
                                          double difficulty, const InnerParams& params,
                                          bool keep_log) {
  if (!decision.feasible) throw std::invalid_argument("transmission: decision is infeasible");
  if (profile.is_fully_local(decision.split)) {
    throw std::invalid_argument("transmission: fully-local split has nothing to send");
  }
  if (!(params.slot > 0.0)) throw std::invalid_argument("transmission: slot must be > 0");

  const LayerSpec& layer = profile.split_layer(decision.split);
  const auto& order = profile.order(decision.split);
  const auto& scores = profile.importance(decision.split);
  const int total_maps = static_cast<int>(order.size());
  const double h_max = max_entropy(params.num_classes);

  // Prefix importance mass along the transmission order.
  std::vector<double> mass(order.size() + 1, 0.0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    mass[i + 1] = mass[i] + scores[static_cast<std::size_t>(order[i])];
  }
  auto uncertainty_after = [&](int sent) {
    const double frac = sent >= total_maps ? 1.0 : mass[static_cast<std::size_t>(sent)] /
                                                       mass.back();
    return uncertainty_from_mass(h_max, difficulty, frac, params.kappa);
  };

  TransmissionResult r;
  const double span = decision.batch_start_offset - decision.t_local;
  int window = span > 0.0 ? static_cast<int>(std::floor(span / params.slot + 1e-9)) : 0;
  window = std::min(window, static_cast<int>(channel.slot_gains.size()));
  r.window = window;

  PowerQueue q;
  int sent = 0;
  double u = uncertainty_after(0);
  r.final_uncertainty = u;

  auto finish = [&](StopReason reason) {
    r.reason = reason;
    r.maps_sent = sent;
    r.beta = static_cast<double>(sent) / static_cast<double>(total_maps);
    r.final_queue = q.backlog;
    r.final_uncertainty = u;
    return r;
  };

  if (u <= params.h_threshold) return finish(StopReason::kThreshold);
  if (window == 0 || !(decision.bandwidth > 0.0)) return finish(StopReason::kDeadline);

  for (int k = 1; k <= window; ++k) {
    const double h = channel.slot_gains[static_cast<std::size_t>(k - 1)];
    double p = slot_power(params.v, decision.bandwidth, params.slot, q.backlog,
                          profile.quant_bits(), layer.map_h, layer.map_w, h, params.noise_power,
                          params.p_max);
    long long cap = 0;
    if (p > 0.0) {
      cap = packet_capacity(shannon_rate(decision.bandwidth, h, p, params.noise_power),
                            params.slot, profile.quant_bits(), layer.map_h, layer.map_w);
    }
    // A powered slot costs energy even when no whole map fits.
    const int n_send = static_cast<int>(std::min<long long>(cap, total_maps - sent));
    r.energy += p * params.slot;
    r.power_sum += p;
    q = update_power_queue(q, p, decision.ref_power);
    const int first = sent;
    sent += n_send;
    u = uncertainty_after(sent);
    r.slots_used = k;

    bool stop = false;
    StopReason reason = StopReason::kDeadline;
    if (sent >= total_maps) {
      stop = true;
      reason = StopReason::kExhausted;
    } else if (u <= params.h_threshold) {
      stop = true;
      reason = StopReason::kThreshold;
    } else if (k == window) {
      stop = true;
    }

    if (keep_log) {
      SlotRecord rec;
      rec.slot = k;
      rec.gain = h;
      rec.power = p;
      rec.capacity = cap;
      rec.packet.assign(order.begin() + first, order.begin() + sent);
      rec.cumulative = sent;
      rec.uncertainty = u;
      rec.queue = q.backlog;
      rec.stop = stop;
      r.log.push_back(std::move(rec));
    }
    if (stop) return finish(reason);
  }
  return finish(StopReason::kDeadline);
}

std::string format_log(const TransmissionResult& result) {
  std::string out;
  char buf[256];
  for (const auto& rec : result.log) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%lld,%d,%.10g,%.10g,%d,", rec.slot, rec.gain,
                  rec.power, rec.capacity, rec.cumulative, rec.uncertainty, rec.queue,
                  rec.stop ? 1 : 0);
    out += buf;
    for (std::size_t i = 0; i < rec.packet.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(rec.packet[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace enachi
