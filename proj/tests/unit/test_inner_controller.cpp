#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "enachi/channel.hpp"
#include "enachi/inner_controller.hpp"

using namespace enachi;

namespace {

// Three input maps of 1x1 with order [1, 2, 0], one compute layer.
DnnProfile tiny_profile() {
  std::vector<LayerSpec> layers = {{0, 0.0, 3, 1, 1}, {1, 1e6, 1, 1, 1}};
  return DnnProfile(layers, {0, 1}, 8, {{0, SurrogateCoefficients(10.0, 0.0, 0.9)}},
                    {{0, {0.1, 0.9, 0.5}}}, 0.9);
}

TaskDecision offload(double bw, double p_ref, double window_s) {
  TaskDecision d;
  d.split = 0;
  d.feasible = true;
  d.bandwidth = bw;
  d.ref_power = p_ref;
  d.tr_deadline = window_s;
  d.batch_start_offset = window_s;
  return d;
}

ChannelState flat_channel(int n, double h) {
  ChannelState c;
  c.slot_gains.assign(static_cast<std::size_t>(n), h);
  c.frame_gain = h;
  return c;
}

}  // namespace

TEST(PowerQueue, Update) {
  EXPECT_EQ(update_power_queue({0.0}, 1.0, 1.0).backlog, 0.0);
  EXPECT_NEAR(update_power_queue({0.0}, 1.2, 1.0).backlog, 0.2, 1e-15);
  EXPECT_EQ(update_power_queue({0.1}, 0.0, 1.0).backlog, 0.0);
}

TEST(SlotPower, ClosedForm) {
  // 5 * 3e6 * 1e-3 / (40 ln2 * 392) - 1
  EXPECT_NEAR(slot_power(5.0, 3e6, 1e-3, 40.0, 8, 7, 7, 1e-13, 1e-13, 2.0), 0.3801291845238808,
              1e-12);
  EXPECT_EQ(slot_power(5.0, 3e6, 1e-3, 1.0, 8, 7, 7, 1e-13, 1e-13, 2.0), 2.0);
  // 56x56 maps: stationary point negative, slot stays idle
  EXPECT_EQ(slot_power(5.0, 3e6, 1e-3, 1.0, 8, 56, 56, 1e-13, 1e-13, 2.0), 0.0);
  EXPECT_EQ(slot_power(5.0, 3e6, 1e-3, 0.0, 8, 56, 56, 1e-13, 1e-13, 2.0), 2.0);
  EXPECT_EQ(slot_power(5.0, 3e6, 1e-3, 1.0, 8, 7, 7, 1e-20, 1e-13, 2.0), 0.0);
}

TEST(SelectPacket, ImportanceOrder) {
  const DnnProfile p = tiny_profile();
  EXPECT_TRUE(select_packet(p, 0, {1}, 0).empty());
  EXPECT_EQ(select_packet(p, 0, {1}, 1), (std::vector<int>{2}));
  EXPECT_EQ(select_packet(p, 0, {}, 2), (std::vector<int>{1, 2}));
  EXPECT_EQ(select_packet(p, 0, {1, 2}, 10), (std::vector<int>{0}));
  EXPECT_THROW((void)select_packet(p, 0, {}, -1), std::invalid_argument);
}

TEST(SelectPacket, MatchesBruteForceBestK) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> scores(40);
  for (double& s : scores) s = u(rng);
  std::vector<LayerSpec> layers = {{0, 0.0, 40, 1, 1}, {1, 1.0, 1, 1, 1}};
  const DnnProfile p(layers, {0, 1}, 8, {{0, SurrogateCoefficients(10.0, 0.0, 0.9)}}, {{0, scores}},
                     0.9);
  std::set<int> sent = {3, 17, 29};
  for (int k = 0; k <= 10; ++k) {
    const auto packet = select_packet(p, 0, sent, k);
    ASSERT_EQ(static_cast<int>(packet.size()), k);
    double min_in = 1e9;
    for (int i : packet) {
      EXPECT_FALSE(sent.contains(i));
      min_in = std::min(min_in, scores[static_cast<std::size_t>(i)]);
    }
    for (int i = 0; i < 40; ++i) {
      const bool taken = std::find(packet.begin(), packet.end(), i) != packet.end();
      if (!taken && !sent.contains(i) && k > 0) {
        EXPECT_LE(scores[static_cast<std::size_t>(i)], min_in);
      }
    }
  }
}

TEST(Uncertainty, EmptyHalfFull) {
  EXPECT_NEAR(max_entropy(1000), 6.907755278982137, 1e-12);
  EXPECT_NEAR(uncertainty_from_mass(max_entropy(1000), 1.0, 0.0, 1.0), 6.907755278982137, 1e-12);
  EXPECT_NEAR(uncertainty_from_mass(max_entropy(1000), 1.0, 0.5, 1.0), 3.4538776394910684, 1e-12);
  EXPECT_EQ(uncertainty_from_mass(max_entropy(1000), 1.0, 1.0, 1.0), 0.0);
  EXPECT_NEAR(uncertainty_from_mass(2.0, 1.5, 0.5, 2.0), 0.75, 1e-15);

  const DnnProfile p = tiny_profile();
  EXPECT_NEAR(synthetic_uncertainty(p, 0, {}, 1.0), 6.907755278982137, 1e-12);
  EXPECT_EQ(synthetic_uncertainty(p, 0, {0, 1, 2}, 1.0), 0.0);
  EXPECT_NEAR(synthetic_uncertainty(p, 0, {1}, 1.0), 6.907755278982137 * (0.6 / 1.5), 1e-12);
  EXPECT_THROW((void)synthetic_uncertainty(p, 0, {9}, 1.0), std::invalid_argument);
}

TEST(Transmission, ThresholdAboveMaxStopsBeforeSlotOne) {
  const DnnProfile p = tiny_profile();
  InnerParams ip;
  ip.h_threshold = max_entropy(1000);
  const auto r = run_frame_transmission(offload(1e6, 1.0, 0.01), flat_channel(10, 1e-13), p, 1.0, ip);
  EXPECT_EQ(r.reason, StopReason::kThreshold);
  EXPECT_EQ(r.slots_used, 0);
  EXPECT_EQ(r.beta, 0.0);
  EXPECT_EQ(r.energy, 0.0);
}

TEST(Transmission, ZeroThresholdRunsToExhaustion) {
  const DnnProfile p = tiny_profile();
  InnerParams ip;
  ip.h_threshold = 0.0;
  // 1e6 bit/s * 1 ms = 1000 bits, i.e. 125 one-byte maps per slot
  const auto r = run_frame_transmission(offload(1e6, 2.0, 0.01), flat_channel(10, 1e-13), p, 1.0, ip,
                                        true);
  EXPECT_EQ(r.reason, StopReason::kExhausted);
  EXPECT_EQ(r.slots_used, 1);
  EXPECT_EQ(r.maps_sent, 3);
  EXPECT_EQ(r.beta, 1.0);
  ASSERT_EQ(r.log.size(), 1u);
  EXPECT_EQ(r.log[0].packet, (std::vector<int>{1, 2, 0}));
  EXPECT_DOUBLE_EQ(r.energy, 2.0 * 1e-3);
}

TEST(Transmission, DeadlineWhenWindowTooShort) {
  const DnnProfile p = default_profile();
  InnerParams ip;
  auto d = offload(3e6, 2.0, 0.0005);
  d.split = 0;
  const auto r = run_frame_transmission(d, flat_channel(10, 1.5e-13), p, 1.0, ip);
  EXPECT_EQ(r.window, 0);
  EXPECT_EQ(r.reason, StopReason::kDeadline);
  EXPECT_EQ(r.energy, 0.0);
  TaskDecision local;
  local.split = 5;
  local.feasible = true;
  EXPECT_THROW((void)run_frame_transmission(local, flat_channel(1, 1e-13), p, 1.0, ip),
               std::invalid_argument);
}

TEST(Transmission, LogResummationAndTracking) {
  const DnnProfile p = default_profile();
  InnerParams ip;
  ip.h_threshold = 0.0;  // never stop early
  ChannelModelConfig cc;
  cc.path_loss_gain = 1.5e-13;
  cc.seed = 11;
  for (double p_ref : {0.2, 0.7, 1.5}) {
    const auto ch = sample_frame(cc, 200);
    const auto d = offload(3e6, p_ref, 0.15);
    const auto r = run_frame_transmission(d, ch, p, 1.3, ip, true);
    EXPECT_EQ(r.window, 150);
    double e = 0.0, ps = 0.0, q = 0.0;
    int cum = 0;
    double u_prev = 1e300;
    for (const auto& rec : r.log) {
      e += rec.power * ip.slot;
      ps += rec.power;
      q = std::max(q + rec.power - p_ref, 0.0);
      EXPECT_NEAR(rec.queue, q, 1e-12);
      EXPECT_GE(rec.cumulative, cum);
      EXPECT_LE(rec.uncertainty, u_prev);
      EXPECT_GE(rec.power, 0.0);
      EXPECT_LE(rec.power, ip.p_max);
      cum = rec.cumulative;
      u_prev = rec.uncertainty;
    }
    EXPECT_NEAR(r.energy, e, 1e-12);
    EXPECT_NEAR(r.power_sum, ps, 1e-9);
    EXPECT_EQ(r.maps_sent, cum);
    if (r.reason == StopReason::kDeadline) {
      EXPECT_LE(r.power_sum, r.window * p_ref + r.final_queue + 1e-9);
    }
    EXPECT_LE(r.beta, 1.0);
    EXPECT_FALSE(format_log(r).empty());
  }
}
