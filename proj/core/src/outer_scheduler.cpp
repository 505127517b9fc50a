#include "enachi/outer_scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "enachi/cost_model.hpp"
#include "enachi/lambert_w.hpp"

namespace enachi {

EnergyQueue update_energy_queue(EnergyQueue q, double realized_energy, double budget) {
  if (!std::isfinite(q.backlog) || !std::isfinite(realized_energy) || !std::isfinite(budget) ||
      q.backlog < 0.0) {
    throw std::invalid_argument("update_energy_queue: inputs must be finite, backlog >= 0");
  }
  return {std::max(q.backlog + realized_energy - budget, 0.0)};
}

SplitCandidate make_candidate(const DnnProfile& profile, int split, const UserState& user,
                              const UtilityParams& params) {
  SplitCandidate c;
  c.split = split;
  c.fully_local = profile.is_fully_local(split);
  c.t_local = local_delay(local_workload(profile, split), user.cpu_hz);
  c.t_edge = edge_delay(edge_workload(profile, split), params.edge_hz);
  c.local_energy = local_energy(user.chip_alpha, user.cpu_hz, local_workload(profile, split));
  c.tr_deadline = params.frame_deadline - c.t_local - c.t_edge;
  c.feasible = c.tr_deadline >= 0.0;
  if (c.fully_local) {
    c.tr_deadline = 0.0;
    c.full_accuracy = profile.full_model_accuracy();
  } else {
    c.coeffs = &profile.surrogate(split);
    c.total_bits = profile.total_feature_bits(split);
    c.tr_deadline = std::max(c.tr_deadline, 0.0);
  }
  c.gain = user.frame_gain;
  c.noise = params.noise_power;
  c.queue = user.queue;
  c.V = params.V;
  c.p_min = params.p_min;
  c.p_max = params.p_max;
  return c;
}

double predicted_beta(double bandwidth, double tr_deadline, double gain, double power,
                      double noise, double total_bits) {
  if (!(bandwidth >= 0.0) || !(tr_deadline >= 0.0) || !(gain > 0.0) || !(power >= 0.0) ||
      !(noise > 0.0) || !(total_bits > 0.0)) {
    throw std::invalid_argument("predicted_beta: invalid arguments");
  }
  const double beta = bandwidth * tr_deadline * std::log2(1.0 + gain * power / noise) / total_bits;
  return std::clamp(beta, 0.0, 1.0);
}

double kkt_reference_power(const SurrogateCoefficients& coeffs, double V, double queue,
                           double gain, double noise, double bandwidth, double tr_deadline,
                           double total_bits, double p_min, double p_max,
                           double (*lambert)(double)) {
  if (!(V > 0.0) || !(queue >= 0.0) || !(gain > 0.0) || !(noise > 0.0) || !(bandwidth > 0.0) ||
      !(tr_deadline > 0.0) || !(total_bits > 0.0) || !(p_min > 0.0) || !(p_max >= p_min)) {
    throw std::invalid_argument("kkt_reference_power: inputs must be positive");
  }
  if (queue < kQueueFloor) return p_max;

  // C = omega T_tr / (b_total D L^h L^w) so that beta = C log2(1 + h p / sigma^2).
  const double c = bandwidth * tr_deadline / total_bits;
  const double gamma = coeffs.a1() / (coeffs.a0() * c);
  // gamma / a1 = 1 / (a0 C) keeps the expression finite when a1 = 0.
  const double root = std::sqrt(std::numbers::ln2 * gain * V /
                                (coeffs.a0() * c * noise * tr_deadline * queue));
  const double arg = root / (2.0 * std::exp2(gamma / 2.0));
  const double w = lambert ? lambert(arg) : lambert_w0(arg);
  const double p = noise / gain * (std::exp2(gamma) * std::exp(2.0 * w) - 1.0);
  if (!std::isfinite(p)) return p_max;
  return std::clamp(p, p_min, p_max);
}

namespace {

// Power at which beta(p) = target, inverse of predicted_beta before clipping.
double power_for_beta(double target, double c, double gain, double noise) {
  const double expo = target / c;
  if (expo > 1000.0) return std::numeric_limits<double>::infinity();
  return std::expm1(expo * std::numbers::ln2) * noise / gain;
}

void require_feasible(const SplitCandidate& cand) {
  if (!cand.feasible) throw std::invalid_argument("candidate split is infeasible");
}

}  // namespace

double utility(const SplitCandidate& cand, double bandwidth, double ref_power) {
  require_feasible(cand);
  if (cand.fully_local) return cand.V * cand.full_accuracy - cand.queue * cand.local_energy;
  double beta = 0.0;
  if (bandwidth > 0.0 && cand.tr_deadline > 0.0) {
    beta = predicted_beta(bandwidth, cand.tr_deadline, cand.gain, ref_power, cand.noise,
                          cand.total_bits);
  }
  const double acc = surrogate_accuracy(*cand.coeffs, beta);
  return cand.V * acc - cand.queue * (cand.local_energy + ref_power * cand.tr_deadline);
}

double reference_power(const SplitCandidate& cand, double bandwidth) {
  require_feasible(cand);
  if (cand.fully_local) return 0.0;
  if (!(bandwidth > 0.0) || !(cand.tr_deadline > 0.0)) return cand.p_min;
  if (cand.queue < kQueueFloor) return cand.p_max;

  const auto& k = *cand.coeffs;
  const double c = bandwidth * cand.tr_deadline / cand.total_bits;
  double beta_cap = 1.0;
  if (k.a2() > 1.0) beta_cap = std::min(beta_cap, (k.a1() + 1.0 / (k.a2() - 1.0)) / k.a0());
  const double lo = std::max(power_for_beta(k.zero_crossing(), c, cand.gain, cand.noise),
                             cand.p_min);
  const double hi = std::min(power_for_beta(beta_cap, c, cand.gain, cand.noise), cand.p_max);

  double best_p = cand.p_min;
  double best_u = utility(cand, bandwidth, best_p);
  if (lo < hi) {
    const double stationary =
        kkt_reference_power(k, cand.V, cand.queue, cand.gain, cand.noise, bandwidth,
                            cand.tr_deadline, cand.total_bits, cand.p_min, cand.p_max);
    const double p = std::clamp(stationary, lo, hi);
    const double u = utility(cand, bandwidth, p);
    if (u > best_u) {
      best_u = u;
      best_p = p;
    }
  }
  return best_p;
}

double unit_bandwidth_reward(const SplitCandidate& cand, double ref_power, double unit_bandwidth) {
  return std::max(utility(cand, unit_bandwidth, ref_power), kRewardFloor);
}

std::vector<double> proportional_bandwidth(std::span<const double> rewards,
                                           double total_bandwidth) {
  if (!(total_bandwidth > 0.0)) {
    throw std::invalid_argument("proportional_bandwidth: total bandwidth must be > 0");
  }
  std::vector<double> share(rewards.size(), 0.0);
  if (rewards.empty()) return share;
  double sum = 0.0;
  for (double r : rewards) {
    if (!(r >= kRewardFloor) || !std::isfinite(r)) {
      throw std::invalid_argument("proportional_bandwidth: rewards must be >= reward floor");
    }
    sum += r;
  }
  std::size_t largest = 0;
  double assigned = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    share[i] = total_bandwidth * (rewards[i] / sum);
    if (share[i] > share[largest]) largest = i;
  }
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (i != largest) assigned += share[i];
  }
  share[largest] = total_bandwidth - assigned;
  return share;
}

Allocation allocate_resources(std::span<const SplitCandidate> candidates,
                              const UtilityParams& params) {
  const std::size_t n = candidates.size();
  Allocation out;
  out.bandwidth.assign(n, 0.0);
  out.ref_power.assign(n, 0.0);
  out.utility.assign(n, 0.0);

  std::vector<std::size_t> tx;  // users that share the spectrum
  double fixed_utility = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = candidates[i];
    if (!c.feasible) continue;
    if (c.fully_local) {
      out.utility[i] = utility(c, 0.0, 0.0);
      fixed_utility += out.utility[i];
    } else {
      tx.push_back(i);
    }
  }
  if (tx.empty()) {
    out.total_utility = out.initial_utility = fixed_utility;
    return out;
  }

  const double share0 = params.total_bandwidth / static_cast<double>(tx.size());
  const double unit_bw = params.unit_bandwidth > 0.0 ? params.unit_bandwidth : share0;

  std::vector<double> bw(tx.size(), share0);
  std::vector<double> power(tx.size(), params.p_max);
  std::vector<double> util(tx.size());
  std::vector<double> reward(tx.size());

  auto evaluate = [&] {
    double total = fixed_utility;
    for (std::size_t j = 0; j < tx.size(); ++j) {
      const auto& c = candidates[tx[j]];
      util[j] = utility(c, bw[j], power[j]);
      reward[j] = unit_bandwidth_reward(c, power[j], unit_bw);
      total += util[j];
    }
    return total;
  };
  auto keep = [&](double total) {
    out.total_utility = total;
    for (std::size_t j = 0; j < tx.size(); ++j) {
      out.bandwidth[tx[j]] = bw[j];
      out.ref_power[tx[j]] = power[j];
      out.utility[tx[j]] = util[j];
    }
  };

  double previous = evaluate();
  out.initial_utility = previous;
  keep(previous);

  int iter = 0;
  while (iter < params.max_iterations) {
    ++iter;
    bw = proportional_bandwidth(reward, params.total_bandwidth);
    for (std::size_t j = 0; j < tx.size(); ++j) {
      power[j] = reference_power(candidates[tx[j]], bw[j]);
    }
    const double current = evaluate();
    if (current > out.total_utility) keep(current);
    if (std::abs(current - previous) < params.eps_conv) break;
    previous = current;
  }
  out.iterations = iter;
  return out;
}

double batch_deadline(std::span<const double> edge_delays, double frame_deadline) {
  double worst = 0.0;
  for (double d : edge_delays) {
    if (!(d >= 0.0)) throw std::invalid_argument("batch_deadline: negative edge delay");
    worst = std::max(worst, d);
  }
  return frame_deadline - worst;
}

std::vector<TaskDecision> greedy_partition_search(const DnnProfile& profile,
                                                  std::span<const UserState> users,
                                                  const UtilityParams& params,
                                                  std::span<const int> allowed_splits) {
  std::vector<int> splits(allowed_splits.begin(), allowed_splits.end());
  if (splits.empty()) splits = profile.split_points();
  std::sort(splits.begin(), splits.end());
  for (int s : splits) {
    if (!profile.has_split(s)) {
      throw std::invalid_argument("greedy_partition_search: unknown split " + std::to_string(s));
    }
  }

  const std::size_t n = users.size();
  // table[i][j]: user i, split splits[j]
  std::vector<std::vector<SplitCandidate>> table(n);
  std::vector<int> choice(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < splits.size(); ++j) {
      table[i].push_back(make_candidate(profile, splits[j], users[i], params));
      if (choice[i] < 0 && table[i].back().feasible) choice[i] = static_cast<int>(j);
    }
  }

  SplitCandidate dropped;  // infeasible placeholder, takes no resources
  auto vector_for = [&](const std::vector<int>& ch) {
    std::vector<SplitCandidate> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = ch[i] < 0 ? dropped : table[i][ch[i]];
    return v;
  };

  for (int pass = 0; pass < std::max(params.greedy_passes, 1); ++pass) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (choice[i] < 0) continue;
      int best_j = choice[i];
      double best_total = -std::numeric_limits<double>::infinity();
      std::vector<int> trial = choice;
      for (std::size_t j = 0; j < splits.size(); ++j) {
        if (!table[i][j].feasible) continue;
        trial[i] = static_cast<int>(j);
        const auto cands = vector_for(trial);
        const double total = allocate_resources(cands, params).total_utility;
        if (total > best_total) {
          best_total = total;
          best_j = static_cast<int>(j);
        }
      }
      changed = changed || best_j != choice[i];
      choice[i] = best_j;
    }
    if (!changed) break;
  }

  const auto cands = vector_for(choice);
  const Allocation alloc = allocate_resources(cands, params);

  std::vector<double> edge;
  for (std::size_t i = 0; i < n; ++i) {
    if (choice[i] >= 0) edge.push_back(cands[i].t_edge);
  }
  const double offset = batch_deadline(edge, params.frame_deadline);

  std::vector<TaskDecision> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    TaskDecision& d = out[i];
    d.batch_start_offset = offset;
    if (choice[i] < 0) {
      d.split = -1;
      d.feasible = false;
      continue;
    }
    const auto& c = cands[i];
    d.split = c.split;
    d.feasible = true;
    d.bandwidth = alloc.bandwidth[i];
    d.ref_power = alloc.ref_power[i];
    d.tr_deadline = c.tr_deadline;
    d.t_local = c.t_local;
    d.t_edge = c.t_edge;
    d.local_energy = c.local_energy;
    d.utility = alloc.utility[i];
    if (c.fully_local) {
      d.predicted_beta = 1.0;
      d.predicted_accuracy = c.full_accuracy;
      d.estimated_energy = c.local_energy;
    } else {
      d.predicted_beta = d.bandwidth > 0.0 && d.tr_deadline > 0.0
                             ? predicted_beta(d.bandwidth, d.tr_deadline, c.gain, d.ref_power,
                                              c.noise, c.total_bits)
                             : 0.0;
      d.predicted_accuracy = surrogate_accuracy(*c.coeffs, d.predicted_beta);
      d.estimated_energy = c.local_energy + d.ref_power * d.tr_deadline;
    }
  }
  return out;
}

}  // namespace enachi
