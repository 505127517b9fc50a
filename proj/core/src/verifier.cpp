#include "enachi/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "enachi/inner_controller.hpp"
#include "enachi/lambert_w.hpp"
#include "enachi/outer_scheduler.hpp"
#include "enachi/trace_io.hpp"

namespace enachi {
namespace {

constexpr double kPmax = 2.0;
constexpr double kPmin = 1e-6;
constexpr double kNoise = 1e-13;

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Random outer-loop instance on the concave branch.
struct OuterDraw {
  double a0, a1, a2, V, Q, h, omega, t_tr, bits;
  [[nodiscard]] double c() const { return omega * t_tr / bits; }
};

OuterDraw draw_outer(std::mt19937_64& rng) {
  for (;;) {
    OuterDraw d{};
    d.a0 = uniform(rng, 2.0, 50.0);
    d.a2 = uniform(rng, 0.8, 1.5);
    d.V = log_uniform(rng, 10.0, 200.0);
    d.h = log_uniform(rng, 1e-13, 1e-10);
    d.omega = log_uniform(rng, 1e6, 2e7);
    d.t_tr = uniform(rng, 0.05, 0.3);
    d.bits = log_uniform(rng, 1e6, 1e7);
    const double gamma = uniform(rng, 0.1, 5.0);
    d.a1 = gamma * d.a0 * d.c();
    if (!(d.a1 < 0.95 * d.a0 && (d.a1 + 1.0 / d.a2) / d.a0 < 0.95)) continue;
    // Keep the pole inside the power range, then pick the queue so that the
    // stationary point lands at a random target (past p_max in ~1/6 of draws).
    const double k = d.h / kNoise;
    const double p_pole = std::expm1(gamma * std::numbers::ln2) / k;
    if (!(p_pole < 0.8 * kPmax)) continue;
    const double target = uniform(rng, p_pole, 1.2 * kPmax);
    const double den = d.a0 * d.c() * std::log2(1.0 + k * target) - d.a1;
    if (!(den > 1e-9)) continue;
    d.Q = d.V * d.a0 * d.c() * k /
          (std::numbers::ln2 * (1.0 + k * target) * den * den * d.t_tr);
    if (!(d.Q > 1e-9) || !std::isfinite(d.Q)) continue;
    return d;
  }
}

// Smooth utility without clipping; -inf left of the pole.
double smooth_outer(const OuterDraw& d, double p) {
  const double beta = d.c() * std::log2(1.0 + d.h * p / kNoise);
  const double den = d.a0 * beta - d.a1;
  if (!(den > 0.0)) return -std::numeric_limits<double>::infinity();
  return d.V * (d.a2 - 1.0 / den) - d.Q * p * d.t_tr;
}

template <typename F>
double grid_argmax(F&& f, double p_max, int grid) {
  double best_p = p_max / grid;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= grid; ++i) {
    const double p = p_max * static_cast<double>(i) / grid;
    const double v = f(p);
    if (v > best) {
      best = v;
      best_p = p;
    }
  }
  return best_p;
}

struct InnerDraw {
  double v, omega, slot, q, h;
  int bits, map_h, map_w;
  [[nodiscard]] double k1() const {
    return v * omega * slot / (static_cast<double>(bits) * map_h * map_w);
  }
  [[nodiscard]] double k2() const { return h / kNoise; }
};

InnerDraw draw_inner(std::mt19937_64& rng) {
  static constexpr int kDims[] = {7, 14, 28, 56};
  InnerDraw d{};
  d.v = uniform(rng, 1.0, 10.0);
  d.omega = log_uniform(rng, 1e5, 1e7);
  d.slot = 1e-3;
  d.q = log_uniform(rng, 1e-2, 10.0);
  d.h = log_uniform(rng, 1e-13, 1e-10);
  d.bits = 8;
  d.map_h = kDims[std::uniform_int_distribution<int>(0, 3)(rng)];
  d.map_w = d.map_h;
  return d;
}

long double inner_objective(const InnerDraw& d, long double p) {
  return static_cast<long double>(d.k1()) * std::log2(1.0L + d.k2() * p) -
         static_cast<long double>(d.q) * p;
}

}  // namespace

OracleReport outer_kkt_oracle(std::uint64_t seed, int draws, int grid, LambertFn w) {
  std::mt19937_64 rng(seed);
  OracleReport r;
  r.name = "outer_kkt";
  r.draws = draws;
  r.tolerance = 1e-3 * kPmax;
  for (int i = 0; i < draws; ++i) {
    const OuterDraw d = draw_outer(rng);
    const SurrogateCoefficients k(d.a0, d.a1, d.a2);
    const double closed = kkt_reference_power(k, d.V, d.Q, d.h, kNoise, d.omega, d.t_tr, d.bits,
                                              kPmin, kPmax, w);
    const double best = grid_argmax([&](double p) { return smooth_outer(d, p); }, kPmax, grid);
    const double err = std::isfinite(closed) ? std::abs(closed - best)
                                             : std::numeric_limits<double>::infinity();
    r.max_error = std::max(r.max_error, err);
    if (best > kPmax / grid && best < kPmax) ++r.interior;
  }
  r.pass = r.max_error <= r.tolerance;
  return r;
}

OracleReport outer_rule_oracle(std::uint64_t seed, int draws, int grid) {
  std::mt19937_64 rng(seed ^ 0x5a5a5a5aULL);
  OracleReport r;
  r.name = "outer_rule";
  r.draws = draws;
  r.tolerance = 1e-3 * kPmax;
  for (int i = 0; i < draws; ++i) {
    const OuterDraw d = draw_outer(rng);
    const SurrogateCoefficients k(d.a0, d.a1, d.a2);
    SplitCandidate c;
    c.feasible = true;
    c.coeffs = &k;
    c.total_bits = d.bits;
    c.tr_deadline = d.t_tr;
    c.local_energy = uniform(rng, 0.0, 0.2);
    c.gain = d.h;
    c.noise = kNoise;
    c.queue = d.Q;
    c.V = d.V;
    c.p_min = kPmin;
    c.p_max = kPmax;
    const double rule = reference_power(c, d.omega);
    const double best =
        grid_argmax([&](double p) { return utility(c, d.omega, p); }, kPmax, grid);
    r.max_error = std::max(r.max_error, std::abs(rule - best));
    if (best > kPmax / grid && best < kPmax) ++r.interior;
  }
  r.pass = r.max_error <= r.tolerance;
  return r;
}

OracleReport inner_kkt_oracle(std::uint64_t seed, int draws, int grid) {
  std::mt19937_64 rng(seed ^ 0xa5a5a5a5ULL);
  OracleReport r;
  r.name = "inner_kkt";
  r.draws = draws;
  r.tolerance = 1e-3 * kPmax;
  for (int i = 0; i < draws; ++i) {
    const InnerDraw d = draw_inner(rng);
    const double closed =
        slot_power(d.v, d.omega, d.slot, d.q, d.bits, d.map_h, d.map_w, d.h, kNoise, kPmax);
    const double best = grid_argmax(
        [&](double p) { return static_cast<double>(inner_objective(d, p)); }, kPmax, grid);
    r.max_error = std::max(r.max_error, std::abs(closed - best));
    if (best > kPmax / grid && best < kPmax) ++r.interior;
  }
  r.pass = r.max_error <= r.tolerance;
  return r;
}

double inner_curvature(double k1, double k2, double p) {
  const double s = 1.0 + k2 * p;
  return -k1 * k2 * k2 / (std::numbers::ln2 * s * s);
}

CurvatureReport inner_curvature_check(std::uint64_t seed, int draws) {
  std::mt19937_64 rng(seed ^ 0x3c3c3c3cULL);
  CurvatureReport r;
  r.draws = draws;
  for (int i = 0; i < draws; ++i) {
    const InnerDraw d = draw_inner(rng);
    const long double p = log_uniform(rng, 1e-3, kPmax);
    const long double step = 1e-3L * p;
    const long double fd = (inner_objective(d, p + step) - 2.0L * inner_objective(d, p) +
                            inner_objective(d, p - step)) /
                           (step * step);
    const double exact = inner_curvature(d.k1(), d.k2(), static_cast<double>(p));
    r.max_rel_error =
        std::max(r.max_rel_error, static_cast<double>(std::abs((fd - exact) / exact)));
    if (!(fd < 0.0L)) ++r.non_negative;
  }
  r.pass = r.max_rel_error <= 1e-4 && r.non_negative == 0;
  return r;
}

ConcavityReport concavity_certificates(std::uint64_t seed, int draws) {
  ConcavityReport out;
  std::mt19937_64 rng(seed ^ 0x0f0f0f0fULL);
  out.outer.draws = draws;
  for (int i = 0; i < draws; ++i) {
    const OuterDraw d = draw_outer(rng);
    // Power where beta reaches the pole; sample to its right.
    const double p_pole = std::expm1(d.a1 / (d.a0 * d.c()) * std::numbers::ln2) * kNoise / d.h;
    const double lo = std::min(p_pole * 1.05 + 1e-6, kPmax * 0.5);
    const double p = uniform(rng, lo, kPmax);
    const double step = 1e-4 * p;
    auto f = [&](double x) -> long double {
      const long double beta = d.c() * std::log2(1.0L + d.h * static_cast<long double>(x) / kNoise);
      const long double den = d.a0 * beta - d.a1;
      return d.V * (d.a2 - 1.0L / den) - static_cast<long double>(d.Q) * x * d.t_tr;
    };
    if (!(d.a0 * d.c() * std::log2(1.0 + d.h * (p - step) / kNoise) > d.a1)) continue;
    const long double second = f(p + step) - 2.0L * f(p) + f(p - step);
    if (!(second < 0.0L)) ++out.outer.non_negative;
  }
  out.outer.pass = out.outer.non_negative == 0;

  out.inner = inner_curvature_check(seed, draws);
  out.pass = out.outer.pass && out.inner.pass;
  return out;
}

BoundTrace bound_trace(const std::vector<FrameResult>& trace) {
  BoundTrace b;
  for (const auto& fr : trace) {
    std::vector<double> e, est, q, qn;
    double acc = 0.0, xi = 0.0;
    for (const auto& u : fr.users) {
      e.push_back(u.e_total);
      est.push_back(u.e_estimated);
      q.push_back(u.queue_before);
      qn.push_back(u.queue_after);
      acc += u.realized;
      xi = std::max(xi, std::abs(u.accuracy - u.realized));
    }
    b.energy.push_back(std::move(e));
    b.estimated.push_back(std::move(est));
    b.queue.push_back(std::move(q));
    b.queue_next.push_back(std::move(qn));
    b.accuracy.push_back(fr.users.empty() ? 0.0 : acc / static_cast<double>(fr.users.size()));
    b.xi.push_back(xi);
  }
  return b;
}

BoundConstants bound_constants(const std::vector<const BoundTrace*>& traces, double budget) {
  BoundConstants c;
  for (const BoundTrace* t : traces) {
    for (std::size_t m = 0; m < t->energy.size(); ++m) {
      const auto& e = t->energy[m];
      if (c.theta.size() < e.size()) c.theta.resize(e.size(), 0.0);
      for (std::size_t n = 0; n < e.size(); ++n) {
        c.theta[n] = std::max(c.theta[n], std::abs(e[n] - budget));
        c.delta0 = std::max(c.delta0, std::abs(t->estimated[m][n] - e[n]));
      }
      if (m < t->xi.size()) c.xi0 = std::max(c.xi0, t->xi[m]);
    }
  }
  for (double th : c.theta) c.theta0 += th * th / 2.0;
  return c;
}

DriftReport drift_bound_check(const BoundTrace& trace, double budget) {
  DriftReport r;
  r.theta0 = bound_constants({&trace}, budget).theta0;
  r.frames = static_cast<int>(trace.energy.size());
  r.min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < trace.energy.size(); ++m) {
    double l0 = 0.0, l1 = 0.0, rhs = r.theta0;
    for (std::size_t n = 0; n < trace.energy[m].size(); ++n) {
      const double q = trace.queue[m][n];
      const double qn = trace.queue_next[m][n];
      l0 += q * q / 2.0;
      l1 += qn * qn / 2.0;
      rhs += q * (trace.energy[m][n] - budget);
    }
    const double slack = rhs - (l1 - l0);
    r.min_slack = std::min(r.min_slack, slack);
    // Rounding allowance for the cases where the inequality is tight.
    if (slack < -1e-12 * (1.0 + l0 + l1 + std::abs(rhs))) ++r.violations;
  }
  if (r.frames == 0) r.min_slack = 0.0;
  r.pass = r.violations == 0;
  return r;
}

GapBoundReport gap_bound_check(const BoundTrace& trace, double offline_accuracy,
                              const BoundConstants& k, double V, double budget) {
  GapBoundReport r;
  r.constants = k;
  r.frames = static_cast<int>(trace.energy.size());
  const double M = r.frames;
  double sum_theta = 0.0;
  for (double th : k.theta) sum_theta += th;
  for (double a : trace.accuracy) r.accuracy += a;
  r.offline_accuracy = offline_accuracy;
  r.gap_bound = (k.theta0 * M * M + M * (M - 1.0) * k.delta0 * sum_theta) / V + 2.0 * k.xi0;
  r.accuracy_slack = r.accuracy - (offline_accuracy - r.gap_bound);
  r.excess_bound = std::sqrt(2.0 * k.theta0 * M * M + 2.0 * M * (M - 1.0) * k.delta0 * sum_theta +
                             4.0 * k.xi0 * V);
  const std::size_t users = trace.energy.empty() ? 0 : trace.energy.front().size();
  r.energy_pass = true;
  for (std::size_t n = 0; n < users; ++n) {
    double total = 0.0;
    for (const auto& e : trace.energy) total += e[n];
    const double slack = M * budget + r.excess_bound - total;
    r.energy_slack.push_back(slack);
    if (slack < 0.0) r.energy_pass = false;
  }
  r.accuracy_pass = r.accuracy_slack >= -1e-12 * (1.0 + std::abs(offline_accuracy));
  r.pass = r.accuracy_pass && r.energy_pass;
  return r;
}

VerifyReport run_verifier(const VerifyOptions& o) {
  VerifyReport r;
  r.oracles.push_back(outer_kkt_oracle(o.seed, o.draws, 100000, o.lambert));
  r.oracles.push_back(outer_rule_oracle(o.seed, o.draws, 100000));
  r.oracles.push_back(inner_kkt_oracle(o.seed, o.draws, 100000));
  r.concavity = concavity_certificates(o.seed, o.draws);
  r.curvature = r.concavity.inner;
  for (int i = 0; i < o.tiny_instances; ++i) {
    r.tiny.push_back(verify_tiny_instance(o.seed + static_cast<std::uint64_t>(i), o.threads));
  }
  r.pass = r.concavity.pass;
  for (const auto& x : r.oracles) r.pass = r.pass && x.pass;
  for (const auto& t : r.tiny) r.pass = r.pass && t.pass;
  return r;
}

void write_report(std::ostream& os, const VerifyReport& r) {
  os << "check,item,value,bound,slack,pass\n";
  auto row = [&](const std::string& check, const std::string& item, double value, double bound,
                 double slack, bool pass) {
    os << check << ',' << item << ',' << fmt_num(value) << ',' << fmt_num(bound) << ','
       << fmt_num(slack) << ',' << (pass ? 1 : 0) << '\n';
  };
  for (const auto& o : r.oracles) {
    row(o.name, "max_error/draws=" + std::to_string(o.draws) +
                    "/interior=" + std::to_string(o.interior),
        o.max_error, o.tolerance, o.tolerance - o.max_error, o.pass);
  }
  row("inner_curvature", "max_rel_error", r.curvature.max_rel_error, 1e-4,
      1e-4 - r.curvature.max_rel_error, r.curvature.pass);
  row("concavity_outer", "non_negative_points", r.concavity.outer.non_negative, 0.0,
      -r.concavity.outer.non_negative, r.concavity.outer.pass);
  row("concavity_inner", "non_negative_points", r.concavity.inner.non_negative, 0.0,
      -r.concavity.inner.non_negative, r.concavity.inner.pass);
  for (const auto& t : r.tiny) {
    const std::string id = "seed=" + std::to_string(t.seed);
    const auto& th = t.gap;
    row("gap_accuracy", id, th.accuracy, th.offline_accuracy - th.gap_bound,
        th.accuracy_slack, th.accuracy_pass);
    for (std::size_t n = 0; n < th.energy_slack.size(); ++n) {
      row("gap_energy", id + "/user=" + std::to_string(n),
          th.excess_bound - th.energy_slack[n], th.excess_bound, th.energy_slack[n],
          th.energy_slack[n] >= 0.0);
    }
    row("drift", id, t.drift.violations, 0.0, t.drift.min_slack, t.drift.pass);
    row("grid", id + "/decision_space", static_cast<double>(t.decision_space), 0.0, 0.0,
        t.offline.feasible);
  }
  row("overall", "all", r.pass ? 1.0 : 0.0, 1.0, 0.0, r.pass);
}

}  // namespace enachi
