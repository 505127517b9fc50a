#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "enachi/model_profile.hpp"
#include "enachi/sim_engine.hpp"

namespace enachi {

using LambertFn = double (*)(double);

// ---- closed-form oracles -------------------------------------------------

struct OracleReport {
  std::string name;
  int draws = 0;
  /// Draws whose optimum lies strictly inside (p_min, p_max).
  int interior = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Lambert-W reference power against a grid argmax of the smooth utility
/// V * (a2 - 1 / (a0 beta - a1)) - Q p T_tr on (0, p_max].
/// `w` replaces the Lambert-W solver (fault injection).
[[nodiscard]] OracleReport outer_kkt_oracle(std::uint64_t seed, int draws = 200,
                                            int grid = 100000, LambertFn w = nullptr);

/// The scheduler's reference_power against a grid argmax of the clipped utility.
[[nodiscard]] OracleReport outer_rule_oracle(std::uint64_t seed, int draws = 200,
                                             int grid = 100000);

/// slot_power against a grid argmax of
/// v omega t_slot log2(1 + h p / sigma^2) / (D L^h L^w) - q p on (0, p_max].
[[nodiscard]] OracleReport inner_kkt_oracle(std::uint64_t seed, int draws = 200,
                                            int grid = 100000);

/// f''(p) = -K1 K2^2 / (ln2 (1 + K2 p)^2) for f(p) = K1 log2(1 + K2 p) - q p.
[[nodiscard]] double inner_curvature(double k1, double k2, double p);

struct CurvatureReport {
  int draws = 0;
  /// Largest |analytic - central difference| / |analytic|.
  double max_rel_error = 0.0;
  /// Points where a second difference was not negative.
  int non_negative = 0;
  bool pass = false;
};

/// Analytic inner curvature against central differences (relative 1e-4).
[[nodiscard]] CurvatureReport inner_curvature_check(std::uint64_t seed, int draws = 200);

struct ConcavityReport {
  CurvatureReport outer;  // utility in the reference power
  CurvatureReport inner;  // slot objective in p
  bool pass = false;
};

[[nodiscard]] ConcavityReport concavity_certificates(std::uint64_t seed, int draws = 200);

// ---- bound checks on traces ----------------------------------------------

/// Per-frame, per-user records needed by the bound checks.
struct BoundTrace {
  std::vector<std::vector<double>> energy;     // realized, [m][n]
  std::vector<std::vector<double>> estimated;  // scheduler estimate, [m][n]
  std::vector<std::vector<double>> queue;      // energy queue at frame start, [m][n]
  std::vector<std::vector<double>> queue_next;
  std::vector<double> accuracy;                // mean credited accuracy per frame
  std::vector<double> xi;                      // max |surrogate - credited| per frame
};

[[nodiscard]] BoundTrace bound_trace(const std::vector<FrameResult>& trace);

struct BoundConstants {
  std::vector<double> theta;  // max_m |E_nm - budget|
  double theta0 = 0.0;        // sum theta_n^2 / 2
  double delta0 = 0.0;        // max |estimate - realized|
  double xi0 = 0.0;           // max |surrogate - realized accuracy|
};

/// Constants over one or more traces of the same user set.
[[nodiscard]] BoundConstants bound_constants(const std::vector<const BoundTrace*>& traces,
                                             double budget);

struct DriftReport {
  int frames = 0;
  int violations = 0;
  double min_slack = 0.0;
  double theta0 = 0.0;
  bool pass = false;
};

/// L(m+1) - L(m) <= theta0 + sum_n Q_n (E_n - budget) on every frame, with
/// L = sum Q^2 / 2 and theta0 from this trace.
[[nodiscard]] DriftReport drift_bound_check(const BoundTrace& trace, double budget);

struct GapBoundReport {
  int frames = 0;
  double accuracy = 0.0;          // sum over frames, checked policy
  double offline_accuracy = 0.0;  // sum over frames, reference optimum
  double gap_bound = 0.0;
  double accuracy_slack = 0.0;    // accuracy - (offline - gap_bound)
  double excess_bound = 0.0;
  std::vector<double> energy_slack;  // M budget + excess_bound - sum_m E_n
  BoundConstants constants;
  bool accuracy_pass = false;
  bool energy_pass = false;
  bool pass = false;
};

/// Both inequalities:
///   sum A >= sum A* - (theta0 M^2 + M (M - 1) delta0 sum theta_n) / V - 2 xi0
///   sum_m E_n <= M budget + sqrt(2 theta0 M^2 + 2 M (M - 1) delta0 sum theta_n + 4 xi0 V)
[[nodiscard]] GapBoundReport gap_bound_check(const BoundTrace& trace, double offline_accuracy,
                                            const BoundConstants& constants, double V,
                                            double budget);

// ---- tiny enumerable instances -------------------------------------------

struct TinyInstance {
  int frames = 3;
  int users = 2;
  std::vector<int> splits;
  std::vector<double> power_levels;
  /// Each entry: bandwidth share of every user, summing to 1.
  std::vector<std::vector<double>> bandwidth_shares;
  std::vector<std::vector<double>> gains;  // [m][n], known in advance
  double V = 0.2;
  double budget = 0.1;
  double frame_deadline = 0.3;
  double total_bandwidth = 3e6;
  double noise_power = 1e-13;
  double cpu_hz = 2e9;
  double chip_alpha = 1e-28;
  double edge_hz = 2e10;
  std::shared_ptr<const DnnProfile> profile;
};

/// M = 3, N = 2, three splits, six power levels, three bandwidth splits and
/// Rayleigh-faded gains drawn from seed.
[[nodiscard]] TinyInstance make_tiny_instance(std::uint64_t seed);

/// One joint decision for a frame with its outcome.
struct TinyOption {
  std::vector<int> split;
  std::vector<double> power;
  int share = 0;                  // index into bandwidth_shares
  std::vector<double> accuracy;   // per user
  std::vector<double> energy;     // per user
  double mean_accuracy = 0.0;
};

/// All joint decisions of frame m with feasible splits.
[[nodiscard]] std::vector<TinyOption> enumerate_frame(const TinyInstance& inst, int m);

struct OfflineResult {
  bool feasible = false;
  double total_accuracy = 0.0;
  std::vector<TinyOption> sequence;
  long long evaluated = 0;
};

/// Exhaustive maximum of sum_m mean accuracy subject to
/// (1/M) sum_m E_nm <= budget for every user.
[[nodiscard]] OfflineResult offline_optimum(const TinyInstance& inst, int threads = 1);

/// Per-frame exhaustive drift-plus-penalty on the instance grid: maximize
/// V * mean accuracy - sum_n Q_n (E_n - budget), then update the queues.
[[nodiscard]] BoundTrace grid_enachi(const TinyInstance& inst,
                                     std::vector<TinyOption>* chosen = nullptr);

struct TinyReport {
  std::uint64_t seed = 0;
  long long decision_space = 0;
  OfflineResult offline;
  GapBoundReport gap;
  DriftReport drift;
  bool pass = false;
};

[[nodiscard]] TinyReport verify_tiny_instance(std::uint64_t seed, int threads = 1);

// ---- report --------------------------------------------------------------

struct VerifyOptions {
  std::uint64_t seed = 1;
  int tiny_instances = 10;
  int draws = 200;
  int threads = 1;
  LambertFn lambert = nullptr;  // fault injection for the KKT check
};

struct VerifyReport {
  std::vector<OracleReport> oracles;
  ConcavityReport concavity;
  CurvatureReport curvature;
  std::vector<TinyReport> tiny;
  bool pass = false;
};

[[nodiscard]] VerifyReport run_verifier(const VerifyOptions& options);

/// check,item,value,bound,slack,pass records.
void write_report(std::ostream& os, const VerifyReport& report);

}  // namespace enachi
