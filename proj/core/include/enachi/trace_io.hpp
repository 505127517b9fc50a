#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "enachi/sim_engine.hpp"

namespace enachi {

/// Fixed text form for doubles (%.10g) so output files are byte-stable.
[[nodiscard]] std::string fmt_num(double x);

/// Column order of the per-(frame, user) trace.
[[nodiscard]] std::string trace_header();
void write_trace(std::ostream& os, const std::vector<FrameResult>& trace);

[[nodiscard]] std::string summary_header();
void write_summary_row(std::ostream& os, const std::string& policy, std::uint64_t seed,
                       const RunSummary& s);

/// Mean and standard error over seeds of one sweep cell.
struct SweepCell {
  std::string axis;
  double value = 0.0;
  std::string policy;
  int seeds = 0;
  double accuracy = 0.0, accuracy_se = 0.0;
  double accuracy_strict = 0.0, accuracy_strict_se = 0.0;
  double energy = 0.0, energy_se = 0.0;
  double success = 0.0, success_se = 0.0;
  double final_queue = 0.0, final_queue_se = 0.0;
};

[[nodiscard]] SweepCell aggregate(const std::string& axis, double value, const std::string& policy,
                                  const std::vector<RunSummary>& runs);

[[nodiscard]] std::string sweep_header();
void write_sweep_row(std::ostream& os, const SweepCell& c);

}  // namespace enachi
