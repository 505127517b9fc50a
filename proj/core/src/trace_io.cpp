#include "enachi/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace enachi {

std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string trace_header() {
  return "frame,user,split,bandwidth,ref_power,tr_deadline,batch_offset,outcome,success,"
         "t_local,t_tr,t_edge,e_local,e_tr,e_total,e_estimated,beta_pred,beta,accuracy_pred,"
         "accuracy,accuracy_strict,realized,queue_before,queue_after,difficulty,frame_gain,"
         "slots_used,window";
}

void write_trace(std::ostream& os, const std::vector<FrameResult>& trace) {
  os << trace_header() << '\n';
  for (const auto& fr : trace) {
    for (std::size_t n = 0; n < fr.users.size(); ++n) {
      const auto& u = fr.users[n];
      const auto& d = u.decision;
      os << fr.frame << ',' << n << ',' << d.split << ',' << fmt_num(d.bandwidth) << ','
         << fmt_num(d.ref_power) << ',' << fmt_num(d.tr_deadline) << ','
         << fmt_num(d.batch_start_offset) << ',' << to_string(u.outcome) << ','
         << (u.success ? 1 : 0) << ',' << fmt_num(u.t_local) << ',' << fmt_num(u.t_tr) << ','
         << fmt_num(u.t_edge) << ',' << fmt_num(u.e_local) << ',' << fmt_num(u.e_tr) << ','
         << fmt_num(u.e_total) << ',' << fmt_num(u.e_estimated) << ','
         << fmt_num(d.predicted_beta) << ',' << fmt_num(u.beta) << ','
         << fmt_num(d.predicted_accuracy) << ',' << fmt_num(u.accuracy) << ','
         << fmt_num(u.accuracy_strict) << ',' << fmt_num(u.realized) << ','
         << fmt_num(u.queue_before) << ',' << fmt_num(u.queue_after) << ','
         << fmt_num(u.difficulty) << ',' << fmt_num(u.frame_gain) << ',' << u.slots_used << ','
         << u.window << '\n';
    }
  }
}

std::string summary_header() {
  return "policy,seed,frames,users,mean_accuracy,mean_accuracy_strict,mean_realized,"
         "success_rate,mean_energy,max_final_queue,user_mean_energy";
}

void write_summary_row(std::ostream& os, const std::string& policy, std::uint64_t seed,
                       const RunSummary& s) {
  double qmax = 0.0;
  for (double q : s.final_queues) qmax = std::max(qmax, q);
  os << policy << ',' << seed << ',' << s.frames << ',' << s.users << ','
     << fmt_num(s.mean_accuracy) << ',' << fmt_num(s.mean_accuracy_strict) << ','
     << fmt_num(s.mean_realized) << ',' << fmt_num(s.success_rate) << ','
     << fmt_num(s.mean_energy) << ',' << fmt_num(qmax) << ',';
  for (std::size_t i = 0; i < s.user_mean_energy.size(); ++i) {
    if (i) os << ' ';
    os << fmt_num(s.user_mean_energy[i]);
  }
  os << '\n';
}

namespace {

void mean_se(const std::vector<double>& xs, double& mean, double& se) {
  mean = 0.0;
  se = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double n = static_cast<double>(xs.size());
  se = std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

SweepCell aggregate(const std::string& axis, double value, const std::string& policy,
                    const std::vector<RunSummary>& runs) {
  SweepCell c;
  c.axis = axis;
  c.value = value;
  c.policy = policy;
  c.seeds = static_cast<int>(runs.size());
  std::vector<double> acc, strict, energy, success, queue;
  for (const auto& r : runs) {
    acc.push_back(r.mean_accuracy);
    strict.push_back(r.mean_accuracy_strict);
    energy.push_back(r.mean_energy);
    success.push_back(r.success_rate);
    double q = 0.0;
    for (double x : r.final_queues) q += x;
    queue.push_back(r.final_queues.empty() ? 0.0 : q / static_cast<double>(r.final_queues.size()));
  }
  mean_se(acc, c.accuracy, c.accuracy_se);
  mean_se(strict, c.accuracy_strict, c.accuracy_strict_se);
  mean_se(energy, c.energy, c.energy_se);
  mean_se(success, c.success, c.success_se);
  mean_se(queue, c.final_queue, c.final_queue_se);
  return c;
}

std::string sweep_header() {
  return "axis,value,policy,seeds,accuracy,accuracy_se,accuracy_strict,accuracy_strict_se,"
         "energy,energy_se,success,success_se,final_queue,final_queue_se";
}

void write_sweep_row(std::ostream& os, const SweepCell& c) {
  os << c.axis << ',' << fmt_num(c.value) << ',' << c.policy << ',' << c.seeds << ','
     << fmt_num(c.accuracy) << ',' << fmt_num(c.accuracy_se) << ',' << fmt_num(c.accuracy_strict)
     << ',' << fmt_num(c.accuracy_strict_se) << ',' << fmt_num(c.energy) << ','
     << fmt_num(c.energy_se) << ',' << fmt_num(c.success) << ',' << fmt_num(c.success_se) << ','
     << fmt_num(c.final_queue) << ',' << fmt_num(c.final_queue_se) << '\n';
}

}  // namespace enachi
