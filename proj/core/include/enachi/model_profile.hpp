#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace enachi {

/// One layer of the split model. Index 0 is the raw-input pseudo layer: it has
/// no workload and its "feature maps" are the input tensor cut into equal
/// patches, so full offload goes through the same packet accounting as any
/// other split.
struct LayerSpec {
  int index = 0;
  double macs = 0.0;
  int out_maps = 1;
  int map_h = 1;
  int map_w = 1;

  [[nodiscard]] double elements_per_map() const {
    return static_cast<double>(map_h) * static_cast<double>(map_w);
  }
};

/// Coefficients of the hyperbolic accuracy surrogate
///   A(beta) = a2 - 1 / (a0 * beta - a1)
/// used on the branch right of the pole beta = a1 / a0, where the curve is
/// increasing and concave. Below the zero crossing the accuracy is 0; above 1
/// it saturates at 1.
class SurrogateCoefficients {
 public:
  SurrogateCoefficients() = default;
  /// Throws std::invalid_argument unless a0 > 0, 0 <= a1 < a0 and a2 > 0 and
  /// the zero crossing lies inside [0, 1).
  SurrogateCoefficients(double a0, double a1, double a2);

  [[nodiscard]] double a0() const { return a0_; }
  [[nodiscard]] double a1() const { return a1_; }
  [[nodiscard]] double a2() const { return a2_; }

  /// Pole of the hyperbola, a1 / a0.
  [[nodiscard]] double pole() const { return a1_ / a0_; }
  /// Smallest beta with strictly positive accuracy, (a1 + 1/a2) / a0.
  [[nodiscard]] double zero_crossing() const { return (a1_ + 1.0 / a2_) / a0_; }

  /// Unclipped hyperbola value; only meaningful for beta > pole().
  [[nodiscard]] double raw(double beta) const { return a2_ - 1.0 / (a0_ * beta - a1_); }

 private:
  double a0_ = 1.0;
  double a1_ = 0.0;
  double a2_ = 2.0;
};

/// Surrogate accuracy on [0, 1]; 0 at or below the zero crossing, clipped to 1.
/// Throws std::invalid_argument when beta is outside [0, 1].
[[nodiscard]] double surrogate_accuracy(const SurrogateCoefficients& coeffs, double beta);

struct SurrogateFit {
  SurrogateCoefficients coeffs;
  double rmse = 0.0;
  bool degenerate = false;
};

/// Least-squares fit of the clipped surrogate to (beta, accuracy) samples:
/// coarse grid over (a0, pole, a2) followed by Nelder-Mead refinement.
/// Requires at least 3 samples with distinct betas in [0, 1].
/// When all accuracies are equal the result is flagged degenerate.
[[nodiscard]] SurrogateFit fit_surrogate(std::span<const std::pair<double, double>> samples);

/// Immutable description of the split DNN. All lookups by split point throw
/// std::invalid_argument for unknown split points.
class DnnProfile {
 public:
  DnnProfile(std::vector<LayerSpec> layers, std::vector<int> split_points, int quant_bits,
             std::map<int, SurrogateCoefficients> surrogate,
             std::map<int, std::vector<double>> importance, double full_model_accuracy,
             std::string name = "custom");

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] const std::vector<LayerSpec>& layers() const { return layers_; }
  [[nodiscard]] const std::vector<int>& split_points() const { return split_points_; }
  [[nodiscard]] int quant_bits() const { return quant_bits_; }
  /// k_m: index of the last layer; splitting here means fully local execution.
  [[nodiscard]] int last_layer() const { return static_cast<int>(layers_.size()) - 1; }
  [[nodiscard]] double full_model_accuracy() const { return full_model_accuracy_; }
  [[nodiscard]] double total_macs() const { return total_macs_; }

  [[nodiscard]] bool has_split(int s) const;
  [[nodiscard]] bool is_fully_local(int s) const { return s == last_layer(); }

  [[nodiscard]] const LayerSpec& split_layer(int s) const;
  [[nodiscard]] const SurrogateCoefficients& surrogate(int s) const;
  [[nodiscard]] const std::vector<double>& importance(int s) const;
  /// Importance indices sorted by descending score, ties by ascending index.
  [[nodiscard]] const std::vector<int>& order(int s) const;

  /// Bits of one feature map at split s: D * L^h * L^w.
  [[nodiscard]] double map_bits(int s) const;
  /// Bits of the whole split-s feature tensor: b_total * D * L^h * L^w.
  [[nodiscard]] double total_feature_bits(int s) const;

  /// Accuracy when the edge receives a fraction beta of split-s maps.
  /// The fully-local split returns the full-model accuracy regardless of beta.
  [[nodiscard]] double accuracy(int s, double beta) const;

 private:
  void require_split(int s) const;

  std::string name_;
  std::vector<LayerSpec> layers_;
  std::vector<int> split_points_;
  int quant_bits_;
  std::map<int, SurrogateCoefficients> surrogate_;
  std::map<int, std::vector<double>> importance_;
  std::map<int, std::vector<int>> order_;
  double full_model_accuracy_;
  double total_macs_ = 0.0;
};

/// Sum of macs over layers 1..s.
[[nodiscard]] double local_workload(const DnnProfile& profile, int s);
/// Sum of macs over layers s+1..k_m.
[[nodiscard]] double edge_workload(const DnnProfile& profile, int s);
/// Map indices by descending importance, ties by ascending index.
[[nodiscard]] std::vector<int> importance_order(const DnnProfile& profile, int s);
[[nodiscard]] std::vector<int> importance_order(std::span<const double> scores);

/// Geometric importance scores: score_i = decay^(i / count), i = 0..count-1.
[[nodiscard]] std::vector<double> geometric_importance(int count, double decay);

/// Synthetic ResNet-like profile with four intermediate split points (L1..L4)
/// between full offload (s = 0) and fully local execution.
[[nodiscard]] DnnProfile default_profile();

}  // namespace enachi
