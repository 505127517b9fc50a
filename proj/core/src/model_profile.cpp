#include "enachi/model_profile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace enachi {

SurrogateCoefficients::SurrogateCoefficients(double a0, double a1, double a2)
    : a0_(a0), a1_(a1), a2_(a2) {
  if (!(std::isfinite(a0) && std::isfinite(a1) && std::isfinite(a2))) {
    throw std::invalid_argument("surrogate coefficients must be finite");
  }
  if (!(a0 > 0.0)) throw std::invalid_argument("surrogate: a0 must be > 0");
  if (!(a1 >= 0.0 && a1 < a0)) {
    throw std::invalid_argument("surrogate: need 0 <= a1 < a0 (pole a1/a0 inside [0, 1))");
  }
  if (!(a2 > 0.0)) throw std::invalid_argument("surrogate: a2 must be > 0");
  if (!(zero_crossing() < 1.0)) {
    throw std::invalid_argument("surrogate: accuracy is zero on all of [0, 1]");
  }
}

double surrogate_accuracy(const SurrogateCoefficients& coeffs, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("surrogate_accuracy: beta outside [0, 1]");
  }
  if (beta <= coeffs.zero_crossing()) return 0.0;
  return std::clamp(coeffs.raw(beta), 0.0, 1.0);
}

std::vector<int> importance_order(std::span<const double> scores) {
  std::vector<int> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  return idx;
}

std::vector<double> geometric_importance(int count, double decay) {
  if (count < 1) throw std::invalid_argument("geometric_importance: count must be >= 1");
  if (!(decay > 0.0 && decay <= 1.0)) {
    throw std::invalid_argument("geometric_importance: decay must be in (0, 1]");
  }
  std::vector<double> scores(count);
  for (int i = 0; i < count; ++i) {
    scores[i] = std::pow(decay, static_cast<double>(i) / count);
  }
  return scores;
}

DnnProfile::DnnProfile(std::vector<LayerSpec> layers, std::vector<int> split_points,
                       int quant_bits, std::map<int, SurrogateCoefficients> surrogate,
                       std::map<int, std::vector<double>> importance,
                       double full_model_accuracy, std::string name)
    : name_(std::move(name)),
      layers_(std::move(layers)),
      split_points_(std::move(split_points)),
      quant_bits_(quant_bits),
      surrogate_(std::move(surrogate)),
      importance_(std::move(importance)),
      full_model_accuracy_(full_model_accuracy) {
  if (layers_.size() < 2) {
    throw std::invalid_argument("profile: need the input layer and at least one compute layer");
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.index != static_cast<int>(i)) {
      throw std::invalid_argument("profile: layer indices must be 0..k_m in order");
    }
    if (!(l.macs >= 0.0) || !std::isfinite(l.macs)) {
      throw std::invalid_argument("profile: layer macs must be >= 0");
    }
    if (l.out_maps < 1 || l.map_h < 1 || l.map_w < 1) {
      throw std::invalid_argument("profile: out_maps, map_h and map_w must be >= 1");
    }
    total_macs_ += l.macs;
  }
  if (quant_bits_ < 1) throw std::invalid_argument("profile: quant_bits must be >= 1");
  if (!(full_model_accuracy_ >= 0.0 && full_model_accuracy_ <= 1.0)) {
    throw std::invalid_argument("profile: full_model_accuracy outside [0, 1]");
  }

  std::sort(split_points_.begin(), split_points_.end());
  split_points_.erase(std::unique(split_points_.begin(), split_points_.end()),
                      split_points_.end());
  if (split_points_.empty() || split_points_.front() != 0 ||
      split_points_.back() != last_layer()) {
    throw std::invalid_argument("profile: split points must include 0 and k_m");
  }

  for (int s : split_points_) {
    if (is_fully_local(s)) continue;
    if (!surrogate_.contains(s)) {
      throw std::invalid_argument("profile: missing surrogate for split " + std::to_string(s));
    }
    auto it = importance_.find(s);
    if (it == importance_.end()) {
      throw std::invalid_argument("profile: missing importance for split " + std::to_string(s));
    }
    if (static_cast<int>(it->second.size()) != layers_[s].out_maps) {
      throw std::invalid_argument("profile: importance length must equal out_maps at split " +
                                  std::to_string(s));
    }
    for (double g : it->second) {
      if (!(g >= 0.0) || !std::isfinite(g)) {
        throw std::invalid_argument("profile: importance scores must be >= 0");
      }
    }
    order_[s] = importance_order(it->second);
  }
}

bool DnnProfile::has_split(int s) const {
  return std::binary_search(split_points_.begin(), split_points_.end(), s);
}

void DnnProfile::require_split(int s) const {
  if (!has_split(s)) throw std::invalid_argument("unknown split point " + std::to_string(s));
}

const LayerSpec& DnnProfile::split_layer(int s) const {
  require_split(s);
  return layers_[s];
}

const SurrogateCoefficients& DnnProfile::surrogate(int s) const {
  require_split(s);
  auto it = surrogate_.find(s);
  if (it == surrogate_.end()) {
    throw std::invalid_argument("no surrogate for split " + std::to_string(s));
  }
  return it->second;
}

const std::vector<double>& DnnProfile::importance(int s) const {
  require_split(s);
  auto it = importance_.find(s);
  if (it == importance_.end()) {
    throw std::invalid_argument("no importance scores for split " + std::to_string(s));
  }
  return it->second;
}

const std::vector<int>& DnnProfile::order(int s) const {
  require_split(s);
  auto it = order_.find(s);
  if (it == order_.end()) {
    throw std::invalid_argument("no importance order for split " + std::to_string(s));
  }
  return it->second;
}

double DnnProfile::map_bits(int s) const {
  return static_cast<double>(quant_bits_) * split_layer(s).elements_per_map();
}

double DnnProfile::total_feature_bits(int s) const {
  return map_bits(s) * split_layer(s).out_maps;
}

double DnnProfile::accuracy(int s, double beta) const {
  if (is_fully_local(s)) {
    require_split(s);
    return full_model_accuracy_;
  }
  return surrogate_accuracy(surrogate(s), std::clamp(beta, 0.0, 1.0));
}

double local_workload(const DnnProfile& profile, int s) {
  if (!profile.has_split(s)) {
    throw std::invalid_argument("local_workload: unknown split point " + std::to_string(s));
  }
  double sum = 0.0;
  for (int i = 1; i <= s; ++i) sum += profile.layers()[i].macs;
  return sum;
}

double edge_workload(const DnnProfile& profile, int s) {
  if (!profile.has_split(s)) {
    throw std::invalid_argument("edge_workload: unknown split point " + std::to_string(s));
  }
  double sum = 0.0;
  for (int i = s + 1; i <= profile.last_layer(); ++i) sum += profile.layers()[i].macs;
  return sum;
}

std::vector<int> importance_order(const DnnProfile& profile, int s) { return profile.order(s); }

DnnProfile default_profile() {
  // 5.5e8 MACs in total, i.e. 275 ms on a 2 GHz device. Feature tensors are
  // tiled into 7x7 maps so a 1 ms slot carries a few of them even on a
  // sub-MHz channel; split 0 ships the raw input (3x224x224 at 8 bit).
  std::vector<LayerSpec> layers = {
      {0, 0.0, 3072, 7, 7},
      {1, 6.0e7, 4096, 7, 7},
      {2, 6.0e7, 8192, 7, 7},
      {3, 1.0e8, 4096, 7, 7},
      {4, 1.6e8, 2048, 7, 7},
      {5, 1.7e8, 1, 1, 1000},
  };
  // Steep curves: importance-ordered maps saturate accuracy early. Every
  // split reaches 0.80 with all maps, a little under the full model.
  std::map<int, SurrogateCoefficients> surrogate;
  const double a0[] = {40.0, 50.0, 60.0, 80.0, 100.0};
  for (int s = 0; s <= 4; ++s) {
    surrogate.emplace(s, SurrogateCoefficients(a0[s], 1.0, 0.8 + 1.0 / (a0[s] - 1.0)));
  }
  std::map<int, std::vector<double>> importance;
  for (int s = 0; s <= 4; ++s) {
    importance[s] = geometric_importance(layers[s].out_maps, 0.1);
  }
  return DnnProfile(std::move(layers), {0, 1, 2, 3, 4, 5}, 8, std::move(surrogate),
                    std::move(importance), 0.8038, "resnet50-synthetic");
}

}  // namespace enachi
