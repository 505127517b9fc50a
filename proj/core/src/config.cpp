#include "enachi/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace enachi {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw std::invalid_argument("config key '" + key + "': " + what);
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [k, v] : obj.items()) {
    if (!known.contains(k)) fail(where + k, "unknown key");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    fail(key, e.what());
  }
}

int split_key(const std::string& k) {
  std::size_t used = 0;
  int s = 0;
  try {
    s = std::stoi(k, &used);
  } catch (const std::exception&) {
    fail("profile." + k, "split keys must be integers");
  }
  if (used != k.size()) fail("profile." + k, "split keys must be integers");
  return s;
}

DnnProfile profile_from(const json& j) {
  if (!j.is_object()) fail("profile", "must be an object");
  reject_unknown(j,
                 {"name", "quant_bits", "full_model_accuracy", "layers", "split_points",
                  "surrogate", "importance", "importance_decay"},
                 "profile.");
  std::string name = "custom";
  int bits = 8;
  double full = 0.0;
  read(j, "name", name);
  read(j, "quant_bits", bits);
  if (!j.contains("full_model_accuracy")) fail("profile.full_model_accuracy", "required");
  read(j, "full_model_accuracy", full);

  if (!j.contains("layers") || !j["layers"].is_array()) fail("profile.layers", "array required");
  std::vector<LayerSpec> layers;
  for (const auto& l : j["layers"]) {
    reject_unknown(l, {"macs", "out_maps", "map_h", "map_w"}, "profile.layers.");
    LayerSpec spec;
    spec.index = static_cast<int>(layers.size());
    read(l, "macs", spec.macs);
    read(l, "out_maps", spec.out_maps);
    read(l, "map_h", spec.map_h);
    read(l, "map_w", spec.map_w);
    layers.push_back(spec);
  }
  const int last = static_cast<int>(layers.size()) - 1;

  std::vector<int> splits;
  if (j.contains("split_points")) {
    read(j, "split_points", splits);
  } else {
    for (int s = 0; s <= last; ++s) splits.push_back(s);
  }

  std::map<int, SurrogateCoefficients> surrogate;
  if (j.contains("surrogate")) {
    for (const auto& [k, v] : j["surrogate"].items()) {
      const int s = split_key(k);
      if (v.is_array() && v.size() == 3 && v[0].is_number()) {
        surrogate[s] = SurrogateCoefficients(v[0].get<double>(), v[1].get<double>(),
                                             v[2].get<double>());
      } else if (v.is_object() && v.contains("samples")) {
        std::vector<std::pair<double, double>> samples;
        for (const auto& p : v["samples"]) {
          if (!p.is_array() || p.size() != 2) fail("profile.surrogate." + k, "samples are [beta, acc]");
          samples.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
        const SurrogateFit fit = fit_surrogate(samples);
        if (fit.degenerate) fail("profile.surrogate." + k, "samples give a degenerate fit");
        surrogate[s] = fit.coeffs;
      } else {
        fail("profile.surrogate." + k, "expected [a0, a1, a2] or {\"samples\": [...]}");
      }
    }
  }

  std::map<int, std::vector<double>> importance;
  if (j.contains("importance")) {
    for (const auto& [k, v] : j["importance"].items()) {
      importance[split_key(k)] = v.get<std::vector<double>>();
    }
  }
  double decay = 0.1;
  read(j, "importance_decay", decay);
  for (int s : splits) {
    if (s == last || importance.contains(s) || s < 0 || s > last) continue;
    importance[s] = geometric_importance(layers[static_cast<std::size_t>(s)].out_maps, decay);
  }
  return DnnProfile(std::move(layers), std::move(splits), bits, std::move(surrogate),
                    std::move(importance), full, name);
}

SimConfig config_from(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  reject_unknown(j,
                 {"users", "frames", "frame_deadline", "slot", "total_bandwidth", "V", "v",
                  "energy_budget", "p_max", "p_min", "h_threshold", "h_threshold_fraction",
                  "cpu_hz", "chip_alpha", "edge_hz", "noise_power", "path_loss_gain",
                  "distance_m", "path_loss_exponent", "path_loss_ref_db", "path_loss_ref_m",
                  "rayleigh", "difficulty_sigma", "num_classes", "kappa", "bernoulli",
                  "unit_bandwidth", "eps_conv", "max_iterations", "greedy_passes", "policy",
                  "seed", "profile"},
                 "");
  SimConfig c;
  read(j, "users", c.users);
  read(j, "frames", c.frames);
  read(j, "frame_deadline", c.frame_deadline);
  read(j, "slot", c.slot);
  read(j, "total_bandwidth", c.total_bandwidth);
  read(j, "V", c.V);
  read(j, "v", c.v);
  read(j, "energy_budget", c.energy_budget);
  read(j, "p_max", c.p_max);
  read(j, "p_min", c.p_min);
  if (j.contains("h_threshold") && !j["h_threshold"].is_null()) {
    double h = 0.0;
    read(j, "h_threshold", h);
    c.h_threshold = h;
  }
  read(j, "h_threshold_fraction", c.h_threshold_fraction);
  read(j, "cpu_hz", c.cpu_hz);
  read(j, "chip_alpha", c.chip_alpha);
  read(j, "edge_hz", c.edge_hz);
  read(j, "noise_power", c.noise_power);
  if (j.contains("path_loss_gain")) {
    if (j["path_loss_gain"].is_number()) {
      c.path_loss_gain = {j["path_loss_gain"].get<double>()};
    } else {
      read(j, "path_loss_gain", c.path_loss_gain);
    }
  }
  read(j, "distance_m", c.distance_m);
  read(j, "path_loss_exponent", c.path_loss_exponent);
  read(j, "path_loss_ref_db", c.path_loss_ref_db);
  read(j, "path_loss_ref_m", c.path_loss_ref_m);
  read(j, "rayleigh", c.rayleigh);
  read(j, "difficulty_sigma", c.difficulty_sigma);
  read(j, "num_classes", c.num_classes);
  read(j, "kappa", c.kappa);
  read(j, "bernoulli", c.bernoulli);
  read(j, "unit_bandwidth", c.unit_bandwidth);
  read(j, "eps_conv", c.eps_conv);
  read(j, "max_iterations", c.max_iterations);
  read(j, "greedy_passes", c.greedy_passes);
  if (j.contains("policy")) {
    std::string p;
    read(j, "policy", p);
    c.policy = parse_policy(p);
  }
  read(j, "seed", c.seed);
  if (j.contains("profile")) c.profile = std::make_shared<const DnnProfile>(profile_from(j["profile"]));
  c.validate();
  return c;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
  }
}

}  // namespace

SimConfig parse_config(const std::string& json_text) { return config_from(parse_text(json_text)); }

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

DnnProfile parse_profile(const std::string& json_text) { return profile_from(parse_text(json_text)); }

std::string dump_config(const SimConfig& c) {
  json j;
  j["users"] = c.users;
  j["frames"] = c.frames;
  j["frame_deadline"] = c.frame_deadline;
  j["slot"] = c.slot;
  j["total_bandwidth"] = c.total_bandwidth;
  j["V"] = c.V;
  j["v"] = c.v;
  j["energy_budget"] = c.energy_budget;
  j["p_max"] = c.p_max;
  j["p_min"] = c.p_min;
  j["h_threshold"] = c.threshold();
  j["cpu_hz"] = c.cpu_hz;
  j["chip_alpha"] = c.chip_alpha;
  j["edge_hz"] = c.edge_hz;
  j["noise_power"] = c.noise_power;
  std::vector<double> gains;
  for (int n = 0; n < c.users; ++n) gains.push_back(c.gain_of(n));
  j["path_loss_gain"] = gains;
  j["rayleigh"] = c.rayleigh;
  j["difficulty_sigma"] = c.difficulty_sigma;
  j["num_classes"] = c.num_classes;
  j["kappa"] = c.kappa;
  j["bernoulli"] = c.bernoulli;
  j["unit_bandwidth"] = c.unit_bandwidth;
  j["eps_conv"] = c.eps_conv;
  j["max_iterations"] = c.max_iterations;
  j["greedy_passes"] = c.greedy_passes;
  j["policy"] = to_string(c.policy);
  j["seed"] = c.seed;
  return j.dump(2);
}

}  // namespace enachi
