#ifndef CRASHSEARCH_CONFIG_HPP
#define CRASHSEARCH_CONFIG_HPP

#include <string>

#include <json.hpp>

#include "crashsearch/metrics.hpp"
#include "crashsearch/reward.hpp"
#include "crashsearch/scenario_search.hpp"

namespace crashsearch {

enum class RunMode { search_hybrid, search_ucb_only, baseline_default };

inline const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::search_hybrid: return "search_hybrid";
    case RunMode::search_ucb_only: return "search_ucb_only";
    case RunMode::baseline_default: return "baseline_default";
  }
  return "?";
}

inline RunMode run_mode_from_string(const std::string& s) {
  if (s == "search_hybrid") return RunMode::search_hybrid;
  if (s == "search_ucb_only") return RunMode::search_ucb_only;
  if (s == "baseline_default") return RunMode::baseline_default;
  throw ConfigError("unknown mode '" + s + "'");
}

struct ExperimentConfig {
  std::string network_path;
  std::string network_format = "native"; // "native" | "osm" | "fixture"
  FlowConfig flow;
  ActionGridConfig action_grid;
  IdmParams idm;
  RewardConfig reward;
  SearchConfig search;
  EpisodeConfig episode;
  MetricConfig metrics;
  EmissionCoefficients emission;
  PolicyConfig policy;
  VehicleSpec bicycle_spec = default_spec(VehicleClass::bicycle);
  VehicleSpec car_spec = default_spec(VehicleClass::car);
  VehicleSpec truck_spec = default_spec(VehicleClass::truck);
  double dt = 0.1;
  int episode_count = 20;
  uint64_t base_seed = 1;
  RunMode mode = RunMode::search_hybrid;
  std::string output_dir = "out";
  int threads = 1;

  SimSetup sim_setup() const {
    SimSetup s;
    s.dt = dt;
    s.idm = idm;
    s.policy = policy;
    s.bicycle_spec = bicycle_spec;
    s.car_spec = car_spec;
    s.truck_spec = truck_spec;
    return s;
  }

  void validate() const {
    if (network_path.empty()) throw ConfigError("network.path is required");
    if (network_format != "native" && network_format != "osm" &&
        network_format != "fixture") {
      throw ConfigError("network.format must be native, osm or fixture");
    }
    if (dt <= 0) throw ConfigError("dt must be > 0");
    if (episode_count < 1) throw ConfigError("episode_count must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (episode.horizon_steps < 1 || episode.decision_interval < 1) {
      throw ConfigError("episode horizon and decision_interval must be >= 1");
    }
    flow.validate();
    idm.validate();
    reward.validate();
    search.validate();
    bicycle_spec.validate();
    car_spec.validate();
    truck_spec.validate();
    build_action_grid(action_grid); // validates
  }
};

namespace config_detail {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  return it->get<T>();
}

inline void parse_spec(const nlohmann::json& j, VehicleSpec& spec) {
  spec.length = get_or(j, "length", spec.length);
  spec.width = get_or(j, "width", spec.width);
  spec.wheelbase = get_or(j, "wheelbase", spec.wheelbase);
  spec.max_accel = get_or(j, "max_accel", spec.max_accel);
  spec.max_decel = get_or(j, "max_decel", spec.max_decel);
  spec.max_steer = get_or(j, "max_steer", spec.max_steer);
}

} // namespace config_detail

/// Parses the experiment config document. Unknown keys are ignored; missing
/// keys fall back to engine defaults. network.path is mandatory.
inline ExperimentConfig load_experiment_config(const std::string& json_text) {
  using config_detail::get_or;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  if (auto it = j.find("network"); it != j.end()) {
    cfg.network_path = get_or<std::string>(*it, "path", "");
    cfg.network_format = get_or<std::string>(*it, "format", "native");
  }
  if (auto it = j.find("flow"); it != j.end()) {
    const auto& f = *it;
    if (f.contains("vehicle_count")) {
      cfg.flow.vehicle_count_min = f["vehicle_count"][0].get<int>();
      cfg.flow.vehicle_count_max = f["vehicle_count"][1].get<int>();
    }
    if (f.contains("class_mix")) {
      cfg.flow.bicycle_weight = get_or(f["class_mix"], "bicycle", cfg.flow.bicycle_weight);
      cfg.flow.car_weight = get_or(f["class_mix"], "car", cfg.flow.car_weight);
      cfg.flow.truck_weight = get_or(f["class_mix"], "truck", cfg.flow.truck_weight);
    }
    cfg.flow.depart_rate = get_or(f, "depart_rate", cfg.flow.depart_rate);
    cfg.flow.route_policy = get_or<std::string>(f, "route_policy", cfg.flow.route_policy);
    if (f.contains("warmup_steps")) {
      cfg.flow.warmup_steps_min = f["warmup_steps"][0].get<int>();
      cfg.flow.warmup_steps_max = f["warmup_steps"][1].get<int>();
    }
  }
  if (auto it = j.find("action_grid"); it != j.end()) {
    cfg.action_grid.steer_values =
        get_or(*it, "steer_values", cfg.action_grid.steer_values);
    cfg.action_grid.accel_values =
        get_or(*it, "accel_values", cfg.action_grid.accel_values);
  }
  if (auto it = j.find("idm"); it != j.end()) {
    cfg.idm.desired_speed = get_or(*it, "desired_speed", cfg.idm.desired_speed);
    cfg.idm.time_headway = get_or(*it, "time_headway", cfg.idm.time_headway);
    cfg.idm.min_gap = get_or(*it, "min_gap", cfg.idm.min_gap);
    cfg.idm.max_accel = get_or(*it, "max_accel", cfg.idm.max_accel);
    cfg.idm.comfort_decel = get_or(*it, "comfort_decel", cfg.idm.comfort_decel);
    cfg.idm.exponent = get_or(*it, "exponent", cfg.idm.exponent);
  }
  if (auto it = j.find("reward"); it != j.end()) {
    auto& r = cfg.reward;
    r.base_collision_reward = get_or(*it, "base_collision_reward", r.base_collision_reward);
    r.diversity_decay = get_or(*it, "diversity_decay", r.diversity_decay);
    r.w_lon = get_or(*it, "w_lon", r.w_lon);
    r.w_lat = get_or(*it, "w_lat", r.w_lat);
    r.w_turn = get_or(*it, "w_turn", r.w_turn);
    r.w_brake = get_or(*it, "w_brake", r.w_brake);
    r.w_speed = get_or(*it, "w_speed", r.w_speed);
    r.w_offset = get_or(*it, "w_offset", r.w_offset);
    r.w_ttc = get_or(*it, "w_ttc", r.w_ttc);
    r.w_drac = get_or(*it, "w_drac", r.w_drac);
    r.r_min = get_or(*it, "r_min", r.r_min);
    r.r_max = get_or(*it, "r_max", r.r_max);
    r.gamma = get_or(*it, "gamma", r.gamma);
    r.signature_cell_size = get_or(*it, "signature_cell_size", r.signature_cell_size);
  }
  if (auto it = j.find("search"); it != j.end()) {
    auto& s = cfg.search;
    s.exploration_constant = get_or(*it, "exploration_constant", s.exploration_constant);
    s.max_iterations = get_or(*it, "max_iterations", s.max_iterations);
    s.depth_ratio_threshold = get_or(*it, "depth_ratio_threshold", s.depth_ratio_threshold);
    s.min_visit_threshold = get_or(*it, "min_visit_threshold", s.min_visit_threshold);
    const std::string snap = get_or<std::string>(*it, "snapshot_mode", "per_node");
    if (snap == "per_node") {
      s.snapshot_mode = SearchConfig::SnapshotMode::per_node;
    } else if (snap == "replay_from_root") {
      s.snapshot_mode = SearchConfig::SnapshotMode::replay_from_root;
    } else {
      throw ConfigError("unknown snapshot_mode '" + snap + "'");
    }
  }
  if (auto it = j.find("episode"); it != j.end()) {
    cfg.episode.horizon_steps = get_or(*it, "horizon_steps", cfg.episode.horizon_steps);
    cfg.episode.decision_interval =
        get_or(*it, "decision_interval", cfg.episode.decision_interval);
    const std::string rp = get_or<std::string>(*it, "rollout_policy", "uniform_random");
    if (rp == "uniform_random") {
      cfg.episode.rollout_policy = RolloutPolicy::uniform_random;
    } else if (rp == "default_coast") {
      cfg.episode.rollout_policy = RolloutPolicy::default_coast;
    } else {
      throw ConfigError("unknown rollout_policy '" + rp + "'");
    }
  }
  if (auto it = j.find("metrics"); it != j.end()) {
    auto& m = cfg.metrics;
    m.alpha_th = get_or(*it, "alpha_th", m.alpha_th);
    m.a_lat_th = get_or(*it, "a_lat_th", m.a_lat_th);
    m.kappa_th = get_or(*it, "kappa_th", m.kappa_th);
    m.b_em = get_or(*it, "b_em", m.b_em);
    m.w_b = get_or(*it, "w_b", m.w_b);
    m.speed_change_th = get_or(*it, "speed_change_th", m.speed_change_th);
    m.ttc_th = get_or(*it, "ttc_th", m.ttc_th);
    m.drac_th = get_or(*it, "drac_th", m.drac_th);
    if (it->contains("emission")) {
      const auto& e = (*it)["emission"];
      cfg.emission.c0 = get_or(e, "c0", cfg.emission.c0);
      cfg.emission.c1 = get_or(e, "c1", cfg.emission.c1);
      cfg.emission.c2 = get_or(e, "c2", cfg.emission.c2);
      cfg.emission.c3 = get_or(e, "c3", cfg.emission.c3);
      cfg.emission.c4 = get_or(e, "c4", cfg.emission.c4);
      cfg.emission.c5 = get_or(e, "c5", cfg.emission.c5);
    }
  }
  if (auto it = j.find("policy"); it != j.end()) {
    auto& p = cfg.policy;
    p.lookahead = get_or(*it, "lookahead", p.lookahead);
    p.gap_acceptance_time = get_or(*it, "gap_acceptance_time", p.gap_acceptance_time);
    p.lane_keep_gain_d = get_or(*it, "lane_keep_gain_d", p.lane_keep_gain_d);
    p.lane_keep_gain_h = get_or(*it, "lane_keep_gain_h", p.lane_keep_gain_h);
    p.yield_margin = get_or(*it, "yield_margin", p.yield_margin);
    p.pass_margin = get_or(*it, "pass_margin", p.pass_margin);
  }
  if (auto it = j.find("vehicle_specs"); it != j.end()) {
    if (it->contains("bicycle")) config_detail::parse_spec((*it)["bicycle"], cfg.bicycle_spec);
    if (it->contains("car")) config_detail::parse_spec((*it)["car"], cfg.car_spec);
    if (it->contains("truck")) config_detail::parse_spec((*it)["truck"], cfg.truck_spec);
  }
  cfg.dt = get_or(j, "dt", cfg.dt);
  cfg.episode_count = get_or(j, "episode_count", cfg.episode_count);
  cfg.base_seed = get_or(j, "base_seed", cfg.base_seed);
  cfg.mode = run_mode_from_string(get_or<std::string>(j, "mode", "search_hybrid"));
  cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir);
  cfg.threads = get_or(j, "threads", cfg.threads);

  cfg.validate();
  return cfg;
}

} // namespace crashsearch

#endif // CRASHSEARCH_CONFIG_HPP
