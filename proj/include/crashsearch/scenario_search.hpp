#ifndef CRASHSEARCH_SCENARIO_SEARCH_HPP
#define CRASHSEARCH_SCENARIO_SEARCH_HPP

#include "crashsearch/mcts.hpp"
#include "crashsearch/reward.hpp"

namespace crashsearch {

enum class RolloutPolicy { uniform_random, default_coast };

struct EpisodeConfig {
  int horizon_steps = 80;    // T, simulator steps per episode
  int decision_interval = 5; // simulator steps per tree action
  RolloutPolicy rollout_policy = RolloutPolicy::uniform_random;

  int max_depth() const {
    return (horizon_steps + decision_interval - 1) / decision_interval;
  }
};

/// MCTS domain over the traffic simulator: one tree action holds a grid
/// control for `decision_interval` steps with every other agent driven by the
/// default policy; each executed step is scored by the evaluation function
/// and discounted per simulator step. All randomness (rollout action draws)
/// comes from the world's own generator, so snapshots replay exactly.
class TrafficDomain {
 public:
  using State = WorldState;

  TrafficDomain(const ActionGrid& grid, const SimSetup& setup, const EpisodeConfig& episode,
                const RewardConfig& reward_cfg, const MetricConfig& metric_cfg,
                DiversityLedger& ledger)
      : grid_(grid),
        setup_(setup),
        episode_(episode),
        reward_cfg_(reward_cfg),
        metric_cfg_(metric_cfg),
        ledger_(ledger) {
    coast_action_ = 0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < grid_.size(); ++i) {
      const ControlInput u = grid_.at(i);
      const double mag = std::abs(u.steer) + std::abs(u.accel);
      if (mag < best) {
        best = mag;
        coast_action_ = static_cast<int>(i);
      }
    }
  }

  int action_count() const { return static_cast<int>(grid_.size()); }

  bool is_terminal(const WorldState& w) const {
    return crashsearch::is_terminal(w, episode_.horizon_steps) != TerminalStatus::running;
  }

  ApplyResult apply(WorldState& w, int action, bool record) {
    ApplyResult out;
    const ControlInput control = grid_.at(static_cast<size_t>(action));
    double g = 1.0;
    for (int j = 0; j < episode_.decision_interval; ++j) {
      if (is_terminal(w)) break;
      const double r = step_scored(w, control, record);
      out.reward += g * r;
      g *= reward_cfg_.gamma;
    }
    out.gamma_pow = g;
    out.terminal = is_terminal(w);
    return out;
  }

  double rollout(WorldState& w) {
    double total = 0.0;
    double g = 1.0;
    while (!is_terminal(w)) {
      const int action = episode_.rollout_policy == RolloutPolicy::uniform_random
                             ? static_cast<int>(w.rng.uniform_int(grid_.size()))
                             : coast_action_;
      const double r = step_scored(w, grid_.at(static_cast<size_t>(action)), true);
      total += g * r;
      g *= reward_cfg_.gamma;
    }
    return total;
  }

  /// Target-involved collisions discovered across expansions and rollouts.
  const std::vector<CollisionEvent>& found_events() const { return found_events_; }

 private:
  double step_scored(WorldState& w, const ControlInput& control, bool record) {
    const size_t log_before = w.collision_log.size();
    const Agent* target = w.target();
    const VehicleState pre = target->state;
    step(w, control, setup_);
    if (!record) return 0.0;
    const Agent* post_agent = w.target();
    const VehicleState post = post_agent != nullptr ? post_agent->state : pre;
    const std::span<const CollisionEvent> new_events{
        w.collision_log.data() + log_before, w.collision_log.size() - log_before};
    const RewardBreakdown rb =
        evaluate(pre, post, control, new_events, w, ledger_, reward_cfg_, metric_cfg_);
    for (const CollisionEvent& ev : new_events) {
      if (ev.target_involved) found_events_.push_back(ev);
    }
    return rb.total;
  }

  ActionGrid grid_;
  SimSetup setup_;
  EpisodeConfig episode_;
  RewardConfig reward_cfg_;
  MetricConfig metric_cfg_;
  DiversityLedger& ledger_;
  int coast_action_ = 0;
  std::vector<CollisionEvent> found_events_;
};

/// Full search over the target's action space from `root_world`.
struct ScenarioSearchResult {
  SearchStatus status = SearchStatus::ok;
  std::vector<int> best_action_indices;
  std::vector<ControlInput> best_actions;
  int iterations = 0;
  std::vector<long> action_selection_counts;
  std::vector<CollisionEvent> events_found;
  std::unique_ptr<TreeNode<WorldState>> tree;
};

inline ScenarioSearchResult run_search(const WorldState& root_world, const ActionGrid& grid,
                                       const SearchConfig& search_cfg,
                                       const EpisodeConfig& episode_cfg,
                                       const SimSetup& setup, const RewardConfig& reward_cfg,
                                       const MetricConfig& metric_cfg,
                                       DiversityLedger& ledger) {
  TrafficDomain domain(grid, setup, episode_cfg, reward_cfg, metric_cfg, ledger);
  SearchConfig cfg = search_cfg;
  cfg.max_depth = episode_cfg.max_depth();
  auto raw = run_mcts(domain, root_world, cfg);

  ScenarioSearchResult out;
  out.status = raw.status;
  out.best_action_indices = raw.best_actions;
  for (int a : raw.best_actions) out.best_actions.push_back(grid.at(static_cast<size_t>(a)));
  out.iterations = raw.iterations;
  out.action_selection_counts = std::move(raw.action_selection_counts);
  out.events_found = domain.found_events();
  out.tree = std::move(raw.root);
  return out;
}

} // namespace crashsearch

#endif // CRASHSEARCH_SCENARIO_SEARCH_HPP
