#ifndef CRASHSEARCH_MCTS_HPP
#define CRASHSEARCH_MCTS_HPP

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace crashsearch {

/// Upper confidence bound (exploration): Q + C * sqrt(ln N_parent / N_child).
/// Unvisited children score +inf, forcing a first visit.
inline double ucb_score(int64_t parent_n, int64_t child_n, double child_q, double c) {
  if (child_n == 0) return std::numeric_limits<double>::infinity();
  return child_q + c * std::sqrt(std::log(static_cast<double>(parent_n)) /
                                 static_cast<double>(child_n));
}

/// Lower confidence bound (risk-averse): Q - C * sqrt(ln N_parent / N_child).
/// Unvisited children score -inf; a pessimistic rule never picks them.
inline double lcb_score(int64_t parent_n, int64_t child_n, double child_q, double c) {
  if (child_n == 0) return -std::numeric_limits<double>::infinity();
  return child_q - c * std::sqrt(std::log(static_cast<double>(parent_n)) /
                                 static_cast<double>(child_n));
}

struct SearchConfig {
  double exploration_constant = 1.414; // C
  int max_iterations = 2000;           // N_max
  int max_depth = 16;                  // decisions per episode
  double depth_ratio_threshold = 0.5;  // rho
  int min_visit_threshold = 10;        // n_min
  bool use_lcb_enabled = true;         // false forces pure UCB behavior
  enum class SnapshotMode { per_node, replay_from_root };
  SnapshotMode snapshot_mode = SnapshotMode::per_node;

  void validate() const {
    if (exploration_constant <= 0) throw std::invalid_argument("C must be > 0");
    if (max_iterations < 1 || max_depth < 1 || min_visit_threshold < 1) {
      throw std::invalid_argument("search thresholds must be positive");
    }
    if (depth_ratio_threshold <= 0 || depth_ratio_threshold > 1) {
      throw std::invalid_argument("depth ratio threshold must be in (0, 1]");
    }
  }
};

/// Search-tree node. Q lives on the child: value_sum/N estimate the return of
/// taking `incoming_action` from the parent's state.
template <typename State>
struct TreeNode {
  int incoming_action = -1;
  int visit_count = 0;
  double value_sum = 0.0;
  int rollout_count = 0;  // simulations launched from this node
  double edge_reward = 0.0; // discounted reward accumulated across the edge
  double gamma_pow = 1.0;   // discount spanning the edge
  int depth = 0;
  bool terminal = false;
  TreeNode* parent = nullptr;
  std::optional<State> state; // stored in per_node snapshot mode
  std::vector<std::unique_ptr<TreeNode>> children; // slot per action
  int expanded_children = 0;

  double q() const { return value_sum / static_cast<double>(visit_count); }
  bool fully_expanded(int action_count) const {
    return expanded_children == action_count;
  }
};

/// Switch condition for LCB selection: the node is deep enough in the tree
/// (depth ratio beyond rho), or it is fully expanded and the node and every
/// child have reached the minimum visit count.
template <typename State>
inline bool use_lcb(const TreeNode<State>& node, const SearchConfig& cfg,
                    int action_count) {
  if (!cfg.use_lcb_enabled) return false;
  if (static_cast<double>(node.depth) / static_cast<double>(cfg.max_depth) >
      cfg.depth_ratio_threshold) {
    return true;
  }
  if (!node.fully_expanded(action_count)) return false;
  if (node.visit_count < cfg.min_visit_threshold) return false;
  for (const auto& child : node.children) {
    if (!child || child->visit_count < cfg.min_visit_threshold) return false;
  }
  return true;
}

enum class SearchStatus { ok, root_terminal };

template <typename State>
struct SearchResult {
  SearchStatus status = SearchStatus::ok;
  std::vector<int> best_actions; // tau*
  int iterations = 0;
  std::vector<long> action_selection_counts; // per action index, all depths
  std::unique_ptr<TreeNode<State>> root;
};

/// Result of advancing a domain state by one tree action.
struct ApplyResult {
  double reward = 0.0;    // discounted local reward across the edge
  double gamma_pow = 1.0; // discount factor spanning the edge
  bool terminal = false;
};

/// Hybrid UCB-LCB Monte Carlo Tree Search over a deterministic-replay domain.
///
/// Domain requirements:
///   using State = ...;            value-copyable; owns all stochasticity
///   int action_count() const
///   bool is_terminal(const State&) const
///   ApplyResult apply(State&, int action, bool record)
///       advances the state; `record` is false when re-simulating an already
///       expanded edge (replay_from_root mode) so one-shot side effects such
///       as ledger updates fire exactly once per edge
///   double rollout(State&)        simulation phase; discounted return
///
/// Each iteration: selection (unvisited first, then argmax LCB when the
/// switch condition holds, else argmax UCB), expansion of one untried action,
/// rollout, and backpropagation of the discounted return along the path.
/// Ties break deterministically toward the lowest action index.
template <typename Domain>
SearchResult<typename Domain::State> run_mcts(Domain& domain,
                                              const typename Domain::State& root_state,
                                              const SearchConfig& cfg) {
  using State = typename Domain::State;
  using Node = TreeNode<State>;
  cfg.validate();
  const int actions = domain.action_count();
  if (actions < 1) throw std::invalid_argument("domain exposes no actions");

  SearchResult<State> result;
  result.action_selection_counts.assign(static_cast<size_t>(actions), 0);
  result.root = std::make_unique<Node>();
  Node* root = result.root.get();
  root->children.resize(static_cast<size_t>(actions));
  root->state = root_state;

  if (domain.is_terminal(root_state)) {
    result.status = SearchStatus::root_terminal;
    return result;
  }

  const bool per_node = cfg.snapshot_mode == SearchConfig::SnapshotMode::per_node;

  auto select_child = [&](Node* node) -> Node* {
    const bool lcb = use_lcb(*node, cfg, actions);
    double best = -std::numeric_limits<double>::infinity();
    Node* pick = nullptr;
    for (const auto& child : node->children) {
      if (!child) continue;
      const double score =
          lcb ? lcb_score(node->visit_count, child->visit_count, child->q(),
                          cfg.exploration_constant)
              : ucb_score(node->visit_count, child->visit_count, child->q(),
                          cfg.exploration_constant);
      if (score > best) { // strict: first (lowest-index) wins ties
        best = score;
        pick = child.get();
      }
    }
    return pick;
  };

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    Node* node = root;
    State replay_state;
    if (!per_node) replay_state = *root->state;

    // Selection: descend through fully expanded nodes.
    while (!node->terminal && node->depth < cfg.max_depth &&
           node->fully_expanded(actions)) {
      Node* child = select_child(node);
      ++result.action_selection_counts[static_cast<size_t>(child->incoming_action)];
      if (!per_node) domain.apply(replay_state, child->incoming_action, false);
      node = child;
    }

    // Expansion: instantiate the lowest-index untried action.
    Node* leaf = node;
    State working;
    bool have_working = false;
    if (!node->terminal && node->depth < cfg.max_depth) {
      int action = -1;
      for (int a = 0; a < actions; ++a) {
        if (!node->children[static_cast<size_t>(a)]) {
          action = a;
          break;
        }
      }
      working = per_node ? *node->state : replay_state;
      const ApplyResult applied = domain.apply(working, action, true);
      auto child = std::make_unique<Node>();
      child->incoming_action = action;
      child->edge_reward = applied.reward;
      child->gamma_pow = applied.gamma_pow;
      child->terminal = applied.terminal;
      child->depth = node->depth + 1;
      child->parent = node;
      child->children.resize(static_cast<size_t>(actions));
      if (per_node) child->state = working;
      leaf = child.get();
      node->children[static_cast<size_t>(action)] = std::move(child);
      ++node->expanded_children;
      ++result.action_selection_counts[static_cast<size_t>(action)];
      have_working = true;
    }

    // Simulation.
    double value = 0.0;
    if (!leaf->terminal) {
      if (!have_working) working = per_node ? *leaf->state : replay_state;
      value = domain.rollout(working);
    }
    ++leaf->rollout_count;

    // Backpropagation: fold edge rewards while walking up.
    Node* cur = leaf;
    double g = value;
    while (cur->parent != nullptr) {
      g = cur->edge_reward + cur->gamma_pow * g;
      cur->value_sum += g;
      ++cur->visit_count;
      cur = cur->parent;
    }
    ++root->visit_count;
  }
  result.iterations = cfg.max_iterations;

  // Final extraction: argmax LCB wherever the switch condition holds, the
  // most-visited child elsewhere; lowest index on ties.
  Node* node = root;
  while (node->expanded_children > 0 && !node->terminal) {
    Node* pick = nullptr;
    if (use_lcb(*node, cfg, actions)) {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& child : node->children) {
        if (!child) continue;
        const double score = lcb_score(node->visit_count, child->visit_count,
                                       child->q(), cfg.exploration_constant);
        if (score > best) {
          best = score;
          pick = child.get();
        }
      }
    } else {
      int best_n = -1;
      for (const auto& child : node->children) {
        if (!child) continue;
        if (child->visit_count > best_n) {
          best_n = child->visit_count;
          pick = child.get();
        }
      }
    }
    result.best_actions.push_back(pick->incoming_action);
    node = pick;
  }
  return result;
}

} // namespace crashsearch

#endif // CRASHSEARCH_MCTS_HPP
