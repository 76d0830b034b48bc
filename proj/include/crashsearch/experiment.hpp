#ifndef CRASHSEARCH_EXPERIMENT_HPP
#define CRASHSEARCH_EXPERIMENT_HPP

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

#include "crashsearch/config.hpp"
#include "crashsearch/fixtures.hpp"
#include "crashsearch/network_json.hpp"
#include "crashsearch/osm_import.hpp"

namespace crashsearch {

struct ReportedEvent {
  CollisionEvent event;
  CollisionSignature signature;
  bool novel = false;
  std::string phase; // "search" or "definitive"
};

struct EpisodeReport {
  uint64_t seed = 0;
  bool feasible = true;
  std::string infeasible_reason;
  TerminalStatus status = TerminalStatus::running;
  std::vector<int> tau_indices;
  std::vector<ControlInput> tau;
  int iterations = 0;
  TrajectoryQuality quality;
  std::vector<long> action_counts; // per grid index, search selections
  std::vector<ReportedEvent> events;
  nlohmann::json tau_stats = nlohmann::json::array();
  nlohmann::json tree = nlohmann::json();
  // In-memory only; deliberately absent from every serialized artifact so
  // output directories hash identically across runs.
  double wall_ms = 0.0;
  EpisodeTrace trace;
};

struct MetricStats {
  double mean = 0.0, median = 0.0, q1 = 0.0, q3 = 0.0;
};

struct ExperimentSummary {
  std::string mode;
  uint64_t base_seed = 0;
  int episode_count = 0;
  int feasible = 0;
  int infeasible = 0;
  std::vector<std::string> infeasible_reasons;
  double failure_rate = 0.0;
  long diversity_count = 0; // distinct signatures across the experiment
  long total_target_collisions = 0;
  std::map<std::string, MetricStats> metrics;
  std::vector<uint64_t> seeds; // feasible episodes, ascending
  std::vector<std::map<std::string, double>> per_episode; // parallel to seeds
};

// ---------------------------------------------------------------------------

inline std::shared_ptr<const RoadNetwork> load_network_source(
    const std::string& path, const std::string& format) {
  if (format == "fixture") {
    return std::make_shared<const RoadNetwork>(make_fixture(path));
  }
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open network file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (format == "osm") {
    return std::make_shared<const RoadNetwork>(parse_osm_subset(text));
  }
  return std::make_shared<const RoadNetwork>(load_network(text));
}

namespace experiment_detail {

inline nlohmann::json tree_stats_json(const TreeNode<WorldState>* node,
                                      const ActionGrid& grid, int parent_n, double c) {
  nlohmann::json j;
  j["depth"] = node->depth;
  if (node->incoming_action >= 0) {
    j["steer_idx"] = grid.steer_index(static_cast<size_t>(node->incoming_action));
    j["accel_idx"] = grid.accel_index(static_cast<size_t>(node->incoming_action));
  }
  j["N"] = node->visit_count;
  j["rollouts"] = node->rollout_count;
  j["terminal"] = node->terminal;
  if (node->visit_count > 0 && node->incoming_action >= 0) {
    j["Q"] = node->q();
    j["UCB"] = ucb_score(std::max(parent_n, 1), node->visit_count, node->q(), c);
    j["LCB"] = lcb_score(std::max(parent_n, 1), node->visit_count, node->q(), c);
  }
  nlohmann::json children = nlohmann::json::array();
  for (const auto& child : node->children) {
    if (child) {
      children.push_back(tree_stats_json(child.get(), grid, node->visit_count, c));
    }
  }
  if (!children.empty()) j["children"] = std::move(children);
  return j;
}

inline void record_step_outputs(const WorldState& world, const MetricConfig& mcfg,
                                EpisodeTrace& trace, std::vector<PairPenalties>& pairs) {
  trace.record(world);
  pairs.push_back(target_pair_penalties(world, mcfg));
}

inline std::vector<ReportedEvent> collect_target_events(
    std::span<const CollisionEvent> events, const std::string& phase, double cell_size) {
  std::vector<ReportedEvent> out;
  for (const CollisionEvent& ev : events) {
    if (!ev.target_involved) continue;
    out.push_back({ev, collision_signature(ev, cell_size), false, phase});
  }
  return out;
}

} // namespace experiment_detail

/// Runs one seeded episode: traffic spawn with warm-up, then either the
/// configured search plus a definitive re-execution of tau* from the root
/// snapshot, or the plain default-policy baseline. Deterministic in
/// (config, seed).
inline EpisodeReport run_episode(const ExperimentConfig& cfg, uint64_t seed,
                                 std::shared_ptr<const RoadNetwork> network) {
  using namespace experiment_detail;
  const auto t0 = std::chrono::steady_clock::now();
  EpisodeReport report;
  report.seed = seed;

  const SimSetup setup = cfg.sim_setup();
  const ActionGrid grid = build_action_grid(cfg.action_grid);
  report.action_counts.assign(grid.size(), 0);

  WorldState world;
  try {
    world = spawn_traffic(network, cfg.flow, seed, setup);
  } catch (const SpawnError& e) {
    report.feasible = false;
    report.infeasible_reason = e.what();
    return report;
  }

  std::vector<PairPenalties> pairs;
  report.trace.dt = cfg.dt;

  if (cfg.mode == RunMode::baseline_default) {
    report.trace.record(world);
    while (is_terminal(world, cfg.episode.horizon_steps) == TerminalStatus::running) {
      step(world, std::nullopt, setup);
      record_step_outputs(world, cfg.metrics, report.trace, pairs);
    }
    report.status = is_terminal(world, cfg.episode.horizon_steps);
    auto evs = collect_target_events(world.collision_log, "definitive",
                                     cfg.reward.signature_cell_size);
    report.events.insert(report.events.end(), evs.begin(), evs.end());
  } else {
    SearchConfig scfg = cfg.search;
    scfg.use_lcb_enabled = cfg.mode == RunMode::search_hybrid;
    scfg.max_depth = cfg.episode.max_depth();

    const Snapshot root = snapshot(world);
    DiversityLedger episode_ledger;
    ScenarioSearchResult sres =
        run_search(world, grid, scfg, cfg.episode, setup, cfg.reward, cfg.metrics,
                   episode_ledger);
    report.iterations = sres.iterations;
    report.tau_indices = sres.best_action_indices;
    report.tau = sres.best_actions;
    report.action_counts = sres.action_selection_counts;
    auto search_evs = collect_target_events(sres.events_found, "search",
                                            cfg.reward.signature_cell_size);
    report.events.insert(report.events.end(), search_evs.begin(), search_evs.end());

    // Definitive trajectory: tau* re-executed from the root snapshot.
    WorldState replay = restore(root);
    report.trace.record(replay);
    for (int action : report.tau_indices) {
      if (is_terminal(replay, cfg.episode.horizon_steps) != TerminalStatus::running) break;
      const ControlInput control = grid.at(static_cast<size_t>(action));
      for (int j = 0; j < cfg.episode.decision_interval; ++j) {
        if (is_terminal(replay, cfg.episode.horizon_steps) != TerminalStatus::running) break;
        step(replay, control, setup);
        record_step_outputs(replay, cfg.metrics, report.trace, pairs);
      }
    }
    report.status = is_terminal(replay, cfg.episode.horizon_steps);
    auto def_evs = collect_target_events(replay.collision_log, "definitive",
                                         cfg.reward.signature_cell_size);
    report.events.insert(report.events.end(), def_evs.begin(), def_evs.end());

    // Per-decision statistics along tau* plus the full tree.
    const TreeNode<WorldState>* node = sres.tree.get();
    for (int action : report.tau_indices) {
      nlohmann::json decision;
      decision["depth"] = node->depth;
      decision["chosen"] = action;
      nlohmann::json children = nlohmann::json::array();
      for (const auto& child : node->children) {
        if (!child) continue;
        nlohmann::json c;
        c["action"] = child->incoming_action;
        c["N"] = child->visit_count;
        c["Q"] = child->visit_count > 0 ? child->q() : 0.0;
        c["UCB"] = ucb_score(node->visit_count, child->visit_count,
                             child->visit_count > 0 ? child->q() : 0.0,
                             scfg.exploration_constant);
        c["LCB"] = lcb_score(node->visit_count, child->visit_count,
                             child->visit_count > 0 ? child->q() : 0.0,
                             scfg.exploration_constant);
        children.push_back(std::move(c));
      }
      decision["children"] = std::move(children);
      report.tau_stats.push_back(std::move(decision));
      node = node->children[static_cast<size_t>(action)].get();
    }
    report.tree = tree_stats_json(sres.tree.get(), grid, 1, scfg.exploration_constant);
  }

  report.quality = aggregate_quality(report.trace, pairs, cfg.metrics, cfg.emission);
  report.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return report;
}

// ---------------------------------------------------------------------------
// Aggregation

/// Linear-interpolation quantile of a sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  if (sorted.size() == 1) return sorted[0];
  const double idx = p * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(idx));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = idx - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

inline nlohmann::json signature_to_json(const CollisionSignature& sig) {
  return {{"class_lo", to_string(sig.class_lo)},
          {"class_hi", to_string(sig.class_hi)},
          {"cell_x", sig.cell_x},
          {"cell_y", sig.cell_y},
          {"heading_bucket", sig.heading_bucket}};
}

/// Merges per-episode reports in ascending seed order: assigns novelty flags
/// against the experiment-scoped ledger and computes the summary. The result
/// is independent of episode execution order.
inline ExperimentSummary merge_reports(const ExperimentConfig& cfg,
                                       std::vector<EpisodeReport>& reports,
                                       DiversityLedger& ledger) {
  std::sort(reports.begin(), reports.end(),
            [](const EpisodeReport& a, const EpisodeReport& b) { return a.seed < b.seed; });

  ExperimentSummary sum;
  sum.mode = to_string(cfg.mode);
  sum.base_seed = cfg.base_seed;
  sum.episode_count = static_cast<int>(reports.size());

  int failures = 0;
  std::map<std::string, std::vector<double>> values;
  for (EpisodeReport& r : reports) {
    if (!r.feasible) {
      ++sum.infeasible;
      sum.infeasible_reasons.push_back(r.infeasible_reason);
      continue;
    }
    ++sum.feasible;
    if (r.status == TerminalStatus::collision_target) ++failures;
    for (ReportedEvent& ev : r.events) {
      ev.novel = ledger.count_and_increment(ev.signature) == 0;
      ++sum.total_target_collisions;
    }
    sum.seeds.push_back(r.seed);
    std::map<std::string, double> row;
    for (const char* name : quality_metric_names()) {
      const double v = quality_metric_value(r.quality, name);
      values[name].push_back(v);
      row[name] = v;
    }
    sum.per_episode.push_back(std::move(row));
  }
  sum.failure_rate =
      sum.feasible > 0 ? static_cast<double>(failures) / sum.feasible : 0.0;
  sum.diversity_count = static_cast<long>(ledger.distinct());
  for (auto& [name, vals] : values) {
    std::sort(vals.begin(), vals.end());
    MetricStats st;
    st.mean = std::accumulate(vals.begin(), vals.end(), 0.0) /
              static_cast<double>(vals.size());
    st.median = quantile_sorted(vals, 0.5);
    st.q1 = quantile_sorted(vals, 0.25);
    st.q3 = quantile_sorted(vals, 0.75);
    sum.metrics[name] = st;
  }
  return sum;
}

/// Runs all episodes (seeds base_seed + i), optionally across a small thread
/// pool. Episodes are independent; the merge step is seed-ordered, so the
/// summary does not depend on scheduling.
inline std::vector<EpisodeReport> run_episodes(const ExperimentConfig& cfg,
                                               std::shared_ptr<const RoadNetwork> net) {
  std::vector<EpisodeReport> reports(static_cast<size_t>(cfg.episode_count));
  const int workers = std::min(cfg.threads, cfg.episode_count);
  if (workers <= 1) {
    for (int i = 0; i < cfg.episode_count; ++i) {
      reports[static_cast<size_t>(i)] =
          run_episode(cfg, cfg.base_seed + static_cast<uint64_t>(i), net);
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= cfg.episode_count) return;
          reports[static_cast<size_t>(i)] =
              run_episode(cfg, cfg.base_seed + static_cast<uint64_t>(i), net);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Serialization and exports

inline nlohmann::json quality_to_json(const TrajectoryQuality& q) {
  nlohmann::json j;
  for (const char* name : quality_metric_names()) {
    j[name] = quality_metric_value(q, name);
  }
  return j;
}

inline nlohmann::json episode_report_to_json(const EpisodeReport& r,
                                             const ActionGrid& grid) {
  nlohmann::json j;
  j["seed"] = r.seed;
  j["feasible"] = r.feasible;
  if (!r.feasible) {
    j["infeasible_reason"] = r.infeasible_reason;
    return j;
  }
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  nlohmann::json tau = nlohmann::json::array();
  for (size_t i = 0; i < r.tau_indices.size(); ++i) {
    tau.push_back({{"steer_idx", grid.steer_index(static_cast<size_t>(r.tau_indices[i]))},
                   {"accel_idx", grid.accel_index(static_cast<size_t>(r.tau_indices[i]))},
                   {"steer", r.tau[i].steer},
                   {"accel", r.tau[i].accel}});
  }
  j["tau"] = std::move(tau);
  j["tau_stats"] = r.tau_stats;
  j["quality"] = quality_to_json(r.quality);
  nlohmann::json events = nlohmann::json::array();
  for (const ReportedEvent& ev : r.events) {
    nlohmann::json e;
    e["time"] = ev.event.time;
    e["phase"] = ev.phase;
    e["participants"] = std::vector<AgentId>(ev.event.participants.begin(),
                                             ev.event.participants.end());
    e["x"] = ev.event.location.x;
    e["y"] = ev.event.location.y;
    e["relative_heading"] = ev.event.relative_heading;
    nlohmann::json classes = nlohmann::json::array();
    for (VehicleClass c : ev.event.participant_classes) classes.push_back(to_string(c));
    e["classes"] = std::move(classes);
    e["signature"] = signature_to_json(ev.signature);
    e["novel"] = ev.novel;
    events.push_back(std::move(e));
  }
  j["events"] = std::move(events);
  nlohmann::json counts = nlohmann::json::array();
  for (size_t i = 0; i < r.action_counts.size(); ++i) {
    if (r.action_counts[i] == 0) continue;
    counts.push_back({{"steer", grid.at(i).steer},
                      {"accel", grid.at(i).accel},
                      {"count", r.action_counts[i]}});
  }
  j["action_counts"] = std::move(counts);
  return j;
}

inline nlohmann::json summary_to_json(const ExperimentSummary& s) {
  nlohmann::json j;
  j["mode"] = s.mode;
  j["base_seed"] = s.base_seed;
  j["episode_count"] = s.episode_count;
  j["feasible"] = s.feasible;
  j["infeasible"] = s.infeasible;
  j["infeasible_reasons"] = s.infeasible_reasons;
  j["failure_rate"] = s.failure_rate;
  j["diversity_count"] = s.diversity_count;
  j["total_target_collisions"] = s.total_target_collisions;
  nlohmann::json metrics;
  for (const auto& [name, st] : s.metrics) {
    metrics[name] = {
        {"mean", st.mean}, {"median", st.median}, {"q1", st.q1}, {"q3", st.q3}};
  }
  j["metrics"] = std::move(metrics);
  j["seeds"] = s.seeds;
  return j;
}

inline nlohmann::json ledger_to_json(const DiversityLedger& ledger) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [sig, count] : ledger.counts()) {
    nlohmann::json row = signature_to_json(sig);
    row["count"] = count;
    arr.push_back(std::move(row));
  }
  return arr;
}

/// Fig.4-style action frequency export: one row per grid action selected at
/// least once, relative frequencies summing to one.
inline std::string export_action_distribution(const std::vector<EpisodeReport>& reports,
                                              const ActionGrid& grid) {
  std::vector<long> totals(grid.size(), 0);
  long all = 0;
  for (const EpisodeReport& r : reports) {
    if (!r.feasible) continue;
    for (size_t i = 0; i < r.action_counts.size() && i < totals.size(); ++i) {
      totals[i] += r.action_counts[i];
      all += r.action_counts[i];
    }
  }
  std::ostringstream out;
  out.precision(17);
  out << "steer_angle,accel_rate,count,relative_frequency\n";
  for (size_t i = 0; i < totals.size(); ++i) {
    if (totals[i] == 0) continue;
    out << grid.at(i).steer << ',' << grid.at(i).accel << ',' << totals[i] << ','
        << static_cast<double>(totals[i]) / static_cast<double>(all) << '\n';
  }
  return out.str();
}

/// Long-form per-episode metric rows: mode,seed,metric,value.
inline std::string export_metrics_long(std::span<const ExperimentSummary> summaries) {
  std::ostringstream out;
  out.precision(17);
  out << "mode,seed,metric,value\n";
  for (const ExperimentSummary& s : summaries) {
    for (size_t i = 0; i < s.seeds.size(); ++i) {
      for (const char* name : quality_metric_names()) {
        out << s.mode << ',' << s.seeds[i] << ',' << name << ','
            << s.per_episode[i].at(name) << '\n';
      }
    }
  }
  return out.str();
}

/// Table-III-style medians: one row per metric, one column per mode.
inline std::string export_metrics_table(std::span<const ExperimentSummary> summaries) {
  std::ostringstream out;
  out.precision(17);
  out << "metric";
  for (const ExperimentSummary& s : summaries) out << ',' << s.mode;
  out << '\n';
  for (const char* name : quality_metric_names()) {
    out << name;
    for (const ExperimentSummary& s : summaries) {
      auto it = s.metrics.find(name);
      out << ',' << (it != s.metrics.end() ? it->second.median : 0.0);
    }
    out << '\n';
  }
  return out.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

struct ExperimentOutput {
  ExperimentSummary summary;
  std::vector<EpisodeReport> reports; // seed-ordered
};

/// Full experiment: episodes, seed-ordered merge, output tree under
/// cfg.output_dir (summary.json, episodes/<seed>.json, trees/<seed>.json,
/// ledger.json, action_distribution.csv, metrics_long.csv, metrics_table.csv).
inline ExperimentOutput run_experiment(const ExperimentConfig& cfg,
                                       bool write_outputs = true) {
  cfg.validate();
  auto net = load_network_source(cfg.network_path, cfg.network_format);
  const ActionGrid grid = build_action_grid(cfg.action_grid);

  ExperimentOutput out;
  out.reports = run_episodes(cfg, net);
  DiversityLedger ledger;
  out.summary = merge_reports(cfg, out.reports, ledger);

  if (write_outputs) {
    namespace fs = std::filesystem;
    const fs::path root(cfg.output_dir);
    fs::create_directories(root / "episodes");
    const bool search_mode = cfg.mode != RunMode::baseline_default;
    if (search_mode) fs::create_directories(root / "trees");

    write_text_file(root / "summary.json", summary_to_json(out.summary).dump(2) + "\n");
    write_text_file(root / "ledger.json", ledger_to_json(ledger).dump(2) + "\n");
    for (const EpisodeReport& r : out.reports) {
      write_text_file(root / "episodes" / (std::to_string(r.seed) + ".json"),
                      episode_report_to_json(r, grid).dump(2) + "\n");
      if (search_mode && r.feasible) {
        write_text_file(root / "trees" / (std::to_string(r.seed) + ".json"),
                        r.tree.dump() + "\n");
      }
    }
    write_text_file(root / "action_distribution.csv",
                    export_action_distribution(out.reports, grid));
    const std::array<ExperimentSummary, 1> sums = {out.summary};
    write_text_file(root / "metrics_long.csv", export_metrics_long(sums));
    write_text_file(root / "metrics_table.csv", export_metrics_table(sums));
  }
  return out;
}

/// FNV-1a over every file (sorted relative paths, names + bytes).
inline uint64_t hash_directory(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), dir));
  }
  std::sort(files.begin(), files.end());
  Fnv1a h;
  for (const auto& rel : files) {
    h.add_string(rel.generic_string());
    h.add_string(read_text_file(dir / rel));
  }
  return h.value();
}

} // namespace crashsearch

#endif // CRASHSEARCH_EXPERIMENT_HPP
