#ifndef CRASHSEARCH_CLI_HPP
#define CRASHSEARCH_CLI_HPP

#include <iostream>

#include <CLI11.hpp>

#include "crashsearch/experiment.hpp"

namespace crashsearch {

/// Command-line entry point. Exit codes: 0 success, 1 configuration or usage
/// error, 2 runtime failure.
inline int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"collision scenario search over microscopic traffic simulation"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "execute an experiment from a config file");
  std::string run_config;
  std::optional<uint64_t> run_seed;
  std::optional<std::string> run_mode;
  std::optional<int> run_episodes;
  std::optional<std::string> run_out;
  run->add_option("--config", run_config, "experiment config JSON")->required();
  run->add_option("--seed", run_seed, "override base_seed");
  run->add_option("--mode", run_mode, "override mode");
  run->add_option("--episodes", run_episodes, "override episode_count");
  run->add_option("--out", run_out, "override output_dir");

  // import-osm
  auto* import_osm = app.add_subcommand("import-osm", "OSM XML to native network JSON");
  std::string osm_in, osm_out;
  import_osm->add_option("--input", osm_in, "OSM XML file")->required();
  import_osm->add_option("--output", osm_out, "native JSON output")->required();

  // validate
  auto* validate = app.add_subcommand("validate", "check a network or config file");
  std::string val_network, val_format = "native", val_config;
  validate->add_option("--network", val_network, "network file or fixture name");
  validate->add_option("--format", val_format, "native | osm | fixture");
  validate->add_option("--config", val_config, "experiment config JSON");

  // replay
  auto* replay = app.add_subcommand("replay", "re-execute a stored tau* and dump CSV");
  std::string rep_config, rep_episode, rep_out = "trajectory.csv";
  replay->add_option("--config", rep_config, "experiment config JSON")->required();
  replay->add_option("--episode", rep_episode, "episodes/<seed>.json report")->required();
  replay->add_option("--out", rep_out, "trajectory CSV path");

  // export
  auto* exportc = app.add_subcommand("export", "regenerate CSVs from stored reports");
  std::vector<std::string> exp_runs;
  std::string exp_out;
  exportc->add_option("--run", exp_runs, "output directory of a finished run")
      ->required()
      ->expected(-1);
  exportc->add_option("--out", exp_out, "directory for regenerated CSVs")->required();

  try {
    std::vector<const char*> argv;
    argv.push_back("crashsearch");
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) {
      ExperimentConfig cfg = load_experiment_config(read_text_file(run_config));
      if (run_seed) cfg.base_seed = *run_seed;
      if (run_mode) cfg.mode = run_mode_from_string(*run_mode);
      if (run_episodes) cfg.episode_count = *run_episodes;
      if (run_out) cfg.output_dir = *run_out;
      cfg.validate();
      const ExperimentOutput out = run_experiment(cfg);
      std::cout << "mode " << out.summary.mode << ": " << out.summary.feasible
                << " episodes, failure_rate " << out.summary.failure_rate
                << ", diversity " << out.summary.diversity_count << "\n"
                << "outputs in " << cfg.output_dir << "\n";
      return 0;
    }
    if (import_osm->parsed()) {
      const RoadNetwork net = parse_osm_subset(read_text_file(osm_in));
      write_text_file(osm_out, save_network(net));
      std::cout << "imported " << net.nodes.size() << " nodes, " << net.edges.size()
                << " edges, " << net.lane_count() << " lanes -> " << osm_out << "\n";
      return 0;
    }
    if (validate->parsed()) {
      if (val_network.empty() && val_config.empty()) {
        std::cerr << "validate: pass --network and/or --config\n";
        return 1;
      }
      if (!val_network.empty()) {
        auto net = load_network_source(val_network, val_format);
        std::cout << "network ok: " << net->nodes.size() << " nodes, "
                  << net->lane_count() << " lanes, "
                  << net->report().connected_components << " component(s)\n";
        for (const auto& w : net->report().warnings) std::cout << "warning: " << w << "\n";
      }
      if (!val_config.empty()) {
        load_experiment_config(read_text_file(val_config));
        std::cout << "config ok: " << val_config << "\n";
      }
      return 0;
    }
    if (replay->parsed()) {
      ExperimentConfig cfg = load_experiment_config(read_text_file(rep_config));
      const nlohmann::json ep = nlohmann::json::parse(read_text_file(rep_episode));
      const uint64_t seed = ep.at("seed").get<uint64_t>();
      if (!ep.value("feasible", true)) {
        std::cerr << "episode " << seed << " was infeasible; nothing to replay\n";
        return 2;
      }
      auto net = load_network_source(cfg.network_path, cfg.network_format);
      const SimSetup setup = cfg.sim_setup();
      const ActionGrid grid = build_action_grid(cfg.action_grid);
      WorldState world = spawn_traffic(net, cfg.flow, seed, setup);
      EpisodeTrace trace;
      trace.dt = cfg.dt;
      trace.record(world);
      if (ep.contains("tau") && !ep["tau"].empty()) {
        for (const auto& jt : ep["tau"]) {
          const ControlInput control{jt.at("steer").get<double>(),
                                     jt.at("accel").get<double>()};
          for (int j = 0; j < cfg.episode.decision_interval; ++j) {
            if (is_terminal(world, cfg.episode.horizon_steps) != TerminalStatus::running) {
              break;
            }
            step(world, control, setup);
            trace.record(world);
          }
        }
      } else {
        while (is_terminal(world, cfg.episode.horizon_steps) == TerminalStatus::running) {
          step(world, std::nullopt, setup);
          trace.record(world);
        }
      }
      write_text_file(rep_out, trace_to_csv(trace));
      std::cout << "replayed episode " << seed << ": "
                << to_string(is_terminal(world, cfg.episode.horizon_steps)) << ", "
                << trace.steps.size() << " recorded steps -> " << rep_out << "\n";
      return 0;
    }
    if (exportc->parsed()) {
      namespace fs = std::filesystem;
      fs::create_directories(exp_out);
      std::vector<ExperimentSummary> summaries;
      nlohmann::json merged_warnings = nlohmann::json::array();
      for (const std::string& dir : exp_runs) {
        const fs::path sp = fs::path(dir) / "summary.json";
        if (!fs::exists(sp)) {
          merged_warnings.push_back("missing summary in " + dir);
          continue;
        }
        const nlohmann::json js = nlohmann::json::parse(read_text_file(sp));
        ExperimentSummary s;
        s.mode = js.at("mode").get<std::string>();
        s.base_seed = js.at("base_seed").get<uint64_t>();
        s.episode_count = js.at("episode_count").get<int>();
        s.seeds = js.at("seeds").get<std::vector<uint64_t>>();
        for (uint64_t seed : s.seeds) {
          const nlohmann::json ep = nlohmann::json::parse(
              read_text_file(fs::path(dir) / "episodes" / (std::to_string(seed) + ".json")));
          std::map<std::string, double> row;
          std::vector<double> dummy;
          for (const char* name : quality_metric_names()) {
            row[name] = ep.at("quality").at(name).get<double>();
          }
          s.per_episode.push_back(std::move(row));
        }
        // Rebuild stats from episode rows so the table matches the long form.
        std::map<std::string, std::vector<double>> vals;
        for (const auto& row : s.per_episode) {
          for (const auto& [k, v] : row) vals[k].push_back(v);
        }
        for (auto& [k, v] : vals) {
          std::sort(v.begin(), v.end());
          MetricStats st;
          st.mean = std::accumulate(v.begin(), v.end(), 0.0) /
                    static_cast<double>(v.size());
          st.median = quantile_sorted(v, 0.5);
          st.q1 = quantile_sorted(v, 0.25);
          st.q3 = quantile_sorted(v, 0.75);
          s.metrics[k] = st;
        }
        summaries.push_back(std::move(s));
      }
      write_text_file(fs::path(exp_out) / "metrics_long.csv",
                      export_metrics_long(summaries));
      write_text_file(fs::path(exp_out) / "metrics_table.csv",
                      export_metrics_table(summaries));
      nlohmann::json meta;
      meta["modes"] = nlohmann::json::array();
      for (const auto& s : summaries) meta["modes"].push_back(s.mode);
      meta["warnings"] = merged_warnings;
      write_text_file(fs::path(exp_out) / "export.json", meta.dump(2) + "\n");
      std::cout << "exported " << summaries.size() << " run(s) -> " << exp_out << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 1;
  } catch (const OsmParseError& e) {
    std::cerr << "osm parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

} // namespace crashsearch

#endif // CRASHSEARCH_CLI_HPP
