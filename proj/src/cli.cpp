#include "tgode/cli.hpp"

#include "tgode/errors.hpp"
#include "tgode/rng.hpp"
#include "tgode/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace tgode::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_out_dir(const std::string& out) {
  if (out.empty()) throw InvalidValueError("--out must not be empty");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory: " + out);
}

void write_manifest(const fs::path& dir, const json& manifest) {
  std::ofstream f(dir / "manifest.json");
  if (!f) throw IoError("cannot write manifest in " + dir.string());
  f << manifest.dump(2) << '\n';
}

json grid_to_json(const TrialGrid& g) {
  json j;
  j["lr"] = g.lr;
  j["weight_decay"] = g.weight_decay;
  json psi = json::array();
  for (const auto p : g.psi) psi.push_back(to_string(p));
  j["psi"] = psi;
  json act = json::array();
  for (const auto a : g.activation) act.push_back(to_string(a));
  j["activation"] = act;
  json emb = json::array();
  for (const auto& e : g.embedding)
    emb.push_back(e ? json(*e) : json(nullptr));
  j["embedding"] = emb;
  j["eps"] = g.eps;
  j["hops"] = g.hops;
  j["max_epochs"] = g.max_epochs;
  j["patience"] = g.patience;
  j["base_seed"] = g.base_seed;
  return j;
}

json run_config_to_json(const RunConfig& cfg) {
  json j;
  j["task"] = to_string(cfg.task);
  if (cfg.task != TaskKind::External) {
    j["diffusion"] = to_string(cfg.diffusion);
    j["rows"] = cfg.rows;
    j["cols"] = cfg.cols;
    j["data_seed"] = cfg.data_seed;
  } else {
    j["train_snapshots"] = cfg.train_snapshots;
    j["val_snapshots"] = cfg.val_snapshots;
    j["test_snapshots"] = cfg.test_snapshots;
    j["edges"] = cfg.edges;
  }
  j["grid"] = grid_to_json(cfg.grid);
  j["workers"] = cfg.workers;
  return j;
}

HeatDatasetConfig heat_config_from(const RunConfig& cfg) {
  HeatDatasetConfig hc;
  hc.mode = cfg.task == TaskKind::HeatMulti ? SpikeMode::MultiSpike
                                            : SpikeMode::SingleSpike;
  hc.spec.kind = cfg.diffusion;
  hc.spec.noise_seed = Rng::derive(cfg.data_seed, 3);
  hc.rows = cfg.rows;
  hc.cols = cfg.cols;
  hc.train_seed = Rng::derive(cfg.data_seed, 0);
  hc.val_seed = Rng::derive(cfg.data_seed, 1);
  hc.test_seed = Rng::derive(cfg.data_seed, 2);
  return hc;
}

std::string summary_line(const TrialResult& r) {
  std::ostringstream s;
  s << "best trial=" << r.config_index << " lr=" << format_double(r.config.lr)
    << " weight_decay=" << format_double(r.config.weight_decay)
    << " psi=" << to_string(r.config.psi_mode)
    << " activation=" << to_string(r.config.activation) << " embedding=";
  if (r.config.embedding)
    s << *r.config.embedding;
  else
    s << "none";
  s << " eps=" << format_double(r.config.eps) << " hops=" << r.config.hops
    << " test_mae=" << format_double(r.test_mae) << " test_log10_mae="
    << format_double(std::isinf(r.test_log10_mae) && r.test_log10_mae < 0
                         ? kLogMaeSentinel
                         : r.test_log10_mae);
  return s.str();
}

GridSearchResult search_and_record(const RunConfig& cfg,
                                   const SparseMatrix& laplacian,
                                   const HeatDataset& data, int workers,
                                   const fs::path& out_dir,
                                   const std::string& csv_name) {
  const auto configs = expand_grid(cfg.grid);
  std::ofstream csv(out_dir / csv_name);
  if (!csv) throw IoError("cannot write " + (out_dir / csv_name).string());
  csv << results_csv_header() << '\n';
  csv.flush();
  auto on_done = [&csv](const TrialResult& r) {
    csv << results_csv_row(r) << '\n';
    csv.flush();
  };
  GridSearchResult result = grid_search(configs, laplacian, data.train,
                                        data.val, data.test, workers, on_done);
  return result;
}

}  // namespace

void run_simulate(const SimulateOptions& opts) {
  if (opts.train_count < 2 || opts.eval_count < 2)
    throw InvalidValueError("simulate: snapshot counts must be >= 2");
  ensure_out_dir(opts.out);
  const fs::path dir(opts.out);

  HeatDatasetConfig hc;
  hc.mode = opts.mode;
  hc.spec.kind = opts.diffusion;
  hc.spec.noise_seed = Rng::derive(opts.seed, 3);
  hc.rows = opts.rows;
  hc.cols = opts.cols;
  hc.eps = opts.sim_eps;
  hc.train_steps = opts.train_steps;
  hc.train_count = opts.train_count;
  hc.eval_steps = opts.eval_steps;
  hc.eval_count = opts.eval_count;
  hc.train_seed = Rng::derive(opts.seed, 0);
  hc.val_seed = Rng::derive(opts.seed, 1);
  hc.test_seed = Rng::derive(opts.seed, 2);

  const HeatDataset data = make_heat_dataset(hc);
  write_edge_list(dir / "graph.edges", *data.graph);
  write_snapshot_file(dir / "train.jsonl", data.train);
  write_snapshot_file(dir / "val.jsonl", data.val);
  write_snapshot_file(dir / "test.jsonl", data.test);

  json manifest;
  manifest["command"] = "simulate";
  manifest["version"] = 1;
  manifest["diffusion"] = to_string(opts.diffusion);
  manifest["mode"] = to_string(opts.mode);
  manifest["rows"] = opts.rows;
  manifest["cols"] = opts.cols;
  manifest["seed"] = opts.seed;
  manifest["sim_eps"] = opts.sim_eps;
  manifest["train_steps"] = opts.train_steps;
  manifest["train_count"] = opts.train_count;
  manifest["eval_steps"] = opts.eval_steps;
  manifest["eval_count"] = opts.eval_count;
  manifest["derived_seeds"] = {{"train", hc.train_seed},
                               {"val", hc.val_seed},
                               {"test", hc.test_seed},
                               {"noise", hc.spec.noise_seed}};
  manifest["files"] = {{"edges", "graph.edges"},
                       {"train", "train.jsonl"},
                       {"val", "val.jsonl"},
                       {"test", "test.jsonl"}};
  write_manifest(dir, manifest);
  std::cout << "wrote " << to_string(opts.mode) << "/"
            << to_string(opts.diffusion) << " dataset to " << opts.out
            << std::endl;
}

HeatDataset load_dataset(const RunConfig& cfg) {
  if (cfg.task != TaskKind::External) return make_heat_dataset(heat_config_from(cfg));
  HeatDataset data;
  data.graph = std::make_shared<const Graph>(read_edge_list(cfg.edges));
  data.train = read_snapshot_file(cfg.train_snapshots, data.graph);
  data.val = read_snapshot_file(cfg.val_snapshots, data.graph);
  data.test = read_snapshot_file(cfg.test_snapshots, data.graph);
  return data;
}

void run_train(const TrainCliOptions& opts) {
  RunConfig cfg = read_run_config(opts.config_path);
  if (!opts.out_override.empty()) cfg.out = opts.out_override;
  const auto configs = expand_grid(cfg.grid);
  if (configs.size() != 1)
    throw InvalidValueError(
        "train: the config must describe exactly one combination (grid has " +
        std::to_string(configs.size()) + "); use grid-search instead");
  ensure_out_dir(cfg.out);
  const fs::path dir(cfg.out);

  const HeatDataset data = load_dataset(cfg);
  const SparseMatrix laplacian = normalized_laplacian(*data.graph);

  std::ofstream csv(dir / "results.csv");
  if (!csv) throw IoError("cannot write " + (dir / "results.csv").string());
  csv << results_csv_header() << '\n';
  TrialResult r = train(configs[0], laplacian, data.train, data.val,
                        data.test);
  csv << results_csv_row(r) << '\n';
  if (r.diverged)
    throw NumericOverflowError("train: the trial diverged");
  save_checkpoint(dir / "checkpoint.json", r.best_params);

  json manifest;
  manifest["command"] = "train";
  manifest["version"] = 1;
  manifest["config"] = run_config_to_json(cfg);
  manifest["files"] = {{"results", "results.csv"},
                       {"checkpoint", "checkpoint.json"}};
  write_manifest(dir, manifest);
  std::cout << summary_line(r) << std::endl;
}

void run_grid_search(const GridSearchOptions& opts) {
  RunConfig cfg = read_run_config(opts.config_path);
  if (!opts.out_override.empty()) cfg.out = opts.out_override;
  const int workers =
      opts.workers_override >= 0 ? opts.workers_override : cfg.workers;
  ensure_out_dir(cfg.out);
  const fs::path dir(cfg.out);

  const HeatDataset data = load_dataset(cfg);
  const SparseMatrix laplacian = normalized_laplacian(*data.graph);

  const GridSearchResult result =
      search_and_record(cfg, laplacian, data, workers, dir, "results.csv");
  const TrialResult& best = result.trials[result.best_index];
  save_checkpoint(dir / "best_checkpoint.json", best.best_params);

  json manifest;
  manifest["command"] = "grid-search";
  manifest["version"] = 1;
  manifest["config"] = run_config_to_json(cfg);
  manifest["workers"] = workers;
  manifest["trials"] = result.trials.size();
  manifest["best_trial"] = best.config_index;
  manifest["files"] = {{"results", "results.csv"},
                       {"best_checkpoint", "best_checkpoint.json"}};
  write_manifest(dir, manifest);
  std::cout << summary_line(best) << std::endl;
}

void run_evaluate(const EvaluateOptions& opts) {
  std::string snapshots = opts.snapshots;
  std::string edges = opts.edges;
  if (!opts.data_dir.empty()) {
    if (opts.split != "train" && opts.split != "val" && opts.split != "test")
      throw InvalidValueError("evaluate: --split must be train, val or test");
    snapshots = (fs::path(opts.data_dir) / (opts.split + ".jsonl")).string();
    edges = (fs::path(opts.data_dir) / "graph.edges").string();
  }
  if (snapshots.empty() || edges.empty())
    throw InvalidValueError(
        "evaluate: provide --data or both --snapshots and --edges");

  const TgodeParams params = load_checkpoint(opts.checkpoint);
  auto graph = std::make_shared<const Graph>(read_edge_list(edges));
  const SnapshotSequence seq = read_snapshot_file(snapshots, graph);
  const SparseMatrix laplacian = normalized_laplacian(*graph);
  const auto preds = predict_sequence(params, laplacian, seq);
  const Metrics m = sequence_metrics(preds, seq);

  const Scalar log_out =
      std::isinf(m.log10_mae) && m.log10_mae < 0 ? kLogMaeSentinel
                                                 : m.log10_mae;
  std::cout << "mae=" << format_double(m.mae)
            << " log10_mae=" << format_double(log_out) << std::endl;
  if (!opts.out.empty()) {
    ensure_out_dir(opts.out);
    json j;
    j["checkpoint"] = opts.checkpoint;
    j["snapshots"] = snapshots;
    j["mae"] = m.mae;
    j["log10_mae"] = log_out;
    std::ofstream f(fs::path(opts.out) / "evaluation.json");
    if (!f) throw IoError("cannot write evaluation.json");
    f << j.dump(2) << '\n';
  }
}

void run_ablate(const AblateOptions& opts) {
  RunConfig cfg = read_run_config(opts.config_path);
  if (!opts.out_override.empty()) cfg.out = opts.out_override;
  if (cfg.task == TaskKind::External)
    throw InvalidValueError(
        "ablate-sparsity: only heat tasks are supported here");
  if (opts.counts.empty())
    throw InvalidValueError("ablate-sparsity: --counts must not be empty");
  if (opts.repeats < 1)
    throw InvalidValueError("ablate-sparsity: --repeats must be >= 1");
  ensure_out_dir(cfg.out);
  const fs::path dir(cfg.out);

  const HeatDatasetConfig base = heat_config_from(cfg);
  auto graph = std::make_shared<const Graph>(
      build_grid_graph(base.rows, base.cols));
  const SparseMatrix laplacian = normalized_laplacian(*graph);
  const DiffusionOperator op(base.spec, laplacian);

  // every count is validated before any training starts
  const std::int64_t available = base.train_steps + 1;
  for (const auto count : opts.counts) {
    if (count > available)
      throw CountTooLargeError("ablate-sparsity: count " +
                               std::to_string(count) + " > available " +
                               std::to_string(available));
    if (count < 20)
      throw InvalidValueError(
          "ablate-sparsity: counts below 20 leave the validation or test "
          "split with fewer than 2 snapshots");
  }

  std::ofstream csv(dir / "ablation.csv");
  if (!csv) throw IoError("cannot write " + (dir / "ablation.csv").string());
  csv << "count,repeat,best_trial,lr,weight_decay,psi,activation,embedding,"
         "eps,hops,best_val_mae,test_mae,test_log10_mae\n";
  csv.flush();

  for (int rep = 0; rep < opts.repeats; ++rep) {
    const std::uint64_t sim_seed = Rng::derive(cfg.data_seed, 10 + rep);
    const Vector x0 = init_temperatures(
        graph->n_nodes(), base.mode, Rng::derive(sim_seed, 0));
    const Trajectory traj = simulate(op, x0, base.train_steps, base.eps);
    for (const auto count : opts.counts) {
      const SnapshotSequence selected = subsample_irregular(
          traj, count, Rng::derive(sim_seed, 1000 + static_cast<std::uint64_t>(
                                                        count)),
          graph);
      const auto n_train = static_cast<std::size_t>(
          static_cast<double>(count) * 0.8);
      const auto n_val =
          static_cast<std::size_t>(static_cast<double>(count) * 0.1);
      const auto n_test = static_cast<std::size_t>(count) - n_train - n_val;
      HeatDataset data;
      data.graph = graph;
      data.train = selected.slice(0, n_train);
      data.val = selected.slice(n_train, n_val);
      data.test = selected.slice(n_train + n_val, n_test);

      TrialGrid grid = cfg.grid;
      grid.base_seed = Rng::derive(
          cfg.grid.base_seed,
          static_cast<std::uint64_t>(rep) * 100000 +
              static_cast<std::uint64_t>(count));
      const auto configs = expand_grid(grid);
      const GridSearchResult result =
          grid_search(configs, laplacian, data.train, data.val, data.test,
                      cfg.workers);
      const TrialResult& best = result.trials[result.best_index];
      csv << count << ',' << rep << ',' << best.config_index << ','
          << format_double(best.config.lr) << ','
          << format_double(best.config.weight_decay) << ','
          << to_string(best.config.psi_mode) << ','
          << to_string(best.config.activation) << ',';
      if (best.config.embedding)
        csv << *best.config.embedding;
      else
        csv << "none";
      csv << ',' << format_double(best.config.eps) << ',' << best.config.hops
          << ',' << format_double(best.best_val_mae) << ','
          << format_double(best.test_mae) << ','
          << format_double(std::isinf(best.test_log10_mae) &&
                                   best.test_log10_mae < 0
                               ? kLogMaeSentinel
                               : best.test_log10_mae)
          << '\n';
      csv.flush();
      std::cout << "count=" << count << " repeat=" << rep << " "
                << summary_line(best) << std::endl;
    }
  }

  json manifest;
  manifest["command"] = "ablate-sparsity";
  manifest["version"] = 1;
  manifest["config"] = run_config_to_json(cfg);
  manifest["counts"] = opts.counts;
  manifest["repeats"] = opts.repeats;
  manifest["files"] = {{"ablation", "ablation.csv"}};
  write_manifest(dir, manifest);
}

void run_baseline(const BaselineOptions& opts) {
  if (opts.kind != "lb" && opts.kind != "node")
    throw InvalidValueError("baseline: --kind must be lb or node");
  if (opts.data_dir.empty())
    throw InvalidValueError("baseline: --data is required");
  if (opts.split != "train" && opts.split != "val" && opts.split != "test")
    throw InvalidValueError("baseline: --split must be train, val or test");

  const fs::path data(opts.data_dir);
  auto graph = std::make_shared<const Graph>(
      read_edge_list(data / "graph.edges"));

  json report;
  report["command"] = "baseline";
  report["kind"] = opts.kind;

  if (opts.kind == "lb") {
    const SnapshotSequence seq =
        read_snapshot_file(data / (opts.split + ".jsonl"), graph);
    const Metrics m = lb_baseline(seq);
    const Scalar log_out = std::isinf(m.log10_mae) && m.log10_mae < 0
                               ? kLogMaeSentinel
                               : m.log10_mae;
    std::cout << "lb mae=" << format_double(m.mae)
              << " log10_mae=" << format_double(log_out) << std::endl;
    report["split"] = opts.split;
    report["mae"] = m.mae;
    report["log10_mae"] = log_out;
  } else {
    const SnapshotSequence train_seq =
        read_snapshot_file(data / "train.jsonl", graph);
    const SnapshotSequence val_seq =
        read_snapshot_file(data / "val.jsonl", graph);
    const SnapshotSequence test_seq =
        read_snapshot_file(data / "test.jsonl", graph);
    const SparseMatrix laplacian = normalized_laplacian(*graph);

    TrialConfig tc;  // interaction-free configuration via hops = 0
    tc.hops = 0;
    if (!opts.config_path.empty()) {
      const RunConfig cfg = read_run_config(opts.config_path);
      const auto configs = expand_grid(cfg.grid);
      if (configs.size() != 1)
        throw InvalidValueError(
            "baseline: --config must describe exactly one combination");
      tc = configs[0];
      tc.hops = 0;
    }
    const TrialResult r =
        train(tc, laplacian, train_seq, val_seq, test_seq);
    if (r.diverged)
      throw NumericOverflowError("baseline: the node trial diverged");
    std::cout << "node " << summary_line(r) << std::endl;
    report["result"] = results_csv_row(r);
  }

  if (!opts.out.empty()) {
    ensure_out_dir(opts.out);
    std::ofstream f(fs::path(opts.out) / "baseline.json");
    if (!f) throw IoError("cannot write baseline.json");
    f << report.dump(2) << '\n';
  }
}

int run_main(int argc, char** argv) {
  CLI::App app{"TG-ODE: learning node-state dynamics from irregularly "
               "sampled temporal graph snapshots"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 2 validation error, 3 I/O error, "
             "4 numeric divergence.");

  SimulateOptions sim;
  std::string sim_diffusion = "l";
  std::string sim_mode = "single";
  auto* simulate_cmd = app.add_subcommand(
      "simulate", "Generate a heat-diffusion dataset (train/val/test)");
  simulate_cmd->add_option("--diffusion", sim_diffusion,
                           "l|l2|l5|tanh_l|l_x5|l_x005|l_noise");
  simulate_cmd->add_option("--mode", sim_mode, "single|multi");
  simulate_cmd->add_option("--rows", sim.rows, "grid rows");
  simulate_cmd->add_option("--cols", sim.cols, "grid cols");
  simulate_cmd->add_option("--seed", sim.seed, "master seed");
  simulate_cmd->add_option("--eps", sim.sim_eps, "simulation step size");
  simulate_cmd->add_option("--train-steps", sim.train_steps,
                           "training simulation steps");
  simulate_cmd->add_option("--train-count", sim.train_count,
                           "snapshots kept for training");
  simulate_cmd->add_option("--eval-steps", sim.eval_steps,
                           "val/test simulation steps");
  simulate_cmd->add_option("--eval-count", sim.eval_count,
                           "snapshots kept for val and for test");
  simulate_cmd->add_option("--out", sim.out, "output directory")->required();

  TrainCliOptions train_opts;
  auto* train_cmd =
      app.add_subcommand("train", "Train one configuration from a config");
  train_cmd->add_option("--config", train_opts.config_path, "run config file")
      ->required();
  train_cmd->add_option("--out", train_opts.out_override,
                        "output directory (overrides the config)");

  GridSearchOptions gs_opts;
  auto* gs_cmd = app.add_subcommand(
      "grid-search", "Run the config's hyperparameter grid and rank trials");
  gs_cmd->add_option("--config", gs_opts.config_path, "run config file")
      ->required();
  gs_cmd->add_option("--workers", gs_opts.workers_override,
                     "worker threads (0 = hardware)");
  gs_cmd->add_option("--out", gs_opts.out_override,
                     "output directory (overrides the config)");

  EvaluateOptions eval_opts;
  auto* eval_cmd = app.add_subcommand(
      "evaluate", "Evaluate a checkpoint on a snapshot sequence");
  eval_cmd->add_option("--checkpoint", eval_opts.checkpoint, "checkpoint file")
      ->required();
  eval_cmd->add_option("--data", eval_opts.data_dir,
                       "dataset directory from `simulate`");
  eval_cmd->add_option("--split", eval_opts.split, "train|val|test");
  eval_cmd->add_option("--snapshots", eval_opts.snapshots,
                       "explicit snapshot file");
  eval_cmd->add_option("--edges", eval_opts.edges, "explicit edge list");
  eval_cmd->add_option("--out", eval_opts.out, "output directory");

  AblateOptions ab_opts;
  auto* ab_cmd = app.add_subcommand(
      "ablate-sparsity",
      "Grid search over shrinking snapshot budgets (80/10/10 split)");
  ab_cmd->add_option("--config", ab_opts.config_path, "run config file")
      ->required();
  ab_cmd->add_option("--counts", ab_opts.counts, "snapshot counts")
      ->required()
      ->delimiter(',');
  ab_cmd->add_option("--repeats", ab_opts.repeats, "repeats per count");
  ab_cmd->add_option("--out", ab_opts.out_override,
                     "output directory (overrides the config)");

  BaselineOptions bl_opts;
  auto* bl_cmd =
      app.add_subcommand("baseline", "Run the lb or node reference model");
  bl_cmd->add_option("--kind", bl_opts.kind, "lb|node")->required();
  bl_cmd->add_option("--data", bl_opts.data_dir,
                     "dataset directory from `simulate`")
      ->required();
  bl_cmd->add_option("--split", bl_opts.split,
                     "split for the lb metric (default test)");
  bl_cmd->add_option("--config", bl_opts.config_path,
                     "singleton config for node training");
  bl_cmd->add_option("--out", bl_opts.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*simulate_cmd) {
      const auto kind = diffusion_from_string(sim_diffusion);
      if (!kind)
        throw InvalidValueError("simulate: unknown diffusion '" +
                                sim_diffusion + "'");
      sim.diffusion = *kind;
      const auto mode = spike_mode_from_string(sim_mode);
      if (!mode)
        throw InvalidValueError("simulate: unknown mode '" + sim_mode + "'");
      sim.mode = *mode;
      run_simulate(sim);
    } else if (*train_cmd) {
      run_train(train_opts);
    } else if (*gs_cmd) {
      run_grid_search(gs_opts);
    } else if (*eval_cmd) {
      run_evaluate(eval_opts);
    } else if (*ab_cmd) {
      run_ablate(ab_opts);
    } else if (*bl_cmd) {
      run_baseline(bl_opts);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    switch (e.category()) {
      case ErrorCategory::Validation: return 2;
      case ErrorCategory::Io: return 3;
      case ErrorCategory::Numeric: return 4;
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}

}  // namespace tgode::cli
