#pragma once

#include "adagnn/analysis.hpp"
#include "adagnn/checkpoint.hpp"
#include "adagnn/data.hpp"
#include "adagnn/model.hpp"
#include "adagnn/optim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace adagnn::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { ok = 0, failure = 1, usage = 2, diverged = 3 };

struct TrainFlags {
  std::string data;
  std::string model = "adagnn-s";
  int layers = 2;
  Index hidden = 128;
  std::string split = "planetoid";
  std::string out = "run";
  TrainConfig cfg;
};

namespace detail {

inline void add_config_flags(CLI::App& app, TrainConfig& cfg) {
  app.add_option("--lr", cfg.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  app.add_option("--epochs", cfg.max_epochs, "maximum training epochs")->check(CLI::PositiveNumber);
  app.add_option("--dropout", cfg.dropout, "dropout rate")->check(CLI::Range(0.0, 0.999999));
  app.add_option("--alpha", cfg.alpha, "l1 weight on filter coefficients (AdaGNN only)")->check(CLI::NonNegativeNumber);
  app.add_option("--beta", cfg.beta, "squared-l2 weight on all parameters")->check(CLI::NonNegativeNumber);
  app.add_option("--patience", cfg.patience, "epochs without validation improvement before stopping")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_flag("--row-normalize", cfg.row_normalize, "scale feature rows to sum to one");
  app.add_flag("--dropout-intermediate", cfg.dropout_intermediate, "also drop inputs of parameter-free layers");
}

inline void add_model_flags(CLI::App& app, TrainFlags& f) {
  app.add_option("--model", f.model, "adagnn-s | adagnn-r | gcn | sgc")
      ->check(CLI::IsMember({"adagnn-s", "adagnn-r", "gcn", "sgc"}));
  app.add_option("--layers", f.layers, "number of layers K")->check(CLI::PositiveNumber);
  app.add_option("--hidden", f.hidden, "hidden width")->check(CLI::PositiveNumber);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline Dataset load_with_split(const std::string& dir, const std::string& split, std::uint64_t seed) {
  return apply_split(load_dataset(dir), SplitSpec::parse(split), seed);
}

inline void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace detail

/// Resolved settings of a training run; written before training starts.
inline nlohmann::json run_manifest(const TrainFlags& f, const std::string& fingerprint) {
  return {{"tool", "adagnn"},
          {"version", kVersion},
          {"model", f.model},
          {"layers", f.layers},
          {"hidden", f.hidden},
          {"data", f.data},
          {"dataset_fingerprint", fingerprint},
          {"split", f.split},
          {"out", f.out},
          {"config", config_to_json(f.cfg)},
          {"config_hash", config_hash(f.cfg)}};
}

inline int cmd_train(const TrainFlags& f, std::ostream& out) {
  const ModelKind kind = parse_model_kind(f.model);
  const std::filesystem::path dir(f.out);
  std::filesystem::create_directories(dir);
  detail::write_json(run_manifest(f, dataset_fingerprint(f.data)), dir / "manifest.json");

  const Dataset ds = detail::load_with_split(f.data, f.split, f.cfg.seed);
  out << "dataset: N=" << ds.num_nodes() << " edges=" << ds.graph.num_edges() << " F=" << ds.num_features()
      << " C=" << ds.num_classes << " train/val/test=" << mask_count(ds.train_mask) << "/" << mask_count(ds.val_mask)
      << "/" << mask_count(ds.test_mask) << '\n';
  const TrainResult r = train(kind, ds, f.layers, f.hidden, f.cfg);
  save_checkpoint({r.params, f.cfg, f.split}, dir / "checkpoint.bin");
  write_history_csv(r.history, dir / "history.csv");
  if (r.clamped_probabilities > 0) {
    out << "warning: " << r.clamped_probabilities << " predicted probabilities were clamped to 1e-12\n";
  }
  out << "epochs=" << r.history.size() << " best_epoch=" << r.best_epoch << " train_acc=" << detail::fmt(r.eval.train_acc)
      << " val_acc=" << detail::fmt(r.eval.val_acc) << '\n';
  out << "test_acc=" << detail::fmt(r.eval.test_acc) << '\n';
  return ok;
}

inline int cmd_eval(const std::string& data, const std::string& checkpoint, const std::string& split_override,
                    std::ostream& out) {
  if (!std::filesystem::exists(checkpoint)) throw std::runtime_error("checkpoint not found: " + checkpoint);
  const Checkpoint ck = load_checkpoint(checkpoint);
  const std::string split = split_override.empty() ? ck.split : split_override;
  const Dataset ds = detail::load_with_split(data, split, ck.config.seed);
  check_params_match(ck.params, ds);
  const Network net(ck.params.kind, ds.graph, model_features(ds, ck.config), ck.params.dims.layers);
  const Evaluation e = evaluate(net, ck.params, ds);
  out << "train_acc=" << detail::fmt(e.train_acc) << '\n';
  out << "val_acc=" << detail::fmt(e.val_acc) << '\n';
  out << "test_acc=" << detail::fmt(e.test_acc) << '\n';
  return ok;
}

struct ResponseFlags {
  std::string checkpoint;
  Index features = 0;  // untrained model when no checkpoint is given
  int layers = 2;
  Index hidden = 128;
  std::string model = "adagnn-s";
  std::string channels;
  Index grid = 201;
  std::string out = "response.csv";
};

inline int cmd_response(const ResponseFlags& f, std::ostream& out) {
  ModelParams p;
  if (!f.checkpoint.empty()) {
    p = load_checkpoint(f.checkpoint).params;
  } else {
    if (f.features < 1) throw CLI::ValidationError("--features", "needed (>= 1) when no --checkpoint is given");
    Rng rng(0);
    p = ModelParams::init(parse_model_kind(f.model), {f.layers, f.features, f.hidden, 1}, rng);
  }
  std::vector<Index> channels;
  for (const auto& s : detail::split_list(f.channels)) channels.push_back(std::stoll(s));
  const auto curves = export_response(p, channels, f.grid);
  const std::filesystem::path path(f.out);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_response_csv(curves, path);
  out << "wrote " << curves.size() << " curves x " << f.grid << " points to " << path.string() << '\n';
  return ok;
}

struct SweepFlags {
  std::string data;
  std::string models = "gcn,adagnn-s";
  std::string depths = "2,4,8,16";
  std::string seeds = "0,1,2";
  Index hidden = 128;
  std::string split = "planetoid";
  std::string out = "sweep";
  TrainConfig cfg;
};

inline int cmd_sweep(const SweepFlags& f, std::ostream& out) {
  std::vector<ModelKind> kinds;
  for (const auto& s : detail::split_list(f.models)) kinds.push_back(parse_model_kind(s));
  std::vector<int> depths;
  for (const auto& s : detail::split_list(f.depths)) depths.push_back(std::stoi(s));
  for (int d : depths)
    if (d < 1) throw CLI::ValidationError("--depths", "every depth must be >= 1");
  std::vector<std::uint64_t> seeds;
  for (const auto& s : detail::split_list(f.seeds)) seeds.push_back(std::stoull(s));

  const Dataset ds = detail::load_with_split(f.data, f.split, f.cfg.seed);
  const SweepResult r = oversmooth_sweep(ds, kinds, depths, seeds, {f.hidden, f.cfg});
  const std::filesystem::path dir(f.out);
  std::filesystem::create_directories(dir);
  write_sweep_csv(r, dir / "sweep.csv");
  for (const auto& s : r.summary()) {
    out << to_string(s.kind) << " K=" << s.depth << " acc=" << detail::fmt(s.mean_acc) << " +/- "
        << detail::fmt(s.std_acc) << " smoothness=" << detail::fmt(s.mean_smoothness) << " (" << s.runs
        << " runs)\n";
  }
  for (const auto& e : r.failures) {
    out << "failed: " << to_string(e.kind) << " K=" << e.depth << " seed=" << e.seed << ": " << e.message << '\n';
  }
  return r.rows.empty() ? failure : ok;
}

struct SynthFlags {
  std::string kind = "citation";
  std::string out;
  Index nodes = 1000;
  Index classes = 5;
  Index features = 500;
  double homophily = 0.8;
  double avg_degree = 4.0;
  std::uint64_t seed = 0;
  std::string topology = "path";
};

inline int cmd_synth(const SynthFlags& f, std::ostream& out) {
  Dataset ds;
  if (f.kind == "citation") {
    CitationLikeOptions o;
    o.nodes = f.nodes;
    o.classes = f.classes;
    o.features = f.features;
    o.homophily = f.homophily;
    o.avg_degree = f.avg_degree;
    o.seed = f.seed;
    ds = synthetic_citation(o);
  } else {
    ds = synthetic_two_channel(f.nodes, parse_topology(f.topology));
  }
  save_dataset(ds, f.out);
  out << "wrote N=" << ds.num_nodes() << " edges=" << ds.graph.num_edges() << " F=" << ds.num_features()
      << " C=" << ds.num_classes << " to " << f.out << '\n';
  return ok;
}

/// Parses argv and runs one subcommand. Usage errors return 2, data and
/// runtime errors 1, divergence 3.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Adaptive spectral graph filters: training and analysis"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "train a model and write manifest, checkpoint and history");
  train_cmd->add_option("--data", tf.data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  detail::add_model_flags(*train_cmd, tf);
  train_cmd->add_option("--split", tf.split, "file | planetoid | random:TRAIN,VAL");
  train_cmd->add_option("--out", tf.out, "output directory");
  detail::add_config_flags(*train_cmd, tf.cfg);

  std::string eval_data, eval_ckpt, eval_split;
  auto* eval_cmd = app.add_subcommand("eval", "report masked accuracies of a checkpoint");
  eval_cmd->add_option("--data", eval_data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--split", eval_split, "override the split recorded in the checkpoint");

  ResponseFlags rf;
  auto* resp_cmd = app.add_subcommand("response", "export per-channel frequency responses as CSV");
  resp_cmd->add_option("--checkpoint", rf.checkpoint, "trained AdaGNN checkpoint");
  resp_cmd->add_option("--features", rf.features, "input channels of an untrained model (no checkpoint)");
  resp_cmd->add_option("--model", rf.model, "kind of the untrained model")->check(CLI::IsMember({"adagnn-s", "adagnn-r"}));
  resp_cmd->add_option("--layers", rf.layers, "layers of the untrained model")->check(CLI::PositiveNumber);
  resp_cmd->add_option("--hidden", rf.hidden, "hidden width of the untrained model")->check(CLI::PositiveNumber);
  resp_cmd->add_option("--channels", rf.channels, "comma-separated channel list (default: all)");
  resp_cmd->add_option("--grid", rf.grid, "grid points over [0, 2]")->check(CLI::Range(Index{2}, Index{1} << 24));
  resp_cmd->add_option("--out", rf.out, "CSV path");

  SweepFlags sf;
  auto* sweep_cmd = app.add_subcommand("sweep", "train over model kinds, depths and seeds");
  sweep_cmd->add_option("--data", sf.data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  sweep_cmd->add_option("--models", sf.models, "comma-separated model kinds");
  sweep_cmd->add_option("--depths", sf.depths, "comma-separated layer counts");
  sweep_cmd->add_option("--seeds", sf.seeds, "comma-separated seeds");
  sweep_cmd->add_option("--hidden", sf.hidden, "hidden width")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--split", sf.split, "file | planetoid | random:TRAIN,VAL");
  sweep_cmd->add_option("--out", sf.out, "output directory");
  detail::add_config_flags(*sweep_cmd, sf.cfg);

  SynthFlags yf;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset directory");
  synth_cmd->add_option("--kind", yf.kind, "citation | two-channel")->check(CLI::IsMember({"citation", "two-channel"}));
  synth_cmd->add_option("--out", yf.out, "output directory")->required();
  synth_cmd->add_option("--nodes", yf.nodes, "node count")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--classes", yf.classes, "class count (citation)")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--features", yf.features, "vocabulary size (citation)")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--homophily", yf.homophily, "intra-class edge probability (citation)")->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--avg-degree", yf.avg_degree, "average degree (citation)")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--topology", yf.topology, "path | star | cycle (two-channel)")
      ->check(CLI::IsMember({"path", "star", "cycle"}));
  synth_cmd->add_option("--seed", yf.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    if (*train_cmd) return cmd_train(tf, out);
    if (*eval_cmd) return cmd_eval(eval_data, eval_ckpt, eval_split, out);
    if (*resp_cmd) return cmd_response(rf, out);
    if (*sweep_cmd) return cmd_sweep(sf, out);
    if (*synth_cmd) return cmd_synth(yf, out);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return diverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return failure;
  }
  return usage;
}

}  // namespace adagnn::cli
