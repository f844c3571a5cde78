// structcfn command-line front end: train / cv / explain / synth / stability.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "structcfn/cv.hpp"
#include "structcfn/data.hpp"
#include "structcfn/interpret.hpp"
#include "structcfn/model_io.hpp"
#include "structcfn/training.hpp"

namespace {

using nlohmann::json;
using namespace structcfn;

constexpr const char* kToolVersion = "structcfn 1.0.0";
constexpr double kBonferroniThreshold = 0.0167;

json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for checksum");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(data.data(), data.size())));
  return std::string(buf);
}

/// Collects emitted artifacts and writes the run manifest last.
class ManifestWriter {
 public:
  ManifestWriter(std::string command, json config_echo)
      : command_(std::move(command)), config_(std::move(config_echo)) {}

  void add_input(const std::string& path) {
    inputs_.push_back({{"path", path}, {"checksum", file_checksum(path)}});
  }
  void emit(const std::string& path, const std::string& content) {
    atomic_write(path, content);
    outputs_.push_back({{"path", path}, {"checksum", file_checksum(path)}});
  }
  void write(const std::string& manifest_path) {
    json j;
    j["tool_version"] = kToolVersion;
    j["command"] = command_;
    j["config"] = config_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    atomic_write(manifest_path, j.dump(2) + "\n");
  }

 private:
  std::string command_;
  json config_;
  json inputs_ = json::array();
  json outputs_ = json::array();
};

Task parse_task(const std::string& s) {
  if (s == "reg" || s == "regression") return Task::regression;
  if (s == "bin" || s == "binary") return Task::binary;
  throw CLI::ValidationError("--task", "must be reg or bin");
}

struct CommonModelFlags {
  std::string variant = "differentiable_adaptive";
  std::uint64_t seed = 42;
  double lambda_l1 = 1e-4;
  double lr = 0.01;
  int epochs = 200;
  int patience = 20;
  int batch_size = 0;
  int degree = 2;
  bool high_rank = false;
};

void add_model_flags(CLI::App* cmd, CommonModelFlags& f) {
  cmd->add_option("--variant", f.variant, "ablation variant")
      ->check(CLI::IsMember(variant_names()));
  cmd->add_option("--seed", f.seed, "global seed");
  cmd->add_option("--lambda", f.lambda_l1, "L1 penalty on node projections");
  cmd->add_option("--lr", f.lr, "Adam learning rate");
  cmd->add_option("--epochs", f.epochs, "max training epochs");
  cmd->add_option("--patience", f.patience, "early-stopping patience");
  cmd->add_option("--batch-size", f.batch_size, "0 = auto (64 small / 512 large)");
  cmd->add_option("--degree", f.degree, "polynomial degree d");
  cmd->add_flag("--high-rank", f.high_rank, "18-head extended committee");
}

std::vector<HeadKind> high_rank_heads() {
  // 18 heads: 1 linear + 9 polynomial + 8 sinusoid
  std::vector<HeadKind> kinds = {HeadKind::linear};
  for (int i = 0; i < 9; ++i) kinds.push_back(HeadKind::polynomial);
  for (int i = 0; i < 8; ++i) kinds.push_back(HeadKind::sinusoid);
  return kinds;
}

ModelConfig make_config(const CommonModelFlags& f, int n_features, Task task) {
  ModelConfig base;
  base.n_features = n_features;
  base.task = task;
  base.seed = f.seed;
  base.lambda_l1 = f.lambda_l1;
  base.lr = f.lr;
  base.epochs = f.epochs;
  base.patience = f.patience;
  base.batch_size = f.batch_size;
  base.degree = f.degree;
  if (f.high_rank) base.head_kinds = high_rank_heads();
  return variant_config(f.variant, base);
}

json config_echo(const ModelConfig& c, const std::string& variant) {
  json j;
  j["variant"] = variant;
  j["n_features"] = c.n_features;
  j["degree"] = c.degree;
  j["n_heads"] = c.n_heads();
  j["gate_mode"] = gate_mode_name(c.gate_mode);
  j["node_mode"] = node_mode_name(c.node_mode);
  j["task"] = task_name(c.task);
  j["lambda_l1"] = c.lambda_l1;
  j["seed"] = c.seed;
  j["lr"] = c.lr;
  j["epochs"] = c.epochs;
  j["patience"] = c.patience;
  j["batch_size"] = c.batch_size;
  return j;
}

json train_report_json(const TrainReport& r) {
  json losses = json::array();
  for (const auto& [tr, va] : r.epoch_losses) losses.push_back({{"train", tr}, {"val", va}});
  json j;
  j["epoch_losses"] = losses;
  j["best_epoch"] = r.best_epoch;
  j["stopped_early"] = r.stopped_early;
  j["final_store_digest"] = r.final_store_digest;
  return j;
}

// ---- subcommands ----

int cmd_train(const std::string& data_path, const std::string& target_col,
              const std::string& task_str, const CommonModelFlags& flags,
              const std::string& out_path) {
  const Task task = parse_task(task_str);
  Dataset raw = load_csv(data_path, target_col, task);
  std::vector<std::size_t> all(raw.n_rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const Dataset ds = standardize(raw, all);

  const ModelConfig config = make_config(flags, ds.n_features(), task);
  ManifestWriter manifest("train", config_echo(config, flags.variant));
  manifest.add_input(data_path);

  auto model = init_model(config);
  const TrainReport report = train(*model, ds, config);

  manifest.emit(out_path, document_to_json(make_document(*model, ds)));
  const std::string report_path = out_path + ".train.json";
  manifest.emit(report_path, train_report_json(report).dump(2) + "\n");
  manifest.write(out_path + ".manifest.json");

  const Batch full{&ds.rows, &ds.target, nullptr};
  const double final_loss = batch_loss(*model, full, task, 0.0);
  const ParamCount pc = param_count(config);
  std::cout << "trained on " << ds.n_rows() << " rows, " << ds.n_features()
            << " features\n"
            << "final " << (task == Task::regression ? "mse" : "log_loss") << " = "
            << final_loss << "\n"
            << "best_epoch = " << report.best_epoch
            << ", stopped_early = " << (report.stopped_early ? "yes" : "no") << "\n"
            << "param_count exact = " << pc.exact << ", formula = " << pc.formula << "\n"
            << "model written to " << out_path << "\n";
  return 0;
}

int cmd_cv(const std::string& data_path, const std::string& target_col,
           const std::string& task_str, int folds, const std::string& baseline,
           const CommonModelFlags& flags, const std::string& out_path) {
  const Task task = parse_task(task_str);
  const Dataset raw = load_csv(data_path, target_col, task);
  const ModelConfig config = make_config(flags, raw.n_features(), task);

  ManifestWriter manifest("cv", config_echo(config, flags.variant));
  manifest.add_input(data_path);

  CVOptions options;
  options.folds = folds;
  options.with_mlp_baseline = baseline == "mlp";
  const CVResult result = run_cv(raw, config, options);

  json j;
  j["schema_version"] = 1;
  j["metric"] = task == Task::regression ? "mse" : "log_loss";
  j["folds"] = folds;
  j["model"] = {{"per_fold", result.fold_metrics_model},
                {"mean", result.mean_model},
                {"sd", result.sd_model}};
  if (options.with_mlp_baseline) {
    j["baseline_mlp"] = {{"per_fold", result.fold_metrics_baseline},
                         {"mean", result.mean_baseline},
                         {"sd", result.sd_baseline}};
    j["paired_ttest"] = {{"t", finite_or_string(result.ttest.t)},
                         {"p", result.ttest.p},
                         {"degenerate", result.ttest.degenerate},
                         {"bonferroni_threshold", kBonferroniThreshold},
                         {"significant_bonferroni", result.ttest.p < kBonferroniThreshold}};
  }
  j["xi"] = result.xi;
  j["seed"] = flags.seed;
  manifest.emit(out_path, j.dump(2) + "\n");
  manifest.write(out_path + ".manifest.json");

  std::cout << "cv mean = " << result.mean_model << " +/- " << result.sd_model << "\n";
  if (options.with_mlp_baseline) {
    std::cout << "mlp mean = " << result.mean_baseline << " +/- " << result.sd_baseline
              << ", paired t = " << result.ttest.t << ", p = " << result.ttest.p << "\n";
  }
  std::cout << "xi = " << result.xi << "\nreport written to " << out_path << "\n";
  return 0;
}

int cmd_explain(const std::string& model_path, const std::string& out_prefix,
                const std::string& pair_str, double threshold) {
  int pair_i = -1, pair_j = -1;
  const bool has_pair = !pair_str.empty();
  if (has_pair) {
    const auto comma = pair_str.find(',');
    if (comma == std::string::npos) {
      throw CLI::ValidationError("--pair", "expected i,j");
    }
    pair_i = std::stoi(pair_str.substr(0, comma));
    pair_j = std::stoi(pair_str.substr(comma + 1));
  }

  const ModelDocument doc = load_document(model_path);
  auto model = restore_cfn(doc);

  ManifestWriter manifest("explain", config_echo(doc.config, node_mode_name(doc.config.node_mode)));
  manifest.add_input(model_path);

  const InteractionSchema schema = dependency_matrix(*model, doc.feature_names);
  manifest.emit(out_prefix + ".matrix.csv", schema_to_csv(schema));
  manifest.emit(out_prefix + ".matrix.dot", schema_to_dot(schema, threshold));
  if (doc.config.gate_mode == GateMode::adaptive &&
      doc.config.node_mode != NodeMode::linear_open) {
    manifest.emit(out_prefix + ".gates.csv",
                  gate_report_to_csv(gate_physics(*model), doc.feature_names));
  }
  if (has_pair) {
    const int n = doc.config.n_features;
    if (pair_i < 0 || pair_i >= n || pair_j < 0 || pair_j >= n || pair_i == pair_j) {
      throw std::runtime_error("--pair " + pair_str + " is out of range for " +
                               std::to_string(n) + " features (i != j required)");
    }
    const SymbolicLaw law = extract_symbolic(*model, pair_i, pair_j, symbolic_grid());
    manifest.emit(out_prefix + ".law_" + std::to_string(pair_i) + "_" +
                      std::to_string(pair_j) + ".txt",
                  law_to_text(law, doc.feature_names));
  }
  manifest.write(out_prefix + ".manifest.json");
  std::cout << "explanation artifacts written with prefix " << out_prefix << "\n";
  return 0;
}

int cmd_synth(const std::string& mode_str, int n_seeds, std::size_t n_samples,
              double noise_sd, std::uint64_t base_seed, const CommonModelFlags& flags,
              const std::string& out_path, const std::string& data_prefix) {
  SynthSpec spec;
  if (mode_str == "basic") {
    spec.mode = SynthSpec::Mode::basic;
  } else if (mode_str == "extended") {
    spec.mode = SynthSpec::Mode::extended;
  } else {
    throw CLI::ValidationError("--mode", "must be basic or extended");
  }
  spec.n_samples = n_samples;
  spec.noise_sd = noise_sd;

  const std::vector<std::pair<int, int>> true_pairs =
      spec.mode == SynthSpec::Mode::basic ? std::vector<std::pair<int, int>>{{1, 2}}
                                          : spec.coupled_pairs;
  const std::vector<int> noise_features = spec.noise_features();

  json cfg_echo;
  cfg_echo["mode"] = mode_str;
  cfg_echo["n_samples"] = n_samples;
  cfg_echo["noise_sd"] = noise_sd;
  cfg_echo["base_seed"] = base_seed;
  cfg_echo["seeds"] = n_seeds;
  ManifestWriter manifest("synth", cfg_echo);

  json runs = json::array();
  int successes = 0;
  for (int s = 0; s < n_seeds; ++s) {
    spec.seed = base_seed + static_cast<std::uint64_t>(s);
    Dataset raw = synth_generate(spec);
    if (!data_prefix.empty()) {
      const std::string path = data_prefix + "_seed" + std::to_string(spec.seed) + ".csv";
      write_csv(raw, path);
      manifest.add_input(path);
    }
    std::vector<std::size_t> all(raw.n_rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const Dataset ds = standardize(raw, all);

    CommonModelFlags run_flags = flags;
    run_flags.seed = spec.seed;
    const ModelConfig config = make_config(run_flags, ds.n_features(), Task::regression);
    auto model = init_model(config);
    train(*model, ds, config);
    const InteractionSchema schema = dependency_matrix(*model, ds.feature_names);
    const RecoveryScore score = recovery_score(schema, true_pairs, noise_features);
    if (score.success) ++successes;

    json run;
    run["seed"] = spec.seed;
    run["pair_scores"] = score.pair_scores;
    run["max_noise_score"] = score.max_noise_score;
    run["success"] = score.success;
    runs.push_back(run);
    std::cout << "seed " << spec.seed << ": success = " << (score.success ? "yes" : "no")
              << ", max_noise = " << score.max_noise_score << "\n";
  }

  json j;
  j["schema_version"] = 1;
  j["mode"] = mode_str;
  j["runs"] = runs;
  j["recovery_success_rate"] =
      static_cast<double>(successes) / static_cast<double>(n_seeds);
  manifest.emit(out_path, j.dump(2) + "\n");
  manifest.write(out_path + ".manifest.json");
  std::cout << "recovery success rate = " << successes << "/" << n_seeds << "\n";
  return 0;
}

int cmd_stability(const std::string& data_path, const std::string& target_col,
                  const std::string& task_str, int n_seeds,
                  const std::string& seed_list, int topk, std::size_t n_samples,
                  std::uint64_t data_seed, const CommonModelFlags& flags,
                  const std::string& out_path) {
  Dataset raw;
  if (!data_path.empty()) {
    raw = load_csv(data_path, target_col, parse_task(task_str));
  } else {
    SynthSpec spec;
    spec.mode = SynthSpec::Mode::basic;
    spec.n_samples = n_samples;
    spec.seed = data_seed;
    raw = synth_generate(spec);
  }
  std::vector<std::size_t> all(raw.n_rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const Dataset ds = standardize(raw, all);

  std::vector<std::uint64_t> seeds;
  if (!seed_list.empty()) {
    std::stringstream ss(seed_list);
    std::string item;
    while (std::getline(ss, item, ',')) seeds.push_back(std::stoull(item));
  } else {
    for (int s = 0; s < n_seeds; ++s) seeds.push_back(flags.seed + static_cast<std::uint64_t>(s));
  }
  if (seeds.size() < 2) throw std::runtime_error("stability requires >= 2 seeds");

  const long max_k = static_cast<long>(ds.n_features()) * (ds.n_features() - 1);
  if (topk < 1 || topk > max_k) {
    throw std::runtime_error("--topk must be in [1, N(N-1)] = [1, " +
                             std::to_string(max_k) + "]");
  }

  json cfg_echo;
  cfg_echo["seeds"] = seeds;
  cfg_echo["topk"] = topk;
  ManifestWriter manifest("stability", cfg_echo);
  if (!data_path.empty()) manifest.add_input(data_path);

  std::vector<InteractionSchema> schemas;
  json per_seed = json::array();
  for (std::uint64_t s : seeds) {
    CommonModelFlags run_flags = flags;
    run_flags.seed = s;
    const ModelConfig config = make_config(run_flags, ds.n_features(), ds.task);
    auto model = init_model(config);
    train(*model, ds, config);
    schemas.push_back(dependency_matrix(*model, ds.feature_names));
    json entry;
    entry["seed"] = s;
    json top = json::array();
    for (const auto& [i, j] : topk_entries(schemas.back(), topk)) {
      top.push_back({i, j});
    }
    entry["topk"] = top;
    per_seed.push_back(entry);
  }
  const double consistency = topk_consistency(schemas, topk);

  json j;
  j["schema_version"] = 1;
  j["topk"] = topk;
  j["per_seed"] = per_seed;
  j["topk_consistency"] = consistency;
  manifest.emit(out_path, j.dump(2) + "\n");
  manifest.write(out_path + ".manifest.json");
  std::cout << "top-" << topk << " consistency = " << consistency << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural compositional function networks for tabular data"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "train one model on a CSV dataset");
  std::string data_path, target_col, task_str = "reg", out_path = "model.json";
  CommonModelFlags train_flags;
  train_cmd->add_option("--data", data_path, "input CSV")->required();
  train_cmd->add_option("--target", target_col, "target column name")->required();
  train_cmd->add_option("--task", task_str, "reg | bin")->required();
  train_cmd->add_option("--out", out_path, "output model document");
  add_model_flags(train_cmd, train_flags);

  // cv
  auto* cv_cmd = app.add_subcommand("cv", "k-fold cross-validation");
  std::string cv_data, cv_target, cv_task = "reg", cv_out = "cv_report.json";
  std::string baseline;
  int folds = 10;
  CommonModelFlags cv_flags;
  cv_cmd->add_option("--data", cv_data, "input CSV")->required();
  cv_cmd->add_option("--target", cv_target, "target column name")->required();
  cv_cmd->add_option("--task", cv_task, "reg | bin")->required();
  cv_cmd->add_option("--folds", folds, "number of folds");
  cv_cmd->add_option("--baseline", baseline, "baseline model (mlp)")
      ->check(CLI::IsMember({"mlp"}));
  cv_cmd->add_option("--out", cv_out, "output report path");
  add_model_flags(cv_cmd, cv_flags);

  // explain
  auto* explain_cmd = app.add_subcommand("explain", "interpretability artifacts");
  std::string model_path, out_prefix = "explain", pair_str;
  double threshold = 0.15;
  explain_cmd->add_option("--model", model_path, "model document")->required();
  explain_cmd->add_option("--out-prefix", out_prefix, "output path prefix");
  explain_cmd->add_option("--pair", pair_str, "target,driver for symbolic extraction");
  explain_cmd->add_option("--threshold", threshold, "DOT edge threshold");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "synthetic recovery experiment");
  std::string mode = "basic", synth_out = "synth_summary.json", data_prefix;
  int synth_seeds = 5;
  std::size_t n_samples = 5000;
  double noise_sd = 0.1;
  std::uint64_t base_seed = 42;
  CommonModelFlags synth_flags;
  synth_cmd->add_option("--mode", mode, "basic | extended")->required();
  synth_cmd->add_option("--seeds", synth_seeds, "number of seeded trials");
  synth_cmd->add_option("--n", n_samples, "samples per trial");
  synth_cmd->add_option("--noise-sd", noise_sd, "target noise sd");
  synth_cmd->add_option("--base-seed", base_seed, "first trial seed");
  synth_cmd->add_option("--out", synth_out, "output summary path");
  synth_cmd->add_option("--write-data", data_prefix, "also write generated CSVs");
  add_model_flags(synth_cmd, synth_flags);

  // stability
  auto* stab_cmd = app.add_subcommand("stability", "top-k consistency across seeds");
  std::string stab_data, stab_target, stab_task = "reg", seed_list;
  std::string stab_out = "stability.json";
  int stab_seeds = 10, topk = 3;
  std::size_t stab_n = 5000;
  std::uint64_t data_seed = 42;
  CommonModelFlags stab_flags;
  stab_cmd->add_option("--data", stab_data, "input CSV (default: basic synthetic)");
  stab_cmd->add_option("--target", stab_target, "target column name");
  stab_cmd->add_option("--task", stab_task, "reg | bin");
  stab_cmd->add_option("--seeds", stab_seeds, "number of seeds");
  stab_cmd->add_option("--seed-list", seed_list, "explicit comma-separated seeds");
  stab_cmd->add_option("--topk", topk, "entries per top-k set");
  stab_cmd->add_option("--n", stab_n, "synthetic sample count");
  stab_cmd->add_option("--data-seed", data_seed, "synthetic data seed");
  stab_cmd->add_option("--out", stab_out, "output path");
  add_model_flags(stab_cmd, stab_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*train_cmd) {
      return cmd_train(data_path, target_col, task_str, train_flags, out_path);
    }
    if (*cv_cmd) {
      return cmd_cv(cv_data, cv_target, cv_task, folds, baseline, cv_flags, cv_out);
    }
    if (*explain_cmd) {
      return cmd_explain(model_path, out_prefix, pair_str, threshold);
    }
    if (*synth_cmd) {
      return cmd_synth(mode, synth_seeds, n_samples, noise_sd, base_seed, synth_flags,
                       synth_out, data_prefix);
    }
    if (*stab_cmd) {
      return cmd_stability(stab_data, stab_target, stab_task, stab_seeds, seed_list,
                           topk, stab_n, data_seed, stab_flags, stab_out);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
