#include "structcfn/model_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace structcfn {

namespace {

using nlohmann::json;

json config_to_json(const ModelConfig& c) {
  json j;
  j["n_features"] = c.n_features;
  j["degree"] = c.degree;
  std::vector<std::string> kinds;
  for (HeadKind k : c.head_kinds) kinds.push_back(head_kind_name(k));
  j["head_kinds"] = kinds;
  j["gate_mode"] = gate_mode_name(c.gate_mode);
  j["node_mode"] = node_mode_name(c.node_mode);
  j["task"] = task_name(c.task);
  j["lambda_l1"] = c.lambda_l1;
  j["seed"] = c.seed;
  j["lr"] = c.lr;
  j["epochs"] = c.epochs;
  j["patience"] = c.patience;
  j["batch_size"] = c.batch_size;
  j["ln_eps"] = c.ln_eps;
  return j;
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.n_features = j.at("n_features").get<int>();
  c.degree = j.at("degree").get<int>();
  c.head_kinds.clear();
  for (const auto& k : j.at("head_kinds")) {
    c.head_kinds.push_back(head_kind_from_name(k.get<std::string>()));
  }
  c.gate_mode = gate_mode_from_name(j.at("gate_mode").get<std::string>());
  c.node_mode = node_mode_from_name(j.at("node_mode").get<std::string>());
  c.task = task_from_name(j.at("task").get<std::string>());
  c.lambda_l1 = j.at("lambda_l1").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.lr = j.at("lr").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.patience = j.at("patience").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.ln_eps = j.at("ln_eps").get<double>();
  return c;
}

void fill_standardization(ModelDocument& doc, const Dataset& fitted) {
  doc.feature_names = fitted.feature_names;
  doc.col_mean = fitted.col_mean;
  doc.col_std = fitted.col_std;
  doc.constant_cols = fitted.constant_cols;
  doc.target_mean = fitted.target_mean;
  doc.target_std = fitted.target_std;
}

}  // namespace

ModelDocument make_document(const StructuralCFNModel& model, const Dataset& fitted) {
  ModelDocument doc;
  doc.kind = "structural_cfn";
  doc.config = model.config();
  doc.param_names = model.params().names;
  doc.param_values = model.params().values;
  fill_standardization(doc, fitted);
  return doc;
}

ModelDocument make_document(const MLPModel& model, const ModelConfig& config,
                            const Dataset& fitted) {
  ModelDocument doc;
  doc.kind = "mlp";
  doc.config = config;
  doc.param_names = model.params().names;
  doc.param_values = model.params().values;
  fill_standardization(doc, fitted);
  return doc;
}

std::string document_to_json(const ModelDocument& doc) {
  json j;
  j["schema_version"] = doc.schema_version;
  j["kind"] = doc.kind;
  j["config"] = config_to_json(doc.config);
  j["params"] = {{"names", doc.param_names}, {"values", doc.param_values}};
  j["feature_names"] = doc.feature_names;
  j["standardization"] = {{"mean", doc.col_mean},
                          {"std", doc.col_std},
                          {"constant", doc.constant_cols},
                          {"target_mean", doc.target_mean},
                          {"target_std", doc.target_std}};
  return j.dump(2) + "\n";
}

ModelDocument document_from_json(const std::string& json_text) {
  const json j = json::parse(json_text);
  ModelDocument doc;
  doc.schema_version = j.at("schema_version").get<int>();
  if (doc.schema_version != 1) {
    throw std::runtime_error("unsupported model document schema version " +
                             std::to_string(doc.schema_version));
  }
  doc.kind = j.at("kind").get<std::string>();
  doc.config = config_from_json(j.at("config"));
  doc.param_names = j.at("params").at("names").get<std::vector<std::string>>();
  doc.param_values = j.at("params").at("values").get<std::vector<double>>();
  doc.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  const auto& s = j.at("standardization");
  doc.col_mean = s.at("mean").get<std::vector<double>>();
  doc.col_std = s.at("std").get<std::vector<double>>();
  doc.constant_cols = s.at("constant").get<std::vector<bool>>();
  doc.target_mean = s.at("target_mean").get<double>();
  doc.target_std = s.at("target_std").get<double>();
  return doc;
}

std::unique_ptr<StructuralCFNModel> restore_cfn(const ModelDocument& doc) {
  if (doc.kind != "structural_cfn") {
    throw std::runtime_error("model document kind is '" + doc.kind +
                             "', expected structural_cfn");
  }
  auto model = build_variant(doc.config);
  if (model->params().names != doc.param_names) {
    throw std::runtime_error("model document parameter order does not match layout");
  }
  model->params().values = doc.param_values;
  return model;
}

std::unique_ptr<MLPModel> restore_mlp(const ModelDocument& doc) {
  if (doc.kind != "mlp") {
    throw std::runtime_error("model document kind is '" + doc.kind + "', expected mlp");
  }
  auto model = std::make_unique<MLPModel>(doc.config.n_features, doc.config.task);
  if (model->params().names != doc.param_names) {
    throw std::runtime_error("model document parameter order does not match layout");
  }
  model->params().values = doc.param_values;
  return model;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

void save_document(const ModelDocument& doc, const std::string& path) {
  atomic_write(path, document_to_json(doc));
}

ModelDocument load_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model document '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return document_from_json(ss.str());
}

}  // namespace structcfn
