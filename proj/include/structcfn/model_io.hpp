#pragma once

#include <memory>
#include <string>
#include <vector>

#include "structcfn/data.hpp"
#include "structcfn/mlp.hpp"
#include "structcfn/model.hpp"

namespace structcfn {

/// Versioned on-disk model document: config, canonical parameter array,
/// feature names, standardization statistics. Round-trips are value-exact.
struct ModelDocument {
  int schema_version = 1;
  std::string kind;  // "structural_cfn" | "mlp"
  ModelConfig config;
  std::vector<std::string> param_names;
  std::vector<double> param_values;
  std::vector<std::string> feature_names;
  std::vector<double> col_mean, col_std;
  std::vector<bool> constant_cols;
  double target_mean = 0.0, target_std = 1.0;
};

ModelDocument make_document(const StructuralCFNModel& model, const Dataset& fitted);
ModelDocument make_document(const MLPModel& model, const ModelConfig& config,
                            const Dataset& fitted);

std::string document_to_json(const ModelDocument& doc);
ModelDocument document_from_json(const std::string& json_text);

/// Rebuilds the model and loads its parameters, verifying the canonical
/// name order matches.
std::unique_ptr<StructuralCFNModel> restore_cfn(const ModelDocument& doc);
std::unique_ptr<MLPModel> restore_mlp(const ModelDocument& doc);

void save_document(const ModelDocument& doc, const std::string& path);
ModelDocument load_document(const std::string& path);

/// Write-temp-then-rename.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace structcfn
