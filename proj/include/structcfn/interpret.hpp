#pragma once

#include <string>
#include <vector>

#include "structcfn/expr.hpp"
#include "structcfn/model.hpp"

namespace structcfn {

/// Row-normalized asymmetric influence matrix: m[i][j] is the normalized
/// influence of feature j on the context of feature i. Diagonal is exactly
/// 0; rows sum to 1 unless the node's projections are all zero, in which
/// case the row is all-zero and flagged.
struct InteractionSchema {
  std::vector<std::vector<double>> m;
  std::vector<std::string> feature_names;
  std::vector<bool> zero_rows;
};

InteractionSchema dependency_matrix(const StructuralCFNModel& model,
                                    const std::vector<std::string>& feature_names = {});

struct SymbolicLaw {
  int target = 0;
  int driver = 0;
  Expr::Ptr expression;
  std::string rendered;  // 2-decimal display form
  double max_roundtrip_error = 0.0;
};

/// Single-variable restriction of node i's context to driver j, all other
/// drivers held at 0 (the standardized mean). The expression tree is the
/// literal collapsed pipeline; max_roundtrip_error is the max deviation
/// between tree and model over the grid.
SymbolicLaw extract_symbolic(const StructuralCFNModel& model, int i, int j,
                             const std::vector<double>& grid);

struct GatePhysicsReport {
  std::vector<std::pair<double, double>> node_alpha;  // (alpha_sigmoid, alpha_tanh)
  std::pair<double, double> mean_alpha = {0.5, 0.5};
};

/// Per-node softmax(gate_p) and the dataset-level mean. Errors on
/// non-adaptive variants.
GatePhysicsReport gate_physics(const StructuralCFNModel& model);

/// Set of the k largest off-diagonal entries (ties break toward the lower
/// (i, j) lexicographic index).
std::vector<std::pair<int, int>> topk_entries(const InteractionSchema& schema, int k);

/// Fraction of matrix pairs whose top-k entry sets are identical.
double topk_consistency(const std::vector<InteractionSchema>& matrices, int k);

/// Default 101-point grid on [-3, 3] used by the symbolic round-trip checks.
std::vector<double> symbolic_grid();

// exports
std::string schema_to_csv(const InteractionSchema& schema);
std::string schema_to_dot(const InteractionSchema& schema, double threshold = 0.15);
std::string gate_report_to_csv(const GatePhysicsReport& report,
                               const std::vector<std::string>& feature_names);
std::string law_to_text(const SymbolicLaw& law, const std::vector<std::string>& feature_names);

}  // namespace structcfn
