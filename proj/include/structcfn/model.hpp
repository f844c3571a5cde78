#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "structcfn/basis.hpp"
#include "structcfn/param_store.hpp"
#include "structcfn/rng.hpp"

namespace structcfn {

enum class GateMode { adaptive, sigmoid_only, tanh_only };
enum class NodeMode { hybrid, sinusoid_only, polynomial_only, linear_open };
enum class Task { regression, binary };

std::string gate_mode_name(GateMode m);
GateMode gate_mode_from_name(const std::string& s);
std::string node_mode_name(NodeMode m);
NodeMode node_mode_from_name(const std::string& s);
std::string task_name(Task t);
Task task_from_name(const std::string& s);

struct ModelConfig {
  int n_features = 0;
  int degree = 2;
  std::vector<HeadKind> head_kinds = {HeadKind::linear, HeadKind::polynomial,
                                      HeadKind::polynomial, HeadKind::sinusoid};
  GateMode gate_mode = GateMode::adaptive;
  NodeMode node_mode = NodeMode::hybrid;
  Task task = Task::regression;
  double lambda_l1 = 1e-4;
  std::uint64_t seed = 42;
  double lr = 0.01;
  int epochs = 200;
  int patience = 20;
  int batch_size = 0;  // 0 = auto: 64 below 5000 rows, else 512
  double ln_eps = 1e-5;

  int n_heads() const { return static_cast<int>(head_kinds.size()); }
};

/// Named ablation variants (gate mode x node mode presets).
ModelConfig variant_config(const std::string& variant_name, ModelConfig base);
const std::vector<std::string>& variant_names();

/// Parameter-store offsets of one masked dependency node. Absent slots
/// (mode-dependent) are kNone. Masking is structural: the node's
/// projections have length N-1 and never see feature `index`.
struct HybridNode {
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  int index = 0;
  std::size_t v_poly = kNone;
  std::size_t b_poly = kNone;
  std::size_t coeffs = kNone;  // degree+1 scalars
  std::size_t v_sin = kNone;
  std::size_t amp = kNone;
  std::size_t freq = kNone;
  std::size_t phase = kNone;
  std::size_t gate_w = kNone;
  int gate_w_len = 0;
  std::size_t gate_p = kNone;  // adaptive gate only, 2 logits
};

/// Committee head offsets.
struct HeadSlot {
  HeadKind kind = HeadKind::linear;
  std::size_t weights = 0;  // 2N scalars
  std::size_t bias = HybridNode::kNone;
  std::size_t coeffs = HybridNode::kNone;
  std::size_t amp = HybridNode::kNone;
  std::size_t freq = HybridNode::kNone;
  std::size_t phase = HybridNode::kNone;
};

/// Full StructuralCFN: N masked hybrid dependency nodes feeding a
/// residual context u = [x, z], aggregated by the functional committee.
class StructuralCFNModel : public DiffModel {
 public:
  explicit StructuralCFNModel(ModelConfig config);

  ParamStore& params() override { return store_; }
  const ParamStore& params() const override { return store_; }
  int input_dim() const override { return config_.n_features; }
  const ModelConfig& config() const { return config_; }
  const std::vector<HybridNode>& nodes() const { return nodes_; }

  /// Kaiming-uniform projections/head weights, zero biases, identity-leaning
  /// polynomial coefficients, unit sinusoid, neutral gate logits. Draws are
  /// consumed in canonical parameter order.
  void init_params(Rng& rng);

  /// Context z_i of one node for the masked input slice (length N-1).
  double node_context(int node_index, std::span<const double> x_minus_i) const;

  /// Layer normalization without learned affine, population variance.
  static std::vector<double> layer_norm(std::span<const double> h, double eps);

  /// Full forward. Returns the prediction (pre-sigmoid logit for binary
  /// tasks) and caches the tape for backward(). z and u from the last
  /// forward are exposed for analysis.
  double forward(std::span<const double> x) override;
  void backward(double upstream) override;

  const std::vector<double>& last_contexts() const { return z_; }
  const std::vector<double>& last_residual_context() const { return u_; }

  double l1_penalty() const override;
  void add_l1_grad(double lambda) override;

  /// Gate mix softmax(gate_p) of one node; {1,0} / {0,1} for the static
  /// gate variants.
  std::pair<double, double> gate_alpha(int node_index) const;

  /// Indices of the projection entry of node i pointing at feature j,
  /// per basis channel; returns the (N-1)-slice position for feature j.
  int masked_slot(int node_index, int feature_index) const;

 private:
  struct NodeTape {
    double s_poly = 0.0, h_poly = 0.0;
    double s_sin = 0.0, h_sin = 0.0;
    double mu = 0.0, var = 0.0;
    double v0 = 0.0, v1 = 0.0;
    double g = 0.0, sg = 0.0, th = 0.0;
    double a1 = 0.5, a2 = 0.5;
  };
  struct HeadTape {
    double s = 0.0;  // w.u (+ bias where applicable)
  };

  void build_layout();
  double node_forward(int i, std::span<const double> x_minus_i, NodeTape& tape) const;
  void node_backward(int i, std::span<const double> x_minus_i, const NodeTape& tape,
                     double dz);

  ModelConfig config_;
  ParamStore store_;
  std::vector<HybridNode> nodes_;
  std::vector<HeadSlot> heads_;

  // tape of the last forward
  std::vector<double> x_;
  std::vector<double> z_;
  std::vector<double> u_;
  std::vector<std::vector<double>> xm_;  // masked slices of the last input
  std::vector<NodeTape> node_tapes_;
  std::vector<HeadTape> head_tapes_;
};

/// Exact learnable-scalar enumeration for `config` alongside the closed-form
/// approximation N*(2N+d+8) + (2N+1)*K_heads.
struct ParamCount {
  long exact = 0;
  long formula = 0;
};
ParamCount param_count(const ModelConfig& config);

/// Constructs (without initializing) the model for a config, validating
/// mode consistency.
std::unique_ptr<StructuralCFNModel> build_variant(const ModelConfig& config);

/// Mini-batch view: rows of standardized features plus targets.
struct Batch {
  const std::vector<std::vector<double>>* rows = nullptr;
  const std::vector<double>* targets = nullptr;
  const std::vector<std::size_t>* indices = nullptr;  // subset; null = all

  std::size_t size() const;
  std::span<const double> row(std::size_t k) const;
  double target(std::size_t k) const;
};

/// Mean data loss (MSE or binary cross-entropy on the logit) plus
/// lambda_l1 times the model's projection L1 norm.
double batch_loss(DiffModel& model, const Batch& batch, Task task, double lambda_l1);

/// Same loss, accumulating gradients into the model's store.
double batch_loss_and_grad(DiffModel& model, const Batch& batch, Task task,
                           double lambda_l1);

}  // namespace structcfn
