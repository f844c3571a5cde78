#include "structcfn/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace structcfn {

namespace {

constexpr std::size_t kNone = HybridNode::kNone;

std::string node_name(int i, const char* slot) {
  return "node." + std::to_string(i) + "." + slot;
}
std::string node_name(int i, const char* slot, int k) {
  return node_name(i, slot) + "." + std::to_string(k);
}
std::string head_name(int j, const char* slot) {
  return "head." + std::to_string(j) + "." + slot;
}
std::string head_name(int j, const char* slot, int k) {
  return head_name(j, slot) + "." + std::to_string(k);
}

}  // namespace

std::string gate_mode_name(GateMode m) {
  switch (m) {
    case GateMode::adaptive: return "adaptive";
    case GateMode::sigmoid_only: return "sigmoid_only";
    case GateMode::tanh_only: return "tanh_only";
  }
  throw std::logic_error("bad gate mode");
}

GateMode gate_mode_from_name(const std::string& s) {
  if (s == "adaptive") return GateMode::adaptive;
  if (s == "sigmoid_only") return GateMode::sigmoid_only;
  if (s == "tanh_only") return GateMode::tanh_only;
  throw std::invalid_argument("unknown gate mode '" + s + "'");
}

std::string node_mode_name(NodeMode m) {
  switch (m) {
    case NodeMode::hybrid: return "hybrid";
    case NodeMode::sinusoid_only: return "sinusoid_only";
    case NodeMode::polynomial_only: return "polynomial_only";
    case NodeMode::linear_open: return "linear_open";
  }
  throw std::logic_error("bad node mode");
}

NodeMode node_mode_from_name(const std::string& s) {
  if (s == "hybrid") return NodeMode::hybrid;
  if (s == "sinusoid_only") return NodeMode::sinusoid_only;
  if (s == "polynomial_only") return NodeMode::polynomial_only;
  if (s == "linear_open") return NodeMode::linear_open;
  throw std::invalid_argument("unknown node mode '" + s + "'");
}

std::string task_name(Task t) {
  return t == Task::regression ? "regression" : "binary";
}

Task task_from_name(const std::string& s) {
  if (s == "regression") return Task::regression;
  if (s == "binary") return Task::binary;
  throw std::invalid_argument("unknown task '" + s + "'");
}

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names = {
      "differentiable_adaptive", "gated_attention", "tanh_polarity",
      "sinusoidal_only", "polynomial_only", "open_interaction"};
  return names;
}

ModelConfig variant_config(const std::string& variant_name, ModelConfig base) {
  if (variant_name == "differentiable_adaptive") {
    base.gate_mode = GateMode::adaptive;
    base.node_mode = NodeMode::hybrid;
  } else if (variant_name == "gated_attention") {
    base.gate_mode = GateMode::sigmoid_only;
    base.node_mode = NodeMode::hybrid;
  } else if (variant_name == "tanh_polarity") {
    base.gate_mode = GateMode::tanh_only;
    base.node_mode = NodeMode::hybrid;
  } else if (variant_name == "sinusoidal_only") {
    base.gate_mode = GateMode::adaptive;
    base.node_mode = NodeMode::sinusoid_only;
  } else if (variant_name == "polynomial_only") {
    base.gate_mode = GateMode::adaptive;
    base.node_mode = NodeMode::polynomial_only;
  } else if (variant_name == "open_interaction") {
    base.node_mode = NodeMode::linear_open;
  } else {
    throw std::invalid_argument("unknown variant '" + variant_name + "'");
  }
  return base;
}

StructuralCFNModel::StructuralCFNModel(ModelConfig config)
    : config_(std::move(config)) {
  const int n = config_.n_features;
  if (n < 2) {
    throw std::invalid_argument(
        "StructuralCFN requires at least 2 features; the masked slice x_{-i} "
        "would be empty for N=1");
  }
  if (config_.degree < 1) throw std::invalid_argument("degree must be >= 1");
  if (config_.head_kinds.empty()) throw std::invalid_argument("head_kinds empty");
  const long n_linear = std::count(config_.head_kinds.begin(),
                                   config_.head_kinds.end(), HeadKind::linear);
  if (n_linear != 1 || config_.head_kinds.front() != HeadKind::linear) {
    throw std::invalid_argument(
        "committee must contain exactly one linear bypass head, listed first");
  }
  build_layout();
  x_.resize(n);
  z_.resize(n);
  u_.resize(2 * n);
  node_tapes_.resize(n);
  head_tapes_.resize(heads_.size());
  xm_.assign(n, std::vector<double>(n - 1, 0.0));
}

void StructuralCFNModel::build_layout() {
  const int n = config_.n_features;
  const int d = config_.degree;
  const NodeMode nm = config_.node_mode;
  const GateMode gm = config_.gate_mode;

  nodes_.clear();
  for (int i = 0; i < n; ++i) {
    HybridNode node;
    node.index = i;
    const bool has_poly = nm == NodeMode::hybrid || nm == NodeMode::polynomial_only ||
                          nm == NodeMode::linear_open;
    const bool has_sin = nm == NodeMode::hybrid || nm == NodeMode::sinusoid_only;
    if (has_poly) {
      node.v_poly = store_.size();
      for (int k = 0; k < n - 1; ++k) store_.add(node_name(i, "v_poly", k));
      node.b_poly = store_.add(node_name(i, "b_poly"));
      if (nm != NodeMode::linear_open) {
        node.coeffs = store_.size();
        for (int k = 0; k <= d; ++k) store_.add(node_name(i, "coeff", k));
      }
    }
    if (has_sin) {
      node.v_sin = store_.size();
      for (int k = 0; k < n - 1; ++k) store_.add(node_name(i, "v_sin", k));
      node.amp = store_.add(node_name(i, "amp"));
      node.freq = store_.add(node_name(i, "freq"));
      node.phase = store_.add(node_name(i, "phase"));
    }
    if (nm != NodeMode::linear_open) {
      node.gate_w_len = nm == NodeMode::hybrid ? 2 : 1;
      node.gate_w = store_.size();
      for (int k = 0; k < node.gate_w_len; ++k) store_.add(node_name(i, "gate_w", k));
      if (gm == GateMode::adaptive) {
        node.gate_p = store_.size();
        store_.add(node_name(i, "gate_p", 0));
        store_.add(node_name(i, "gate_p", 1));
      }
    }
    nodes_.push_back(node);
  }

  heads_.clear();
  for (int j = 0; j < config_.n_heads(); ++j) {
    HeadSlot head;
    head.kind = config_.head_kinds[static_cast<std::size_t>(j)];
    head.weights = store_.size();
    for (int k = 0; k < 2 * n; ++k) store_.add(head_name(j, "w", k));
    switch (head.kind) {
      case HeadKind::linear:
      case HeadKind::sigmoid:
        head.bias = store_.add(head_name(j, "bias"));
        break;
      case HeadKind::polynomial:
        head.bias = store_.add(head_name(j, "bias"));
        head.coeffs = store_.size();
        for (int k = 0; k <= d; ++k) store_.add(head_name(j, "coeff", k));
        break;
      case HeadKind::sinusoid:
        head.amp = store_.add(head_name(j, "amp"));
        head.freq = store_.add(head_name(j, "freq"));
        head.phase = store_.add(head_name(j, "phase"));
        break;
    }
    heads_.push_back(head);
  }
}

void StructuralCFNModel::init_params(Rng& rng) {
  const int n = config_.n_features;
  const double proj_bound = std::sqrt(6.0 / static_cast<double>(n - 1));
  const double head_bound = std::sqrt(6.0 / static_cast<double>(2 * n));
  auto& v = store_.values;

  // Walk in canonical (layout) order so RNG consumption is reproducible.
  for (const auto& node : nodes_) {
    if (node.v_poly != kNone) {
      for (int k = 0; k < n - 1; ++k) {
        v[node.v_poly + static_cast<std::size_t>(k)] = rng.uniform(-proj_bound, proj_bound);
      }
      v[node.b_poly] = 0.0;
      if (node.coeffs != kNone) {
        for (int k = 0; k <= config_.degree; ++k) {
          v[node.coeffs + static_cast<std::size_t>(k)] = k == 1 ? 1.0 : 0.0;
        }
      }
    }
    if (node.v_sin != kNone) {
      for (int k = 0; k < n - 1; ++k) {
        v[node.v_sin + static_cast<std::size_t>(k)] = rng.uniform(-proj_bound, proj_bound);
      }
      v[node.amp] = 1.0;
      v[node.freq] = 1.0;
      v[node.phase] = 0.0;
    }
    if (node.gate_w != kNone) {
      const double gate_bound = std::sqrt(6.0 / static_cast<double>(node.gate_w_len));
      for (int k = 0; k < node.gate_w_len; ++k) {
        v[node.gate_w + static_cast<std::size_t>(k)] = rng.uniform(-gate_bound, gate_bound);
      }
    }
    if (node.gate_p != kNone) {
      v[node.gate_p] = 0.0;
      v[node.gate_p + 1] = 0.0;
    }
  }
  for (const auto& head : heads_) {
    for (int k = 0; k < 2 * n; ++k) {
      v[head.weights + static_cast<std::size_t>(k)] = rng.uniform(-head_bound, head_bound);
    }
    if (head.bias != kNone) v[head.bias] = 0.0;
    if (head.coeffs != kNone) {
      for (int k = 0; k <= config_.degree; ++k) {
        v[head.coeffs + static_cast<std::size_t>(k)] = k == 1 ? 1.0 : 0.0;
      }
    }
    if (head.amp != kNone) {
      v[head.amp] = 1.0;
      v[head.freq] = 1.0;
      v[head.phase] = 0.0;
    }
  }
}

std::vector<double> StructuralCFNModel::layer_norm(std::span<const double> h,
                                                   double eps) {
  double mu = 0.0;
  for (double x : h) mu += x;
  mu /= static_cast<double>(h.size());
  double var = 0.0;
  for (double x : h) var += (x - mu) * (x - mu);
  var /= static_cast<double>(h.size());
  const double s = std::sqrt(var + eps);
  std::vector<double> out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) out[i] = (h[i] - mu) / s;
  return out;
}

int StructuralCFNModel::masked_slot(int node_index, int feature_index) const {
  if (feature_index == node_index) return -1;
  return feature_index < node_index ? feature_index : feature_index - 1;
}

std::pair<double, double> StructuralCFNModel::gate_alpha(int node_index) const {
  const auto& node = nodes_[static_cast<std::size_t>(node_index)];
  switch (config_.gate_mode) {
    case GateMode::sigmoid_only: return {1.0, 0.0};
    case GateMode::tanh_only: return {0.0, 1.0};
    case GateMode::adaptive: break;
  }
  if (node.gate_p == kNone) return {1.0, 0.0};
  const double p0 = store_.values[node.gate_p];
  const double p1 = store_.values[node.gate_p + 1];
  const double m = std::max(p0, p1);
  const double e0 = std::exp(p0 - m);
  const double e1 = std::exp(p1 - m);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

double StructuralCFNModel::node_forward(int i, std::span<const double> xm,
                                        NodeTape& tape) const {
  const auto& node = nodes_[static_cast<std::size_t>(i)];
  const auto& v = store_.values;
  const NodeMode nm = config_.node_mode;

  if (nm == NodeMode::linear_open) {
    double s = v[node.b_poly];
    for (std::size_t k = 0; k < xm.size(); ++k) s += v[node.v_poly + k] * xm[k];
    tape.s_poly = s;
    return s;
  }

  double gate_input = 0.0;
  if (nm == NodeMode::hybrid || nm == NodeMode::polynomial_only) {
    double s = v[node.b_poly];
    for (std::size_t k = 0; k < xm.size(); ++k) s += v[node.v_poly + k] * xm[k];
    tape.s_poly = s;
    tape.h_poly = poly_scalar(
        std::span<const double>(&v[node.coeffs], static_cast<std::size_t>(config_.degree) + 1), s);
  }
  if (nm == NodeMode::hybrid || nm == NodeMode::sinusoid_only) {
    double s = 0.0;
    for (std::size_t k = 0; k < xm.size(); ++k) s += v[node.v_sin + k] * xm[k];
    tape.s_sin = s;
    tape.h_sin = v[node.amp] * std::sin(v[node.freq] * s + v[node.phase]);
  }

  if (nm == NodeMode::hybrid) {
    tape.mu = 0.5 * (tape.h_poly + tape.h_sin);
    const double d0 = tape.h_poly - tape.mu;
    const double d1 = tape.h_sin - tape.mu;
    tape.var = 0.5 * (d0 * d0 + d1 * d1);
    const double s = std::sqrt(tape.var + config_.ln_eps);
    tape.v0 = d0 / s;
    tape.v1 = d1 / s;
    gate_input = v[node.gate_w] * tape.v0 + v[node.gate_w + 1] * tape.v1;
  } else {
    // single basis channel: the scalar feeds the gate projection directly
    tape.v0 = nm == NodeMode::polynomial_only ? tape.h_poly : tape.h_sin;
    gate_input = v[node.gate_w] * tape.v0;
  }

  tape.g = gate_input;
  tape.sg = sigmoid(gate_input);
  tape.th = std::tanh(gate_input);
  switch (config_.gate_mode) {
    case GateMode::sigmoid_only:
      tape.a1 = 1.0;
      tape.a2 = 0.0;
      return tape.sg;
    case GateMode::tanh_only:
      tape.a1 = 0.0;
      tape.a2 = 1.0;
      return tape.th;
    case GateMode::adaptive: {
      const auto [a1, a2] = gate_alpha(i);
      tape.a1 = a1;
      tape.a2 = a2;
      return a1 * tape.sg + a2 * tape.th;
    }
  }
  throw std::logic_error("bad gate mode");
}

double StructuralCFNModel::node_context(int node_index,
                                        std::span<const double> x_minus_i) const {
  if (static_cast<int>(x_minus_i.size()) != config_.n_features - 1) {
    throw std::invalid_argument("node_context: expected input of length " +
                                std::to_string(config_.n_features - 1) + ", got " +
                                std::to_string(x_minus_i.size()));
  }
  NodeTape tape;
  return node_forward(node_index, x_minus_i, tape);
}

double StructuralCFNModel::forward(std::span<const double> x) {
  const int n = config_.n_features;
  if (static_cast<int>(x.size()) != n) {
    throw std::invalid_argument("forward: expected input of length " +
                                std::to_string(n) + ", got " +
                                std::to_string(x.size()));
  }
  for (double xi : x) {
    if (!std::isfinite(xi)) throw std::invalid_argument("forward: non-finite input");
  }
  std::copy(x.begin(), x.end(), x_.begin());

  for (int i = 0; i < n; ++i) {
    auto& xm = xm_[static_cast<std::size_t>(i)];
    int w = 0;
    for (int j = 0; j < n; ++j) {
      if (j != i) xm[static_cast<std::size_t>(w++)] = x[static_cast<std::size_t>(j)];
    }
    z_[static_cast<std::size_t>(i)] =
        node_forward(i, xm, node_tapes_[static_cast<std::size_t>(i)]);
  }

  for (int i = 0; i < n; ++i) {
    u_[static_cast<std::size_t>(i)] = x_[static_cast<std::size_t>(i)];
    u_[static_cast<std::size_t>(n + i)] = z_[static_cast<std::size_t>(i)];
  }

  const auto& v = store_.values;
  double yhat = 0.0;
  for (std::size_t j = 0; j < heads_.size(); ++j) {
    const auto& head = heads_[j];
    double s = 0.0;
    for (std::size_t k = 0; k < u_.size(); ++k) s += v[head.weights + k] * u_[k];
    if (head.bias != kNone) s += v[head.bias];
    head_tapes_[j].s = s;
    switch (head.kind) {
      case HeadKind::linear:
        yhat += s;
        break;
      case HeadKind::polynomial:
        yhat += poly_scalar(
            std::span<const double>(&v[head.coeffs],
                                    static_cast<std::size_t>(config_.degree) + 1),
            s);
        break;
      case HeadKind::sinusoid:
        yhat += v[head.amp] * std::sin(v[head.freq] * s + v[head.phase]);
        break;
      case HeadKind::sigmoid:
        yhat += sigmoid(s);
        break;
    }
  }
  return yhat;
}

void StructuralCFNModel::backward(double upstream) {
  const int n = config_.n_features;
  const auto& v = store_.values;
  auto& g = store_.grads;

  std::vector<double> du(u_.size(), 0.0);
  for (std::size_t j = 0; j < heads_.size(); ++j) {
    const auto& head = heads_[j];
    const double s = head_tapes_[j].s;
    double ds = 0.0;
    switch (head.kind) {
      case HeadKind::linear:
        ds = upstream;
        break;
      case HeadKind::polynomial: {
        const std::span<const double> coeffs(
            &v[head.coeffs], static_cast<std::size_t>(config_.degree) + 1);
        double sk = 1.0;
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
          g[head.coeffs + k] += upstream * sk;
          sk *= s;
        }
        ds = upstream * poly_scalar_deriv(coeffs, s);
        break;
      }
      case HeadKind::sinusoid: {
        const double arg = v[head.freq] * s + v[head.phase];
        const double c = v[head.amp] * std::cos(arg);
        g[head.amp] += upstream * std::sin(arg);
        g[head.freq] += upstream * c * s;
        g[head.phase] += upstream * c;
        ds = upstream * c * v[head.freq];
        break;
      }
      case HeadKind::sigmoid: {
        const double sg = sigmoid(s);
        ds = upstream * sg * (1.0 - sg);
        break;
      }
    }
    if (head.bias != kNone) g[head.bias] += ds;
    for (std::size_t k = 0; k < u_.size(); ++k) {
      g[head.weights + k] += ds * u_[k];
      du[k] += ds * v[head.weights + k];
    }
  }

  for (int i = 0; i < n; ++i) {
    node_backward(i, xm_[static_cast<std::size_t>(i)],
                  node_tapes_[static_cast<std::size_t>(i)],
                  du[static_cast<std::size_t>(n + i)]);
  }
}

void StructuralCFNModel::node_backward(int i, std::span<const double> xm,
                                       const NodeTape& tape, double dz) {
  const auto& node = nodes_[static_cast<std::size_t>(i)];
  const auto& v = store_.values;
  auto& g = store_.grads;
  const NodeMode nm = config_.node_mode;

  if (nm == NodeMode::linear_open) {
    g[node.b_poly] += dz;
    for (std::size_t k = 0; k < xm.size(); ++k) g[node.v_poly + k] += dz * xm[k];
    return;
  }

  // gate
  double dg = 0.0;
  switch (config_.gate_mode) {
    case GateMode::sigmoid_only:
      dg = dz * tape.sg * (1.0 - tape.sg);
      break;
    case GateMode::tanh_only:
      dg = dz * (1.0 - tape.th * tape.th);
      break;
    case GateMode::adaptive: {
      dg = dz * (tape.a1 * tape.sg * (1.0 - tape.sg) +
                 tape.a2 * (1.0 - tape.th * tape.th));
      // softmax Jacobian into the gate logits
      const double da1 = dz * tape.sg;
      const double da2 = dz * tape.th;
      const double mix = tape.a1 * da1 + tape.a2 * da2;
      g[node.gate_p] += tape.a1 * (da1 - mix);
      g[node.gate_p + 1] += tape.a2 * (da2 - mix);
      break;
    }
  }

  double dh_poly = 0.0, dh_sin = 0.0;
  if (nm == NodeMode::hybrid) {
    g[node.gate_w] += dg * tape.v0;
    g[node.gate_w + 1] += dg * tape.v1;
    const double dv0 = dg * v[node.gate_w];
    const double dv1 = dg * v[node.gate_w + 1];
    // layer-norm backward, K=2, population variance
    const double s = std::sqrt(tape.var + config_.ln_eps);
    const double mean_dv = 0.5 * (dv0 + dv1);
    const double mean_dvv = 0.5 * (dv0 * tape.v0 + dv1 * tape.v1);
    dh_poly = (dv0 - mean_dv - tape.v0 * mean_dvv) / s;
    dh_sin = (dv1 - mean_dv - tape.v1 * mean_dvv) / s;
  } else {
    g[node.gate_w] += dg * tape.v0;
    const double dh = dg * v[node.gate_w];
    if (nm == NodeMode::polynomial_only) {
      dh_poly = dh;
    } else {
      dh_sin = dh;
    }
  }

  if (node.coeffs != kNone && dh_poly != 0.0) {
    const std::span<const double> coeffs(
        &v[node.coeffs], static_cast<std::size_t>(config_.degree) + 1);
    double sk = 1.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      g[node.coeffs + k] += dh_poly * sk;
      sk *= tape.s_poly;
    }
    const double dsp = dh_poly * poly_scalar_deriv(coeffs, tape.s_poly);
    g[node.b_poly] += dsp;
    for (std::size_t k = 0; k < xm.size(); ++k) g[node.v_poly + k] += dsp * xm[k];
  }
  if (node.v_sin != kNone && dh_sin != 0.0) {
    const double arg = v[node.freq] * tape.s_sin + v[node.phase];
    const double c = v[node.amp] * std::cos(arg);
    g[node.amp] += dh_sin * std::sin(arg);
    g[node.freq] += dh_sin * c * tape.s_sin;
    g[node.phase] += dh_sin * c;
    const double dss = dh_sin * c * v[node.freq];
    for (std::size_t k = 0; k < xm.size(); ++k) g[node.v_sin + k] += dss * xm[k];
  }
}

double StructuralCFNModel::l1_penalty() const {
  double sum = 0.0;
  const std::size_t m = static_cast<std::size_t>(config_.n_features - 1);
  for (const auto& node : nodes_) {
    if (node.v_poly != kNone) {
      for (std::size_t k = 0; k < m; ++k) sum += std::fabs(store_.values[node.v_poly + k]);
    }
    if (node.v_sin != kNone) {
      for (std::size_t k = 0; k < m; ++k) sum += std::fabs(store_.values[node.v_sin + k]);
    }
  }
  return sum;
}

void StructuralCFNModel::add_l1_grad(double lambda) {
  if (lambda == 0.0) return;
  const std::size_t m = static_cast<std::size_t>(config_.n_features - 1);
  auto sign = [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); };
  for (const auto& node : nodes_) {
    if (node.v_poly != kNone) {
      for (std::size_t k = 0; k < m; ++k) {
        store_.grads[node.v_poly + k] += lambda * sign(store_.values[node.v_poly + k]);
      }
    }
    if (node.v_sin != kNone) {
      for (std::size_t k = 0; k < m; ++k) {
        store_.grads[node.v_sin + k] += lambda * sign(store_.values[node.v_sin + k]);
      }
    }
  }
}

ParamCount param_count(const ModelConfig& config) {
  StructuralCFNModel model(config);
  ParamCount out;
  out.exact = static_cast<long>(model.params().size());
  const long n = config.n_features;
  const long d = config.degree;
  out.formula = n * (2 * n + d + 8) + (2 * n + 1) * config.n_heads();
  return out;
}

std::unique_ptr<StructuralCFNModel> build_variant(const ModelConfig& config) {
  return std::make_unique<StructuralCFNModel>(config);
}

std::size_t Batch::size() const {
  return indices ? indices->size() : rows->size();
}

std::span<const double> Batch::row(std::size_t k) const {
  const std::size_t idx = indices ? (*indices)[k] : k;
  const auto& r = (*rows)[idx];
  return {r.data(), r.size()};
}

double Batch::target(std::size_t k) const {
  const std::size_t idx = indices ? (*indices)[k] : k;
  return (*targets)[idx];
}

namespace {

// Numerically stable BCE on the logit.
double bce_logit(double logit, double y) {
  return std::max(logit, 0.0) - logit * y + std::log1p(std::exp(-std::fabs(logit)));
}

double batch_loss_impl(DiffModel& model, const Batch& batch, Task task,
                       double lambda_l1, bool with_grad) {
  const std::size_t b = batch.size();
  if (b == 0) throw std::invalid_argument("loss: empty batch");
  double data_loss = 0.0;
  for (std::size_t k = 0; k < b; ++k) {
    const double y = batch.target(k);
    const double yhat = model.forward(batch.row(k));
    double dl = 0.0;
    if (task == Task::regression) {
      const double r = yhat - y;
      data_loss += r * r;
      dl = 2.0 * r / static_cast<double>(b);
    } else {
      data_loss += bce_logit(yhat, y);
      dl = (sigmoid(yhat) - y) / static_cast<double>(b);
    }
    if (with_grad) model.backward(dl);
  }
  data_loss /= static_cast<double>(b);
  if (lambda_l1 != 0.0) {
    data_loss += lambda_l1 * model.l1_penalty();
    if (with_grad) model.add_l1_grad(lambda_l1);
  }
  return data_loss;
}

}  // namespace

double batch_loss(DiffModel& model, const Batch& batch, Task task, double lambda_l1) {
  return batch_loss_impl(model, batch, task, lambda_l1, false);
}

double batch_loss_and_grad(DiffModel& model, const Batch& batch, Task task,
                           double lambda_l1) {
  return batch_loss_impl(model, batch, task, lambda_l1, true);
}

}  // namespace structcfn
