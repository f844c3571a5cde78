#include "structcfn/interpret.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

namespace structcfn {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

std::vector<std::string> default_names(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

}  // namespace

InteractionSchema dependency_matrix(const StructuralCFNModel& model,
                                    const std::vector<std::string>& feature_names) {
  const auto& cfg = model.config();
  const int n = cfg.n_features;
  const auto& values = model.params().values;

  InteractionSchema schema;
  schema.feature_names =
      feature_names.empty() ? default_names(n) : feature_names;
  schema.m.assign(static_cast<std::size_t>(n),
                  std::vector<double>(static_cast<std::size_t>(n), 0.0));
  schema.zero_rows.assign(static_cast<std::size_t>(n), false);

  for (int i = 0; i < n; ++i) {
    const auto& node = model.nodes()[static_cast<std::size_t>(i)];
    double denom = 0.0;
    std::vector<double> numer(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const std::size_t s = static_cast<std::size_t>(model.masked_slot(i, j));
      double acc = 0.0;
      switch (cfg.node_mode) {
        case NodeMode::hybrid:
          acc = std::fabs(values[node.gate_w]) * std::fabs(values[node.v_poly + s]) +
                std::fabs(values[node.gate_w + 1]) * std::fabs(values[node.v_sin + s]);
          break;
        case NodeMode::polynomial_only:
          acc = std::fabs(values[node.gate_w]) * std::fabs(values[node.v_poly + s]);
          break;
        case NodeMode::sinusoid_only:
          acc = std::fabs(values[node.gate_w]) * std::fabs(values[node.v_sin + s]);
          break;
        case NodeMode::linear_open:
          acc = std::fabs(values[node.v_poly + s]);
          break;
      }
      numer[static_cast<std::size_t>(j)] = acc;
      denom += acc;
    }
    if (denom <= 0.0) {
      schema.zero_rows[static_cast<std::size_t>(i)] = true;
      continue;
    }
    for (int j = 0; j < n; ++j) {
      if (j != i) {
        schema.m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            numer[static_cast<std::size_t>(j)] / denom;
      }
    }
  }
  return schema;
}

SymbolicLaw extract_symbolic(const StructuralCFNModel& model, int i, int j,
                             const std::vector<double>& grid) {
  const auto& cfg = model.config();
  const int n = cfg.n_features;
  if (i == j) throw std::invalid_argument("extract_symbolic: target equals driver");
  if (i < 0 || i >= n || j < 0 || j >= n) {
    throw std::invalid_argument("extract_symbolic: index out of range");
  }
  const auto& node = model.nodes()[static_cast<std::size_t>(i)];
  const auto& v = model.params().values;
  const std::size_t slot = static_cast<std::size_t>(model.masked_slot(i, j));
  const auto x = Expr::var("x");

  auto poly_branch = [&]() {
    // sum_k c_k (a t + b)^k; non-driver projections vanish at the mean
    const auto lin = Expr::add(Expr::mul(Expr::constant(v[node.v_poly + slot]), x),
                               Expr::constant(v[node.b_poly]));
    Expr::Ptr acc = Expr::constant(0.0);
    for (int k = 0; k <= cfg.degree; ++k) {
      acc = Expr::add(acc, Expr::mul(Expr::constant(v[node.coeffs + static_cast<std::size_t>(k)]),
                                     Expr::pow_int(lin, k)));
    }
    return acc;
  };
  auto sin_branch = [&]() {
    const auto arg = Expr::add(
        Expr::mul(Expr::constant(v[node.freq] * v[node.v_sin + slot]), x),
        Expr::constant(v[node.phase]));
    return Expr::mul(Expr::constant(v[node.amp]), Expr::sin(arg));
  };

  Expr::Ptr z;
  if (cfg.node_mode == NodeMode::linear_open) {
    z = Expr::add(Expr::mul(Expr::constant(v[node.v_poly + slot]), x),
                  Expr::constant(v[node.b_poly]));
  } else {
    Expr::Ptr g;
    if (cfg.node_mode == NodeMode::hybrid) {
      // layer-norm of two channels collapses to +/- delta / sqrt(delta^2+eps)
      const auto delta = Expr::mul(
          Expr::constant(0.5),
          Expr::add(poly_branch(), Expr::mul(Expr::constant(-1.0), sin_branch())));
      const auto denom =
          Expr::sqrt_fn(Expr::add(Expr::pow_int(delta, 2), Expr::constant(cfg.ln_eps)));
      const double w_diff = v[node.gate_w] - v[node.gate_w + 1];
      g = Expr::mul(Expr::constant(w_diff), Expr::div(delta, denom));
    } else {
      const auto branch =
          cfg.node_mode == NodeMode::polynomial_only ? poly_branch() : sin_branch();
      g = Expr::mul(Expr::constant(v[node.gate_w]), branch);
    }
    switch (cfg.gate_mode) {
      case GateMode::sigmoid_only:
        z = Expr::sigmoid_fn(g);
        break;
      case GateMode::tanh_only:
        z = Expr::tanh_fn(g);
        break;
      case GateMode::adaptive: {
        const auto [a1, a2] = model.gate_alpha(i);
        z = Expr::add(Expr::mul(Expr::constant(a1), Expr::sigmoid_fn(g)),
                      Expr::mul(Expr::constant(a2), Expr::tanh_fn(g)));
        break;
      }
    }
  }

  SymbolicLaw law;
  law.target = i;
  law.driver = j;
  law.expression = z;
  law.rendered = z->to_string(2);

  std::vector<double> xm(static_cast<std::size_t>(n - 1), 0.0);
  double max_err = 0.0;
  for (double t : grid) {
    xm[slot] = t;
    const double model_val = model.node_context(i, xm);
    const double tree_val = z->eval(t);
    max_err = std::max(max_err, std::fabs(model_val - tree_val));
  }
  law.max_roundtrip_error = max_err;
  return law;
}

GatePhysicsReport gate_physics(const StructuralCFNModel& model) {
  const auto& cfg = model.config();
  if (cfg.gate_mode != GateMode::adaptive || cfg.node_mode == NodeMode::linear_open) {
    throw std::invalid_argument("gate_physics: requires an adaptive-gate model");
  }
  GatePhysicsReport report;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < cfg.n_features; ++i) {
    const auto a = model.gate_alpha(i);
    report.node_alpha.push_back(a);
    s1 += a.first;
    s2 += a.second;
  }
  report.mean_alpha = {s1 / cfg.n_features, s2 / cfg.n_features};
  return report;
}

std::vector<std::pair<int, int>> topk_entries(const InteractionSchema& schema, int k) {
  const int n = static_cast<int>(schema.m.size());
  const long max_entries = static_cast<long>(n) * (n - 1);
  if (k < 1 || k > max_entries) {
    throw std::invalid_argument("topk_entries: k must be in [1, N(N-1)]");
  }
  struct Entry {
    double value;
    int i, j;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(max_entries));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) entries.push_back({schema.m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], i, j});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  std::vector<std::pair<int, int>> top;
  for (int m = 0; m < k; ++m) top.emplace_back(entries[static_cast<std::size_t>(m)].i,
                                               entries[static_cast<std::size_t>(m)].j);
  std::sort(top.begin(), top.end());
  return top;
}

double topk_consistency(const std::vector<InteractionSchema>& matrices, int k) {
  if (matrices.size() < 2) {
    throw std::invalid_argument("topk_consistency: need at least 2 matrices");
  }
  const std::size_t n = matrices.front().m.size();
  std::vector<std::vector<std::pair<int, int>>> sets;
  for (const auto& mat : matrices) {
    if (mat.m.size() != n) {
      throw std::invalid_argument("topk_consistency: matrix shape mismatch");
    }
    sets.push_back(topk_entries(mat, k));
  }
  std::size_t same = 0, total = 0;
  for (std::size_t a = 0; a < sets.size(); ++a) {
    for (std::size_t b = a + 1; b < sets.size(); ++b) {
      ++total;
      if (sets[a] == sets[b]) ++same;
    }
  }
  return static_cast<double>(same) / static_cast<double>(total);
}

std::vector<double> symbolic_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(-3.0 + 6.0 * i / 100.0);
  return grid;
}

std::string schema_to_csv(const InteractionSchema& schema) {
  std::ostringstream out;
  for (const auto& name : schema.feature_names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < schema.m.size(); ++i) {
    out << schema.feature_names[i];
    for (double v : schema.m[i]) out << ',' << fmt17(v);
    out << '\n';
  }
  return out.str();
}

std::string schema_to_dot(const InteractionSchema& schema, double threshold) {
  std::ostringstream out;
  out << "digraph interactions {\n";
  for (const auto& name : schema.feature_names) out << "  \"" << name << "\";\n";
  for (std::size_t i = 0; i < schema.m.size(); ++i) {
    for (std::size_t j = 0; j < schema.m.size(); ++j) {
      if (i == j) continue;
      const double v = schema.m[i][j];
      if (v >= threshold) {
        char label[32];
        std::snprintf(label, sizeof(label), "%.3f", v);
        // edge j -> i: influence of feature j on the context of feature i
        out << "  \"" << schema.feature_names[j] << "\" -> \""
            << schema.feature_names[i] << "\" [label=\"" << label << "\"];\n";
      }
    }
  }
  out << "}\n";
  return out.str();
}

std::string gate_report_to_csv(const GatePhysicsReport& report,
                               const std::vector<std::string>& feature_names) {
  std::ostringstream out;
  out << "node,feature,alpha_sigmoid,alpha_tanh\n";
  for (std::size_t i = 0; i < report.node_alpha.size(); ++i) {
    const std::string name = i < feature_names.size() ? feature_names[i] : "";
    out << i << ',' << name << ',' << fmt17(report.node_alpha[i].first) << ','
        << fmt17(report.node_alpha[i].second) << '\n';
  }
  out << "mean,," << fmt17(report.mean_alpha.first) << ','
      << fmt17(report.mean_alpha.second) << '\n';
  return out.str();
}

std::string law_to_text(const SymbolicLaw& law,
                        const std::vector<std::string>& feature_names) {
  const std::string target = static_cast<std::size_t>(law.target) < feature_names.size()
                                 ? feature_names[static_cast<std::size_t>(law.target)]
                                 : "x" + std::to_string(law.target);
  const std::string driver = static_cast<std::size_t>(law.driver) < feature_names.size()
                                 ? feature_names[static_cast<std::size_t>(law.driver)]
                                 : "x" + std::to_string(law.driver);
  std::ostringstream out;
  std::string body = law.rendered;
  // display the driver by name instead of the placeholder variable
  std::size_t pos = 0;
  while ((pos = body.find("x", pos)) != std::string::npos) {
    const bool standalone =
        (pos == 0 || !std::isalnum(static_cast<unsigned char>(body[pos - 1]))) &&
        (pos + 1 == body.size() || !std::isalnum(static_cast<unsigned char>(body[pos + 1])));
    if (standalone) {
      body.replace(pos, 1, driver);
      pos += driver.size();
    } else {
      ++pos;
    }
  }
  out << "f_" << target << "(" << driver << ") = " << body << "\n";
  out << "max_roundtrip_error = " << fmt17(law.max_roundtrip_error) << "\n";
  return out.str();
}

}  // namespace structcfn
