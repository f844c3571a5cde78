#include <cmath>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

#include "doctest.h"
#include "structcfn/model.hpp"
#include "structcfn/model_io.hpp"
#include "structcfn/rng.hpp"
#include "structcfn/training.hpp"

using namespace structcfn;

namespace {

double get(const ParamStore& store, const std::string& name) {
  for (std::size_t i = 0; i < store.names.size(); ++i) {
    if (store.names[i] == name) return store.values[i];
  }
  throw std::runtime_error("missing parameter " + name);
}

bool has(const ParamStore& store, const std::string& name) {
  for (const auto& n : store.names) {
    if (n == name) return true;
  }
  return false;
}

// Reference forward pass written directly from the equations, reading
// parameters by name. Deliberately shares no code with the model.
double reference_forward(const StructuralCFNModel& model, const std::vector<double>& x) {
  const auto& store = model.params();
  const ModelConfig& cfg = model.config();
  const int n = cfg.n_features;

  std::vector<double> z(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    std::vector<double> xm;
    for (int j = 0; j < n; ++j) {
      if (j != i) xm.push_back(x[static_cast<std::size_t>(j)]);
    }
    const std::string ni = "node." + std::to_string(i) + ".";

    double h_poly = 0.0, s_poly = 0.0, h_sin = 0.0;
    const bool poly_part = cfg.node_mode == NodeMode::hybrid ||
                           cfg.node_mode == NodeMode::polynomial_only ||
                           cfg.node_mode == NodeMode::linear_open;
    const bool sin_part = cfg.node_mode == NodeMode::hybrid ||
                          cfg.node_mode == NodeMode::sinusoid_only;
    if (poly_part) {
      s_poly = get(store, ni + "b_poly");
      for (std::size_t k = 0; k < xm.size(); ++k) {
        s_poly += get(store, ni + "v_poly." + std::to_string(k)) * xm[k];
      }
      if (cfg.node_mode != NodeMode::linear_open) {
        for (int k = 0; k <= cfg.degree; ++k) {
          h_poly += get(store, ni + "coeff." + std::to_string(k)) * std::pow(s_poly, k);
        }
      }
    }
    if (sin_part) {
      double s = 0.0;
      for (std::size_t k = 0; k < xm.size(); ++k) {
        s += get(store, ni + "v_sin." + std::to_string(k)) * xm[k];
      }
      h_sin = get(store, ni + "amp") *
              std::sin(get(store, ni + "freq") * s + get(store, ni + "phase"));
    }

    if (cfg.node_mode == NodeMode::linear_open) {
      z[static_cast<std::size_t>(i)] = s_poly;
      continue;
    }

    double g = 0.0;
    if (cfg.node_mode == NodeMode::hybrid) {
      const double mu = 0.5 * (h_poly + h_sin);
      const double var = 0.5 * ((h_poly - mu) * (h_poly - mu) + (h_sin - mu) * (h_sin - mu));
      const double s = std::sqrt(var + cfg.ln_eps);
      g = get(store, ni + "gate_w.0") * (h_poly - mu) / s +
          get(store, ni + "gate_w.1") * (h_sin - mu) / s;
    } else {
      const double h = cfg.node_mode == NodeMode::polynomial_only ? h_poly : h_sin;
      g = get(store, ni + "gate_w.0") * h;
    }

    const double sg = 1.0 / (1.0 + std::exp(-g));
    const double th = std::tanh(g);
    double zi = 0.0;
    if (cfg.gate_mode == GateMode::sigmoid_only) {
      zi = sg;
    } else if (cfg.gate_mode == GateMode::tanh_only) {
      zi = th;
    } else {
      const double p0 = get(store, ni + "gate_p.0");
      const double p1 = get(store, ni + "gate_p.1");
      const double a1 = std::exp(p0) / (std::exp(p0) + std::exp(p1));
      zi = a1 * sg + (1.0 - a1) * th;
    }
    z[static_cast<std::size_t>(i)] = zi;
  }

  std::vector<double> u = x;
  u.insert(u.end(), z.begin(), z.end());

  double yhat = 0.0;
  for (int j = 0; j < cfg.n_heads(); ++j) {
    const std::string hj = "head." + std::to_string(j) + ".";
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      s += get(store, hj + "w." + std::to_string(k)) * u[k];
    }
    if (has(store, hj + "bias")) s += get(store, hj + "bias");
    switch (cfg.head_kinds[static_cast<std::size_t>(j)]) {
      case HeadKind::linear:
        yhat += s;
        break;
      case HeadKind::polynomial: {
        for (int k = 0; k <= cfg.degree; ++k) {
          yhat += get(store, hj + "coeff." + std::to_string(k)) * std::pow(s, k);
        }
        break;
      }
      case HeadKind::sinusoid:
        yhat += get(store, hj + "amp") *
                std::sin(get(store, hj + "freq") * s + get(store, hj + "phase"));
        break;
      case HeadKind::sigmoid:
        yhat += 1.0 / (1.0 + std::exp(-s));
        break;
    }
  }
  return yhat;
}

void randomize(ParamStore& store, Rng& rng) {
  for (auto& v : store.values) v = rng.uniform(-1.2, 1.2);
}

std::vector<double> random_input(int n, Rng& rng) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = rng.uniform(-2.0, 2.0);
  return x;
}

}  // namespace

TEST_CASE("layer_norm normalizes with population variance") {
  const std::vector<double> h = {1.0, 3.0};
  const auto v = StructuralCFNModel::layer_norm(h, 1e-5);
  const double s = std::sqrt(1.0 + 1e-5);
  CHECK(v[0] == doctest::Approx(-1.0 / s).epsilon(1e-14));
  CHECK(v[1] == doctest::Approx(1.0 / s).epsilon(1e-14));

  const std::vector<double> flat = {2.0, 2.0};
  const auto vf = StructuralCFNModel::layer_norm(flat, 1e-5);
  CHECK(vf[0] == 0.0);
  CHECK(vf[1] == 0.0);
}

TEST_CASE("freshly initialized node context at the origin is 0.25") {
  // All basis outputs are 0 at x=0 under the neutral init, layer norm keeps
  // them 0, the gate input is 0, so z = 0.5*sigmoid(0) + 0.5*tanh(0) = 0.25.
  ModelConfig cfg;
  cfg.n_features = 5;
  auto model = init_model(cfg);
  const std::vector<double> xm(4, 0.0);
  for (int i = 0; i < 5; ++i) {
    CHECK(model->node_context(i, xm) == doctest::Approx(0.25).epsilon(1e-14));
  }
}

TEST_CASE("forward matches the by-name reference on every variant") {
  Rng rng(9000);
  for (const auto& variant : variant_names()) {
    for (int trial = 0; trial < 8; ++trial) {
      ModelConfig base;
      base.n_features = 2 + static_cast<int>(rng.next_u64() % 5);
      base.degree = 1 + static_cast<int>(rng.next_u64() % 3);
      const ModelConfig cfg = variant_config(variant, base);
      auto model = build_variant(cfg);
      randomize(model->params(), rng);
      const auto x = random_input(cfg.n_features, rng);
      const double got = model->forward(x);
      const double want = reference_forward(*model, x);
      CAPTURE(variant);
      CAPTURE(trial);
      CHECK(got == doctest::Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("analytic gradients match finite differences on every variant") {
  Rng rng(9100);
  for (const auto& variant : variant_names()) {
    ModelConfig base;
    base.n_features = 4;
    base.degree = 2;
    const ModelConfig cfg = variant_config(variant, base);
    auto model = build_variant(cfg);
    randomize(model->params(), rng);
    const auto x = random_input(cfg.n_features, rng);

    model->forward(x);
    zero_grads(model->params());
    model->backward(1.0);
    auto f = [&](ParamStore&) { return model->forward(x); };
    const CheckReport report = finite_diff_check(f, model->params(), 1e-5, 1e-4);
    CAPTURE(variant);
    CAPTURE(report.worst_name);
    CAPTURE(report.max_rel_err);
    CHECK(report.pass);
  }
}

TEST_CASE("batch loss gradient (including L1 and BCE) passes finite differences") {
  Rng rng(9200);
  for (Task task : {Task::regression, Task::binary}) {
    ModelConfig cfg;
    cfg.n_features = 3;
    cfg.task = task;
    auto model = build_variant(cfg);
    randomize(model->params(), rng);

    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    for (int k = 0; k < 6; ++k) {
      rows.push_back(random_input(3, rng));
      targets.push_back(task == Task::regression ? rng.uniform(-1.0, 1.0)
                                                 : static_cast<double>(rng.next_u64() % 2));
    }
    const Batch batch{&rows, &targets, nullptr};
    const double lambda = 1e-3;

    zero_grads(model->params());
    batch_loss_and_grad(*model, batch, task, lambda);
    auto f = [&](ParamStore&) { return batch_loss(*model, batch, task, lambda); };
    const CheckReport report = finite_diff_check(f, model->params(), 1e-5, 1e-4);
    CAPTURE(task == Task::regression ? "regression" : "binary");
    CAPTURE(report.worst_name);
    CHECK(report.pass);
  }
}

TEST_CASE("masking: z_i never responds to x_i") {
  Rng rng(9300);
  for (int trial = 0; trial < 10; ++trial) {
    ModelConfig cfg;
    cfg.n_features = 2 + static_cast<int>(rng.next_u64() % 6);
    auto model = build_variant(cfg);
    randomize(model->params(), rng);
    auto x = random_input(cfg.n_features, rng);
    model->forward(x);
    const std::vector<double> z_before = model->last_contexts();
    for (int i = 0; i < cfg.n_features; ++i) {
      auto x2 = x;
      x2[static_cast<std::size_t>(i)] += 1.7;
      model->forward(x2);
      CHECK(std::fabs(model->last_contexts()[static_cast<std::size_t>(i)] -
                      z_before[static_cast<std::size_t>(i)]) <= 1e-12);
    }
  }
}

TEST_CASE("masked_slot maps features around the excluded index") {
  ModelConfig cfg;
  cfg.n_features = 4;
  StructuralCFNModel model(cfg);
  CHECK(model.masked_slot(2, 0) == 0);
  CHECK(model.masked_slot(2, 1) == 1);
  CHECK(model.masked_slot(2, 2) == -1);
  CHECK(model.masked_slot(2, 3) == 2);
}

TEST_CASE("parameter count: exact enumeration vs closed-form approximation") {
  // Hand count for N=10, d=2, default 4 heads:
  //   node: 9 (v_poly) + 1 (b) + 3 (coeffs) + 9 (v_sin) + 3 (A,w,phi)
  //         + 2 (gate_w) + 2 (gate_p) = 29; x10 = 290
  //   heads: linear 21, two polynomials 24 each, sinusoid 23 -> 92
  ModelConfig cfg;
  cfg.n_features = 10;
  const ParamCount pc = param_count(cfg);
  CHECK(pc.exact == 382);
  CHECK(pc.formula == 384);

  // Smallest model: N=2, d=1, single linear head.
  ModelConfig tiny;
  tiny.n_features = 2;
  tiny.degree = 1;
  tiny.head_kinds = {HeadKind::linear};
  const ParamCount pt = param_count(tiny);
  CHECK(pt.exact == 29);
  CHECK(pt.formula == 31);

  // The enumeration always matches the live store.
  StructuralCFNModel live(cfg);
  CHECK(static_cast<long>(live.params().size()) == pc.exact);
}

TEST_CASE("gate alpha is a softmax for the adaptive gate and one-hot otherwise") {
  ModelConfig cfg;
  cfg.n_features = 3;
  auto model = init_model(cfg);
  for (int i = 0; i < 3; ++i) {
    const auto [a1, a2] = model->gate_alpha(i);
    CHECK(a1 == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(a1 + a2 == doctest::Approx(1.0).epsilon(1e-14));
  }

  ModelConfig sig = variant_config("gated_attention", cfg);
  StructuralCFNModel sig_model(sig);
  CHECK(sig_model.gate_alpha(0) == std::pair<double, double>{1.0, 0.0});
  ModelConfig th = variant_config("tanh_polarity", cfg);
  StructuralCFNModel th_model(th);
  CHECK(th_model.gate_alpha(0) == std::pair<double, double>{0.0, 1.0});
}

TEST_CASE("construction guards reject degenerate configs") {
  ModelConfig cfg;
  cfg.n_features = 1;
  CHECK_THROWS_AS(StructuralCFNModel{cfg}, std::invalid_argument);

  cfg.n_features = 3;
  cfg.degree = 0;
  CHECK_THROWS_AS(StructuralCFNModel{cfg}, std::invalid_argument);

  cfg.degree = 2;
  cfg.head_kinds = {HeadKind::polynomial};
  CHECK_THROWS_AS(StructuralCFNModel{cfg}, std::invalid_argument);

  cfg.head_kinds = {HeadKind::polynomial, HeadKind::linear};
  CHECK_THROWS_AS(StructuralCFNModel{cfg}, std::invalid_argument);
}

TEST_CASE("forward rejects wrong lengths and non-finite inputs") {
  ModelConfig cfg;
  cfg.n_features = 3;
  auto model = init_model(cfg);
  const std::vector<double> bad = {1.0, 2.0};
  CHECK_THROWS_AS(model->forward(bad), std::invalid_argument);
  const std::vector<double> nan = {1.0, std::nan(""), 0.0};
  CHECK_THROWS_AS(model->forward(nan), std::invalid_argument);
}

TEST_CASE("model document round-trips exactly") {
  ModelConfig cfg;
  cfg.n_features = 4;
  cfg.seed = 77;
  auto model = init_model(cfg);
  Rng rng(5);
  randomize(model->params(), rng);

  Dataset ds;
  ds.feature_names = {"a", "b", "c", "d"};
  ds.standardized = true;
  ds.col_mean = {0.1, -0.2, 0.3, 0.0};
  ds.col_std = {1.0, 2.0, 0.5, 1.5};
  ds.constant_cols = {false, false, false, false};
  ds.target_mean = 3.25;
  ds.target_std = 0.75;

  const ModelDocument doc = make_document(*model, ds);
  const std::string text = document_to_json(doc);
  const ModelDocument back = document_from_json(text);
  auto restored = restore_cfn(back);

  REQUIRE(restored->params().size() == model->params().size());
  for (std::size_t i = 0; i < model->params().size(); ++i) {
    CHECK(restored->params().values[i] == model->params().values[i]);
    CHECK(restored->params().names[i] == model->params().names[i]);
  }
  CHECK(back.feature_names == doc.feature_names);
  CHECK(back.target_mean == 3.25);

  // identical predictions after the round trip
  const std::vector<double> x = {0.3, -1.0, 0.5, 2.0};
  CHECK(restored->forward(x) == model->forward(x));

  // serialization is byte-stable
  CHECK(document_to_json(back) == text);
}
