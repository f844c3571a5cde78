#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace structcfn {

/// Flat storage for every learnable scalar of one model, in a stable
/// canonical order. Each scalar carries a path-style name such as
/// "node.3.v_poly.1" used in diagnostics and serialization.
struct ParamStore {
  std::vector<double> values;
  std::vector<double> grads;
  std::vector<std::string> names;

  std::size_t add(std::string name, double init = 0.0);
  std::size_t size() const { return values.size(); }
};

/// Sets every gradient entry to exactly 0.
void zero_grads(ParamStore& store);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(std::size_t n, double lr_ = 0.01)
      : m(n, 0.0), v(n, 0.0), lr(lr_) {}
};

/// Bias-corrected Adam update. Gradients are left untouched; the caller
/// zeroes them. Throws on a non-finite gradient, naming the parameter.
void adam_step(ParamStore& store, AdamState& state);

struct CheckReport {
  bool pass = true;
  double max_rel_err = 0.0;
  std::size_t worst_index = 0;
  std::string worst_name;
  std::size_t n_failures = 0;
};

/// Compares the analytic gradient sitting in store.grads against central
/// finite differences of `forward` (a pure function of the parameter
/// values). Relative error uses max(1, |a|, |b|) in the denominator so the
/// comparison degrades to absolute near zero.
CheckReport finite_diff_check(const std::function<double(ParamStore&)>& forward,
                              ParamStore& store, double h, double rel_tol);

/// Differentiable-model contract shared by StructuralCFN and the MLP
/// baseline: forward() caches the intermediates of one sample, backward()
/// chains an upstream dL/dy into the gradient accumulator.
class DiffModel {
 public:
  virtual ~DiffModel() = default;

  virtual ParamStore& params() = 0;
  virtual const ParamStore& params() const = 0;
  virtual int input_dim() const = 0;

  virtual double forward(std::span<const double> x) = 0;
  virtual void backward(double upstream) = 0;

  /// Sum of |v| over L1-penalized parameters (0 for models without any).
  virtual double l1_penalty() const { return 0.0; }
  virtual void add_l1_grad(double /*lambda*/) {}
};

/// FNV-1a over the raw bytes of the value array; used as the store digest.
std::uint64_t fnv1a64(const void* data, std::size_t n_bytes);
std::string store_digest(const ParamStore& store);

}  // namespace structcfn
