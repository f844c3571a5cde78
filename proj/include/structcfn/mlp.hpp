#pragma once

#include <span>
#include <vector>

#include "structcfn/model.hpp"
#include "structcfn/param_store.hpp"
#include "structcfn/rng.hpp"

namespace structcfn {

/// Baseline MLP: Linear(32) -> ReLU -> Linear(16) -> ReLU -> Linear(1).
/// Trains under the same loop as StructuralCFN; no L1 penalty.
class MLPModel : public DiffModel {
 public:
  MLPModel(int n_features, Task task);

  ParamStore& params() override { return store_; }
  const ParamStore& params() const override { return store_; }
  int input_dim() const override { return n_; }
  Task task() const { return task_; }

  void init_params(Rng& rng);

  double forward(std::span<const double> x) override;
  void backward(double upstream) override;

  static const std::vector<int>& hidden_sizes();

 private:
  int n_;
  Task task_;
  ParamStore store_;
  std::vector<std::size_t> w_off_, b_off_;  // per layer
  std::vector<int> dims_;                   // [N, 32, 16, 1]

  // tape: pre-activations per layer plus the input
  std::vector<double> x_;
  std::vector<std::vector<double>> pre_, act_;
};

/// Exact learnable-scalar count of the baseline for N input features.
long mlp_param_count(int n_features);

}  // namespace structcfn
