#pragma once

#include <functional>
#include <memory>
#include <string>

#include "structcfn/data.hpp"
#include "structcfn/training.hpp"

namespace structcfn {

/// Mean data-loss metric on a standardized evaluation set: MSE for
/// regression, log-loss for binary tasks. No L1 term.
double evaluate_metric(DiffModel& model, const Dataset& eval_set);

struct CVOptions {
  int folds = 10;
  bool with_mlp_baseline = false;
};

/// k-fold cross-validation. Each fold standardizes on its training rows,
/// applies those statistics to the test rows, trains from a fresh seeded
/// init, and records the test metric. Folds may run in parallel (capped by
/// STRUCTCFN_THREADS); results are deterministic either way.
CVResult run_cv(const Dataset& ds, const ModelConfig& config, const CVOptions& options);

/// Thread cap from STRUCTCFN_THREADS (defaults to hardware concurrency).
int thread_cap();

}  // namespace structcfn
