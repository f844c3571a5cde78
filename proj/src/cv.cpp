#include "structcfn/cv.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <vector>

namespace structcfn {

double evaluate_metric(DiffModel& model, const Dataset& eval_set) {
  const Batch batch{&eval_set.rows, &eval_set.target, nullptr};
  return batch_loss(model, batch, eval_set.task, 0.0);
}

int thread_cap() {
  if (const char* env = std::getenv("STRUCTCFN_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

CVResult run_cv(const Dataset& ds, const ModelConfig& config, const CVOptions& options) {
  if (config.n_features != ds.n_features()) {
    throw std::invalid_argument("run_cv: config feature count does not match dataset");
  }
  const auto folds = kfold(ds.n_rows(), options.folds, config.seed);

  CVResult result;
  result.fold_metrics_model.assign(folds.size(), 0.0);
  if (options.with_mlp_baseline) result.fold_metrics_baseline.assign(folds.size(), 0.0);

  auto run_fold = [&](std::size_t f) {
    const auto& [train_idx, test_idx] = folds[f];
    const Dataset train_raw = ds.subset(train_idx);
    const Dataset test_raw = ds.subset(test_idx);
    std::vector<std::size_t> all(train_raw.n_rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const Dataset train_std = standardize(train_raw, all);
    const Dataset test_std = apply_standardization(test_raw, train_std);

    auto model = init_model(config);
    train(*model, train_std, config);
    result.fold_metrics_model[f] = evaluate_metric(*model, test_std);

    if (options.with_mlp_baseline) {
      auto mlp = init_mlp(ds.n_features(), ds.task, config.seed);
      ModelConfig mlp_cfg = config;
      mlp_cfg.lambda_l1 = 0.0;  // the baseline carries no projection penalty
      train(*mlp, train_std, mlp_cfg);
      result.fold_metrics_baseline[f] = evaluate_metric(*mlp, test_std);
    }
  };

  const int cap = std::min<int>(thread_cap(), static_cast<int>(folds.size()));
  if (cap <= 1) {
    for (std::size_t f = 0; f < folds.size(); ++f) run_fold(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cap));
    for (int w = 0; w < cap; ++w) {
      workers.emplace_back([&, w]() {
        try {
          for (std::size_t f = next.fetch_add(1); f < folds.size(); f = next.fetch_add(1)) {
            run_fold(f);
          }
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  result.mean_model = mean(result.fold_metrics_model);
  result.sd_model = sample_sd(result.fold_metrics_model);
  if (options.with_mlp_baseline) {
    result.mean_baseline = mean(result.fold_metrics_baseline);
    result.sd_baseline = sample_sd(result.fold_metrics_baseline);
    result.ttest = paired_ttest(result.fold_metrics_model, result.fold_metrics_baseline);
  }
  result.xi = noise_level_xi(ds);
  return result;
}

}  // namespace structcfn
