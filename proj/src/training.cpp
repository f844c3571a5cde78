#include "structcfn/training.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <stdexcept>

namespace structcfn {

namespace {

// Substream ids so initialization and shuffling never share draws.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kShuffleStream = 1;

int effective_batch_size(const ModelConfig& config, std::size_t n_rows) {
  if (config.batch_size > 0) return config.batch_size;
  return n_rows < 5000 ? 64 : 512;
}

}  // namespace

std::unique_ptr<StructuralCFNModel> init_model(const ModelConfig& config) {
  auto model = build_variant(config);
  Rng rng = Rng::substream(config.seed, kInitStream);
  model->init_params(rng);
  return model;
}

std::unique_ptr<MLPModel> init_mlp(int n_features, Task task, std::uint64_t seed) {
  auto model = std::make_unique<MLPModel>(n_features, task);
  Rng rng = Rng::substream(seed, kInitStream);
  model->init_params(rng);
  return model;
}

TrainReport train(DiffModel& model, const Dataset& train_set, const ModelConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();
  const std::size_t n = train_set.n_rows();
  if (n < 10) {
    throw std::invalid_argument(
        "train: need at least 10 rows, the 10% validation split would be empty");
  }
  if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");

  Rng rng = Rng::substream(config.seed, kShuffleStream);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  const std::size_t n_val = std::max<std::size_t>(1, n / 10);
  std::vector<std::size_t> val_idx(order.end() - static_cast<long>(n_val), order.end());
  std::vector<std::size_t> train_idx(order.begin(), order.end() - static_cast<long>(n_val));

  const int batch_size = effective_batch_size(config, n);
  AdamState adam(model.params().size(), config.lr);

  const Batch val_batch{&train_set.rows, &train_set.target, &val_idx};

  TrainReport report;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> best_values = model.params().values;
  int epochs_since_best = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(train_idx);
    double train_loss_sum = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < train_idx.size();
         start += static_cast<std::size_t>(batch_size)) {
      const std::size_t end =
          std::min(train_idx.size(), start + static_cast<std::size_t>(batch_size));
      std::vector<std::size_t> batch_idx(train_idx.begin() + static_cast<long>(start),
                                         train_idx.begin() + static_cast<long>(end));
      const Batch batch{&train_set.rows, &train_set.target, &batch_idx};
      zero_grads(model.params());
      train_loss_sum += batch_loss_and_grad(model, batch, train_set.task, config.lambda_l1);
      adam_step(model.params(), adam);
      ++n_batches;
    }
    const double train_loss = train_loss_sum / static_cast<double>(n_batches);
    // Early stopping monitors the pure data fit; the L1 term would otherwise
    // keep "improving" the monitored loss while the fit itself degrades.
    const double val_loss = batch_loss(model, val_batch, train_set.task, 0.0);
    report.epoch_losses.emplace_back(train_loss, val_loss);

    if (val_loss < best_val) {
      best_val = val_loss;
      best_values = model.params().values;
      report.best_epoch = epoch;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
      if (epochs_since_best >= config.patience) {
        report.stopped_early = true;
        break;
      }
    }
  }

  model.params().values = best_values;
  report.final_store_digest = store_digest(model.params());
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

}  // namespace structcfn
