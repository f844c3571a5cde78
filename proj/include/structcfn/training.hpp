#pragma once

#include <memory>
#include <string>
#include <vector>

#include "structcfn/data.hpp"
#include "structcfn/mlp.hpp"
#include "structcfn/model.hpp"
#include "structcfn/param_store.hpp"

namespace structcfn {

struct TrainReport {
  std::vector<std::pair<double, double>> epoch_losses;  // (train, val)
  int best_epoch = 0;
  bool stopped_early = false;
  std::string final_store_digest;
  double wall_seconds = 0.0;

  double best_val_loss() const { return epoch_losses[static_cast<std::size_t>(best_epoch)].second; }
};

/// Builds and Kaiming-initializes a StructuralCFN for `config` using the
/// seeded RNG in canonical parameter order.
std::unique_ptr<StructuralCFNModel> init_model(const ModelConfig& config);

/// Builds and initializes the MLP baseline with the same RNG protocol.
std::unique_ptr<MLPModel> init_mlp(int n_features, Task task, std::uint64_t seed);

/// Deterministic mini-batch Adam loop. Holds out the last 10% of one
/// seeded shuffle as the validation split, reshuffles training rows every
/// epoch, early-stops after `patience` epochs without validation
/// improvement and restores the best-epoch parameters.
TrainReport train(DiffModel& model, const Dataset& train_set, const ModelConfig& config);

}  // namespace structcfn
