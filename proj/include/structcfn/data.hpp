#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "structcfn/model.hpp"

namespace structcfn {

/// Column-named feature matrix with target. Standardization statistics are
/// fitted on training rows only and carried so fold-test rows can reuse
/// them exactly.
struct Dataset {
  std::vector<std::vector<double>> rows;  // row-major features
  std::vector<double> target;
  std::vector<std::string> feature_names;
  Task task = Task::regression;

  bool standardized = false;
  std::vector<double> col_mean, col_std;
  std::vector<bool> constant_cols;
  double target_mean = 0.0, target_std = 1.0;

  std::size_t n_rows() const { return rows.size(); }
  int n_features() const { return static_cast<int>(feature_names.size()); }

  Dataset subset(const std::vector<std::size_t>& idx) const;
};

/// Parses a header-bearing CSV ('.' decimals, RFC-4180-style quoting) and
/// splits off the named target column. Binary targets must be {0,1}.
Dataset load_csv(const std::string& path, const std::string& target_column, Task task);

/// Writes the dataset back to CSV (used by the synthetic generators).
void write_csv(const Dataset& ds, const std::string& path);

/// Per-column z-score using the mean and population std of fit_rows only.
/// Regression targets are standardized by fit-row statistics as well;
/// constant columns map to 0 and are flagged.
Dataset standardize(const Dataset& ds, const std::vector<std::size_t>& fit_rows);

/// Applies previously fitted statistics (e.g. the train fold's) to ds.
Dataset apply_standardization(const Dataset& ds, const Dataset& fitted);

/// Seeded shuffle into k near-equal disjoint test folds (remainder spread
/// over the leading folds). Returns (train_idx, test_idx) per fold.
std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> kfold(
    std::size_t n_rows, int k, std::uint64_t seed);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  bool degenerate = false;
};

/// Two-sided paired Student's t-test on the differences a - b, sample sd
/// with n-1 denominator. All-zero differences give (0, 1); zero sd with a
/// nonzero mean gives p = 0 with the degeneracy flag set.
TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b);

/// Regularized incomplete beta I_x(a, b), accurate to ~1e-10; exposed for
/// the t CDF and its tests.
double incomplete_beta(double a, double b, double x);

/// Structural noise level: OLS on standardized features, SNR =
/// Var(yhat)/Var(residual), xi = sd(y)/SNR, capped at 10 when the fit is
/// degenerate. Descriptive output only.
double noise_level_xi(const Dataset& ds);

struct SynthSpec {
  enum class Mode { basic, extended };
  Mode mode = Mode::basic;
  std::size_t n_samples = 5000;
  double noise_sd = 0.1;
  std::uint64_t seed = 42;
  // extended mode layout
  int n_features = 20;
  std::vector<std::pair<int, int>> coupled_pairs = {{1, 2}, {3, 4}, {5, 6}, {7, 8}, {9, 10}};
  int squared_driver = 0;

  std::vector<int> noise_features() const;
};

/// y = x0^2 + sin(3 x1 x2) + eps over {x0..x2 ~ U(-1,1), x3,x4 ~ N(0,1)}
/// in basic mode; the extended mode keeps the squared driver and sums
/// sin(3 x_a x_b) over the coupled pairs, with the remaining features pure
/// noise. Fully seeded.
Dataset synth_generate(const SynthSpec& spec);

struct RecoveryScore {
  std::vector<double> pair_scores;  // M[a][b] + M[b][a] per true pair
  double max_noise_score = 0.0;     // max entry touching any pure-noise feature
  bool success = false;
};

struct InteractionSchema;  // interpret module

RecoveryScore recovery_score(const InteractionSchema& schema,
                             const std::vector<std::pair<int, int>>& true_pairs,
                             const std::vector<int>& noise_features);

struct CVResult {
  std::vector<double> fold_metrics_model;
  std::vector<double> fold_metrics_baseline;  // empty without a baseline
  double mean_model = 0.0, sd_model = 0.0;
  double mean_baseline = 0.0, sd_baseline = 0.0;
  TTestResult ttest;  // model vs baseline, when present
  double xi = 0.0;
};

double mean(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);

}  // namespace structcfn
