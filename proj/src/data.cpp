#include "structcfn/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "structcfn/interpret.hpp"
#include "structcfn/rng.hpp"

namespace structcfn {

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

Dataset Dataset::subset(const std::vector<std::size_t>& idx) const {
  Dataset out;
  out.feature_names = feature_names;
  out.task = task;
  out.standardized = standardized;
  out.col_mean = col_mean;
  out.col_std = col_std;
  out.constant_cols = constant_cols;
  out.target_mean = target_mean;
  out.target_std = target_std;
  out.rows.reserve(idx.size());
  out.target.reserve(idx.size());
  for (std::size_t i : idx) {
    out.rows.push_back(rows[i]);
    out.target.push_back(target[i]);
  }
  return out;
}

namespace {

// RFC-4180-style record parser (quoted fields, "" escapes, embedded
// newlines inside quotes).
std::vector<std::vector<std::string>> parse_csv_records(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
    } else if (c == '\r') {
      // swallowed; \r\n handled by the \n branch
    } else {
      field += c;
    }
  }
  if (any && (!field.empty() || !record.empty())) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
    if (pos != cell.size()) throw std::invalid_argument("trailing characters");
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite value");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("load_csv: unparsable cell '" + cell + "' at row " +
                             std::to_string(row) + ", column " + std::to_string(col));
  }
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target_column, Task task) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");
  auto records = parse_csv_records(in);
  if (records.empty()) throw std::runtime_error("load_csv: '" + path + "' is empty");

  const auto& header = records.front();
  std::size_t target_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == target_column) target_col = c;
  }
  if (target_col == header.size()) {
    throw std::runtime_error("load_csv: target column '" + target_column +
                             "' not found in '" + path + "'");
  }

  Dataset ds;
  ds.task = task;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != target_col) ds.feature_names.push_back(header[c]);
  }

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && rec[0].empty()) continue;  // trailing blank line
    if (rec.size() != header.size()) {
      throw std::runtime_error("load_csv: row " + std::to_string(r) + " has " +
                               std::to_string(rec.size()) + " fields, expected " +
                               std::to_string(header.size()));
    }
    std::vector<double> row;
    row.reserve(header.size() - 1);
    double y = 0.0;
    for (std::size_t c = 0; c < rec.size(); ++c) {
      const double v = parse_cell(rec[c], r, c);
      if (c == target_col) {
        y = v;
      } else {
        row.push_back(v);
      }
    }
    if (task == Task::binary && y != 0.0 && y != 1.0) {
      throw std::runtime_error("load_csv: binary target must be 0 or 1, got " +
                               rec[target_col] + " at row " + std::to_string(r));
    }
    ds.rows.push_back(std::move(row));
    ds.target.push_back(y);
  }
  return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "'");
  out.precision(17);
  for (std::size_t c = 0; c < ds.feature_names.size(); ++c) {
    out << ds.feature_names[c] << ',';
  }
  out << "target\n";
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    for (double v : ds.rows[r]) out << v << ',';
    out << ds.target[r] << '\n';
  }
}

Dataset standardize(const Dataset& ds, const std::vector<std::size_t>& fit_rows) {
  if (fit_rows.empty()) throw std::invalid_argument("standardize: fit_rows empty");
  const std::size_t n_cols = ds.feature_names.size();
  Dataset out;
  out.feature_names = ds.feature_names;
  out.task = ds.task;
  out.col_mean.assign(n_cols, 0.0);
  out.col_std.assign(n_cols, 1.0);
  out.constant_cols.assign(n_cols, false);

  const double nfit = static_cast<double>(fit_rows.size());
  for (std::size_t c = 0; c < n_cols; ++c) {
    double m = 0.0;
    for (std::size_t r : fit_rows) m += ds.rows[r][c];
    m /= nfit;
    double var = 0.0;
    for (std::size_t r : fit_rows) {
      const double d = ds.rows[r][c] - m;
      var += d * d;
    }
    var /= nfit;  // population variance
    out.col_mean[c] = m;
    const double sd = std::sqrt(var);
    if (sd < 1e-12) {
      out.constant_cols[c] = true;
      out.col_std[c] = 1.0;
    } else {
      out.col_std[c] = sd;
    }
  }

  out.target_mean = 0.0;
  out.target_std = 1.0;
  if (ds.task == Task::regression) {
    double m = 0.0;
    for (std::size_t r : fit_rows) m += ds.target[r];
    m /= nfit;
    double var = 0.0;
    for (std::size_t r : fit_rows) {
      const double d = ds.target[r] - m;
      var += d * d;
    }
    var /= nfit;
    out.target_mean = m;
    out.target_std = var < 1e-24 ? 1.0 : std::sqrt(var);
  }

  out.standardized = true;
  out.rows.reserve(ds.n_rows());
  out.target.reserve(ds.n_rows());
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    std::vector<double> row(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) {
      row[c] = out.constant_cols[c]
                   ? 0.0
                   : (ds.rows[r][c] - out.col_mean[c]) / out.col_std[c];
    }
    out.rows.push_back(std::move(row));
    out.target.push_back(ds.task == Task::regression
                             ? (ds.target[r] - out.target_mean) / out.target_std
                             : ds.target[r]);
  }
  return out;
}

Dataset apply_standardization(const Dataset& ds, const Dataset& fitted) {
  const std::size_t n_cols = ds.feature_names.size();
  if (fitted.col_mean.size() != n_cols) {
    throw std::invalid_argument("apply_standardization: column count mismatch");
  }
  Dataset out;
  out.feature_names = ds.feature_names;
  out.task = ds.task;
  out.standardized = true;
  out.col_mean = fitted.col_mean;
  out.col_std = fitted.col_std;
  out.constant_cols = fitted.constant_cols;
  out.target_mean = fitted.target_mean;
  out.target_std = fitted.target_std;
  out.rows.reserve(ds.n_rows());
  out.target.reserve(ds.n_rows());
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    std::vector<double> row(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) {
      row[c] = out.constant_cols[c]
                   ? 0.0
                   : (ds.rows[r][c] - out.col_mean[c]) / out.col_std[c];
    }
    out.rows.push_back(std::move(row));
    out.target.push_back(ds.task == Task::regression
                             ? (ds.target[r] - out.target_mean) / out.target_std
                             : ds.target[r]);
  }
  return out;
}

std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> kfold(
    std::size_t n_rows, int k, std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > n_rows) {
    throw std::invalid_argument("kfold: need 2 <= k <= n_rows");
  }
  std::vector<std::size_t> order(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> folds;
  const std::size_t base = n_rows / static_cast<std::size_t>(k);
  const std::size_t rem = n_rows % static_cast<std::size_t>(k);
  std::size_t start = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t len = base + (static_cast<std::size_t>(f) < rem ? 1 : 0);
    std::vector<std::size_t> test(order.begin() + static_cast<long>(start),
                                  order.begin() + static_cast<long>(start + len));
    std::vector<std::size_t> train;
    train.reserve(n_rows - len);
    for (std::size_t i = 0; i < n_rows; ++i) {
      if (i < start || i >= start + len) train.push_back(order[i]);
    }
    folds.emplace_back(std::move(train), std::move(test));
    start += len;
  }
  return folds;
}

namespace {

// Continued-fraction evaluation of the incomplete beta (Lentz).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-14;
  constexpr double kFpmin = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpmin) d = kFpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpmin) d = kFpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpmin) c = kFpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpmin) d = kFpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpmin) c = kFpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log(1.0 - x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * betacf(a, b, x) / a;
  }
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("paired_ttest: length mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  if (a.size() < 2) throw std::invalid_argument("paired_ttest: need >= 2 pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double md = mean(d);
  const double sd = sample_sd(d);
  const double n = static_cast<double>(d.size());
  TTestResult res;
  if (sd == 0.0) {
    if (md == 0.0) return {0.0, 1.0, false};
    res.t = md > 0.0 ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity();
    res.p = 0.0;
    res.degenerate = true;
    return res;
  }
  res.t = md / (sd / std::sqrt(n));
  const double nu = n - 1.0;
  res.p = incomplete_beta(nu / 2.0, 0.5, nu / (nu + res.t * res.t));
  return res;
}

namespace {

// Gaussian elimination with partial pivoting; returns false when singular.
bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> rhs,
                  std::vector<double>& out) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    }
    if (std::fabs(a[piv][col]) < 1e-12) return false;
    std::swap(a[piv], a[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * out[c];
    out[i] = s / a[i][i];
  }
  return true;
}

}  // namespace

double noise_level_xi(const Dataset& ds) {
  const std::size_t n = ds.n_rows();
  const std::size_t p = ds.feature_names.size();
  if (n < p + 2) return 10.0;

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  const Dataset std_ds = ds.standardized ? ds : standardize(ds, all);

  // OLS with intercept on the raw-scale target (binary uses {0,1} as real).
  const std::vector<double>& y = ds.target;
  const std::size_t dim = p + 1;
  std::vector<std::vector<double>> xtx(dim, std::vector<double>(dim, 0.0));
  std::vector<double> xty(dim, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<double> xr(dim);
    xr[0] = 1.0;
    for (std::size_t c = 0; c < p; ++c) xr[c + 1] = std_ds.rows[r][c];
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) xtx[i][j] += xr[i] * xr[j];
      xty[i] += xr[i] * y[r];
    }
  }
  std::vector<double> beta;
  if (!solve_linear(xtx, xty, beta)) {
    // ridge fallback
    for (std::size_t i = 0; i < dim; ++i) xtx[i][i] += 1e-8;
    if (!solve_linear(xtx, xty, beta)) return 10.0;
  }

  std::vector<double> yhat(n, 0.0), resid(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double s = beta[0];
    for (std::size_t c = 0; c < p; ++c) s += beta[c + 1] * std_ds.rows[r][c];
    yhat[r] = s;
    resid[r] = y[r] - s;
  }
  auto pop_var = [](const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
  };
  const double var_hat = pop_var(yhat);
  if (var_hat < 1e-12) return 10.0;
  const double var_res = pop_var(resid);
  if (var_res < 1e-15) return 0.0;
  const double snr = var_hat / var_res;
  return std::sqrt(pop_var(y)) / snr;
}

std::vector<int> SynthSpec::noise_features() const {
  if (mode == Mode::basic) return {3, 4};
  std::set<int> active;
  active.insert(squared_driver);
  for (const auto& [a, b] : coupled_pairs) {
    active.insert(a);
    active.insert(b);
  }
  std::vector<int> noise;
  for (int f = 0; f < n_features; ++f) {
    if (!active.count(f)) noise.push_back(f);
  }
  return noise;
}

Dataset synth_generate(const SynthSpec& spec) {
  Dataset ds;
  ds.task = Task::regression;
  Rng rng(spec.seed);

  if (spec.mode == SynthSpec::Mode::basic) {
    for (int f = 0; f < 5; ++f) ds.feature_names.push_back("x" + std::to_string(f));
    for (std::size_t r = 0; r < spec.n_samples; ++r) {
      std::vector<double> row(5);
      for (int f = 0; f < 3; ++f) row[static_cast<std::size_t>(f)] = rng.uniform(-1.0, 1.0);
      row[3] = rng.normal();
      row[4] = rng.normal();
      const double eps = spec.noise_sd == 0.0 ? 0.0 : rng.normal(0.0, spec.noise_sd);
      ds.rows.push_back(row);
      ds.target.push_back(row[0] * row[0] + std::sin(3.0 * row[1] * row[2]) + eps);
    }
    return ds;
  }

  const int nf = spec.n_features;
  std::set<int> active;
  if (spec.squared_driver < 0 || spec.squared_driver >= nf) {
    throw std::invalid_argument("synth_generate: squared driver out of range");
  }
  active.insert(spec.squared_driver);
  for (const auto& [a, b] : spec.coupled_pairs) {
    if (a < 0 || a >= nf || b < 0 || b >= nf || a == b) {
      throw std::invalid_argument("synth_generate: coupled pair out of range");
    }
    if (!active.insert(a).second || !active.insert(b).second) {
      throw std::invalid_argument("synth_generate: coupled pairs must be disjoint");
    }
  }
  for (int f = 0; f < nf; ++f) ds.feature_names.push_back("x" + std::to_string(f));
  for (std::size_t r = 0; r < spec.n_samples; ++r) {
    std::vector<double> row(static_cast<std::size_t>(nf));
    for (int f = 0; f < nf; ++f) {
      row[static_cast<std::size_t>(f)] = active.count(f) ? rng.uniform(-1.0, 1.0) : rng.normal();
    }
    double y = row[static_cast<std::size_t>(spec.squared_driver)] *
               row[static_cast<std::size_t>(spec.squared_driver)];
    for (const auto& [a, b] : spec.coupled_pairs) {
      y += std::sin(3.0 * row[static_cast<std::size_t>(a)] * row[static_cast<std::size_t>(b)]);
    }
    if (spec.noise_sd != 0.0) y += rng.normal(0.0, spec.noise_sd);
    ds.rows.push_back(std::move(row));
    ds.target.push_back(y);
  }
  return ds;
}

RecoveryScore recovery_score(const InteractionSchema& schema,
                             const std::vector<std::pair<int, int>>& true_pairs,
                             const std::vector<int>& noise_features) {
  const int n = static_cast<int>(schema.m.size());
  RecoveryScore out;
  for (const auto& [a, b] : true_pairs) {
    if (a < 0 || a >= n || b < 0 || b >= n) {
      throw std::invalid_argument("recovery_score: pair index out of range");
    }
    out.pair_scores.push_back(schema.m[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +
                              schema.m[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)]);
  }
  std::set<int> noise(noise_features.begin(), noise_features.end());
  out.max_noise_score = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (noise.count(i) || noise.count(j)) {
        out.max_noise_score =
            std::max(out.max_noise_score,
                     schema.m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      }
    }
  }
  out.success = true;
  for (double s : out.pair_scores) {
    if (s <= out.max_noise_score) out.success = false;
  }
  return out;
}

}  // namespace structcfn
