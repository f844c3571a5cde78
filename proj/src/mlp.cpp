#include "structcfn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace structcfn {

const std::vector<int>& MLPModel::hidden_sizes() {
  static const std::vector<int> sizes = {32, 16};
  return sizes;
}

MLPModel::MLPModel(int n_features, Task task) : n_(n_features), task_(task) {
  if (n_features < 1) throw std::invalid_argument("MLP requires N >= 1");
  dims_ = {n_, 32, 16, 1};
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const int in = dims_[l];
    const int out = dims_[l + 1];
    w_off_.push_back(store_.size());
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) {
        store_.add("l" + std::to_string(l + 1) + ".w." + std::to_string(r) + "." +
                   std::to_string(c));
      }
    }
    b_off_.push_back(store_.size());
    for (int r = 0; r < out; ++r) {
      store_.add("l" + std::to_string(l + 1) + ".b." + std::to_string(r));
    }
  }
  x_.resize(static_cast<std::size_t>(n_));
  pre_.resize(3);
  act_.resize(3);
  for (std::size_t l = 0; l < 3; ++l) {
    pre_[l].resize(static_cast<std::size_t>(dims_[l + 1]));
    act_[l].resize(static_cast<std::size_t>(dims_[l + 1]));
  }
}

void MLPModel::init_params(Rng& rng) {
  auto& v = store_.values;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const int in = dims_[l];
    const int out = dims_[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(in));
    for (int k = 0; k < out * in; ++k) {
      v[w_off_[l] + static_cast<std::size_t>(k)] = rng.uniform(-bound, bound);
    }
    for (int r = 0; r < out; ++r) v[b_off_[l] + static_cast<std::size_t>(r)] = 0.0;
  }
}

double MLPModel::forward(std::span<const double> x) {
  if (static_cast<int>(x.size()) != n_) {
    throw std::invalid_argument("mlp_forward: expected input of length " +
                                std::to_string(n_) + ", got " +
                                std::to_string(x.size()));
  }
  std::copy(x.begin(), x.end(), x_.begin());
  const auto& v = store_.values;
  const double* in = x_.data();
  int in_dim = n_;
  for (std::size_t l = 0; l < 3; ++l) {
    const int out = dims_[l + 1];
    for (int r = 0; r < out; ++r) {
      double s = v[b_off_[l] + static_cast<std::size_t>(r)];
      const std::size_t row = w_off_[l] + static_cast<std::size_t>(r * in_dim);
      for (int c = 0; c < in_dim; ++c) s += v[row + static_cast<std::size_t>(c)] * in[c];
      pre_[l][static_cast<std::size_t>(r)] = s;
      act_[l][static_cast<std::size_t>(r)] = l < 2 ? std::max(s, 0.0) : s;
    }
    in = act_[l].data();
    in_dim = out;
  }
  return act_[2][0];
}

void MLPModel::backward(double upstream) {
  const auto& v = store_.values;
  auto& g = store_.grads;
  std::vector<double> delta = {upstream};  // d loss / d pre of current layer
  for (int l = 2; l >= 0; --l) {
    const int out = dims_[static_cast<std::size_t>(l) + 1];
    const int in_dim = dims_[static_cast<std::size_t>(l)];
    const double* in = l == 0 ? x_.data() : act_[static_cast<std::size_t>(l) - 1].data();
    std::vector<double> din(static_cast<std::size_t>(in_dim), 0.0);
    for (int r = 0; r < out; ++r) {
      const double d = delta[static_cast<std::size_t>(r)];
      g[b_off_[static_cast<std::size_t>(l)] + static_cast<std::size_t>(r)] += d;
      const std::size_t row =
          w_off_[static_cast<std::size_t>(l)] + static_cast<std::size_t>(r * in_dim);
      for (int c = 0; c < in_dim; ++c) {
        g[row + static_cast<std::size_t>(c)] += d * in[c];
        din[static_cast<std::size_t>(c)] += d * v[row + static_cast<std::size_t>(c)];
      }
    }
    if (l > 0) {
      // ReLU mask of the previous layer
      for (int c = 0; c < in_dim; ++c) {
        if (pre_[static_cast<std::size_t>(l) - 1][static_cast<std::size_t>(c)] <= 0.0) {
          din[static_cast<std::size_t>(c)] = 0.0;
        }
      }
    }
    delta = std::move(din);
  }
}

long mlp_param_count(int n_features) {
  if (n_features < 1) throw std::invalid_argument("mlp_param_count: N >= 1 required");
  const long n = n_features;
  return 32 * n + 32 + 16 * 32 + 16 + 16 + 1;
}

}  // namespace structcfn
