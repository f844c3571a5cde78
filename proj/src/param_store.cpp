#include "structcfn/param_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace structcfn {

std::size_t ParamStore::add(std::string name, double init) {
  values.push_back(init);
  grads.push_back(0.0);
  names.push_back(std::move(name));
  return values.size() - 1;
}

void zero_grads(ParamStore& store) {
  std::fill(store.grads.begin(), store.grads.end(), 0.0);
}

void adam_step(ParamStore& store, AdamState& state) {
  if (state.m.size() != store.size() || state.v.size() != store.size()) {
    throw std::invalid_argument("adam_step: state size does not match store size");
  }
  ++state.t;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < store.size(); ++i) {
    const double g = store.grads[i];
    if (!std::isfinite(g)) {
      throw std::runtime_error("adam_step: non-finite gradient for parameter '" +
                               store.names[i] + "'");
    }
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    store.values[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

CheckReport finite_diff_check(const std::function<double(ParamStore&)>& forward,
                              ParamStore& store, double h, double rel_tol) {
  CheckReport report;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const double saved = store.values[i];
    store.values[i] = saved + h;
    const double fp = forward(store);
    store.values[i] = saved - h;
    const double fm = forward(store);
    store.values[i] = saved;
    const double fd = (fp - fm) / (2.0 * h);
    const double an = store.grads[i];
    const double denom = std::max({1.0, std::fabs(fd), std::fabs(an)});
    const double rel = std::fabs(fd - an) / denom;
    if (rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_index = i;
      report.worst_name = store.names[i];
    }
    if (rel > rel_tol) ++report.n_failures;
  }
  report.pass = report.n_failures == 0;
  return report;
}

std::uint64_t fnv1a64(const void* data, std::size_t n_bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < n_bytes; ++i) {
    hash ^= p[i];
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::string store_digest(const ParamStore& store) {
  const std::uint64_t h =
      fnv1a64(store.values.data(), store.values.size() * sizeof(double));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace structcfn
