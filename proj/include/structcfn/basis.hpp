#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace structcfn {

inline double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// phi(u) = sum_k c_k u^k evaluated at the scalar u.
double poly_scalar(std::span<const double> coeffs, double u);
/// d phi / du.
double poly_scalar_deriv(std::span<const double> coeffs, double u);

/// Polynomial function node: phi(v.x + b) with phi a degree-d polynomial.
struct PolynomialParams {
  std::vector<double> coeffs;  // c_0 .. c_d, d >= 1
  std::vector<double> projection;
  double bias = 0.0;
};

/// Periodic function node: A sin(omega * (v.x) + phase). No projection bias;
/// the phase absorbs any shift.
struct SinusoidParams {
  double amplitude = 1.0;
  double frequency = 1.0;
  double phase = 0.0;
  std::vector<double> projection;
};

double poly_eval(const PolynomialParams& p, std::span<const double> x);
double sin_eval(const SinusoidParams& p, std::span<const double> x);

/// Gradients of the node outputs with respect to every parameter and every
/// input coordinate. Used by the gradient-check tests and by the model
/// backward pass.
struct PolyGrad {
  std::vector<double> d_coeffs;
  std::vector<double> d_projection;
  double d_bias = 0.0;
  std::vector<double> d_x;
};
PolyGrad poly_grad(const PolynomialParams& p, std::span<const double> x);

struct SinGrad {
  double d_amplitude = 0.0;
  double d_frequency = 0.0;
  double d_phase = 0.0;
  std::vector<double> d_projection;
  std::vector<double> d_x;
};
SinGrad sin_grad(const SinusoidParams& p, std::span<const double> x);

enum class HeadKind { linear, polynomial, sinusoid, sigmoid };

std::string head_kind_name(HeadKind k);
HeadKind head_kind_from_name(const std::string& name);

/// One committee head over the 2N-dim residual context u. Linear and
/// sigmoid heads use w.u + bias; polynomial heads apply their coefficients
/// to w.u + bias; the sinusoid head has no bias (phase suffices).
struct CommitteeHead {
  HeadKind kind = HeadKind::linear;
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> coeffs;  // polynomial only
  double amplitude = 1.0;      // sinusoid only
  double frequency = 1.0;
  double phase = 0.0;
};

double head_eval(const CommitteeHead& h, std::span<const double> u);

}  // namespace structcfn
