#include "structcfn/basis.hpp"

#include <cmath>
#include <stdexcept>

namespace structcfn {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_dims(std::size_t expected, std::size_t actual, const char* what) {
  if (expected != actual) {
    throw std::invalid_argument(std::string(what) + ": expected input of length " +
                                std::to_string(expected) + ", got " +
                                std::to_string(actual));
  }
}

}  // namespace

double poly_scalar(std::span<const double> coeffs, double u) {
  // Horner form.
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * u + coeffs[k];
  return acc;
}

double poly_scalar_deriv(std::span<const double> coeffs, double u) {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 1;) {
    acc = acc * u + static_cast<double>(k) * coeffs[k];
  }
  return acc;
}

double poly_eval(const PolynomialParams& p, std::span<const double> x) {
  check_dims(p.projection.size(), x.size(), "poly_eval");
  return poly_scalar(p.coeffs, dot(p.projection, x) + p.bias);
}

double sin_eval(const SinusoidParams& p, std::span<const double> x) {
  check_dims(p.projection.size(), x.size(), "sin_eval");
  return p.amplitude * std::sin(p.frequency * dot(p.projection, x) + p.phase);
}

PolyGrad poly_grad(const PolynomialParams& p, std::span<const double> x) {
  check_dims(p.projection.size(), x.size(), "poly_grad");
  const double u = dot(p.projection, x) + p.bias;
  PolyGrad g;
  g.d_coeffs.resize(p.coeffs.size());
  double uk = 1.0;
  for (std::size_t k = 0; k < p.coeffs.size(); ++k) {
    g.d_coeffs[k] = uk;
    uk *= u;
  }
  const double du = poly_scalar_deriv(p.coeffs, u);
  g.d_bias = du;
  g.d_projection.resize(x.size());
  g.d_x.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    g.d_projection[i] = du * x[i];
    g.d_x[i] = du * p.projection[i];
  }
  return g;
}

SinGrad sin_grad(const SinusoidParams& p, std::span<const double> x) {
  check_dims(p.projection.size(), x.size(), "sin_grad");
  const double s = dot(p.projection, x);
  const double arg = p.frequency * s + p.phase;
  const double c = p.amplitude * std::cos(arg);
  SinGrad g;
  g.d_amplitude = std::sin(arg);
  g.d_frequency = c * s;
  g.d_phase = c;
  g.d_projection.resize(x.size());
  g.d_x.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    g.d_projection[i] = c * p.frequency * x[i];
    g.d_x[i] = c * p.frequency * p.projection[i];
  }
  return g;
}

std::string head_kind_name(HeadKind k) {
  switch (k) {
    case HeadKind::linear: return "linear";
    case HeadKind::polynomial: return "polynomial";
    case HeadKind::sinusoid: return "sinusoid";
    case HeadKind::sigmoid: return "sigmoid";
  }
  throw std::logic_error("head_kind_name: bad kind");
}

HeadKind head_kind_from_name(const std::string& name) {
  if (name == "linear") return HeadKind::linear;
  if (name == "polynomial") return HeadKind::polynomial;
  if (name == "sinusoid") return HeadKind::sinusoid;
  if (name == "sigmoid") return HeadKind::sigmoid;
  throw std::invalid_argument("unknown head kind '" + name + "'");
}

double head_eval(const CommitteeHead& h, std::span<const double> u) {
  check_dims(h.weights.size(), u.size(), "head_eval");
  const double s = dot(h.weights, u);
  switch (h.kind) {
    case HeadKind::linear: return s + h.bias;
    case HeadKind::polynomial: return poly_scalar(h.coeffs, s + h.bias);
    case HeadKind::sinusoid: return h.amplitude * std::sin(h.frequency * s + h.phase);
    case HeadKind::sigmoid: return sigmoid(s + h.bias);
  }
  throw std::logic_error("head_eval: bad kind");
}

}  // namespace structcfn
