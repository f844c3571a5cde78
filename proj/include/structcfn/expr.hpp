#pragma once

#include <memory>
#include <string>
#include <vector>

namespace structcfn {

/// Small single-variable expression tree used for rendering symbolic laws.
/// Constants are stored at full precision; to_string() displays them with a
/// fixed number of decimals while eval() stays exact. Factories
/// constant-fold and drop additive/multiplicative identities so rendered
/// laws stay readable.
class Expr {
 public:
  using Ptr = std::shared_ptr<const Expr>;

  static Ptr constant(double v);
  static Ptr var(std::string name);
  static Ptr add(Ptr a, Ptr b);
  static Ptr mul(Ptr a, Ptr b);
  static Ptr div(Ptr a, Ptr b);
  static Ptr pow_int(Ptr a, int k);
  static Ptr sin(Ptr a);
  static Ptr tanh_fn(Ptr a);
  static Ptr sigmoid_fn(Ptr a);
  static Ptr sqrt_fn(Ptr a);

  double eval(double x) const;
  std::string to_string(int decimals = 2) const;

  bool is_constant() const { return op_ == Op::constant; }
  double constant_value() const { return value_; }

 private:
  enum class Op { constant, var, add, mul, divide, pow_int, sin, tanh_fn, sigmoid_fn, sqrt_fn };

  Expr(Op op, double value, int exponent, std::string name, std::vector<Ptr> children)
      : op_(op), value_(value), exponent_(exponent), name_(std::move(name)),
        children_(std::move(children)) {}

  Op op_;
  double value_ = 0.0;
  int exponent_ = 1;
  std::string name_;
  std::vector<Ptr> children_;

  std::string render(int decimals, int parent_prec) const;
};

}  // namespace structcfn
