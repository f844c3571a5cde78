#include "structcfn/expr.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace structcfn {

namespace {

std::string format_const(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return std::string(buf);
}

}  // namespace

Expr::Ptr Expr::constant(double v) {
  return Ptr(new Expr(Op::constant, v, 1, "", {}));
}

Expr::Ptr Expr::var(std::string name) {
  return Ptr(new Expr(Op::var, 0.0, 1, std::move(name), {}));
}

Expr::Ptr Expr::add(Ptr a, Ptr b) {
  if (a->is_constant() && b->is_constant()) {
    return constant(a->value_ + b->value_);
  }
  if (a->is_constant() && a->value_ == 0.0) return b;
  if (b->is_constant() && b->value_ == 0.0) return a;
  return Ptr(new Expr(Op::add, 0.0, 1, "", {std::move(a), std::move(b)}));
}

Expr::Ptr Expr::mul(Ptr a, Ptr b) {
  if (a->is_constant() && b->is_constant()) {
    return constant(a->value_ * b->value_);
  }
  if (a->is_constant()) {
    if (a->value_ == 0.0) return constant(0.0);
    if (a->value_ == 1.0) return b;
  }
  if (b->is_constant()) {
    if (b->value_ == 0.0) return constant(0.0);
    if (b->value_ == 1.0) return a;
  }
  return Ptr(new Expr(Op::mul, 0.0, 1, "", {std::move(a), std::move(b)}));
}

Expr::Ptr Expr::div(Ptr a, Ptr b) {
  if (a->is_constant() && b->is_constant()) {
    return constant(a->value_ / b->value_);
  }
  if (a->is_constant() && a->value_ == 0.0) return constant(0.0);
  if (b->is_constant() && b->value_ == 1.0) return a;
  return Ptr(new Expr(Op::divide, 0.0, 1, "", {std::move(a), std::move(b)}));
}

Expr::Ptr Expr::pow_int(Ptr a, int k) {
  if (k == 0) return constant(1.0);
  if (k == 1) return a;
  if (a->is_constant()) return constant(std::pow(a->value_, k));
  return Ptr(new Expr(Op::pow_int, 0.0, k, "", {std::move(a)}));
}

Expr::Ptr Expr::sin(Ptr a) {
  if (a->is_constant()) return constant(std::sin(a->value_));
  return Ptr(new Expr(Op::sin, 0.0, 1, "", {std::move(a)}));
}

Expr::Ptr Expr::tanh_fn(Ptr a) {
  if (a->is_constant()) return constant(std::tanh(a->value_));
  return Ptr(new Expr(Op::tanh_fn, 0.0, 1, "", {std::move(a)}));
}

Expr::Ptr Expr::sigmoid_fn(Ptr a) {
  if (a->is_constant()) return constant(1.0 / (1.0 + std::exp(-a->value_)));
  return Ptr(new Expr(Op::sigmoid_fn, 0.0, 1, "", {std::move(a)}));
}

Expr::Ptr Expr::sqrt_fn(Ptr a) {
  if (a->is_constant()) return constant(std::sqrt(a->value_));
  return Ptr(new Expr(Op::sqrt_fn, 0.0, 1, "", {std::move(a)}));
}

double Expr::eval(double x) const {
  switch (op_) {
    case Op::constant: return value_;
    case Op::var: return x;
    case Op::add: return children_[0]->eval(x) + children_[1]->eval(x);
    case Op::mul: return children_[0]->eval(x) * children_[1]->eval(x);
    case Op::divide: return children_[0]->eval(x) / children_[1]->eval(x);
    case Op::pow_int: return std::pow(children_[0]->eval(x), exponent_);
    case Op::sin: return std::sin(children_[0]->eval(x));
    case Op::tanh_fn: return std::tanh(children_[0]->eval(x));
    case Op::sigmoid_fn: {
      const double a = children_[0]->eval(x);
      return 1.0 / (1.0 + std::exp(-a));
    }
    case Op::sqrt_fn: return std::sqrt(children_[0]->eval(x));
  }
  throw std::logic_error("Expr::eval: bad op");
}

// parent_prec: 0 sum context, 1 product context, 2 atom required
std::string Expr::render(int decimals, int parent_prec) const {
  switch (op_) {
    case Op::constant: {
      std::string s = format_const(value_, decimals);
      if (parent_prec >= 1 && value_ < 0.0) return "(" + s + ")";
      return s;
    }
    case Op::var: return name_;
    case Op::add: {
      const std::string s = children_[0]->render(decimals, 0) + " + " +
                            children_[1]->render(decimals, 0);
      return parent_prec >= 1 ? "(" + s + ")" : s;
    }
    case Op::mul: {
      const std::string s = children_[0]->render(decimals, 1) + "*" +
                            children_[1]->render(decimals, 1);
      return parent_prec >= 2 ? "(" + s + ")" : s;
    }
    case Op::divide: {
      const std::string s = children_[0]->render(decimals, 1) + "/" +
                            children_[1]->render(decimals, 2);
      return parent_prec >= 2 ? "(" + s + ")" : s;
    }
    case Op::pow_int:
      return children_[0]->render(decimals, 2) + "^" + std::to_string(exponent_);
    case Op::sin: return "sin(" + children_[0]->render(decimals, 0) + ")";
    case Op::tanh_fn: return "tanh(" + children_[0]->render(decimals, 0) + ")";
    case Op::sigmoid_fn: return "sigmoid(" + children_[0]->render(decimals, 0) + ")";
    case Op::sqrt_fn: return "sqrt(" + children_[0]->render(decimals, 0) + ")";
  }
  throw std::logic_error("Expr::render: bad op");
}

std::string Expr::to_string(int decimals) const { return render(decimals, 0); }

}  // namespace structcfn
