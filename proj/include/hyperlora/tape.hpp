#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hyperlora/common.hpp"

namespace hyperlora {

class Tape;

/// A value recorded on a reverse-mode tape, or a free constant.
///
/// Scalars are value types: copying one copies a (tape pointer, node index,
/// cached value) triple. Constants carry no tape and differentiate to zero.
/// All arithmetic between scalars of two different live tapes is a usage bug
/// and throws.
class Scalar {
 public:
  Scalar() = default;
  Scalar(double v) : value_(v) {}  // NOLINT: implicit constant lift is the point

  double value() const { return value_; }
  bool is_const() const { return tape_ == nullptr; }
  Tape* tape() const { return tape_; }
  std::int32_t index() const { return idx_; }

 private:
  friend class Tape;
  Scalar(Tape* t, std::int32_t idx, double v) : tape_(t), idx_(idx), value_(v) {}

  Tape* tape_ = nullptr;
  std::int32_t idx_ = -1;
  double value_ = 0.0;
};

/// Reverse-mode tape over scalar operations.
///
/// Each node stores its parents and the local partial derivatives computed at
/// forward time, so the backward sweep is two fused multiply-adds per node.
/// The tape is single-threaded; concurrent use requires one tape per thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Scalar variable(double v) {
    nodes_.push_back(Node{0.0, 0.0, -1, -1});
    values_.push_back(v);
    return Scalar(this, static_cast<std::int32_t>(nodes_.size() - 1), v);
  }

  std::size_t size() const { return nodes_.size(); }

  /// Drops all nodes but keeps capacity; outstanding Scalars become invalid.
  void clear() {
    nodes_.clear();
    values_.clear();
    adj_.clear();
  }

  /// Reverse sweep seeding d(loss)/d(loss) = 1. Adjoints are readable until
  /// the next backward()/clear().
  void backward(const Scalar& loss) {
    if (loss.tape() != this) {
      throw DomainError("backward: loss does not live on this tape");
    }
    require_finite(loss.value(), "loss before backward pass");
    adj_.assign(nodes_.size(), 0.0);
    adj_[static_cast<std::size_t>(loss.index())] = 1.0;
    for (std::int32_t i = loss.index(); i >= 0; --i) {
      const double a = adj_[static_cast<std::size_t>(i)];
      if (a == 0.0) continue;
      const Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.p0 >= 0) adj_[static_cast<std::size_t>(n.p0)] += n.w0 * a;
      if (n.p1 >= 0) adj_[static_cast<std::size_t>(n.p1)] += n.w1 * a;
    }
  }

  double adjoint(const Scalar& x) const {
    if (x.is_const()) return 0.0;
    if (x.tape() != this) {
      throw DomainError("adjoint: scalar does not live on this tape");
    }
    return adj_.at(static_cast<std::size_t>(x.index()));
  }

  /// d(loss)/d(wrt_i) for every entry, in order.
  std::vector<double> gradient(const Scalar& loss, std::span<const Scalar> wrt) {
    backward(loss);
    std::vector<double> g(wrt.size());
    for (std::size_t i = 0; i < wrt.size(); ++i) {
      g[i] = adjoint(wrt[i]);
      if (!std::isfinite(g[i])) {
        throw NumericError("non-finite gradient entry at wrt index " + std::to_string(i));
      }
    }
    return g;
  }

  /// Hash of topology, local partials, and values; equal hashes on one
  /// platform mean bit-identical tapes.
  std::uint64_t structure_hash() const {
    std::uint64_t h = fnv1a(nodes_.data(), nodes_.size() * sizeof(Node));
    return fnv1a(values_.data(), values_.size() * sizeof(double), h);
  }

  Scalar emit1(double value, std::int32_t p, double w) {
    nodes_.push_back(Node{w, 0.0, p, -1});
    values_.push_back(value);
    return Scalar(this, static_cast<std::int32_t>(nodes_.size() - 1), value);
  }

  Scalar emit2(double value, std::int32_t p0, double w0, std::int32_t p1, double w1) {
    nodes_.push_back(Node{w0, w1, p0, p1});
    values_.push_back(value);
    return Scalar(this, static_cast<std::int32_t>(nodes_.size() - 1), value);
  }

 private:
  struct Node {
    double w0, w1;
    std::int32_t p0, p1;
  };

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> adj_;
};

namespace detail {

inline Tape* common_tape(const Scalar& a, const Scalar& b) {
  if (a.is_const()) return b.tape();
  if (b.is_const()) return a.tape();
  if (a.tape() != b.tape()) {
    throw DomainError("scalar operands belong to different tapes");
  }
  return a.tape();
}

}  // namespace detail

inline Scalar operator+(const Scalar& a, const Scalar& b) {
  Tape* t = detail::common_tape(a, b);
  const double v = a.value() + b.value();
  if (t == nullptr) return Scalar(v);
  if (a.is_const()) return t->emit1(v, b.index(), 1.0);
  if (b.is_const()) return t->emit1(v, a.index(), 1.0);
  return t->emit2(v, a.index(), 1.0, b.index(), 1.0);
}

inline Scalar operator-(const Scalar& a, const Scalar& b) {
  Tape* t = detail::common_tape(a, b);
  const double v = a.value() - b.value();
  if (t == nullptr) return Scalar(v);
  if (a.is_const()) return t->emit1(v, b.index(), -1.0);
  if (b.is_const()) return t->emit1(v, a.index(), 1.0);
  return t->emit2(v, a.index(), 1.0, b.index(), -1.0);
}

inline Scalar operator-(const Scalar& a) {
  if (a.is_const()) return Scalar(-a.value());
  return a.tape()->emit1(-a.value(), a.index(), -1.0);
}

inline Scalar operator*(const Scalar& a, const Scalar& b) {
  Tape* t = detail::common_tape(a, b);
  const double v = a.value() * b.value();
  if (t == nullptr) return Scalar(v);
  if (a.is_const()) return t->emit1(v, b.index(), a.value());
  if (b.is_const()) return t->emit1(v, a.index(), b.value());
  return t->emit2(v, a.index(), b.value(), b.index(), a.value());
}

inline Scalar operator/(const Scalar& a, const Scalar& b) {
  if (b.value() == 0.0) {
    throw DomainError("divide: zero denominator (numerator " + std::to_string(a.value()) + ")");
  }
  Tape* t = detail::common_tape(a, b);
  const double inv = 1.0 / b.value();
  const double v = a.value() * inv;
  if (t == nullptr) return Scalar(v);
  if (a.is_const()) return t->emit1(v, b.index(), -v * inv);
  if (b.is_const()) return t->emit1(v, a.index(), inv);
  return t->emit2(v, a.index(), inv, b.index(), -v * inv);
}

inline Scalar& operator+=(Scalar& a, const Scalar& b) { return a = a + b; }
inline Scalar& operator-=(Scalar& a, const Scalar& b) { return a = a - b; }
inline Scalar& operator*=(Scalar& a, const Scalar& b) { return a = a * b; }
inline Scalar& operator/=(Scalar& a, const Scalar& b) { return a = a / b; }

inline Scalar tanh(const Scalar& x) {
  const double tv = std::tanh(x.value());
  if (x.is_const()) return Scalar(tv);
  return x.tape()->emit1(tv, x.index(), 1.0 - tv * tv);
}

inline Scalar exp(const Scalar& x) {
  const double e = std::exp(x.value());
  if (x.is_const()) return Scalar(e);
  return x.tape()->emit1(e, x.index(), e);
}

inline Scalar sin(const Scalar& x) {
  const double v = std::sin(x.value());
  if (x.is_const()) return Scalar(v);
  return x.tape()->emit1(v, x.index(), std::cos(x.value()));
}

inline Scalar cos(const Scalar& x) {
  const double v = std::cos(x.value());
  if (x.is_const()) return Scalar(v);
  return x.tape()->emit1(v, x.index(), -std::sin(x.value()));
}

inline Scalar sqrt(const Scalar& x) {
  if (x.value() < 0.0) {
    throw DomainError("sqrt: negative operand " + std::to_string(x.value()));
  }
  const double r = std::sqrt(x.value());
  if (x.is_const()) return Scalar(r);
  return x.tape()->emit1(r, x.index(), 0.5 / r);
}

inline Scalar log(const Scalar& x) {
  if (x.value() <= 0.0) {
    throw DomainError("log: non-positive operand " + std::to_string(x.value()));
  }
  const double v = std::log(x.value());
  if (x.is_const()) return Scalar(v);
  return x.tape()->emit1(v, x.index(), 1.0 / x.value());
}

inline Scalar pow(const Scalar& x, double p) {
  if (x.value() < 0.0 && p != std::nearbyint(p)) {
    throw DomainError("pow: negative base " + std::to_string(x.value()) +
                      " with non-integer exponent");
  }
  const double v = std::pow(x.value(), p);
  if (x.is_const()) return Scalar(v);
  return x.tape()->emit1(v, x.index(), p * std::pow(x.value(), p - 1.0));
}

inline Scalar log_sigmoid(const Scalar& x) {
  const double v = stable_log_sigmoid(x.value());
  if (x.is_const()) return Scalar(v);
  return x.tape()->emit1(v, x.index(), stable_sigmoid(-x.value()));
}

inline Scalar square(const Scalar& x) { return x * x; }

inline double log_sigmoid(double x) { return stable_log_sigmoid(x); }
inline double square(double x) { return x * x; }

}  // namespace hyperlora
