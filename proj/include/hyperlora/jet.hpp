#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "hyperlora/common.hpp"
#include "hyperlora/tape.hpp"

namespace hyperlora {

/// Truncated second-order Taylor jet in one direction: (f, f', f'').
///
/// The coefficient type T is either double (plain evaluation) or Scalar
/// (taped, so derivatives of the coefficients with respect to tape variables
/// remain available). Propagating a TJet<Scalar> through a network is the
/// forward-over-reverse composition used for nested derivatives.
template <class T>
struct TJet {
  T f{};
  T d1{};
  T d2{};

  TJet() = default;
  TJet(const T& value) : f(value) {}  // NOLINT: constant lift
  TJet(T value, T first, T second) : f(std::move(value)), d1(std::move(first)), d2(std::move(second)) {}

  template <class U = T>
    requires(!std::is_same_v<U, double>)
  TJet(double value) : f(T(value)) {}  // NOLINT: constant lift through T

  static TJet variable(const T& value) { return TJet(value, T(1.0), T(0.0)); }
};

template <class T>
TJet<T> operator+(const TJet<T>& a, const TJet<T>& b) {
  return {a.f + b.f, a.d1 + b.d1, a.d2 + b.d2};
}
template <class T>
TJet<T> operator-(const TJet<T>& a, const TJet<T>& b) {
  return {a.f - b.f, a.d1 - b.d1, a.d2 - b.d2};
}
template <class T>
TJet<T> operator-(const TJet<T>& a) {
  return {-a.f, -a.d1, -a.d2};
}
template <class T>
TJet<T> operator*(const TJet<T>& a, const TJet<T>& b) {
  return {a.f * b.f, a.f * b.d1 + a.d1 * b.f, a.f * b.d2 + 2.0 * (a.d1 * b.d1) + a.d2 * b.f};
}
template <class T>
TJet<T> operator/(const TJet<T>& a, const TJet<T>& b) {
  T q = a.f / b.f;
  T q1 = (a.d1 - q * b.d1) / b.f;
  T q2 = (a.d2 - 2.0 * (q1 * b.d1) - q * b.d2) / b.f;
  return {q, q1, q2};
}

template <class T>
TJet<T>& operator+=(TJet<T>& a, const TJet<T>& b) {
  return a = a + b;
}
template <class T>
TJet<T>& operator-=(TJet<T>& a, const TJet<T>& b) {
  return a = a - b;
}
template <class T>
TJet<T>& operator*=(TJet<T>& a, const TJet<T>& b) {
  return a = a * b;
}

// double mixes; T-typed constants promote through the implicit TJet ctor.
template <class T>
TJet<T> operator+(const TJet<T>& a, double c) {
  return {a.f + c, a.d1, a.d2};
}
template <class T>
TJet<T> operator+(double c, const TJet<T>& a) {
  return a + c;
}
template <class T>
TJet<T> operator-(const TJet<T>& a, double c) {
  return {a.f - c, a.d1, a.d2};
}
template <class T>
TJet<T> operator-(double c, const TJet<T>& a) {
  return {c - a.f, -a.d1, -a.d2};
}
template <class T>
TJet<T> operator*(const TJet<T>& a, double c) {
  return {a.f * c, a.d1 * c, a.d2 * c};
}
template <class T>
TJet<T> operator*(double c, const TJet<T>& a) {
  return a * c;
}
template <class T>
TJet<T> operator/(const TJet<T>& a, double c) {
  return {a.f / c, a.d1 / c, a.d2 / c};
}
template <class T>
TJet<T> operator/(double c, const TJet<T>& a) {
  return TJet<T>(c) / a;
}

template <class T>
TJet<T> tanh(const TJet<T>& x) {
  using std::tanh;
  T t = tanh(x.f);
  T s = 1.0 - t * t;
  return {t, s * x.d1, s * x.d2 - 2.0 * (t * s * (x.d1 * x.d1))};
}

template <class T>
TJet<T> exp(const TJet<T>& x) {
  using std::exp;
  T e = exp(x.f);
  return {e, e * x.d1, e * (x.d2 + x.d1 * x.d1)};
}

template <class T>
TJet<T> sin(const TJet<T>& x) {
  using std::cos;
  using std::sin;
  T s = sin(x.f);
  T c = cos(x.f);
  return {s, c * x.d1, c * x.d2 - s * (x.d1 * x.d1)};
}

template <class T>
TJet<T> cos(const TJet<T>& x) {
  using std::cos;
  using std::sin;
  T c = cos(x.f);
  T s = sin(x.f);
  return {c, -(s * x.d1), -(s * x.d2) - c * (x.d1 * x.d1)};
}

template <class T>
TJet<T> sqrt(const TJet<T>& x) {
  using std::sqrt;
  T r = sqrt(x.f);
  T d1 = x.d1 / (2.0 * r);
  return {r, d1, x.d2 / (2.0 * r) - (d1 * d1) / r};
}

template <class T>
TJet<T> log(const TJet<T>& x) {
  using std::log;
  T v = log(x.f);
  T d1 = x.d1 / x.f;
  return {v, d1, x.d2 / x.f - d1 * d1};
}

template <class T>
TJet<T> pow(const TJet<T>& x, double p) {
  using std::pow;
  T v = pow(x.f, p);
  T g = p * pow(x.f, p - 1.0);
  T h = p * (p - 1.0) * pow(x.f, p - 2.0);
  return {v, g * x.d1, g * x.d2 + h * (x.d1 * x.d1)};
}

template <class T>
TJet<T> log_sigmoid(const TJet<T>& x) {
  using std::exp;
  // d/du log sigmoid(u) = sigmoid(-u); d2/du2 = -sigmoid(u) sigmoid(-u)
  T v = log_sigmoid(x.f);
  T g = exp(log_sigmoid(-x.f));
  T h = -(exp(v) * g);
  return {v, g * x.d1, g * x.d2 + h * (x.d1 * x.d1)};
}

template <class T>
TJet<T> square(const TJet<T>& x) {
  return x * x;
}

/// One requested input direction; `second` asks for the second derivative too.
struct Direction {
  int axis = 0;
  bool second = false;
};

struct DirectionSet {
  std::vector<Direction> dirs;

  int count() const { return static_cast<int>(dirs.size()); }
  bool any_second() const {
    for (const auto& d : dirs)
      if (d.second) return true;
    return false;
  }
};

/// Value plus first/second partials of one network output with respect to the
/// declared input directions. Entries share the coefficient type T, so a
/// Jet2<Scalar> remains differentiable with respect to tape variables.
template <class T>
struct Jet2 {
  T value{};
  int n_dirs = 0;
  std::array<T, 3> grad{};
  std::array<T, 3> hess{};

  const T& d1(int dir) const {
    if (dir < 0 || dir >= n_dirs) throw ShapeError("Jet2: direction out of range");
    return grad[static_cast<std::size_t>(dir)];
  }
  const T& d2(int dir) const {
    if (dir < 0 || dir >= n_dirs) throw ShapeError("Jet2: direction out of range");
    return hess[static_cast<std::size_t>(dir)];
  }
};

/// Propagates second-order jets through `eval` once per requested direction.
///
/// `eval(span<const TJet<T>> in, span<TJet<T>> out)` must be a pure function
/// of its inputs. Returns one Jet2 per output.
template <class T, class EvalFn>
std::vector<Jet2<T>> input_jets(EvalFn&& eval, std::span<const T> point, int n_outputs,
                                const DirectionSet& ds) {
  if (ds.count() > 3) throw ShapeError("input_jets: at most 3 directions supported");
  for (const auto& d : ds.dirs) {
    if (d.axis < 0 || d.axis >= static_cast<int>(point.size())) {
      throw ShapeError("input_jets: direction axis out of range");
    }
  }
  std::vector<Jet2<T>> result(static_cast<std::size_t>(n_outputs));
  for (auto& j : result) j.n_dirs = ds.count();

  std::vector<TJet<T>> in(point.size());
  std::vector<TJet<T>> out(static_cast<std::size_t>(n_outputs));
  for (int d = 0; d < ds.count(); ++d) {
    for (std::size_t i = 0; i < point.size(); ++i) in[i] = TJet<T>(point[i]);
    in[static_cast<std::size_t>(ds.dirs[static_cast<std::size_t>(d)].axis)] =
        TJet<T>::variable(point[static_cast<std::size_t>(ds.dirs[static_cast<std::size_t>(d)].axis)]);
    eval(std::span<const TJet<T>>(in), std::span<TJet<T>>(out));
    for (int k = 0; k < n_outputs; ++k) {
      auto& jet = result[static_cast<std::size_t>(k)];
      if (d == 0) jet.value = out[static_cast<std::size_t>(k)].f;
      jet.grad[static_cast<std::size_t>(d)] = out[static_cast<std::size_t>(k)].d1;
      jet.hess[static_cast<std::size_t>(d)] = out[static_cast<std::size_t>(k)].d2;
    }
  }
  if (ds.count() == 0) {
    for (std::size_t i = 0; i < point.size(); ++i) in[i] = TJet<T>(point[i]);
    eval(std::span<const TJet<T>>(in), std::span<TJet<T>>(out));
    for (int k = 0; k < n_outputs; ++k) {
      result[static_cast<std::size_t>(k)].value = out[static_cast<std::size_t>(k)].f;
    }
  }
  return result;
}

/// Mixed second partial d2/dxi dxj via the (e_i + e_j) seed identity:
/// f_(i+j)'' = f_ii + 2 f_ij + f_jj.
template <class T, class EvalFn>
std::vector<T> input_jet_cross(EvalFn&& eval, std::span<const T> point, int n_outputs, int axis_i,
                               int axis_j) {
  if (axis_i == axis_j) throw ShapeError("input_jet_cross: axes must differ");
  DirectionSet both{{Direction{axis_i, true}, Direction{axis_j, true}}};
  auto diag = input_jets(eval, point, n_outputs, both);

  std::vector<TJet<T>> in(point.size());
  std::vector<TJet<T>> out(static_cast<std::size_t>(n_outputs));
  for (std::size_t i = 0; i < point.size(); ++i) in[i] = TJet<T>(point[i]);
  in[static_cast<std::size_t>(axis_i)] = TJet<T>(point[static_cast<std::size_t>(axis_i)], T(1.0), T(0.0));
  in[static_cast<std::size_t>(axis_j)] = TJet<T>(point[static_cast<std::size_t>(axis_j)], T(1.0), T(0.0));
  eval(std::span<const TJet<T>>(in), std::span<TJet<T>>(out));

  std::vector<T> cross(static_cast<std::size_t>(n_outputs));
  for (int k = 0; k < n_outputs; ++k) {
    const auto& jet = diag[static_cast<std::size_t>(k)];
    cross[static_cast<std::size_t>(k)] =
        0.5 * (out[static_cast<std::size_t>(k)].d2 - jet.d2(0) - jet.d2(1));
  }
  return cross;
}

}  // namespace hyperlora
