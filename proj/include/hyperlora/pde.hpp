#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hyperlora/grf.hpp"
#include "hyperlora/hyper.hpp"
#include "hyperlora/jet.hpp"

namespace hyperlora {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Domain {
  std::vector<std::array<double, 2>> box;  // spatial extents
  std::optional<double> t_end;             // time horizon when unsteady

  int spatial_dim() const { return static_cast<int>(box.size()); }
  int point_dim() const { return spatial_dim() + (t_end ? 1 : 0); }

  bool contains(const Vec& p) const {
    if (p.size() != point_dim()) return false;
    for (int d = 0; d < spatial_dim(); ++d) {
      if (p[d] < box[static_cast<std::size_t>(d)][0] || p[d] > box[static_cast<std::size_t>(d)][1]) {
        return false;
      }
    }
    if (t_end && (p[spatial_dim()] < 0.0 || p[spatial_dim()] > *t_end)) return false;
    return true;
  }
};

enum class SystemId : std::uint8_t { Burgers1d, Burgers2d, Kovasznay };

inline const char* to_string(SystemId id) {
  switch (id) {
    case SystemId::Burgers1d: return "burgers1d";
    case SystemId::Burgers2d: return "burgers2d";
    case SystemId::Kovasznay: return "kovasznay";
  }
  return "?";
}

inline SystemId system_from_string(const std::string& s) {
  if (s == "burgers1d") return SystemId::Burgers1d;
  if (s == "burgers2d") return SystemId::Burgers2d;
  if (s == "kovasznay") return SystemId::Kovasznay;
  throw ConfigError("unknown system '" + s + "'");
}

// Input axis conventions per system (spatial axes first, then time):
//   burgers1d: (x, t)      x carries second derivatives
//   burgers2d: (x, y, t)   x, y carry second derivatives
//   kovasznay: (x, y)      both carry second derivatives
namespace axis {
inline constexpr int x = 0;
inline constexpr int y = 1;
inline constexpr int b1_t = 1;
inline constexpr int b2_t = 2;
}  // namespace axis

/// One benchmark PDE instance: identity, task parameter, and everything a
/// trainer needs to assemble losses against it.
struct PdeSystem {
  SystemId id = SystemId::Kovasznay;
  double nu = 0.0;
  double re = 0.0;
  Vec u0;  // burgers1d initial condition on the 128-point grid
  std::uint64_t task_seed = 0;

  static PdeSystem kovasznay(double reynolds) {
    if (reynolds <= 0.0) throw ConfigError("kovasznay: Re must be positive");
    PdeSystem s;
    s.id = SystemId::Kovasznay;
    s.re = reynolds;
    return s;
  }

  static PdeSystem burgers2d(double viscosity) {
    if (viscosity <= 0.0) throw ConfigError("burgers2d: nu must be positive");
    PdeSystem s;
    s.id = SystemId::Burgers2d;
    s.nu = viscosity;
    return s;
  }

  static PdeSystem burgers1d(Vec initial, std::uint64_t seed = 0, double viscosity = 0.01) {
    if (initial.size() != 128) throw ConfigError("burgers1d: u0 must have 128 samples");
    PdeSystem s;
    s.id = SystemId::Burgers1d;
    s.nu = viscosity;
    s.u0 = std::move(initial);
    s.task_seed = seed;
    return s;
  }

  static PdeSystem burgers1d_seeded(std::uint64_t seed, double viscosity = 0.01) {
    return burgers1d(sample_grf_u0(seed), seed, viscosity);
  }

  int input_dim() const {
    switch (id) {
      case SystemId::Burgers1d: return 2;
      case SystemId::Burgers2d: return 3;
      case SystemId::Kovasznay: return 2;
    }
    return 0;
  }

  int output_dim() const {
    switch (id) {
      case SystemId::Burgers1d: return 1;
      case SystemId::Burgers2d: return 2;
      case SystemId::Kovasznay: return 3;
    }
    return 0;
  }

  Domain domain() const {
    switch (id) {
      case SystemId::Burgers1d: return Domain{{{0.0, 1.0}}, 1.0};
      case SystemId::Burgers2d: return Domain{{{0.0, 1.0}, {0.0, 1.0}}, 1.0};
      case SystemId::Kovasznay: return Domain{{{0.0, 1.0}, {0.0, 1.0}}, std::nullopt};
    }
    return {};
  }

  /// Derivative lanes the residual consumes.
  DirectionSet directions() const {
    switch (id) {
      case SystemId::Burgers1d: return DirectionSet{{{axis::x, true}, {axis::b1_t, false}}};
      case SystemId::Burgers2d:
        return DirectionSet{{{axis::x, true}, {axis::y, true}, {axis::b2_t, false}}};
      case SystemId::Kovasznay: return DirectionSet{{{axis::x, true}, {axis::y, true}}};
    }
    return {};
  }

  EmbeddingSpec embedding_spec() const {
    switch (id) {
      case SystemId::Burgers1d: return EmbeddingSpec::initial_condition(128);
      case SystemId::Burgers2d: return EmbeddingSpec::viscosity();
      case SystemId::Kovasznay: return EmbeddingSpec::reynolds();
    }
    return {};
  }

  Vec raw_embedding() const {
    switch (id) {
      case SystemId::Burgers1d: return u0;
      case SystemId::Burgers2d: {
        Vec v(1);
        v[0] = nu;
        return v;
      }
      case SystemId::Kovasznay: {
        Vec v(1);
        v[0] = re;
        return v;
      }
    }
    return {};
  }

  TaskEmbedding embedding() const { return TaskEmbedding::from_raw(embedding_spec(), raw_embedding()); }

  bool has_analytic_solution() const { return id != SystemId::Burgers1d; }
};

// ---------------------------------------------------------------------------
// Residual operators (conservative Burgers reading: u_t + u u_x = nu u_xx)
// ---------------------------------------------------------------------------

template <class T>
T residual_burgers1d(const Jet2<T>& u, double nu) {
  return u.d1(axis::b1_t) + u.value * u.d1(axis::x) - nu * u.d2(axis::x);
}

template <class T>
std::array<T, 2> residual_burgers2d(const Jet2<T>& u, const Jet2<T>& v, double nu) {
  T ru = u.d1(axis::b2_t) + u.value * u.d1(axis::x) + v.value * u.d1(axis::y) -
         nu * (u.d2(axis::x) + u.d2(axis::y));
  T rv = v.d1(axis::b2_t) + u.value * v.d1(axis::x) + v.value * v.d1(axis::y) -
         nu * (v.d2(axis::x) + v.d2(axis::y));
  return {ru, rv};
}

/// (continuity, x-momentum, y-momentum).
template <class T>
std::array<T, 3> residual_kovasznay(const Jet2<T>& u, const Jet2<T>& v, const Jet2<T>& p, double re) {
  T cont = u.d1(axis::x) + v.d1(axis::y);
  T rx = u.value * u.d1(axis::x) + v.value * u.d1(axis::y) + p.d1(axis::x) -
         (u.d2(axis::x) + u.d2(axis::y)) / re;
  T ry = u.value * v.d1(axis::x) + v.value * v.d1(axis::y) + p.d1(axis::y) -
         (v.d2(axis::x) + v.d2(axis::y)) / re;
  return {cont, rx, ry};
}

// ---------------------------------------------------------------------------
// Closed-form solutions
// ---------------------------------------------------------------------------

/// Traveling-front solution of the 2D coupled Burgers system; evaluated with
/// a log-sigmoid so extreme exponents (sharp fronts at small nu) stay finite.
/// u carries the negative quarter-sigmoid and v the positive one; that
/// assignment is the one that annihilates the momentum residuals.
template <class T>
std::array<T, 2> analytic_burgers2d(const T& x, const T& y, const T& t, double nu) {
  using std::exp;
  T z = (-4.0 * x + 4.0 * y - t) * (1.0 / (32.0 * nu));
  T s = exp(log_sigmoid(-z));  // 1 / (1 + exp(z))
  return {0.75 - 0.25 * s, 0.75 + 0.25 * s};
}

inline double kovasznay_lambda(double re) {
  return 0.5 * re - std::sqrt(0.25 * re * re + 4.0 * kPi * kPi);
}

template <class T>
std::array<T, 3> analytic_kovasznay(const T& x, const T& y, double re) {
  using std::cos;
  using std::exp;
  using std::sin;
  const double lam = kovasznay_lambda(re);
  T E = exp(lam * x);
  T u = 1.0 - E * cos(kTwoPi * y);
  T v = (lam / kTwoPi) * (E * sin(kTwoPi * y));
  T p = 0.5 * (1.0 - E * E);
  return {u, v, p};
}

// ---------------------------------------------------------------------------
// Point sets
// ---------------------------------------------------------------------------

struct PointBudget {
  int collocation = 0;
  int initial = 0;
  int boundary = 0;  // burgers1d: number of periodic tie times
};

inline PointBudget default_budget(SystemId id) {
  switch (id) {
    case SystemId::Burgers1d: return {10000, 128, 100};
    case SystemId::Burgers2d: return {10000, 500, 400};
    case SystemId::Kovasznay: return {2601, 0, 320};
  }
  return {};
}

/// Training point sets for one task. Matrices are dim x count with targets
/// out x count. For the periodic 1D Burgers boundary, bc_points holds paired
/// columns (2i, 2i+1) = (0, t_i), (1, t_i) and bc_values stays empty.
struct PointSets {
  Mat collocation;
  Mat ic_points;
  Mat ic_values;
  Mat bc_points;
  Mat bc_values;
  bool periodic_bc = false;
};

namespace detail {

/// k indices drawn without replacement from 0..n-1 (partial Fisher-Yates).
inline std::vector<int> sample_without_replacement(int n, int k, Rng& rng) {
  if (k > n) throw ConfigError("sample_without_replacement: k > n");
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n - i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

}  // namespace detail

inline PointSets make_point_sets(const PdeSystem& sys, std::uint64_t seed, const PointBudget& budget) {
  Rng rng(seed);
  PointSets pts;
  switch (sys.id) {
    case SystemId::Burgers1d: {
      pts.collocation.resize(2, budget.collocation);
      for (int i = 0; i < budget.collocation; ++i) {
        pts.collocation(0, i) = rng.uniform();
        pts.collocation(1, i) = rng.uniform();
      }
      if (budget.initial > 0) {
        if (budget.initial != sys.u0.size()) {
          throw ConfigError("burgers1d: IC budget must equal the u0 grid size");
        }
        pts.ic_points.resize(2, budget.initial);
        pts.ic_values.resize(1, budget.initial);
        for (int i = 0; i < budget.initial; ++i) {
          pts.ic_points(0, i) = static_cast<double>(i) / budget.initial;
          pts.ic_points(1, i) = 0.0;
          pts.ic_values(0, i) = sys.u0[i];
        }
      }
      pts.periodic_bc = true;
      pts.bc_points.resize(2, 2 * budget.boundary);
      for (int i = 0; i < budget.boundary; ++i) {
        const double t = rng.uniform();
        pts.bc_points(0, 2 * i) = 0.0;
        pts.bc_points(1, 2 * i) = t;
        pts.bc_points(0, 2 * i + 1) = 1.0;
        pts.bc_points(1, 2 * i + 1) = t;
      }
      break;
    }
    case SystemId::Burgers2d: {
      pts.collocation.resize(3, budget.collocation);
      for (int i = 0; i < budget.collocation; ++i) {
        pts.collocation(0, i) = rng.uniform();
        pts.collocation(1, i) = rng.uniform();
        pts.collocation(2, i) = rng.uniform();
      }
      pts.ic_points.resize(3, budget.initial);
      pts.ic_values.resize(2, budget.initial);
      for (int i = 0; i < budget.initial; ++i) {
        const double x = rng.uniform(), y = rng.uniform();
        pts.ic_points(0, i) = x;
        pts.ic_points(1, i) = y;
        pts.ic_points(2, i) = 0.0;
        auto uv = analytic_burgers2d(x, y, 0.0, sys.nu);
        pts.ic_values(0, i) = uv[0];
        pts.ic_values(1, i) = uv[1];
      }
      if (budget.boundary % 4 != 0) throw ConfigError("burgers2d: BC budget must split across 4 faces");
      const int per_face = budget.boundary / 4;
      pts.bc_points.resize(3, budget.boundary);
      pts.bc_values.resize(2, budget.boundary);
      int col = 0;
      for (int face = 0; face < 4; ++face) {
        for (int i = 0; i < per_face; ++i, ++col) {
          const double s = rng.uniform(), t = rng.uniform();
          double x = 0.0, y = 0.0;
          switch (face) {
            case 0: x = 0.0, y = s; break;
            case 1: x = 1.0, y = s; break;
            case 2: x = s, y = 0.0; break;
            case 3: x = s, y = 1.0; break;
          }
          pts.bc_points(0, col) = x;
          pts.bc_points(1, col) = y;
          pts.bc_points(2, col) = t;
          auto uv = analytic_burgers2d(x, y, t, sys.nu);
          pts.bc_values(0, col) = uv[0];
          pts.bc_values(1, col) = uv[1];
        }
      }
      break;
    }
    case SystemId::Kovasznay: {
      // collocation drawn from the 101x101 lattice without replacement
      const int grid = 101;
      auto idx = detail::sample_without_replacement(grid * grid, budget.collocation, rng);
      pts.collocation.resize(2, budget.collocation);
      for (int i = 0; i < budget.collocation; ++i) {
        const int gi = idx[static_cast<std::size_t>(i)];
        pts.collocation(0, i) = static_cast<double>(gi % grid) / (grid - 1);
        pts.collocation(1, i) = static_cast<double>(gi / grid) / (grid - 1);
      }
      if (budget.boundary % 4 != 0) throw ConfigError("kovasznay: BC budget must split across 4 faces");
      const int per_face = budget.boundary / 4;
      pts.bc_points.resize(2, budget.boundary);
      pts.bc_values.resize(3, budget.boundary);
      int col = 0;
      for (int face = 0; face < 4; ++face) {
        auto nodes = detail::sample_without_replacement(grid, per_face, rng);
        for (int i = 0; i < per_face; ++i, ++col) {
          const double s = static_cast<double>(nodes[static_cast<std::size_t>(i)]) / (grid - 1);
          double x = 0.0, y = 0.0;
          switch (face) {
            case 0: x = 0.0, y = s; break;
            case 1: x = 1.0, y = s; break;
            case 2: x = s, y = 0.0; break;
            case 3: x = s, y = 1.0; break;
          }
          pts.bc_points(0, col) = x;
          pts.bc_points(1, col) = y;
          auto uvp = analytic_kovasznay(x, y, sys.re);
          pts.bc_values(0, col) = uvp[0];
          pts.bc_values(1, col) = uvp[1];
          pts.bc_values(2, col) = uvp[2];
        }
      }
      break;
    }
  }
  return pts;
}

inline PointSets make_point_sets(const PdeSystem& sys, std::uint64_t seed) {
  return make_point_sets(sys, seed, default_budget(sys.id));
}

}  // namespace hyperlora
