#pragma once

#include <string>

#include "hyperlora/batched.hpp"
#include "hyperlora/pde.hpp"
#include "hyperlora/tape.hpp"

namespace hyperlora {

struct LossReport {
  double l_ic = 0.0;
  double l_bc = 0.0;
  double l_physics = 0.0;
  double l_data = 0.0;
  double total = 0.0;
};

struct LossWeights {
  double ic = 1.0;
  double bc = 1.0;
  double physics = 1.0;
  double data = 1.0;
};

namespace detail {

/// Reads network-output lanes as plain doubles.
struct DoubleLanes {
  const LaneSet* lanes;
  double value(int k, Eigen::Index i) const { return lanes->v(k, i); }
  double d1(int d, int k, Eigen::Index i) const {
    return lanes->d1[static_cast<std::size_t>(d)](k, i);
  }
  double d2(int d, int k, Eigen::Index i) const {
    return lanes->d2[static_cast<std::size_t>(d)](k, i);
  }
};

/// Network-output lanes introduced as tape leaves (fixed creation order), so
/// the loss graph lives on the tape and leaf adjoints are exactly the output
/// adjoints the batched backward pass consumes.
struct TapedLanes {
  Eigen::Index n = 0;
  int out = 0;
  std::vector<Scalar> v;
  std::vector<std::vector<Scalar>> d1s, d2s;

  static TapedLanes make(Tape& tape, const LaneSet& lanes, const DirectionSet& ds) {
    TapedLanes t;
    t.out = static_cast<int>(lanes.v.rows());
    t.n = lanes.v.cols();
    t.v.reserve(static_cast<std::size_t>(t.out) * static_cast<std::size_t>(t.n));
    for (int k = 0; k < t.out; ++k)
      for (Eigen::Index i = 0; i < t.n; ++i) t.v.push_back(tape.variable(lanes.v(k, i)));
    t.d1s.resize(static_cast<std::size_t>(ds.count()));
    t.d2s.resize(static_cast<std::size_t>(ds.count()));
    for (int d = 0; d < ds.count(); ++d) {
      auto& row1 = t.d1s[static_cast<std::size_t>(d)];
      row1.reserve(t.v.size());
      const Mat& m1 = lanes.d1[static_cast<std::size_t>(d)];
      for (int k = 0; k < t.out; ++k)
        for (Eigen::Index i = 0; i < t.n; ++i) row1.push_back(tape.variable(m1(k, i)));
      if (ds.dirs[static_cast<std::size_t>(d)].second) {
        auto& row2 = t.d2s[static_cast<std::size_t>(d)];
        row2.reserve(t.v.size());
        const Mat& m2 = lanes.d2[static_cast<std::size_t>(d)];
        for (int k = 0; k < t.out; ++k)
          for (Eigen::Index i = 0; i < t.n; ++i) row2.push_back(tape.variable(m2(k, i)));
      }
    }
    return t;
  }

  const Scalar& value(int k, Eigen::Index i) const {
    return v[static_cast<std::size_t>(k) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)];
  }
  const Scalar& d1(int d, int k, Eigen::Index i) const {
    return d1s[static_cast<std::size_t>(d)]
              [static_cast<std::size_t>(k) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)];
  }
  const Scalar& d2(int d, int k, Eigen::Index i) const {
    return d2s[static_cast<std::size_t>(d)]
              [static_cast<std::size_t>(k) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)];
  }

  /// Leaf adjoints gathered back into dense lanes for the batched backward.
  LaneSet adjoints(const Tape& tape, const DirectionSet& ds) const {
    LaneSet adj;
    adj.v.resize(out, n);
    adj.d1.resize(d1s.size());
    adj.d2.resize(d2s.size());
    std::size_t idx = 0;
    for (int k = 0; k < out; ++k)
      for (Eigen::Index i = 0; i < n; ++i) adj.v(k, i) = tape.adjoint(v[idx++]);
    for (int d = 0; d < ds.count(); ++d) {
      const auto du = static_cast<std::size_t>(d);
      adj.d1[du].resize(out, n);
      idx = 0;
      for (int k = 0; k < out; ++k)
        for (Eigen::Index i = 0; i < n; ++i) adj.d1[du](k, i) = tape.adjoint(d1s[du][idx++]);
      if (ds.dirs[du].second) {
        adj.d2[du].resize(out, n);
        idx = 0;
        for (int k = 0; k < out; ++k)
          for (Eigen::Index i = 0; i < n; ++i) adj.d2[du](k, i) = tape.adjoint(d2s[du][idx++]);
      }
    }
    return adj;
  }
};

template <class T, class LA>
Jet2<T> gather_jet(const LA& la, const DirectionSet& ds, int k, Eigen::Index i) {
  Jet2<T> jet;
  jet.n_dirs = ds.count();
  jet.value = la.value(k, i);
  for (int d = 0; d < ds.count(); ++d) {
    jet.grad[static_cast<std::size_t>(d)] = la.d1(d, k, i);
    if (ds.dirs[static_cast<std::size_t>(d)].second) {
      jet.hess[static_cast<std::size_t>(d)] = la.d2(d, k, i);
    }
  }
  return jet;
}

/// Mean over points of the per-point sum of squared residuals.
template <class T, class LA>
T physics_term(const PdeSystem& sys, const LA& colloc, Eigen::Index n) {
  const DirectionSet ds = sys.directions();
  T acc(0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    switch (sys.id) {
      case SystemId::Burgers1d: {
        T r = residual_burgers1d(gather_jet<T>(colloc, ds, 0, i), sys.nu);
        acc += r * r;
        break;
      }
      case SystemId::Burgers2d: {
        auto r = residual_burgers2d(gather_jet<T>(colloc, ds, 0, i), gather_jet<T>(colloc, ds, 1, i),
                                    sys.nu);
        acc += r[0] * r[0] + r[1] * r[1];
        break;
      }
      case SystemId::Kovasznay: {
        auto r = residual_kovasznay(gather_jet<T>(colloc, ds, 0, i), gather_jet<T>(colloc, ds, 1, i),
                                    gather_jet<T>(colloc, ds, 2, i), sys.re);
        acc += r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
        break;
      }
    }
  }
  return acc * (1.0 / static_cast<double>(n));
}

/// Mean over points of the per-point sum of squared mismatches.
template <class T, class LA>
T supervised_term(const LA& la, const Mat& targets) {
  T acc(0.0);
  for (int k = 0; k < targets.rows(); ++k) {
    for (Eigen::Index i = 0; i < targets.cols(); ++i) {
      T e = la.value(k, i) - targets(k, i);
      acc += e * e;
    }
  }
  return acc * (1.0 / static_cast<double>(targets.cols()));
}

/// Mean over tie pairs of the squared periodic mismatch u(0,t) - u(1,t).
template <class T, class LA>
T periodic_term(const LA& la, int out, Eigen::Index n_cols) {
  const Eigen::Index pairs = n_cols / 2;
  T acc(0.0);
  for (int k = 0; k < out; ++k) {
    for (Eigen::Index i = 0; i < pairs; ++i) {
      T e = la.value(k, 2 * i) - la.value(k, 2 * i + 1);
      acc += e * e;
    }
  }
  return acc * (1.0 / static_cast<double>(pairs));
}

inline void check_component(double value, const char* component, const Mat& points) {
  if (!std::isfinite(value)) {
    std::string where = "(unknown point)";
    if (points.cols() > 0) {
      where = "(first point:";
      for (int d = 0; d < points.rows(); ++d) where += " " + std::to_string(points(d, 0));
      where += ")";
    }
    throw NumericError(std::string("loss component ") + component + " is non-finite " + where);
  }
}

}  // namespace detail

/// Assembles the physics-informed loss of one network on one task, and the
/// exact gradient of that loss with respect to the dense weights.
///
/// Forward derivatives come from the batched jet engine; the loss graph from
/// the network outputs onward is recorded on a scalar tape, whose leaf
/// adjoints seed the batched backward pass. One engine instance serves one
/// (task, network-shape) pair and reuses its buffers across epochs.
class PinnLossEngine {
 public:
  PinnLossEngine(MlpConfig cfg, PdeSystem sys, PointSets pts, LossWeights w = {})
      : sys_(std::move(sys)),
        pts_(std::move(pts)),
        weights_(w),
        colloc_net_(cfg),
        ic_net_(cfg),
        bc_net_(cfg) {
    if (cfg.input_dim != sys_.input_dim() || cfg.output_dim != sys_.output_dim()) {
      throw ShapeError("PinnLossEngine: network dims do not match the system");
    }
  }

  const PdeSystem& system() const { return sys_; }
  const PointSets& points() const { return pts_; }

  LossReport loss(const DenseWeights& w) { return run(w, nullptr); }

  LossReport loss_and_grad(const DenseWeights& w, MlpGrad& grad) { return run(w, &grad); }

 private:
  LossReport run(const DenseWeights& w, MlpGrad* grad) {
    const DirectionSet ds = sys_.directions();
    const DirectionSet none;
    const bool has_ic = pts_.ic_points.cols() > 0;
    const bool has_bc = pts_.bc_points.cols() > 0;

    const LaneSet& f_c = colloc_net_.forward(w, pts_.collocation, ds);
    const LaneSet* f_ic = has_ic ? &ic_net_.forward(w, pts_.ic_points, none) : nullptr;
    const LaneSet* f_bc = has_bc ? &bc_net_.forward(w, pts_.bc_points, none) : nullptr;

    LossReport rep;
    if (grad == nullptr) {
      rep.l_physics = detail::physics_term<double>(sys_, detail::DoubleLanes{&f_c},
                                                   pts_.collocation.cols());
      if (has_ic) rep.l_ic = detail::supervised_term<double>(detail::DoubleLanes{f_ic}, pts_.ic_values);
      if (has_bc) {
        rep.l_bc = pts_.periodic_bc
                       ? detail::periodic_term<double>(detail::DoubleLanes{f_bc}, sys_.output_dim(),
                                                       pts_.bc_points.cols())
                       : detail::supervised_term<double>(detail::DoubleLanes{f_bc}, pts_.bc_values);
      }
      finalize(rep);
      return rep;
    }

    tape_.clear();
    auto tl_c = detail::TapedLanes::make(tape_, f_c, ds);
    detail::TapedLanes tl_ic, tl_bc;
    if (has_ic) tl_ic = detail::TapedLanes::make(tape_, *f_ic, none);
    if (has_bc) tl_bc = detail::TapedLanes::make(tape_, *f_bc, none);

    Scalar physics = detail::physics_term<Scalar>(sys_, tl_c, pts_.collocation.cols());
    Scalar ic(0.0), bc(0.0);
    if (has_ic) ic = detail::supervised_term<Scalar>(tl_ic, pts_.ic_values);
    if (has_bc) {
      bc = pts_.periodic_bc
               ? detail::periodic_term<Scalar>(tl_bc, sys_.output_dim(), pts_.bc_points.cols())
               : detail::supervised_term<Scalar>(tl_bc, pts_.bc_values);
    }
    rep.l_physics = physics.value();
    rep.l_ic = ic.value();
    rep.l_bc = bc.value();

    Scalar total = weights_.physics * physics + weights_.ic * ic + weights_.bc * bc;
    finalize(rep);

    tape_.backward(total);
    grad->resize_like(w);
    grad->set_zero();
    grad->add_scaled(colloc_net_.backward(w, tl_c.adjoints(tape_, ds)), 1.0);
    if (has_ic) grad->add_scaled(ic_net_.backward(w, tl_ic.adjoints(tape_, none)), 1.0);
    if (has_bc) grad->add_scaled(bc_net_.backward(w, tl_bc.adjoints(tape_, none)), 1.0);
    return rep;
  }

  void finalize(LossReport& rep) const {
    detail::check_component(rep.l_physics, "l_physics", pts_.collocation);
    detail::check_component(rep.l_ic, "l_ic", pts_.ic_points);
    detail::check_component(rep.l_bc, "l_bc", pts_.bc_points);
    rep.total = weights_.physics * rep.l_physics + weights_.ic * rep.l_ic + weights_.bc * rep.l_bc +
                weights_.data * rep.l_data;
  }

  PdeSystem sys_;
  PointSets pts_;
  LossWeights weights_;
  BatchedMlp colloc_net_, ic_net_, bc_net_;
  Tape tape_;
};

/// Supervised mean-squared-error loss against fixed labels (the data-driven
/// hypernetwork regimes). Gradient is closed-form; no tape needed.
class DataMseEngine {
 public:
  DataMseEngine(MlpConfig cfg, Mat points, Mat labels)
      : points_(std::move(points)), labels_(std::move(labels)), net_(std::move(cfg)) {
    if (labels_.cols() != points_.cols()) throw ShapeError("DataMseEngine: label count mismatch");
  }

  double loss(const DenseWeights& w) {
    const LaneSet& f = net_.forward(w, points_, DirectionSet{});
    return (f.v - labels_).squaredNorm() / static_cast<double>(points_.cols());
  }

  double loss_and_grad(const DenseWeights& w, MlpGrad& grad) {
    const LaneSet& f = net_.forward(w, points_, DirectionSet{});
    const double n = static_cast<double>(points_.cols());
    LaneSet adj;
    adj.v = (2.0 / n) * (f.v - labels_);
    const double value = (f.v - labels_).squaredNorm() / n;
    grad.resize_like(w);
    grad.set_zero();
    grad.add_scaled(net_.backward(w, adj), 1.0);
    return value;
  }

 private:
  Mat points_;
  Mat labels_;
  BatchedMlp net_;
};

/// Spec-level convenience: the physics-informed loss of a network on a task.
inline LossReport pinn_loss(const Mlp& net, const PdeSystem& sys, const PointSets& pts,
                            LossWeights w = {}) {
  PinnLossEngine engine(net.config(), sys, pts, w);
  return engine.loss(net.weights());
}

/// Output lanes of the closed-form solution at the given points (systems with
/// an analytic solution only). Lets tests run the loss with the exact
/// solution in place of a network.
inline LaneSet analytic_lanes(const PdeSystem& sys, const Mat& points, const DirectionSet& ds) {
  const int out = sys.output_dim();
  LaneSet lanes;
  lanes.v.resize(out, points.cols());
  lanes.d1.assign(static_cast<std::size_t>(ds.count()), Mat(out, points.cols()));
  lanes.d2.assign(static_cast<std::size_t>(ds.count()), Mat(out, points.cols()));

  auto eval = [&](std::span<const TJet<double>> in, std::span<TJet<double>> o) {
    if (sys.id == SystemId::Kovasznay) {
      auto s = analytic_kovasznay(in[0], in[1], sys.re);
      o[0] = s[0];
      o[1] = s[1];
      o[2] = s[2];
    } else if (sys.id == SystemId::Burgers2d) {
      auto s = analytic_burgers2d(in[0], in[1], in[2], sys.nu);
      o[0] = s[0];
      o[1] = s[1];
    } else {
      throw ConfigError("analytic_lanes: no closed form for burgers1d");
    }
  };

  std::vector<double> p(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    for (int d = 0; d < points.rows(); ++d) p[static_cast<std::size_t>(d)] = points(d, i);
    auto jets = input_jets<double>(eval, std::span<const double>(p), out, ds);
    for (int k = 0; k < out; ++k) {
      lanes.v(k, i) = jets[static_cast<std::size_t>(k)].value;
      for (int d = 0; d < ds.count(); ++d) {
        lanes.d1[static_cast<std::size_t>(d)](k, i) = jets[static_cast<std::size_t>(k)].d1(d);
        if (ds.dirs[static_cast<std::size_t>(d)].second) {
          lanes.d2[static_cast<std::size_t>(d)](k, i) = jets[static_cast<std::size_t>(k)].d2(d);
        }
      }
    }
  }
  return lanes;
}

/// pinn_loss with the analytic solution standing in for the network.
inline LossReport pinn_loss_analytic(const PdeSystem& sys, const PointSets& pts, LossWeights w = {}) {
  const DirectionSet ds = sys.directions();
  LossReport rep;
  LaneSet colloc = analytic_lanes(sys, pts.collocation, ds);
  rep.l_physics =
      detail::physics_term<double>(sys, detail::DoubleLanes{&colloc}, pts.collocation.cols());
  if (pts.ic_points.cols() > 0) {
    LaneSet ic = analytic_lanes(sys, pts.ic_points, DirectionSet{});
    rep.l_ic = detail::supervised_term<double>(detail::DoubleLanes{&ic}, pts.ic_values);
  }
  if (pts.bc_points.cols() > 0) {
    LaneSet bc = analytic_lanes(sys, pts.bc_points, DirectionSet{});
    rep.l_bc = pts.periodic_bc ? detail::periodic_term<double>(detail::DoubleLanes{&bc},
                                                               sys.output_dim(), pts.bc_points.cols())
                               : detail::supervised_term<double>(detail::DoubleLanes{&bc}, pts.bc_values);
  }
  rep.total = w.physics * rep.l_physics + w.ic * rep.l_ic + w.bc * rep.l_bc;
  return rep;
}

}  // namespace hyperlora
