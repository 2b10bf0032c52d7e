#pragma once

#include <vector>

#include "hyperlora/mlp.hpp"

namespace hyperlora {

/// Value / first-derivative / second-derivative lanes of a quantity over a
/// batch of points (each matrix is width x n_points). d2 entries stay empty
/// for first-order directions.
struct LaneSet {
  Mat v;
  std::vector<Mat> d1;
  std::vector<Mat> d2;
};

struct MlpGrad {
  std::vector<Mat> W;
  std::vector<Vec> b;

  void resize_like(const DenseWeights& w) {
    W.resize(w.W.size());
    b.resize(w.b.size());
    for (std::size_t l = 0; l < w.W.size(); ++l) {
      W[l].resize(w.W[l].rows(), w.W[l].cols());
      b[l].resize(w.b[l].size());
    }
  }
  void set_zero() {
    for (auto& m : W) m.setZero();
    for (auto& v : b) v.setZero();
  }
  void add_scaled(const MlpGrad& o, double s) {
    for (std::size_t l = 0; l < W.size(); ++l) {
      W[l] += s * o.W[l];
      b[l] += s * o.b[l];
    }
  }

  /// Layout-ordered flat gradient (weight row-major then bias, per layer).
  Vec flatten(const MlpConfig& cfg) const {
    const ParamLayout layout = mlp_layout(cfg);
    Vec g(layout.total);
    for (const auto& e : layout.entries) {
      if (e.kind == ParamKind::Weight) {
        detail::write_entry(g, e, W[static_cast<std::size_t>(e.layer)]);
      } else {
        detail::write_entry(g, e, Mat(b[static_cast<std::size_t>(e.layer)]));
      }
    }
    return g;
  }
};

/// Batched forward/backward through a dense MLP with second-order input jets.
///
/// Forward propagates (value, d/dx_a, d2/dx_a2) lanes for every requested
/// direction through each layer with one GEMM per lane; backward propagates
/// adjoints of all output lanes to parameter gradients. Gradients agree with
/// the scalar tape path to rounding; the tests pin that equivalence.
///
/// A BatchedMlp owns its caches, so one instance serves one evaluation at a
/// time; concurrent evaluations need separate instances.
class BatchedMlp {
 public:
  explicit BatchedMlp(MlpConfig cfg) : cfg_(std::move(cfg)) {}

  const MlpConfig& config() const { return cfg_; }

  /// Output lanes (out_dim x n_points). Valid until the next forward().
  const LaneSet& forward(const DenseWeights& w, const Mat& X, const DirectionSet& ds) {
    if (X.rows() != cfg_.input_dim) throw ShapeError("batched forward: input dim mismatch");
    const int L = cfg_.n_layers();
    const int D = ds.count();
    const auto N = X.cols();
    ds_ = ds;
    const std::size_t stages = static_cast<std::size_t>(L);  // inputs to each layer
    a_.resize(stages);
    z1_.resize(static_cast<std::size_t>(L - 1));
    z2_.resize(static_cast<std::size_t>(L - 1));
    t_.resize(static_cast<std::size_t>(L - 1));
    c_.resize(static_cast<std::size_t>(L - 1));

    a_[0].v = X;
    a_[0].d1.assign(static_cast<std::size_t>(D), Mat());
    a_[0].d2.assign(static_cast<std::size_t>(D), Mat());

    LaneSet* cur = &a_[0];
    for (int l = 0; l < L; ++l) {
      const Mat& W = w.W[static_cast<std::size_t>(l)];
      const Vec& bias = w.b[static_cast<std::size_t>(l)];
      LaneSet& z = (l + 1 < L) ? zbuf_ : out_;
      z.d1.resize(static_cast<std::size_t>(D));
      z.d2.resize(static_cast<std::size_t>(D));

      z.v.noalias() = W * cur->v;
      z.v.colwise() += bias;
      for (int d = 0; d < D; ++d) {
        const auto du = static_cast<std::size_t>(d);
        if (l == 0) {
          // input lanes: d1 is the one-hot direction axis, d2 is zero
          z.d1[du] = W.col(ds.dirs[du].axis).replicate(1, N);
          if (ds.dirs[du].second) z.d2[du].setZero(W.rows(), N);
        } else {
          z.d1[du].noalias() = W * cur->d1[du];
          if (ds.dirs[du].second) z.d2[du].noalias() = W * cur->d2[du];
        }
      }

      if (l + 1 < L) {
        const auto lu = static_cast<std::size_t>(l);
        Mat& t = t_[lu];
        Mat& c = c_[lu];
        if (cfg_.activation == Activation::Tanh) {
          t = z.v.array().tanh();
          c = 1.0 - t.array().square();
        } else {
          t = z.v.array().sin();
          c = z.v.array().cos();
        }
        z1_[lu] = std::move(z.d1);
        z2_[lu] = std::move(z.d2);
        LaneSet& next = a_[lu + 1];
        next.v = t;
        next.d1.resize(static_cast<std::size_t>(D));
        next.d2.resize(static_cast<std::size_t>(D));
        for (int d = 0; d < D; ++d) {
          const auto du = static_cast<std::size_t>(d);
          next.d1[du] = c.array() * z1_[lu][du].array();
          if (ds.dirs[du].second) {
            next.d2[du] = c.array() * z2_[lu][du].array() +
                          spp_array(t, c) * z1_[lu][du].array().square();
          }
        }
        cur = &next;
      }
    }
    return out_;
  }

  /// Parameter gradients from adjoints of the output lanes. Must follow a
  /// forward() with the same weights.
  const MlpGrad& backward(const DenseWeights& w, const LaneSet& out_adj) {
    const int L = cfg_.n_layers();
    const int D = ds_.count();
    grad_.resize_like(w);

    LaneSet* zbar = &zbar_;
    *zbar = out_adj;
    for (int l = L - 1; l >= 0; --l) {
      const auto lu = static_cast<std::size_t>(l);
      const Mat& W = w.W[lu];
      const LaneSet& a = a_[lu];

      Mat& Wbar = grad_.W[lu];
      Wbar.noalias() = zbar->v * a.v.transpose();
      if (l == 0) {
        for (int d = 0; d < D; ++d) {
          Wbar.col(ds_.dirs[static_cast<std::size_t>(d)].axis) +=
              zbar->d1[static_cast<std::size_t>(d)].rowwise().sum();
        }
      } else {
        for (int d = 0; d < D; ++d) {
          const auto du = static_cast<std::size_t>(d);
          Wbar.noalias() += zbar->d1[du] * a.d1[du].transpose();
          if (ds_.dirs[du].second) Wbar.noalias() += zbar->d2[du] * a.d2[du].transpose();
        }
      }
      grad_.b[lu] = zbar->v.rowwise().sum();

      if (l == 0) break;

      // adjoint of the previous stage's post-activation lanes
      LaneSet& abar = abar_;
      abar.d1.resize(static_cast<std::size_t>(D));
      abar.d2.resize(static_cast<std::size_t>(D));
      abar.v.noalias() = W.transpose() * zbar->v;
      for (int d = 0; d < D; ++d) {
        const auto du = static_cast<std::size_t>(d);
        abar.d1[du].noalias() = W.transpose() * zbar->d1[du];
        if (ds_.dirs[du].second) abar.d2[du].noalias() = W.transpose() * zbar->d2[du];
      }

      // through the activation of layer l-1
      const auto pu = static_cast<std::size_t>(l - 1);
      const Mat& t = t_[pu];
      const Mat& c = c_[pu];
      const auto spp = spp_array(t, c);
      zbar->d1.resize(static_cast<std::size_t>(D));
      zbar->d2.resize(static_cast<std::size_t>(D));
      zbar->v = abar.v.array() * c.array();
      for (int d = 0; d < D; ++d) {
        const auto du = static_cast<std::size_t>(d);
        const Mat& zd1 = z1_[pu][du];
        zbar->v.array() += abar.d1[du].array() * spp * zd1.array();
        if (ds_.dirs[du].second) {
          const Mat& zd2 = z2_[pu][du];
          zbar->v.array() +=
              abar.d2[du].array() * (spp * zd2.array() + sppp_array(t, c) * zd1.array().square());
          zbar->d1[du] = abar.d1[du].array() * c.array() +
                         abar.d2[du].array() * 2.0 * spp * zd1.array();
          zbar->d2[du] = abar.d2[du].array() * c.array();
        } else {
          zbar->d1[du] = abar.d1[du].array() * c.array();
        }
      }
    }
    return grad_;
  }

 private:
  // Second and third derivatives of the activation, from sigma(z) and
  // sigma'(z): tanh -> -2 t c and -2 c^2 + 4 t^2 c; sine -> -t and -c.
  Eigen::ArrayXXd spp_array(const Mat& t, const Mat& c) const {
    if (cfg_.activation == Activation::Tanh) return -2.0 * t.array() * c.array();
    return -t.array();
  }
  Eigen::ArrayXXd sppp_array(const Mat& t, const Mat& c) const {
    if (cfg_.activation == Activation::Tanh) {
      return -2.0 * c.array().square() + 4.0 * t.array().square() * c.array();
    }
    return -c.array();
  }

  MlpConfig cfg_;
  DirectionSet ds_;
  std::vector<LaneSet> a_;                 // inputs to each layer (stage 0 = points)
  std::vector<std::vector<Mat>> z1_, z2_;  // pre-activation derivative lanes per hidden layer
  std::vector<Mat> t_, c_;                 // activation value and first derivative
  LaneSet zbuf_, out_, zbar_, abar_;
  MlpGrad grad_;
};

}  // namespace hyperlora
