#pragma once

#include <span>
#include <string>
#include <vector>

#include "hyperlora/jet.hpp"
#include "hyperlora/param_vector.hpp"
#include "hyperlora/tape.hpp"

namespace hyperlora {

enum class Activation : std::uint8_t { Tanh, Sine };

inline const char* to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "sine"; }

inline Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "sine") return Activation::Sine;
  throw ConfigError("unknown activation '" + s + "'");
}

struct MlpConfig {
  int input_dim = 0;
  std::vector<int> hidden;
  int output_dim = 0;
  Activation activation = Activation::Tanh;
  std::uint64_t init_seed = 0;

  /// Base surrogate shape shared by all three benchmark systems.
  static MlpConfig base(int in, int out, std::uint64_t seed = 0) {
    return MlpConfig{in, std::vector<int>(6, 64), out, Activation::Tanh, seed};
  }

  void validate() const {
    if (input_dim < 1 || output_dim < 1) throw ConfigError("mlp: input/output dims must be >= 1");
    for (int w : hidden) {
      if (w < 1) throw ConfigError("mlp: hidden widths must be >= 1");
    }
  }

  int n_layers() const { return static_cast<int>(hidden.size()) + 1; }

  int layer_in(int l) const { return l == 0 ? input_dim : hidden[static_cast<std::size_t>(l - 1)]; }
  int layer_out(int l) const {
    return l == static_cast<int>(hidden.size()) ? output_dim : hidden[static_cast<std::size_t>(l)];
  }

  bool operator==(const MlpConfig&) const = default;
};

struct DenseWeights {
  std::vector<Mat> W;
  std::vector<Vec> b;
};

inline ParamLayout mlp_layout(const MlpConfig& cfg) {
  ParamLayout layout;
  std::ptrdiff_t off = 0;
  for (int l = 0; l < cfg.n_layers(); ++l) {
    const int m = cfg.layer_out(l), n = cfg.layer_in(l);
    layout.entries.push_back({l, ParamKind::Weight, m, n, off});
    off += std::ptrdiff_t{m} * n;
    layout.entries.push_back({l, ParamKind::Bias, m, 1, off});
    off += m;
  }
  layout.total = off;
  return layout;
}

/// Dense multilayer perceptron with value semantics. Weights map n -> m as
/// y = W x + b; hidden layers apply the configured activation, the output
/// layer is affine.
class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpConfig cfg, DenseWeights w) : cfg_(std::move(cfg)), w_(std::move(w)) {}

  /// Fan-balanced uniform init, deterministic in cfg.init_seed.
  static Mlp init(const MlpConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.init_seed);
    DenseWeights w;
    for (int l = 0; l < cfg.n_layers(); ++l) {
      const int m = cfg.layer_out(l), n = cfg.layer_in(l);
      const double bound = std::sqrt(6.0 / (n + m));
      Mat W(m, n);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) W(i, j) = rng.uniform(-bound, bound);
      w.W.push_back(std::move(W));
      w.b.push_back(Vec::Zero(m));
    }
    return Mlp(cfg, std::move(w));
  }

  const MlpConfig& config() const { return cfg_; }
  const DenseWeights& weights() const { return w_; }
  DenseWeights& weights() { return w_; }

  std::ptrdiff_t param_count() const { return mlp_layout(cfg_).total; }
  ParamLayout layout() const { return mlp_layout(cfg_); }

  Vec forward(const Vec& x) const {
    if (x.size() != cfg_.input_dim) throw ShapeError("mlp forward: input dim mismatch");
    Vec a = x;
    for (int l = 0; l < cfg_.n_layers(); ++l) {
      Vec z = w_.W[static_cast<std::size_t>(l)] * a + w_.b[static_cast<std::size_t>(l)];
      if (l + 1 < cfg_.n_layers()) {
        a = cfg_.activation == Activation::Tanh ? z.array().tanh().matrix().eval()
                                                : z.array().sin().matrix().eval();
      } else {
        a = std::move(z);
      }
    }
    return a;
  }

  /// Generic forward over any scalar-like S. Parameters come from `at`, an
  /// accessor over the canonical flat layout; this is how the taped path
  /// introduces weights as tape variables.
  template <class S, class ParamAt>
  void forward_flat(ParamAt&& at, std::span<const S> in, std::span<S> out) const {
    if (static_cast<int>(in.size()) != cfg_.input_dim ||
        static_cast<int>(out.size()) != cfg_.output_dim) {
      throw ShapeError("mlp forward_flat: dim mismatch");
    }
    std::vector<S> a(in.begin(), in.end());
    std::vector<S> z;
    std::ptrdiff_t off = 0;
    for (int l = 0; l < cfg_.n_layers(); ++l) {
      const int m = cfg_.layer_out(l), n = cfg_.layer_in(l);
      z.assign(static_cast<std::size_t>(m), S(0.0));
      for (int i = 0; i < m; ++i) {
        S acc = at(off + std::ptrdiff_t{n} * m + i);  // bias
        for (int j = 0; j < n; ++j) {
          acc += at(off + std::ptrdiff_t{i} * n + j) * a[static_cast<std::size_t>(j)];
        }
        z[static_cast<std::size_t>(i)] = acc;
      }
      off += std::ptrdiff_t{m} * n + m;
      if (l + 1 < cfg_.n_layers()) {
        using std::sin;
        using std::tanh;
        a.resize(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) {
          a[static_cast<std::size_t>(i)] = cfg_.activation == Activation::Tanh
                                               ? tanh(z[static_cast<std::size_t>(i)])
                                               : sin(z[static_cast<std::size_t>(i)]);
        }
      } else {
        for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)];
      }
    }
  }

  /// forward_flat with the network's own (constant) weights.
  template <class S>
  void forward_const(std::span<const S> in, std::span<S> out) const {
    const Vec flat = flatten().values;
    forward_flat<S>([&](std::ptrdiff_t off) { return S(flat[off]); }, in, out);
  }

  ParamVector flatten() const {
    ParamLayout layout = mlp_layout(cfg_);
    Vec flat(layout.total);
    for (const auto& e : layout.entries) {
      if (e.kind == ParamKind::Weight) {
        detail::write_entry(flat, e, w_.W[static_cast<std::size_t>(e.layer)]);
      } else {
        detail::write_entry(flat, e, Mat(w_.b[static_cast<std::size_t>(e.layer)]));
      }
    }
    return ParamVector{std::move(flat), std::move(layout)};
  }

  void set_params(const Vec& flat) {
    ParamLayout layout = mlp_layout(cfg_);
    if (flat.size() != layout.total) {
      throw ShapeError("mlp set_params: expected " + std::to_string(layout.total) + " values, got " +
                       std::to_string(flat.size()));
    }
    Mat tmp;
    for (const auto& e : layout.entries) {
      detail::read_entry(flat, e, tmp);
      if (e.kind == ParamKind::Weight) {
        w_.W[static_cast<std::size_t>(e.layer)] = tmp;
      } else {
        w_.b[static_cast<std::size_t>(e.layer)] = Vec(tmp.col(0));
      }
    }
  }

  static Mlp from_params(const MlpConfig& cfg, const Vec& flat) {
    Mlp net = Mlp::init(cfg);
    net.set_params(flat);
    return net;
  }

 private:
  MlpConfig cfg_;
  DenseWeights w_;
};

/// The network's parameters as tape variables, in canonical layout order.
/// Evaluating a network through this binding makes every downstream Scalar
/// differentiable with respect to the parameters.
class TapedParams {
 public:
  TapedParams(Tape& tape, const Vec& values) : tape_(&tape) {
    leaves_.reserve(static_cast<std::size_t>(values.size()));
    for (std::ptrdiff_t i = 0; i < values.size(); ++i) leaves_.push_back(tape.variable(values[i]));
  }

  const Scalar& at(std::ptrdiff_t off) const { return leaves_[static_cast<std::size_t>(off)]; }
  std::ptrdiff_t size() const { return static_cast<std::ptrdiff_t>(leaves_.size()); }

  /// d(loss)/d(param_i) in layout order; names the offending offset on
  /// non-finite entries.
  Vec gradient(const Scalar& loss) const {
    tape_->backward(loss);
    Vec g(size());
    for (std::ptrdiff_t i = 0; i < size(); ++i) {
      g[i] = tape_->adjoint(leaves_[static_cast<std::size_t>(i)]);
      if (!std::isfinite(g[i])) {
        throw NumericError("non-finite gradient entry at parameter offset " + std::to_string(i));
      }
    }
    return g;
  }

 private:
  Tape* tape_;
  std::vector<Scalar> leaves_;
};

/// First/second input derivatives of every output at one point (plain
/// evaluation; coefficients are doubles).
inline std::vector<Jet2<double>> input_jet(const Mlp& net, const Vec& point, const DirectionSet& ds) {
  std::vector<double> p(point.data(), point.data() + point.size());
  return input_jets<double>(
      [&](std::span<const TJet<double>> in, std::span<TJet<double>> out) {
        net.forward_const<TJet<double>>(in, out);
      },
      std::span<const double>(p), net.config().output_dim, ds);
}

/// Taped variant: coefficients are Scalars over `params`, so grad() of any
/// returned derivative with respect to the parameters is valid.
inline std::vector<Jet2<Scalar>> input_jet(const Mlp& net, const TapedParams& params, const Vec& point,
                                           const DirectionSet& ds) {
  if (params.size() != net.param_count()) throw ShapeError("input_jet: param binding size mismatch");
  std::vector<Scalar> p;
  p.reserve(static_cast<std::size_t>(point.size()));
  for (std::ptrdiff_t i = 0; i < point.size(); ++i) p.emplace_back(point[i]);
  return input_jets<Scalar>(
      [&](std::span<const TJet<Scalar>> in, std::span<TJet<Scalar>> out) {
        net.forward_flat<TJet<Scalar>>(
            [&](std::ptrdiff_t off) { return TJet<Scalar>(params.at(off)); }, in, out);
      },
      std::span<const Scalar>(p), net.config().output_dim, ds);
}

}  // namespace hyperlora
