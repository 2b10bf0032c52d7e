#pragma once

#include <string>
#include <vector>

#include "hyperlora/mlp.hpp"

namespace hyperlora {

/// Per-layer low-rank factors. The effective weight of an adapted layer is
/// W0 + B * A with A: r x n and B: m x r; biases stay frozen.
struct LoraAdapters {
  int rank = 0;
  std::vector<Mat> A;
  std::vector<Mat> B;
};

inline ParamLayout adapter_layout(const MlpConfig& cfg, int rank) {
  ParamLayout layout;
  std::ptrdiff_t off = 0;
  for (int l = 0; l < cfg.n_layers(); ++l) {
    const int m = cfg.layer_out(l), n = cfg.layer_in(l);
    layout.entries.push_back({l, ParamKind::LoraA, rank, n, off});
    off += std::ptrdiff_t{rank} * n;
    layout.entries.push_back({l, ParamKind::LoraB, m, rank, off});
    off += std::ptrdiff_t{m} * rank;
  }
  layout.total = off;
  return layout;
}

inline std::ptrdiff_t adapter_param_count(const MlpConfig& cfg, int rank) {
  return adapter_layout(cfg, rank).total;
}

/// Frozen base network plus trainable low-rank factors on every weight matrix.
class LoraNetwork {
 public:
  LoraNetwork(Mlp base, LoraAdapters adapters)
      : base_(std::move(base)), adapters_(std::move(adapters)) {}

  const Mlp& base() const { return base_; }
  const LoraAdapters& adapters() const { return adapters_; }
  LoraAdapters& adapters() { return adapters_; }
  int rank() const { return adapters_.rank; }

  ParamLayout layout() const { return adapter_layout(base_.config(), adapters_.rank); }

  ParamVector flatten_adapters() const {
    ParamLayout layout = this->layout();
    Vec flat(layout.total);
    for (const auto& e : layout.entries) {
      const auto l = static_cast<std::size_t>(e.layer);
      detail::write_entry(flat, e, e.kind == ParamKind::LoraA ? adapters_.A[l] : adapters_.B[l]);
    }
    return ParamVector{std::move(flat), std::move(layout)};
  }

  void set_adapters(const Vec& flat) {
    ParamLayout layout = this->layout();
    if (flat.size() != layout.total) {
      throw ShapeError("set_adapters: expected " + std::to_string(layout.total) + " values, got " +
                       std::to_string(flat.size()));
    }
    Mat tmp;
    for (const auto& e : layout.entries) {
      detail::read_entry(flat, e, tmp);
      const auto l = static_cast<std::size_t>(e.layer);
      (e.kind == ParamKind::LoraA ? adapters_.A[l] : adapters_.B[l]) = tmp;
    }
  }

  Vec forward(const Vec& x) const;

 private:
  Mlp base_;
  LoraAdapters adapters_;
};

/// Attaches rank-r factors to every weight matrix of a trained base network.
/// A starts at zero and B at small noise, so the wrapped network reproduces
/// the base exactly until the first update. The factorization must be
/// genuinely low-rank where the layer shapes allow it: r < min(m, n) of the
/// widest layer (thin input/output layers carry full-span factors).
inline LoraNetwork lora_wrap(const Mlp& base, int rank, std::uint64_t seed = 0) {
  const MlpConfig& cfg = base.config();
  if (rank < 1) throw ConfigError("lora_wrap: rank must be >= 1");
  int widest = 0, widest_layer = 0;
  for (int l = 0; l < cfg.n_layers(); ++l) {
    const int d = std::min(cfg.layer_out(l), cfg.layer_in(l));
    if (d > widest) {
      widest = d;
      widest_layer = l;
    }
  }
  if (rank >= widest) {
    throw ConfigError("lora_wrap: rank " + std::to_string(rank) + " >= min(m,n) = " +
                      std::to_string(widest) + " at layer " + std::to_string(widest_layer));
  }
  Rng rng(seed);
  LoraAdapters ad;
  ad.rank = rank;
  for (int l = 0; l < cfg.n_layers(); ++l) {
    const int m = cfg.layer_out(l), n = cfg.layer_in(l);
    ad.A.push_back(Mat::Zero(rank, n));
    Mat B(m, rank);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < rank; ++j) B(i, j) = 0.01 * rng.normal();
    ad.B.push_back(std::move(B));
  }
  return LoraNetwork(base, std::move(ad));
}

/// Materializes W0 + B*A per layer (biases copied from the base).
inline DenseWeights effective_weights(const LoraNetwork& lnet) {
  DenseWeights w = lnet.base().weights();
  for (std::size_t l = 0; l < w.W.size(); ++l) {
    w.W[l].noalias() += lnet.adapters().B[l] * lnet.adapters().A[l];
  }
  return w;
}

inline Vec LoraNetwork::forward(const Vec& x) const {
  return Mlp(base_.config(), effective_weights(*this)).forward(x);
}

enum class ApplyMode : std::uint8_t { Lora, Full, Delta };

inline const char* to_string(ApplyMode m) {
  switch (m) {
    case ApplyMode::Lora: return "lora";
    case ApplyMode::Full: return "full";
    case ApplyMode::Delta: return "delta";
  }
  return "?";
}

/// Assembles a dense network from a predicted parameter vector.
///  - Lora:  effective weights W0 + unflattened B*A, base biases.
///  - Full:  theta replaces all weights and biases (no residual add).
///  - Delta: theta is added to all weights and biases.
inline Mlp apply_predicted(const Mlp& base, const Vec& theta, ApplyMode mode, int rank = 0) {
  const MlpConfig& cfg = base.config();
  switch (mode) {
    case ApplyMode::Lora: {
      if (rank < 1) throw ConfigError("apply_predicted: lora mode needs a rank");
      const ParamLayout layout = adapter_layout(cfg, rank);
      if (theta.size() != layout.total) {
        throw ShapeError("apply_predicted: adapter layout expects " + std::to_string(layout.total) +
                         " values, got " + std::to_string(theta.size()) + " (first mismatch at offset " +
                         std::to_string(std::min<std::ptrdiff_t>(theta.size(), layout.total)) + ")");
      }
      DenseWeights w = base.weights();
      Mat A, B;
      for (int l = 0; l < cfg.n_layers(); ++l) {
        detail::read_entry(theta, layout.entries[static_cast<std::size_t>(2 * l)], A);
        detail::read_entry(theta, layout.entries[static_cast<std::size_t>(2 * l + 1)], B);
        w.W[static_cast<std::size_t>(l)].noalias() += B * A;
      }
      return Mlp(cfg, std::move(w));
    }
    case ApplyMode::Full: {
      Mlp net = base;
      net.set_params(theta);
      return net;
    }
    case ApplyMode::Delta: {
      Mlp net = base;
      net.set_params(base.flatten().values + theta);
      return net;
    }
  }
  throw ConfigError("apply_predicted: bad mode");
}

/// Adjoint of the predicted vector given the adjoint of the assembled dense
/// weights: the reverse of apply_predicted for each mode.
inline Vec chain_predicted_grad(const MlpConfig& cfg, const Vec& theta, ApplyMode mode, int rank,
                                const std::vector<Mat>& dW, const std::vector<Vec>& db) {
  if (mode == ApplyMode::Full || mode == ApplyMode::Delta) {
    const ParamLayout layout = mlp_layout(cfg);
    Vec g(layout.total);
    for (const auto& e : layout.entries) {
      if (e.kind == ParamKind::Weight) {
        detail::write_entry(g, e, dW[static_cast<std::size_t>(e.layer)]);
      } else {
        detail::write_entry(g, e, Mat(db[static_cast<std::size_t>(e.layer)]));
      }
    }
    return g;
  }
  const ParamLayout layout = adapter_layout(cfg, rank);
  Vec g(layout.total);
  Mat A, B;
  for (int l = 0; l < cfg.n_layers(); ++l) {
    const auto& ea = layout.entries[static_cast<std::size_t>(2 * l)];
    const auto& eb = layout.entries[static_cast<std::size_t>(2 * l + 1)];
    detail::read_entry(theta, ea, A);
    detail::read_entry(theta, eb, B);
    const Mat& Wbar = dW[static_cast<std::size_t>(l)];
    detail::write_entry(g, ea, Mat(B.transpose() * Wbar));  // dL/dA
    detail::write_entry(g, eb, Mat(Wbar * A.transpose()));  // dL/dB
  }
  return g;
}

}  // namespace hyperlora
