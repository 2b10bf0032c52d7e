#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hyperlora/lora.hpp"
#include "hyperlora/mlp.hpp"

namespace hyperlora {

/// How a raw task parameter maps into the hypernetwork's input range.
/// The mapping is invertible and is stored alongside trained checkpoints.
struct EmbeddingSpec {
  enum class Kind : std::uint8_t { AffineInterval, Log10Interval, RawVector };

  Kind kind = Kind::RawVector;
  double lo = 0.0;  // raw interval for the scalar kinds
  double hi = 1.0;
  int dim = 1;

  static EmbeddingSpec reynolds() { return {Kind::AffineInterval, 20.0, 100.0, 1}; }
  static EmbeddingSpec viscosity() { return {Kind::Log10Interval, 1e-4, 1e-3, 1}; }
  static EmbeddingSpec initial_condition(int n = 128) { return {Kind::RawVector, 0.0, 0.0, n}; }

  Vec normalize(const Vec& raw) const {
    if (raw.size() != dim) throw ShapeError("embedding: raw dim mismatch");
    switch (kind) {
      case Kind::AffineInterval: {
        Vec out(1);
        out[0] = 2.0 * (raw[0] - lo) / (hi - lo) - 1.0;
        return out;
      }
      case Kind::Log10Interval: {
        if (raw[0] <= 0.0) throw DomainError("embedding: log10 of non-positive value");
        Vec out(1);
        const double llo = std::log10(lo), lhi = std::log10(hi);
        out[0] = 2.0 * (std::log10(raw[0]) - llo) / (lhi - llo) - 1.0;
        return out;
      }
      case Kind::RawVector: return raw;
    }
    throw ConfigError("embedding: bad kind");
  }

  Vec denormalize(const Vec& norm) const {
    if (norm.size() != dim) throw ShapeError("embedding: normalized dim mismatch");
    switch (kind) {
      case Kind::AffineInterval: {
        Vec out(1);
        out[0] = lo + (norm[0] + 1.0) * 0.5 * (hi - lo);
        return out;
      }
      case Kind::Log10Interval: {
        Vec out(1);
        const double llo = std::log10(lo), lhi = std::log10(hi);
        out[0] = std::pow(10.0, llo + (norm[0] + 1.0) * 0.5 * (lhi - llo));
        return out;
      }
      case Kind::RawVector: return norm;
    }
    throw ConfigError("embedding: bad kind");
  }
};

struct TaskEmbedding {
  Vec raw;
  Vec normalized;

  static TaskEmbedding from_raw(const EmbeddingSpec& spec, const Vec& raw) {
    return TaskEmbedding{raw, spec.normalize(raw)};
  }
};

struct HyperConfig {
  int embed_dim = 1;
  int output_dim = 0;  // P: length of the predicted parameter vector
  std::vector<int> hidden{512, 512, 256, 256, 128, 128};
  double output_scale = 1.0;
  std::uint64_t init_seed = 0;

  MlpConfig mlp() const { return MlpConfig{embed_dim, hidden, output_dim, Activation::Tanh, init_seed}; }
};

/// Maps a normalized task embedding to a predicted parameter vector.
/// The final layer is initialized to zero so every predicted update starts
/// at exactly zero (the assembled network reproduces the base task).
class HyperNetwork {
 public:
  HyperNetwork() = default;
  HyperNetwork(HyperConfig cfg, Mlp net) : cfg_(std::move(cfg)), net_(std::move(net)) {}

  static HyperNetwork init(const HyperConfig& cfg) {
    if (cfg.output_dim < 1) throw ConfigError("hypernetwork: output_dim must be >= 1");
    Mlp net = Mlp::init(cfg.mlp());
    const int last = net.config().n_layers() - 1;
    net.weights().W[static_cast<std::size_t>(last)].setZero();
    net.weights().b[static_cast<std::size_t>(last)].setZero();
    return HyperNetwork(cfg, std::move(net));
  }

  const HyperConfig& config() const { return cfg_; }
  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }
  double output_scale() const { return cfg_.output_scale; }

  /// theta'_m for one task.
  Vec forward(const TaskEmbedding& lambda) const {
    if (lambda.normalized.size() != cfg_.embed_dim) {
      throw ShapeError("hypernetwork: embedding dim " + std::to_string(lambda.normalized.size()) +
                       " != expected " + std::to_string(cfg_.embed_dim));
    }
    return cfg_.output_scale * net_.forward(lambda.normalized);
  }

 private:
  HyperConfig cfg_;
  Mlp net_;
};

}  // namespace hyperlora
