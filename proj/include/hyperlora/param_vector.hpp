#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "hyperlora/common.hpp"

namespace hyperlora {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

enum class ParamKind : std::uint8_t { Weight, Bias, LoraA, LoraB };

inline const char* to_string(ParamKind k) {
  switch (k) {
    case ParamKind::Weight: return "weight";
    case ParamKind::Bias: return "bias";
    case ParamKind::LoraA: return "lora_a";
    case ParamKind::LoraB: return "lora_b";
  }
  return "?";
}

struct LayoutEntry {
  int layer = 0;
  ParamKind kind = ParamKind::Weight;
  int rows = 0;
  int cols = 0;
  std::ptrdiff_t offset = 0;

  std::ptrdiff_t count() const { return std::ptrdiff_t{rows} * cols; }
  bool operator==(const LayoutEntry&) const = default;
};

/// Deterministic flat ordering of a network's trainable scalars: layers
/// ascending; within a layer weight row-major then bias, or LoRA A row-major
/// then B row-major. flatten and unflatten against the same layout are exact
/// inverses.
struct ParamLayout {
  std::vector<LayoutEntry> entries;
  std::ptrdiff_t total = 0;

  bool operator==(const ParamLayout&) const = default;
};

struct ParamVector {
  Vec values;
  ParamLayout layout;

  std::ptrdiff_t size() const { return values.size(); }
};

namespace detail {

// Matrices flatten row-major regardless of Eigen's storage order.
inline void write_entry(Vec& flat, const LayoutEntry& e, const Mat& m) {
  if (m.rows() != e.rows || m.cols() != e.cols) {
    throw ShapeError(std::string("flatten: shape mismatch for ") + to_string(e.kind) + " of layer " +
                     std::to_string(e.layer));
  }
  std::ptrdiff_t k = e.offset;
  for (int i = 0; i < e.rows; ++i)
    for (int j = 0; j < e.cols; ++j) flat[k++] = m(i, j);
}

inline void read_entry(const Vec& flat, const LayoutEntry& e, Mat& m) {
  m.resize(e.rows, e.cols);
  std::ptrdiff_t k = e.offset;
  for (int i = 0; i < e.rows; ++i)
    for (int j = 0; j < e.cols; ++j) m(i, j) = flat[k++];
}

}  // namespace detail

}  // namespace hyperlora
