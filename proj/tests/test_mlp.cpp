#include <catch2/catch_amalgamated.hpp>

#include "hyperlora/mlp.hpp"

using namespace hyperlora;

TEST_CASE("base architecture parameter counts") {
  // 6 hidden layers of width 64
  REQUIRE(Mlp::init(MlpConfig::base(2, 1)).param_count() == 21057);
  REQUIRE(Mlp::init(MlpConfig::base(2, 3)).param_count() == 21187);
  REQUIRE(Mlp::init(MlpConfig::base(3, 2)).param_count() == 21186);
}

TEST_CASE("initialization is deterministic in the seed") {
  MlpConfig cfg = MlpConfig::base(2, 3, 77);
  Vec a = Mlp::init(cfg).flatten().values;
  Vec b = Mlp::init(cfg).flatten().values;
  REQUIRE(a.size() == b.size());
  for (std::ptrdiff_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);

  cfg.init_seed = 78;
  Vec c = Mlp::init(cfg).flatten().values;
  REQUIRE((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("config validation") {
  REQUIRE_THROWS_AS(Mlp::init(MlpConfig{0, {4}, 1}), ConfigError);
  REQUIRE_THROWS_AS(Mlp::init(MlpConfig{2, {0}, 1}), ConfigError);
}

TEST_CASE("flatten then unflatten is the identity") {
  const MlpConfig cfg{3, {7, 5}, 2, Activation::Tanh, 5};
  Mlp net = Mlp::init(cfg);
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    Vec v(net.param_count());
    for (std::ptrdiff_t i = 0; i < v.size(); ++i) v[i] = rng.normal();
    net.set_params(v);
    Vec w = net.flatten().values;
    for (std::ptrdiff_t i = 0; i < v.size(); ++i) REQUIRE(v[i] == w[i]);
  }
}

TEST_CASE("layout is canonical: layers ascending, weight row-major then bias") {
  const MlpConfig cfg{2, {3}, 1};
  const ParamLayout layout = mlp_layout(cfg);
  REQUIRE(layout.entries.size() == 4);
  REQUIRE(layout.entries[0].kind == ParamKind::Weight);
  REQUIRE(layout.entries[0].rows == 3);
  REQUIRE(layout.entries[0].cols == 2);
  REQUIRE(layout.entries[0].offset == 0);
  REQUIRE(layout.entries[1].kind == ParamKind::Bias);
  REQUIRE(layout.entries[1].offset == 6);
  REQUIRE(layout.entries[2].layer == 1);
  REQUIRE(layout.entries[2].offset == 9);
  REQUIRE(layout.total == 13);

  // W(i, j) lands at offset i*cols + j
  Mlp net = Mlp::init(cfg);
  net.weights().W[0].setZero();
  net.weights().W[0](1, 0) = 42.0;
  REQUIRE(net.flatten().values[2] == 42.0);
}

TEST_CASE("generic forward agrees with the Eigen forward") {
  const MlpConfig cfg{2, {6, 6}, 3, Activation::Sine, 9};
  Mlp net = Mlp::init(cfg);
  const Vec flat = net.flatten().values;
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    Vec x(2);
    x << rng.normal(), rng.normal();
    Vec ref = net.forward(x);
    std::vector<double> in{x[0], x[1]}, out(3);
    net.forward_flat<double>([&](std::ptrdiff_t off) { return flat[off]; },
                             std::span<const double>(in), std::span<double>(out));
    for (int k = 0; k < 3; ++k) REQUIRE(std::abs(ref[k] - out[k]) < 1e-14);
  }
}
