#include <catch2/catch_amalgamated.hpp>

#include "hyperlora/lora.hpp"

using namespace hyperlora;

TEST_CASE("adapter parameter counts follow sum r (m + n)") {
  REQUIRE(adapter_param_count(MlpConfig::base(2, 1), 4) == 3084);
  REQUIRE(adapter_param_count(MlpConfig::base(2, 3), 4) == 3092);
  // hidden 64x64 layers contribute 128 r each
  const auto c1 = adapter_param_count(MlpConfig::base(2, 1), 1);
  const auto c2 = adapter_param_count(MlpConfig::base(2, 1), 2);
  REQUIRE(c2 == 2 * c1);
}

TEST_CASE("a freshly wrapped network reproduces the base exactly") {
  Mlp base = Mlp::init(MlpConfig::base(2, 3, 3));
  LoraNetwork ln = lora_wrap(base, 4, 11);
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    Vec x(2);
    x << rng.uniform(), rng.uniform();
    Vec a = base.forward(x), b = ln.forward(x);
    for (int k = 0; k < 3; ++k) REQUIRE(std::abs(a[k] - b[k]) <= 1e-15);
  }
}

TEST_CASE("rank must stay below the smallest layer dimension") {
  Mlp base = Mlp::init(MlpConfig::base(2, 1));
  REQUIRE_THROWS_MATCHES(lora_wrap(base, 64, 0), ConfigError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("rank 64")));
  REQUIRE_THROWS_AS(lora_wrap(base, 0, 0), ConfigError);
  REQUIRE_NOTHROW(lora_wrap(base, 1, 0));
}

TEST_CASE("effective weights") {
  Mlp base = Mlp::init(MlpConfig{2, {5, 5}, 2, Activation::Tanh, 6});

  SECTION("zero adapters give W0 exactly") {
    LoraNetwork ln = lora_wrap(base, 2, 1);
    for (auto& B : ln.adapters().B) B.setZero();
    DenseWeights eff = effective_weights(ln);
    for (std::size_t l = 0; l < eff.W.size(); ++l) {
      REQUIRE((eff.W[l] - base.weights().W[l]).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  SECTION("rank-1 basis adapters add a single entry") {
    LoraNetwork ln = lora_wrap(base, 1, 1);
    auto& ad = ln.adapters();
    for (std::size_t l = 0; l < ad.A.size(); ++l) {
      ad.A[l].setZero();
      ad.B[l].setZero();
    }
    ad.A[1](0, 3) = 1.0;  // A = e_3^T
    ad.B[1](2, 0) = 1.0;  // B = e_2
    DenseWeights eff = effective_weights(ln);
    Mat expect = base.weights().W[1];
    expect(2, 3) += 1.0;
    REQUIRE((eff.W[1] - expect).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("random adapters match a dense multiply oracle") {
    LoraNetwork ln = lora_wrap(base, 3, 5);
    Rng rng(17);
    auto& ad = ln.adapters();
    for (std::size_t l = 0; l < ad.A.size(); ++l) {
      for (int i = 0; i < ad.A[l].rows(); ++i)
        for (int j = 0; j < ad.A[l].cols(); ++j) ad.A[l](i, j) = rng.normal();
      for (int i = 0; i < ad.B[l].rows(); ++i)
        for (int j = 0; j < ad.B[l].cols(); ++j) ad.B[l](i, j) = rng.normal();
    }
    DenseWeights eff = effective_weights(ln);
    for (std::size_t l = 0; l < eff.W.size(); ++l) {
      // explicit triple loop as the independent route
      Mat dense = base.weights().W[l];
      for (int i = 0; i < dense.rows(); ++i)
        for (int j = 0; j < dense.cols(); ++j)
          for (int r = 0; r < 3; ++r) dense(i, j) += ad.B[l](i, r) * ad.A[l](r, j);
      REQUIRE((eff.W[l] - dense).cwiseAbs().maxCoeff() < 1e-13);
    }
    // forward through materialized weights equals the LoraNetwork forward
    Mlp merged(base.config(), eff);
    Vec x(2);
    x << 0.2, -0.7;
    REQUIRE((merged.forward(x) - ln.forward(x)).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("adapter flatten round-trips through the canonical layout") {
  Mlp base = Mlp::init(MlpConfig{2, {5, 4}, 2, Activation::Tanh, 6});
  LoraNetwork ln = lora_wrap(base, 2, 9);
  Rng rng(23);
  Vec v(adapter_param_count(base.config(), 2));
  for (std::ptrdiff_t i = 0; i < v.size(); ++i) v[i] = rng.normal();
  ln.set_adapters(v);
  Vec w = ln.flatten_adapters().values;
  for (std::ptrdiff_t i = 0; i < v.size(); ++i) REQUIRE(v[i] == w[i]);
}

TEST_CASE("apply_predicted") {
  Mlp base = Mlp::init(MlpConfig{2, {5, 5}, 2, Activation::Tanh, 4});
  Vec x(2);
  x << 0.3, 0.9;

  SECTION("zero lora update reproduces the base") {
    Vec theta = Vec::Zero(adapter_param_count(base.config(), 2));
    Mlp net = apply_predicted(base, theta, ApplyMode::Lora, 2);
    REQUIRE((net.forward(x) - base.forward(x)).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("trained adapter round-trips through flatten and apply") {
    LoraNetwork ln = lora_wrap(base, 2, 31);
    Rng rng(3);
    Vec v(adapter_param_count(base.config(), 2));
    for (std::ptrdiff_t i = 0; i < v.size(); ++i) v[i] = 0.1 * rng.normal();
    ln.set_adapters(v);
    Mlp assembled = apply_predicted(base, ln.flatten_adapters().values, ApplyMode::Lora, 2);
    REQUIRE((assembled.forward(x) - ln.forward(x)).cwiseAbs().maxCoeff() < 1e-13);
  }

  SECTION("full mode with the base's own parameters reproduces the base") {
    Mlp net = apply_predicted(base, base.flatten().values, ApplyMode::Full);
    REQUIRE((net.forward(x) - base.forward(x)).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("delta mode adds to the base parameters") {
    Vec theta = Vec::Zero(base.param_count());
    theta[0] = 0.25;
    Mlp net = apply_predicted(base, theta, ApplyMode::Delta);
    REQUIRE(net.weights().W[0](0, 0) == base.weights().W[0](0, 0) + 0.25);
  }

  SECTION("layout mismatches are rejected with a shape error") {
    Vec bad = Vec::Zero(7);
    REQUIRE_THROWS_AS(apply_predicted(base, bad, ApplyMode::Lora, 2), ShapeError);
    REQUIRE_THROWS_AS(apply_predicted(base, bad, ApplyMode::Full), ShapeError);
  }
}
