#include <catch2/catch_amalgamated.hpp>

#include "hyperlora/jet.hpp"
#include "hyperlora/mlp.hpp"

using namespace hyperlora;

namespace {

double rel_err(double got, double want) {
  const double scale = std::max({std::abs(got), std::abs(want), 1e-12});
  return std::abs(got - want) / scale;
}

}  // namespace

TEST_CASE("jets differentiate polynomials exactly") {
  // f(x, t) = x^2, independent of t
  auto eval = [](std::span<const TJet<double>> in, std::span<TJet<double>> out) {
    out[0] = in[0] * in[0];
  };
  const std::vector<double> point{3.0, 0.4};
  DirectionSet ds{{{0, true}, {1, true}}};
  auto jets = input_jets<double>(eval, std::span<const double>(point), 1, ds);
  REQUIRE(jets[0].value == 9.0);
  REQUIRE(jets[0].d1(0) == 6.0);
  REQUIRE(jets[0].d2(0) == 2.0);
  REQUIRE(jets[0].d1(1) == 0.0);
  REQUIRE(jets[0].d2(1) == 0.0);
}

TEST_CASE("a one-neuron tanh network has zero curvature at the origin") {
  MlpConfig cfg{1, {1}, 1, Activation::Tanh, 0};
  Mlp net = Mlp::init(cfg);
  Vec params(4);
  params << 1.0, 0.0, 1.0, 0.0;  // W0=1,b0=0,W1=1,b1=0 -> f(x) = tanh(x)
  net.set_params(params);
  auto jets = input_jet(net, Vec::Zero(1), DirectionSet{{{0, true}}});
  REQUIRE(std::abs(jets[0].value) < 1e-15);
  REQUIRE(std::abs(jets[0].d1(0) - 1.0) < 1e-15);
  REQUIRE(std::abs(jets[0].d2(0)) < 1e-15);
}

TEST_CASE("jet math matches closed forms") {
  const double x0 = 0.73;
  auto var = TJet<double>::variable(x0);

  auto chk = [&](const TJet<double>& jet, double f, double d1, double d2) {
    REQUIRE(rel_err(jet.f, f) < 1e-13);
    REQUIRE(rel_err(jet.d1, d1) < 1e-13);
    REQUIRE(rel_err(jet.d2, d2) < 1e-13);
  };
  chk(exp(var), std::exp(x0), std::exp(x0), std::exp(x0));
  chk(log(var), std::log(x0), 1.0 / x0, -1.0 / (x0 * x0));
  chk(sin(var), std::sin(x0), std::cos(x0), -std::sin(x0));
  chk(cos(var), std::cos(x0), -std::sin(x0), -std::cos(x0));
  chk(sqrt(var), std::sqrt(x0), 0.5 / std::sqrt(x0), -0.25 * std::pow(x0, -1.5));
  chk(pow(var, 3.5), std::pow(x0, 3.5), 3.5 * std::pow(x0, 2.5), 3.5 * 2.5 * std::pow(x0, 1.5));
  const double t = std::tanh(x0), s = 1.0 - t * t;
  chk(tanh(var), t, s, -2.0 * t * s);
  const double sg = stable_sigmoid(x0);
  chk(log_sigmoid(var), stable_log_sigmoid(x0), 1.0 - sg, -sg * (1.0 - sg));
  chk(1.0 / var, 1.0 / x0, -1.0 / (x0 * x0), 2.0 / (x0 * x0 * x0));
  auto composite = tanh(var * var) / (1.0 + exp(-var));
  const double h = 1e-5;
  auto plain = [](double x) { return std::tanh(x * x) / (1.0 + std::exp(-x)); };
  REQUIRE(rel_err(composite.d1, (plain(x0 + h) - plain(x0 - h)) / (2 * h)) < 1e-8);
  REQUIRE(rel_err(composite.d2, (plain(x0 + h) - 2 * plain(x0) + plain(x0 - h)) / (h * h)) < 1e-4);
}

TEST_CASE("network input jets match finite differences of the plain forward") {
  const MlpConfig cfg{2, {6, 6}, 2, Activation::Tanh, 99};
  Mlp net = Mlp::init(cfg);
  Rng rng(5);
  const double h1 = 1e-5;
  const double h2 = 1e-4;  // larger step: the d2 stencil amplifies rounding by 1/h^2
  for (int trial = 0; trial < 20; ++trial) {
    Vec p(2);
    p << rng.uniform(-1, 1), rng.uniform(-1, 1);
    auto jets = input_jet(net, p, DirectionSet{{{0, true}, {1, true}}});
    for (int axis = 0; axis < 2; ++axis) {
      Vec pp = p, pm = p;
      pp[axis] += h1;
      pm[axis] -= h1;
      Vec fp = net.forward(pp), fm = net.forward(pm);
      for (int k = 0; k < 2; ++k) {
        REQUIRE(rel_err(jets[k].d1(axis), (fp[k] - fm[k]) / (2 * h1)) < 1e-4);
      }
      pp[axis] = p[axis] + h2;
      pm[axis] = p[axis] - h2;
      fp = net.forward(pp);
      fm = net.forward(pm);
      Vec f0 = net.forward(p);
      for (int k = 0; k < 2; ++k) {
        const double fd2 = (fp[k] - 2 * f0[k] + fm[k]) / (h2 * h2);
        if (std::abs(fd2) < 1e-6 && std::abs(jets[k].d2(axis)) < 1e-6) continue;
        REQUIRE(rel_err(jets[k].d2(axis), fd2) < 1e-3);
      }
    }
  }
}

TEST_CASE("cross partials recover from the combined-direction seed") {
  // f(x, y) = sin(x) * y^2 + x * y: f_xy = 2 y cos(x) + 1
  auto eval = [](std::span<const TJet<double>> in, std::span<TJet<double>> out) {
    out[0] = sin(in[0]) * (in[1] * in[1]) + in[0] * in[1];
  };
  const std::vector<double> point{0.9, -1.3};
  auto cross = input_jet_cross<double>(eval, std::span<const double>(point), 1, 0, 1);
  const double want = 2.0 * point[1] * std::cos(point[0]) + 1.0;
  REQUIRE(rel_err(cross[0], want) < 1e-12);
}

TEST_CASE("nested derivative: d/dw of u_xx matches finite differences over w") {
  const MlpConfig cfg{2, {5, 5}, 1, Activation::Tanh, 17};
  Mlp net = Mlp::init(cfg);
  Vec flat = net.flatten().values;
  Vec point(2);
  point << 0.3, 0.6;
  const DirectionSet ds{{{0, true}}};

  Tape tape;
  TapedParams tp(tape, flat);
  auto jets = input_jet(net, tp, point, ds);
  Scalar uxx = jets[0].d2(0);
  Vec g = tp.gradient(uxx);

  auto uxx_at = [&](const Vec& params) {
    Mlp n = Mlp::from_params(cfg, params);
    return input_jet(n, point, ds)[0].d2(0);
  };
  Rng rng(31);
  const double h = 1e-5;
  for (int trial = 0; trial < 25; ++trial) {
    const auto i = static_cast<std::ptrdiff_t>(rng.next_u64() % static_cast<std::uint64_t>(flat.size()));
    Vec p = flat;
    p[i] += h;
    const double fp = uxx_at(p);
    p[i] -= 2 * h;
    const double fm = uxx_at(p);
    const double fd = (fp - fm) / (2 * h);
    if (std::abs(fd) < 1e-7 && std::abs(g[i]) < 1e-7) continue;  // both vanish
    REQUIRE(rel_err(g[i], fd) < 1e-3);
  }
}

TEST_CASE("unsupported direction requests are rejected") {
  auto eval = [](std::span<const TJet<double>> in, std::span<TJet<double>> out) { out[0] = in[0]; };
  const std::vector<double> point{1.0};
  REQUIRE_THROWS_AS(
      input_jets<double>(eval, std::span<const double>(point), 1, DirectionSet{{{2, true}}}),
      ShapeError);
}
