#include <catch2/catch_amalgamated.hpp>

#include "hyperlora/grf.hpp"
#include "hyperlora/pde.hpp"
#include "hyperlora/spectral.hpp"

using namespace hyperlora;

namespace {

std::vector<double> linspace_times(double t0, double t1, int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = t0 + (t1 - t0) * i / (n - 1);
  return t;
}

}  // namespace

TEST_CASE("zero and constant initial data are fixed points") {
  auto times = linspace_times(0.0, 1.0, 5);
  SECTION("u0 = 0") {
    auto field = solve_burgers1d_reference(Vec::Zero(128), 0.01, times);
    for (int s = 0; s < 5; ++s) {
      for (double x : {0.0, 0.31, 0.77}) REQUIRE(std::abs(field.eval(s, x)) < 1e-13);
    }
  }
  SECTION("u0 = c") {
    auto field = solve_burgers1d_reference(Vec::Constant(128, 1.4), 0.01, times);
    for (int s = 0; s < 5; ++s) {
      for (double x : {0.1, 0.5, 0.9}) REQUIRE(std::abs(field.eval(s, x) - 1.4) < 1e-12);
    }
  }
}

TEST_CASE("single-mode initial data self-converges under time refinement") {
  const int n = 128;
  Vec u0(n);
  for (int j = 0; j < n; ++j) u0[j] = std::sin(kTwoPi * j / n);

  auto coarse = solve_burgers1d_reference(u0, 0.01, {0.5}, 1.0);
  auto fine = solve_burgers1d_reference(u0, 0.01, {0.5}, 0.25);  // 4x smaller steps

  double worst = 0.0;
  for (double x : {0.0, 0.13, 0.5, 0.86}) {
    worst = std::max(worst, std::abs(coarse.eval(0, x) - fine.eval(0, x)));
  }
  REQUIRE(worst < 1e-6);
}

TEST_CASE("the mean of u is conserved") {
  Vec u0 = sample_grf_u0(4);
  auto times = linspace_times(0.0, 1.0, 21);
  auto field = solve_burgers1d_reference(u0, 0.01, times);
  const double m0 = field.mean_mode(0);
  for (int s = 1; s < 21; ++s) {
    REQUIRE(std::abs(field.mean_mode(s) - m0) <= 1e-8);
  }
}

TEST_CASE("solver snapshots satisfy the residual operator") {
  Vec u0 = sample_grf_u0(12);
  const double nu = 0.01;
  const int nt = 201;
  auto field = solve_burgers1d_reference(u0, nu, linspace_times(0.0, 1.0, nt));

  Rng rng(3);
  double worst = 0.0;
  for (int probe = 0; probe < 100; ++probe) {
    const int s = 2 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(nt - 4));
    const double x = rng.uniform();
    if (field.times[static_cast<std::size_t>(s)] < 0.05) continue;
    const double u = field.eval(s, x);
    const double ux = field.eval(s, x, 1);
    const double uxx = field.eval(s, x, 2);
    const double ut = field.dt(s, x);
    worst = std::max(worst, std::abs(ut + u * ux - nu * uxx));
  }
  REQUIRE(worst <= 1e-4);
}

TEST_CASE("requested output times are hit exactly and validated") {
  Vec u0 = sample_grf_u0(9);
  auto field = solve_burgers1d_reference(u0, 0.01, {0.25, 0.5});
  REQUIRE(field.times.size() == 2);
  REQUIRE(field.times[0] == 0.25);
  REQUIRE_THROWS_AS(solve_burgers1d_reference(u0, 0.01, {0.5, 0.25}), ConfigError);
  REQUIRE_THROWS_AS(solve_burgers1d_reference(u0, -1.0, {0.5}), ConfigError);
  REQUIRE_THROWS_AS(solve_burgers1d_reference(Vec::Zero(100), 0.01, {0.5}), ConfigError);
}

TEST_CASE("fft round-trips and matches a direct DFT") {
  const int n = 64;
  Rng rng(8);
  std::vector<std::complex<double>> a(static_cast<std::size_t>(n));
  for (auto& x : a) x = std::complex<double>(rng.normal(), rng.normal());
  auto b = a;
  detail::fft_radix2(b, false);

  // direct DFT oracle at a few bins
  for (int k : {0, 1, 17, 33, 63}) {
    std::complex<double> want(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
      const double ang = -kTwoPi * j * k / n;
      want += a[static_cast<std::size_t>(j)] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    REQUIRE(std::abs(b[static_cast<std::size_t>(k)] - want) < 1e-10);
  }

  detail::fft_radix2(b, true);
  for (int j = 0; j < n; ++j) {
    REQUIRE(std::abs(b[static_cast<std::size_t>(j)] - a[static_cast<std::size_t>(j)]) < 1e-12);
  }
}
