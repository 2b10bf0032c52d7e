#include <catch2/catch_amalgamated.hpp>

#include "hyperlora/grf.hpp"

using namespace hyperlora;

TEST_CASE("mode standard deviations follow the covariance spectrum") {
  REQUIRE(grf_mode_std(0) == 1.0);
  REQUIRE(std::abs(grf_mode_std(1) - 0.3877) < 1e-4);
  REQUIRE(grf_mode_std(2) < grf_mode_std(1));
}

TEST_CASE("draws are deterministic in the seed and 128 samples long") {
  Vec a = sample_grf_u0(5);
  Vec b = sample_grf_u0(5);
  Vec c = sample_grf_u0(6);
  REQUIRE(a.size() == 128);
  for (int i = 0; i < 128; ++i) REQUIRE(a[i] == b[i]);
  REQUIRE((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("projection recovers the per-mode amplitudes") {
  // synthesis and projection are inverse maps on the truncated basis
  Vec u = sample_grf_u0(42);
  Vec coeffs = grf_project_modes(u, 32);
  // rebuild the representable part and compare against a direct projection of
  // the rebuilt field (round trip)
  const int n = 128;
  Vec rebuilt = Vec::Constant(n, coeffs[0]);
  const double sqrt2 = std::sqrt(2.0);
  const double two_pi = 6.283185307179586476925286766559;
  for (int k = 1; k <= 32; ++k) {
    for (int j = 0; j < n; ++j) {
      const double ph = two_pi * k * j / n;
      rebuilt[j] += sqrt2 * (coeffs[2 * k - 1] * std::cos(ph) + coeffs[2 * k] * std::sin(ph));
    }
  }
  Vec coeffs2 = grf_project_modes(rebuilt, 32);
  REQUIRE((coeffs - coeffs2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("empirical per-mode variance matches the spectrum (Monte Carlo)") {
  // smaller-N version of the acceptance criterion; 3 standard errors
  const int draws = 20000;
  const int kmax = 8;
  Mat coeffs(2 * kmax + 1, draws);
  for (int s = 0; s < draws; ++s) {
    coeffs.col(s) = grf_project_modes(sample_grf_u0(1000 + static_cast<std::uint64_t>(s)), kmax);
  }
  const double se_rel = std::sqrt(2.0 / (draws - 1));
  for (int k = 0; k <= kmax; ++k) {
    const double want = grf_mode_std(k) * grf_mode_std(k);
    for (int comp = (k == 0 ? 0 : 1); comp <= (k == 0 ? 0 : 2); ++comp) {
      const int row = k == 0 ? 0 : 2 * k - 2 + comp;
      const double mean = coeffs.row(row).mean();
      const double var = (coeffs.row(row).array() - mean).square().sum() / (draws - 1);
      INFO("mode " << k << " comp " << comp);
      REQUIRE(std::abs(var - want) <= 3.0 * se_rel * want);
    }
  }
}

TEST_CASE("sample mean vanishes within Monte Carlo error") {
  const int draws = 20000;
  Vec mean = Vec::Zero(128), m2 = Vec::Zero(128);
  for (int s = 0; s < draws; ++s) {
    Vec u = sample_grf_u0(77000 + static_cast<std::uint64_t>(s));
    mean += u;
    m2 += u.cwiseProduct(u);
  }
  mean /= draws;
  for (int j = 0; j < 128; ++j) {
    const double var = m2[j] / draws - mean[j] * mean[j];
    const double se = std::sqrt(var / draws);
    REQUIRE(std::abs(mean[j]) <= 3.0 * se);
  }
}
