#pragma once

#include "hyperlora/param_vector.hpp"

namespace hyperlora {

/// Standard deviation of Fourier mode k under N(0, 625 (-Laplacian + 25 I)^-2)
/// on the periodic unit interval: 25 / ((2 pi k)^2 + 25).
inline double grf_mode_std(int k) {
  const double w = 2.0 * 3.14159265358979323846 * k;
  return 25.0 / (w * w + 25.0);
}

/// Karhunen-Loeve draw of a periodic Gaussian random field on `n` equispaced
/// points of [0,1). Real Fourier basis {1, sqrt2 cos(2 pi k x), sqrt2 sin(2 pi k x)},
/// truncated at the grid Nyquist mode; one standard normal per basis function.
inline Vec sample_grf_u0(std::uint64_t seed, int n = 128) {
  if (n < 2 || (n % 2) != 0) throw ConfigError("sample_grf_u0: grid size must be even and >= 2");
  Rng rng(seed);
  const int kmax = n / 2;
  Vec u = Vec::Zero(n);
  const double two_pi = 6.283185307179586476925286766559;
  const double sqrt2 = 1.4142135623730950488016887242097;

  u.array() += grf_mode_std(0) * rng.normal();
  for (int k = 1; k < kmax; ++k) {
    const double a = grf_mode_std(k);
    const double xc = a * rng.normal();
    const double xs = a * rng.normal();
    for (int j = 0; j < n; ++j) {
      const double ph = two_pi * k * j / n;
      u[j] += sqrt2 * (xc * std::cos(ph) + xs * std::sin(ph));
    }
  }
  // Nyquist: only the cosine survives on the grid.
  const double xn = grf_mode_std(kmax) * rng.normal();
  for (int j = 0; j < n; ++j) u[j] += sqrt2 * xn * ((j % 2 == 0) ? 1.0 : -1.0);
  return u;
}

/// Orthonormal-basis coefficients of a grid function (test utility):
/// index 0 -> constant, 2k-1 / 2k -> sqrt2 cos / sqrt2 sin of mode k.
inline Vec grf_project_modes(const Vec& u, int kmax_inclusive) {
  const int n = static_cast<int>(u.size());
  const double two_pi = 6.283185307179586476925286766559;
  const double sqrt2 = 1.4142135623730950488016887242097;
  Vec c(2 * kmax_inclusive + 1);
  c[0] = u.mean();
  for (int k = 1; k <= kmax_inclusive; ++k) {
    double cc = 0.0, cs = 0.0;
    for (int j = 0; j < n; ++j) {
      const double ph = two_pi * k * j / n;
      cc += u[j] * std::cos(ph);
      cs += u[j] * std::sin(ph);
    }
    c[2 * k - 1] = sqrt2 * cc / n;
    c[2 * k] = sqrt2 * cs / n;
  }
  return c;
}

}  // namespace hyperlora
