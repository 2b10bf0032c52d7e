#pragma once

#include <complex>
#include <vector>

#include "hyperlora/param_vector.hpp"

namespace hyperlora {

namespace detail {

/// In-place iterative radix-2 FFT (unnormalized). `inverse` conjugates the
/// twiddles and scales by 1/N.
inline void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw ShapeError("fft: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double two_pi = 6.283185307179586476925286766559;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? two_pi : -two_pi) / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

}  // namespace detail

/// Spectral solution record of one 1D viscous Burgers run: normalized Fourier
/// coefficients per stored time. Evaluation anywhere in x is exact for the
/// truncated series; time derivatives come from finite differences over the
/// snapshot grid.
struct Burgers1dField {
  int n = 0;
  double nu = 0.0;
  std::vector<double> times;
  std::vector<std::vector<std::complex<double>>> coeffs;

  int wavenumber(int bin) const { return bin <= n / 2 ? bin : bin - n; }

  double eval(int snapshot, double x, int deriv = 0) const {
    const auto& U = coeffs[static_cast<std::size_t>(snapshot)];
    const double two_pi = 6.283185307179586476925286766559;
    std::complex<double> acc(0.0, 0.0);
    for (int bin = 0; bin < n; ++bin) {
      const int k = wavenumber(bin);
      const std::complex<double> iw(0.0, two_pi * k);
      std::complex<double> factor(1.0, 0.0);
      for (int d = 0; d < deriv; ++d) factor *= iw;
      acc += U[static_cast<std::size_t>(bin)] * factor *
             std::exp(std::complex<double>(0.0, two_pi * k * x));
    }
    return acc.real();
  }

  /// du/dt at a snapshot via 4th-order central differences (snapshot grid
  /// must be uniform; index must keep two neighbors on each side).
  double dt(int snapshot, double x) const {
    if (snapshot < 2 || snapshot + 2 >= static_cast<int>(times.size())) {
      throw ShapeError("Burgers1dField::dt: need two snapshots on each side");
    }
    const double h = times[1] - times[0];
    return (-eval(snapshot + 2, x) + 8.0 * eval(snapshot + 1, x) - 8.0 * eval(snapshot - 1, x) +
            eval(snapshot - 2, x)) /
           (12.0 * h);
  }

  /// Grid values at one snapshot (for MSE evaluation and exports).
  Vec sample(int snapshot, const Vec& xs) const {
    Vec out(xs.size());
    for (std::ptrdiff_t i = 0; i < xs.size(); ++i) out[i] = eval(snapshot, xs[i]);
    return out;
  }

  double mean_mode(int snapshot) const { return coeffs[static_cast<std::size_t>(snapshot)][0].real(); }
};

/// Fourier pseudo-spectral solver for u_t + u u_x = nu u_xx on periodic [0,1).
///
/// The quadratic term is dealiased on a doubled grid (exact Galerkin
/// projection); diffusion is handled by an integrating factor inside an RK4
/// step; dt is chosen from the advective CFL bound. Snapshots are stored at
/// exactly the requested times.
inline Burgers1dField solve_burgers1d_reference(const Vec& u0, double nu,
                                                const std::vector<double>& times,
                                                double cfl_fraction = 1.0) {
  const int n = static_cast<int>(u0.size());
  if (n < 4 || (n & (n - 1)) != 0) throw ConfigError("burgers1d solver: grid must be a power of two");
  if (nu <= 0.0) throw ConfigError("burgers1d solver: nu must be positive");
  if (cfl_fraction <= 0.0) throw ConfigError("burgers1d solver: cfl_fraction must be positive");
  if (times.empty()) throw ConfigError("burgers1d solver: no output times requested");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0 || (i > 0 && times[i] <= times[i - 1])) {
      throw ConfigError("burgers1d solver: output times must be increasing and non-negative");
    }
  }

  const double two_pi = 6.283185307179586476925286766559;
  const int np = 2 * n;  // padded grid for the product

  std::vector<double> omega(static_cast<std::size_t>(n));
  for (int bin = 0; bin < n; ++bin) {
    const int k = bin <= n / 2 ? bin : bin - n;
    omega[static_cast<std::size_t>(bin)] = two_pi * k;
  }

  std::vector<std::complex<double>> U(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) U[static_cast<std::size_t>(j)] = u0[j];
  detail::fft_radix2(U, false);
  for (auto& c : U) c /= static_cast<double>(n);  // normalized coefficients

  std::vector<std::complex<double>> pad(static_cast<std::size_t>(np));
  std::vector<std::complex<double>> k1, k2, k3, k4, stage;

  // N(U) = -i omega * P[(u^2)/2], dealiased via the doubled grid.
  auto nonlinear = [&](const std::vector<std::complex<double>>& Uh,
                       std::vector<std::complex<double>>& out) {
    std::fill(pad.begin(), pad.end(), std::complex<double>(0.0, 0.0));
    for (int bin = 0; bin < n; ++bin) {
      const int k = bin <= n / 2 ? bin : bin - n;
      if (k == n / 2) {  // split the coarse Nyquist bin across +-k
        pad[static_cast<std::size_t>(n / 2)] += 0.5 * Uh[static_cast<std::size_t>(bin)];
        pad[static_cast<std::size_t>(np - n / 2)] += 0.5 * Uh[static_cast<std::size_t>(bin)];
      } else if (k >= 0) {
        pad[static_cast<std::size_t>(k)] = Uh[static_cast<std::size_t>(bin)];
      } else {
        pad[static_cast<std::size_t>(np + k)] = Uh[static_cast<std::size_t>(bin)];
      }
    }
    detail::fft_radix2(pad, true);
    for (auto& x : pad) {
      // ifft of normalized coefficients needs the synthesis sum, not the mean
      const double u = x.real() * static_cast<double>(np);
      x = std::complex<double>(0.5 * u * u, 0.0);
    }
    detail::fft_radix2(pad, false);
    out.resize(static_cast<std::size_t>(n));
    for (int bin = 0; bin < n; ++bin) {
      const int k = bin <= n / 2 ? bin : bin - n;
      std::complex<double> Wk;
      if (k == n / 2) {
        Wk = pad[static_cast<std::size_t>(n / 2)] + pad[static_cast<std::size_t>(np - n / 2)];
      } else if (k >= 0) {
        Wk = pad[static_cast<std::size_t>(k)];
      } else {
        Wk = pad[static_cast<std::size_t>(np + k)];
      }
      Wk /= static_cast<double>(np);
      out[static_cast<std::size_t>(bin)] =
          std::complex<double>(0.0, -omega[static_cast<std::size_t>(bin)]) * Wk;
    }
  };

  const double kmax = two_pi * (n / 2);
  double umax = 1.0;

  Burgers1dField field;
  field.n = n;
  field.nu = nu;

  // max|u| <= sum |U_k|; a safe bound for the advective CFL step
  auto umax_bound = [&]() {
    double mag = 0.0;
    for (const auto& c : U) mag += std::abs(c);
    return std::max(1.0, mag);
  };
  umax = umax_bound();

  double t = 0.0;
  std::size_t next = 0;
  if (times[0] == 0.0) {
    field.times.push_back(0.0);
    field.coeffs.push_back(U);
    next = 1;
  }

  std::vector<double> e_half(static_cast<std::size_t>(n)), e_full(static_cast<std::size_t>(n));
  while (next < times.size()) {
    const double target = times[next];
    const double span = target - t;
    const double dt_cfl = cfl_fraction / (kmax * umax);
    const int steps = std::max(1, static_cast<int>(std::ceil(span / dt_cfl)));
    const double dt = span / steps;
    for (std::size_t bin = 0; bin < static_cast<std::size_t>(n); ++bin) {
      const double lam = -nu * omega[bin] * omega[bin];
      e_half[bin] = std::exp(lam * dt * 0.5);
      e_full[bin] = std::exp(lam * dt);
    }
    for (int s = 0; s < steps; ++s) {
      // RK4 on y(tau) = exp(-L tau) U(t + tau)
      nonlinear(U, k1);
      stage.resize(static_cast<std::size_t>(n));
      for (std::size_t b = 0; b < stage.size(); ++b) {
        stage[b] = e_half[b] * (U[b] + 0.5 * dt * k1[b]);
      }
      nonlinear(stage, k2);
      for (std::size_t b = 0; b < stage.size(); ++b) {
        stage[b] = e_half[b] * U[b] + 0.5 * dt * k2[b];
      }
      nonlinear(stage, k3);
      for (std::size_t b = 0; b < stage.size(); ++b) {
        stage[b] = e_full[b] * U[b] + dt * e_half[b] * k3[b];
      }
      nonlinear(stage, k4);
      for (std::size_t b = 0; b < stage.size(); ++b) {
        U[b] = e_full[b] * U[b] +
               dt / 6.0 *
                   (e_full[b] * k1[b] + 2.0 * e_half[b] * (k2[b] + k3[b]) + k4[b]);
      }
      t += dt;
      if (!std::isfinite(std::abs(U[0])) ||
          !std::isfinite(std::abs(U[static_cast<std::size_t>(n / 4)]))) {
        throw NumericError("burgers1d solver: instability detected at t = " + std::to_string(t));
      }
    }
    t = target;
    field.times.push_back(target);
    field.coeffs.push_back(U);
    ++next;
    umax = umax_bound();
  }
  return field;
}

}  // namespace hyperlora
