#pragma once
// Slow, obviously-correct reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;

// X[p, q] = sum_n sum_m x[n, m] exp(-j 2 pi (p n / N + q m / M)), direct O(N^2 M^2).
inline Eigen::MatrixXcd dft2(const Eigen::MatrixXcd& x) {
  const auto n = x.rows();
  const auto m = x.cols();
  Eigen::MatrixXcd range(n, m);
  for (Eigen::Index p = 0; p < n; ++p) {
    for (Eigen::Index q = 0; q < m; ++q) {
      cd acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += x(i, q) * std::polar(1.0, -2.0 * std::numbers::pi * double(p * i % n) / n);
      }
      range(p, q) = acc;
    }
  }
  Eigen::MatrixXcd out(n, m);
  for (Eigen::Index p = 0; p < n; ++p) {
    for (Eigen::Index q = 0; q < m; ++q) {
      cd acc = 0.0;
      for (Eigen::Index k = 0; k < m; ++k) {
        acc += range(p, k) * std::polar(1.0, -2.0 * std::numbers::pi * double(q * k % m) / m);
      }
      out(p, q) = acc;
    }
  }
  return out;
}

// Single DFT bin of a 1D sequence.
inline cd dft_bin(const std::vector<cd>& x, double p) {
  cd acc = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * p * double(i) / n);
  }
  return acc;
}

// Complex tone exp(j 2 pi f n / len), f in bins.
inline std::vector<cd> tone(int len, double f, double phase = 0.0) {
  std::vector<cd> x(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) x[i] = std::polar(1.0, 2.0 * std::numbers::pi * f * i / len + phase);
  return x;
}

// sum_{n<len} exp(j 2 pi n x / len), by summation.
inline cd dirichlet_sum(int len, double x) {
  cd acc = 0.0;
  for (int i = 0; i < len; ++i) acc += std::polar(1.0, 2.0 * std::numbers::pi * i * x / len);
  return acc;
}

// 2D tone on an n x m grid at fractional bins (fr, fv).
inline Eigen::MatrixXcd tone2(int n, int m, double fr, double fv, cd amp = 1.0) {
  Eigen::MatrixXcd x(n, m);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < m; ++k) {
      x(i, k) = amp * std::polar(1.0, 2.0 * std::numbers::pi * (fr * i / n + fv * k / m));
    }
  }
  return x;
}

inline Eigen::MatrixXd gamma_map(int rows, int cols, double shape, double scale,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> g(shape, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

// Kolmogorov-Smirnov distance between samples and a CDF.
template <typename Cdf>
double ks_distance(std::vector<double> x, Cdf cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, std::abs(f - double(i) / n), std::abs(double(i + 1) / n - f)});
  }
  return d;
}

}  // namespace oracle
