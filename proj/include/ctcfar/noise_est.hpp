#pragma once

#include "ctcfar/spectrum.hpp"

namespace ctcfar {

enum class InitStrategy { Median, Mean };

struct TruncConfig {
  double p_fa_internal = 1e-3;  // tail probability that sets the truncation point
  double tol = 1e-5;            // relative convergence tolerance
  double eps_rel = 1e-12;       // stabilizer, relative to the initial estimate
  int max_iter = 100;
  InitStrategy init = InitStrategy::Median;

  void validate() const;
};

/// Gamma(shape L, scale theta) background of an NCA map, plus the final
/// truncation threshold and iteration record.
struct GammaNoiseModel {
  int shape_L = 1;
  double mu_z = 0.0;             // mean of the noise power
  double theta = 0.0;            // mu_z / L
  double trunc_threshold = 0.0;  // u_q * mu_z / L
  double u_q = 0.0;
  double g_u = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// u solving P(L, u) = 1 - p_fa, where P is the regularized lower incomplete
/// gamma function. Bracketed Newton/bisection, |residual| < 1e-12.
double invert_gamma_cdf(int shape_L, double p_fa);

/// gamma(L+1, u) / (L gamma(L, u)): ratio of the truncated to the full mean.
double truncation_gain(int shape_L, double u_q);

/// E[Z | Z <= t] for Z ~ Gamma(L, mu_z / L).
double truncated_mean_expected(double mu_z, int shape_L, double t);

/// Median of Gamma(L, 1) divided by its mean L.
double gamma_median_to_mean(int shape_L);

/// Iterated truncated-mean estimate of the background mean.
///
/// Starting from a robust initial guess mu', each pass keeps the cells at or
/// below T = u_q mu' / L and rescales their mean by 1 / g_u. Iteration stops
/// once (mu_hat - mu') / (mu' + eps) < tol or after max_iter passes; in the
/// latter case the last iterate is returned with converged = false.
GammaNoiseModel estimate_noise(const NcaMap& map, int shape_L, const TruncConfig& cfg);

}  // namespace ctcfar
