#include "ctcfar/noise_est.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "ctcfar/error.hpp"

namespace ctcfar {

namespace bm = boost::math;

void TruncConfig::validate() const {
  if (!(p_fa_internal > 0.0 && p_fa_internal < 1.0)) {
    config_error("truncation p_fa must lie in (0, 1)");
  }
  if (!(tol > 0.0)) config_error("convergence tolerance must be positive");
  if (!(eps_rel > 0.0)) config_error("eps must be positive");
  if (max_iter < 1) config_error("max_iter must be >= 1");
}

double invert_gamma_cdf(int shape_L, double p_fa) {
  if (shape_L < 1) config_error("Gamma shape must be >= 1");
  if (!(p_fa > 0.0 && p_fa < 1.0)) config_error("p_fa must lie in (0, 1)");
  const double a = shape_L;

  // Work on the upper tail Q(L, u) - p_fa, which is decreasing in u and keeps
  // full relative precision for small p_fa.
  auto tail = [&](double u) { return bm::gamma_q(a, u) - p_fa; };

  double lo = 0.0;
  double hi = std::max(1.0, a);
  while (tail(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw Error(ErrorKind::Numerical, "invert_gamma_cdf: bracket overflow");
  }

  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = tail(u);
    if (f == 0.0) break;
    if (f > 0.0) {
      lo = u;
    } else {
      hi = u;
    }
    const double slope = -bm::gamma_p_derivative(a, u);
    double next = (slope != 0.0) ? u - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 1e-15 * std::max(1.0, u)) {
      u = next;
      break;
    }
    u = next;
  }

  const double residual = std::abs(bm::gamma_p(a, u) - (1.0 - p_fa));
  if (!(residual < 1e-12)) {
    throw Error(ErrorKind::Numerical, "invert_gamma_cdf did not converge");
  }
  return u;
}

double truncation_gain(int shape_L, double u_q) {
  if (shape_L < 1) config_error("Gamma shape must be >= 1");
  if (!(u_q > 0.0)) config_error("truncation point must be positive");
  if (std::isinf(u_q)) return 1.0;
  // gamma(L+1, u) / (L gamma(L, u)) == P(L+1, u) / P(L, u)
  const double a = shape_L;
  return bm::gamma_p(a + 1.0, u_q) / bm::gamma_p(a, u_q);
}

double truncated_mean_expected(double mu_z, int shape_L, double t) {
  if (!(mu_z > 0.0)) config_error("mu_z must be positive");
  if (!(t > 0.0)) config_error("truncation point must be positive");
  return mu_z * truncation_gain(shape_L, shape_L * t / mu_z);
}

double gamma_median_to_mean(int shape_L) {
  return invert_gamma_cdf(shape_L, 0.5) / shape_L;
}

namespace {

double median_of(const NcaMap& map) {
  std::vector<double> v(map.data(), map.data() + map.size());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double med = v[mid];
  if (v.size() % 2 == 0) {
    const double lower =
        *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    med = 0.5 * (lower + med);
  }
  return med;
}

}  // namespace

GammaNoiseModel estimate_noise(const NcaMap& map, int shape_L, const TruncConfig& cfg) {
  cfg.validate();
  if (shape_L < 1) config_error("Gamma shape must be >= 1");
  if (map.size() < 100) config_error("noise estimation needs at least 100 cells");
  if (!map.allFinite() || map.minCoeff() < 0.0) {
    config_error("NCA map must be finite and non-negative");
  }
  if (map.maxCoeff() == 0.0) {
    throw Error(ErrorKind::Degenerate, "noise estimation on an all-zero map");
  }

  GammaNoiseModel model;
  model.shape_L = shape_L;
  model.u_q = invert_gamma_cdf(shape_L, cfg.p_fa_internal);
  model.g_u = truncation_gain(shape_L, model.u_q);

  double prev = 0.0;
  if (cfg.init == InitStrategy::Median) {
    prev = median_of(map) / gamma_median_to_mean(shape_L);
  }
  if (!(prev > 0.0)) prev = map.mean();  // median of a sparse map can be 0
  const double eps = cfg.eps_rel * prev;

  const double* cells = map.data();
  const Eigen::Index n = map.size();
  double mu = prev;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const double threshold = model.u_q * prev / shape_L;
    double sum = 0.0;
    Eigen::Index kept = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (cells[i] <= threshold) {
        sum += cells[i];
        ++kept;
      }
    }
    if (kept == 0) {
      throw Error(ErrorKind::Estimation, "truncation at " + std::to_string(threshold) +
                                             " left no samples");
    }
    mu = sum / static_cast<double>(kept) / model.g_u;
    if (!(mu > 0.0)) {
      throw Error(ErrorKind::Degenerate, "all truncated samples are zero");
    }
    model.iterations = it;
    // One-sided test as in the fixed-point rule: a falling estimate stops.
    if ((mu - prev) / (prev + eps) < cfg.tol) {
      model.converged = true;
      break;
    }
    prev = mu;
  }

  model.mu_z = mu;
  model.theta = mu / shape_L;
  model.trunc_threshold = model.u_q * mu / shape_L;
  return model;
}

}  // namespace ctcfar
