#include "ctcfar/clean.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ctcfar/error.hpp"

namespace ctcfar {

namespace {

int wrap(int i, int n) {
  int r = i % n;
  return r < 0 ? r + n : r;
}

constexpr double kFlatEps = 1e-12;

}  // namespace

double candan_delta(Complex y_minus, Complex y0, Complex y_plus, int len) {
  if (len < 3) config_error("candan_delta needs len >= 3");
  const Complex den = 2.0 * y0 - y_plus - y_minus;
  if (std::abs(den) < kFlatEps * std::abs(y0) || std::abs(den) == 0.0) return 0.0;
  const double x = std::numbers::pi / len;
  const double correction = std::tan(x) / x;
  const double delta = correction * ((y_minus - y_plus) / den).real();
  return std::clamp(delta, -0.5, 0.5);
}

double range_of_bin(const RadarParams& params, double r_hat) {
  return r_hat * params.range_per_bin();
}

double velocity_of_bin(const RadarParams& params, double v_hat) {
  const double m = params.chirps;
  double v = std::fmod(v_hat, m);
  if (v < 0.0) v += m;
  if (v >= m / 2.0) v -= m;
  return v * params.velocity_per_bin();
}

RefinedPeak refine_peak(const RdStack& stack, int r_ind, int v_ind) {
  const int rows = stack.rows();
  const int cols = stack.cols();
  if (rows < 3 || cols < 3 || stack.channels.empty()) {
    config_error("refine_peak needs a non-empty stack of at least 3 x 3 bins");
  }
  r_ind = wrap(r_ind, rows);
  v_ind = wrap(v_ind, cols);
  const int rm = wrap(r_ind - 1, rows);
  const int rp = wrap(r_ind + 1, rows);
  const int vm = wrap(v_ind - 1, cols);
  const int vp = wrap(v_ind + 1, cols);

  double sum_r = 0.0;
  double sum_v = 0.0;
  for (const auto& s : stack.channels) {
    sum_r += candan_delta(s(rm, v_ind), s(r_ind, v_ind), s(rp, v_ind), rows);
    sum_v += candan_delta(s(r_ind, vm), s(r_ind, v_ind), s(r_ind, vp), cols);
  }
  const double n_ch = static_cast<double>(stack.channels.size());

  RefinedPeak peak;
  peak.r_ind = r_ind;
  peak.v_ind = v_ind;
  peak.delta_r = sum_r / n_ch;
  peak.delta_v = sum_v / n_ch;
  peak.r_hat = r_ind + peak.delta_r;
  peak.v_hat = v_ind + peak.delta_v;
  peak.range_m = range_of_bin(stack.params, peak.r_hat);
  peak.velocity_mps = velocity_of_bin(stack.params, peak.v_hat);
  return peak;
}

TemplatePatch build_template(const RadarParams& params, double r_hat, double v_hat, int r_t,
                             CellIndex center) {
  if (r_t < 1) config_error("template half-width must be >= 1");
  const int n = params.samples;
  const int m = params.chirps;
  const int side = 2 * r_t + 1;

  Eigen::VectorXcd range_kernel(side);
  Eigen::VectorXcd doppler_kernel(side);
  for (int a = -r_t; a <= r_t; ++a) {
    range_kernel[a + r_t] = dirichlet(n, r_hat - (center.r + a));
    doppler_kernel[a + r_t] = dirichlet(m, v_hat - (center.v + a));
  }

  TemplatePatch patch;
  patch.values = range_kernel * doppler_kernel.transpose();
  patch.center = center;
  patch.half_width = r_t;
  return patch;
}

TemplatePatch build_template(const RadarParams& params, double r_hat, double v_hat, int r_t) {
  const CellIndex center{static_cast<int>(std::lround(r_hat)),
                         static_cast<int>(std::lround(v_hat))};
  return build_template(params, r_hat, v_hat, r_t, center);
}

std::vector<Eigen::MatrixXcd> extract_patches(const RdStack& stack, CellIndex center, int r_t) {
  const int rows = stack.rows();
  const int cols = stack.cols();
  const int side = 2 * r_t + 1;
  if (side > rows || side > cols) config_error("patch larger than the range-Doppler map");
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(stack.channels.size());
  for (const auto& s : stack.channels) {
    Eigen::MatrixXcd patch(side, side);
    for (int b = 0; b < side; ++b) {
      const int q = wrap(center.v + b - r_t, cols);
      for (int a = 0; a < side; ++a) {
        patch(a, b) = s(wrap(center.r + a - r_t, rows), q);
      }
    }
    out.push_back(std::move(patch));
  }
  return out;
}

ChannelGains fit_gains(const std::vector<Eigen::MatrixXcd>& observed, const TemplatePatch& tmpl,
                       double eps) {
  const double g_norm2 = tmpl.values.squaredNorm();
  if (!(g_norm2 > 0.0)) {
    throw Error(ErrorKind::Degenerate, "cannot fit gains to an all-zero template");
  }
  if (eps < 0.0) eps = 1e-12 * g_norm2;

  ChannelGains out;
  out.gains.resize(static_cast<Eigen::Index>(observed.size()));
  for (std::size_t l = 0; l < observed.size(); ++l) {
    const auto& y = observed[l];
    if (y.rows() != tmpl.values.rows() || y.cols() != tmpl.values.cols()) {
      config_error("observation patch does not match template dimensions");
    }
    // <g, y> = g^H y over the vectorized patch.
    const Complex inner = (tmpl.values.conjugate().cwiseProduct(y)).sum();
    out.gains[static_cast<Eigen::Index>(l)] = inner / (g_norm2 + eps);
  }
  return out;
}

NcaMap reconstruct_pcut(const TemplatePatch& tmpl, const ChannelGains& gains, int rows,
                        int cols) {
  const int r_t = tmpl.half_width;
  const int side = 2 * r_t + 1;
  if (side > rows || side > cols) config_error("patch larger than the range-Doppler map");
  const double gain_power = gains.gains.squaredNorm();
  NcaMap pcut = NcaMap::Zero(rows, cols);
  // sum_l |g a_l|^2 = |g|^2 sum_l |a_l|^2
  for (int b = 0; b < side; ++b) {
    const int q = wrap(tmpl.center.v + b - r_t, cols);
    for (int a = 0; a < side; ++a) {
      pcut(wrap(tmpl.center.r + a - r_t, rows), q) = std::norm(tmpl.values(a, b)) * gain_power;
    }
  }
  return pcut;
}

void subtract_and_update(NcaMap& residual, const NcaMap& pcut, NcaMap& sidelobe_hist,
                         CellIndex center) {
  if (residual.rows() != pcut.rows() || residual.cols() != pcut.cols() ||
      sidelobe_hist.rows() != pcut.rows() || sidelobe_hist.cols() != pcut.cols()) {
    config_error("subtract_and_update: map dimensions differ");
  }
  const int r = wrap(center.r, static_cast<int>(pcut.rows()));
  const int v = wrap(center.v, static_cast<int>(pcut.cols()));
  residual = (residual - pcut).cwiseMax(0.0);
  residual(r, v) = 0.0;
  const double centre_hist = sidelobe_hist(r, v);
  sidelobe_hist += pcut;
  sidelobe_hist(r, v) = centre_hist;
}

}  // namespace ctcfar
