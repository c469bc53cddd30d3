#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ctcfar/spectrum.hpp"

namespace ctcfar {

struct CellIndex {
  int r = 0;  // range bin (row)
  int v = 0;  // Doppler bin (column)

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

struct RefinedPeak {
  int r_ind = 0;
  int v_ind = 0;
  double delta_r = 0.0;  // in [-0.5, 0.5]
  double delta_v = 0.0;
  double r_hat = 0.0;    // r_ind + delta_r
  double v_hat = 0.0;
  double range_m = 0.0;
  double velocity_mps = 0.0;
};

/// Unit-gain footprint of a tone over a (2 r_t + 1)^2 patch centred on
/// (center.r, center.v). values(r_t + a, r_t + b) is offset (a, b).
struct TemplatePatch {
  Eigen::MatrixXcd values;
  CellIndex center;
  int half_width = 0;
};

struct ChannelGains {
  Eigen::VectorXcd gains;
};

/// Three-bin fractional frequency estimate with the rectangular-window bias
/// correction tan(pi/len) / (pi/len). Oriented for a forward DFT with the
/// exp(-j 2 pi p n / len) kernel: a tone at bin p0 + d yields +d. Returns 0
/// for a flat neighbourhood.
double candan_delta(Complex y_minus, Complex y0, Complex y_plus, int len);

/// Fractional-bin refinement of a detected cell, averaging per-channel
/// estimates along fast time and slow time. Neighbours wrap circularly.
RefinedPeak refine_peak(const RdStack& stack, int r_ind, int v_ind);

/// Range [m] and signed velocity [m/s] of fractional bins.
double range_of_bin(const RadarParams& params, double r_hat);
double velocity_of_bin(const RadarParams& params, double v_hat);

TemplatePatch build_template(const RadarParams& params, double r_hat, double v_hat, int r_t,
                             CellIndex center);
/// Centre at the nearest integer bins, wrapped into the map.
TemplatePatch build_template(const RadarParams& params, double r_hat, double v_hat, int r_t);

/// Per-channel observation patches around `center`, circularly wrapped.
std::vector<Eigen::MatrixXcd> extract_patches(const RdStack& stack, CellIndex center, int r_t);

/// gains[l] = <g, y_l> / (||g||^2 + eps). A negative eps selects the default
/// 1e-12 ||g||^2.
ChannelGains fit_gains(const std::vector<Eigen::MatrixXcd>& observed,
                       const TemplatePatch& tmpl, double eps = -1.0);

/// NCA power of the fitted footprint, embedded in an otherwise zero
/// rows x cols map.
NcaMap reconstruct_pcut(const TemplatePatch& tmpl, const ChannelGains& gains, int rows,
                        int cols);

/// residual <- max(residual - pcut, 0) with the centre cell forced to 0;
/// sidelobe_hist += pcut with its centre cell zeroed.
void subtract_and_update(NcaMap& residual, const NcaMap& pcut, NcaMap& sidelobe_hist,
                         CellIndex center);

}  // namespace ctcfar
