#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ctcfar/sim.hpp"

namespace ctcfar {

/// Per-channel range-Doppler spectra. channels[l](p, q): range bin p,
/// Doppler bin q (unshifted, q = 0 is zero Doppler).
struct RdStack {
  RadarParams params;
  std::vector<Eigen::MatrixXcd> channels;

  int rows() const { return channels.empty() ? 0 : static_cast<int>(channels[0].rows()); }
  int cols() const { return channels.empty() ? 0 : static_cast<int>(channels[0].cols()); }
};

/// Non-coherently accumulated power map (N x M).
using NcaMap = Eigen::MatrixXd;

/// Unnormalized, unwindowed 2D DFT of every channel slice.
RdStack rd_transform(const DataCube& cube);

/// Sum over channels of |S_l[p, q]|^2.
NcaMap nca(const RdStack& stack);

/// sum_{n=0}^{len-1} exp(j 2 pi n x / len), closed form.
Complex dirichlet(int len, double x);

}  // namespace ctcfar
