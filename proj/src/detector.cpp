#include "ctcfar/detector.hpp"

#include "ctcfar/error.hpp"

namespace ctcfar {

void DetectorConfig::validate() const {
  if (!(p_fa > 0.0 && p_fa < 1.0)) config_error("p_fa must lie in (0, 1)");
  trunc.validate();
  if (slow_half_window < 0) config_error("slow half-window must be >= 0");
  if (patch_half_width < 1) config_error("patch half-width must be >= 1");
  if (k_max < 1) config_error("k_max must be >= 1");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Threshold: return "threshold";
    case Termination::KMax: return "k_max";
    case Termination::Degenerate: return "degenerate";
    case Termination::Scan: return "scan";
  }
  return "unknown";
}

double alpha_from_pfa(int shape_L, double p_fa) {
  return invert_gamma_cdf(shape_L, p_fa) / shape_L - 1.0;
}

double adaptive_threshold(const NcaMap& noise, const NcaMap& sidelobes, int v_ind, double alpha,
                          int r, ThresholdNorm mode) {
  if (noise.rows() != sidelobes.rows() || noise.cols() != sidelobes.cols()) {
    config_error("adaptive_threshold: map dimensions differ");
  }
  if (r < 0) config_error("window half-width must be >= 0");
  const auto rows = noise.rows();
  const auto cols = noise.cols();
  double sum = 0.0;
  for (int j = v_ind - r; j <= v_ind + r; ++j) {
    const auto q = ((j % cols) + cols) % cols;
    sum += noise.col(q).sum() + sidelobes.col(q).sum();
  }
  const double divisor = mode == ThresholdNorm::Normalized
                             ? static_cast<double>(rows) * (2 * r + 1)
                             : static_cast<double>(rows + 2 * r + 1);
  return alpha * sum / divisor;
}

DetectionSet detect(const RdStack& stack, const DetectorConfig& cfg) {
  cfg.validate();
  if (stack.channels.empty()) config_error("detect: empty stack");
  const int rows = stack.rows();
  const int cols = stack.cols();
  const int shape_L = static_cast<int>(stack.channels.size());

  const NcaMap power = nca(stack);
  if (power.maxCoeff() == 0.0) {
    throw Error(ErrorKind::Degenerate, "detect: all-zero range-Doppler stack");
  }

  DetectionSet out;
  const GammaNoiseModel model = estimate_noise(power, shape_L, cfg.trunc);
  out.noise_model = model;

  const NcaMap noise = NcaMap::Constant(rows, cols, model.mu_z);
  NcaMap residual = (power - noise).cwiseMax(0.0);
  NcaMap sidelobes = NcaMap::Zero(rows, cols);
  const double alpha = alpha_from_pfa(shape_L, cfg.p_fa);

  out.terminated_by = Termination::KMax;
  for (int k = 0; k < cfg.k_max; ++k) {
    Eigen::Index r_ind = 0;
    Eigen::Index v_ind = 0;
    const double cut = residual.maxCoeff(&r_ind, &v_ind);
    if (cut == 0.0) {
      out.terminated_by = Termination::Degenerate;  // nothing left in the map
      break;
    }
    const double threshold = adaptive_threshold(noise, sidelobes, static_cast<int>(v_ind),
                                                alpha, cfg.slow_half_window, cfg.threshold_norm);
    if (!(cut > threshold)) {
      out.terminated_by = Termination::Threshold;
      break;
    }

    Detection det;
    det.peak = refine_peak(stack, static_cast<int>(r_ind), static_cast<int>(v_ind));
    det.power = cut;
    det.iteration = k;
    out.detections.push_back(det);

    const CellIndex center{static_cast<int>(r_ind), static_cast<int>(v_ind)};
    const TemplatePatch tmpl = build_template(stack.params, det.peak.r_hat, det.peak.v_hat,
                                              cfg.patch_half_width, center);
    const ChannelGains gains =
        fit_gains(extract_patches(stack, center, cfg.patch_half_width), tmpl);
    const NcaMap pcut = reconstruct_pcut(tmpl, gains, rows, cols);
    subtract_and_update(residual, pcut, sidelobes, center);
  }
  return out;
}

}  // namespace ctcfar
