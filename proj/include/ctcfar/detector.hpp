#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "ctcfar/clean.hpp"
#include "ctcfar/noise_est.hpp"

namespace ctcfar {

enum class ThresholdNorm {
  Normalized,   // divide the window sum by the number of summed cells
  FullRowWidth,  // divide by N + 2r + 1
};

struct DetectorConfig {
  double p_fa = 1e-3;
  TruncConfig trunc;
  int slow_half_window = 2;   // r: Doppler half-width of the threshold window
  int patch_half_width = 5;   // r_t: CLEAN patch is (2 r_t + 1)^2
  int k_max = 64;
  ThresholdNorm threshold_norm = ThresholdNorm::Normalized;

  void validate() const;
};

struct Detection {
  RefinedPeak peak;
  double power = 0.0;  // CUT value at detection time
  int iteration = 0;
};

enum class Termination { Threshold, KMax, Degenerate, Scan };

std::string_view to_string(Termination t);

struct DetectionSet {
  std::vector<Detection> detections;
  std::optional<GammaNoiseModel> noise_model;
  Termination terminated_by = Termination::Threshold;
};

/// alpha = u_q / L - 1: noise-only cells of P_NCA - mu exceed alpha * mu with
/// probability p_fa.
double alpha_from_pfa(int shape_L, double p_fa);

/// alpha times the mean of (N_G + N_s) over all range bins and Doppler bins
/// v_ind - r .. v_ind + r (circular). FullRowWidth divides the sum by N + 2r + 1.
double adaptive_threshold(const NcaMap& noise, const NcaMap& sidelobes, int v_ind, double alpha,
                          int r, ThresholdNorm mode);

/// CLEAN / truncated-statistics CFAR over one frame.
DetectionSet detect(const RdStack& stack, const DetectorConfig& cfg);

}  // namespace ctcfar
