#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctcfar/baselines.hpp"
#include "ctcfar/detector.hpp"
#include "ctcfar/sim.hpp"

namespace ctcfar {

// ---- detector selection ----------------------------------------------------

enum class DetectorTag { CT, CA, CAGO, CASO, OS, TM, TS };

std::string_view to_string(DetectorTag tag);
std::optional<DetectorTag> detector_from_string(std::string_view name);
std::vector<DetectorTag> all_detectors();

struct DetectorSettings {
  DetectorConfig ct;              // p_fa here is used by every detector
  WindowConfig window;
  std::uint64_t calibration_seed = 0x5eed;
};

/// Runs one detector on a frame. Baseline scales are calibrated (and cached)
/// on first use for the given p_fa.
DetectionSet run_detector(DetectorTag tag, const RdStack& stack, const DetectorSettings& s);

/// Same, for an NCA map already computed from `stack`.
DetectionSet run_detector(DetectorTag tag, const RdStack& stack, const NcaMap& power,
                          const DetectorSettings& s);

/// Calibrate every sliding-window baseline in `tags` ahead of time.
void prepare_detectors(const std::vector<DetectorTag>& tags, int shape_L,
                       const DetectorSettings& s);

// ---- matching and metrics ----------------------------------------------------

struct MatchConfig {
  double range_tol = 1.0;    // bins
  double doppler_tol = 1.0;  // bins

  void validate() const;
};

struct MatchCounts {
  long n_tp = 0;
  long n_fp = 0;
  long n_fn = 0;
};

/// Integer (range, Doppler) cell of a truth: nearest bin, wrapped.
CellIndex truth_cell(const TargetTruth& t, const RadarParams& params);

/// Greedy one-to-one matching in descending detection power (ties: lower
/// range bin, then lower Doppler bin first). Each detection takes the nearest
/// unmatched truth within tolerance (circular distance; ties: lower truth
/// cell), so the result does not depend on truth order.
MatchCounts match_detections(const DetectionSet& dets, const std::vector<TargetTruth>& truths,
                             const RadarParams& params, const MatchConfig& cfg);

struct MetricsReport {
  long n_tp = 0;
  long n_fp = 0;
  long n_fn = 0;
  long n_p = 0;
  long n_n = 0;
  std::optional<double> pd;  // absent when there are no truths
  double pfa = 0.0;
  double pa = 0.0;           // 0 when nothing was detected
};

MetricsReport metrics(long n_tp, long n_fp, long truths, long map_cells);

// ---- Monte Carlo -------------------------------------------------------------

struct McConfig {
  RadarParams params = RadarParams::defaults();
  int trials = 100;
  std::vector<double> snr_grid{0.0};
  std::vector<double> pfa_grid{1e-3};
  std::vector<int> target_counts{20};
  double stationary_fraction_max = 0.5;
  std::uint64_t base_seed = 1;
  std::vector<DetectorTag> detectors = all_detectors();
  DetectorSettings settings;
  MatchConfig match;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
};

struct McRow {
  DetectorTag detector = DetectorTag::CT;
  double snr_db = 0.0;
  double p_fa = 0.0;
  int n_targets = 0;
  int trials = 0;            // trials that produced a result
  std::optional<double> pd;  // absent with zero targets
  double pd_se = 0.0;
  double pfa_emp = 0.0;
  double pfa_se = 0.0;
  double pa = 0.0;
  double pa_se = 0.0;
  double runtime_ms_mean = 0.0;
  int n_errors = 0;
};

/// One row per (detector, snr, p_fa, n_targets); rows ordered by target count,
/// SNR, p_fa, then detector in config order. Trial t uses scenario seed
/// base_seed ^ t, shared across detectors and p_fa values.
std::vector<McRow> monte_carlo(const McConfig& cfg);

// ---- noise-model accuracy ----------------------------------------------------

struct RmseReport {
  double snr_db = 0.0;
  int trials = 0;
  double true_scale = 0.0;
  double true_mean = 0.0;
  double true_var = 0.0;
  double rmse_shape = 0.0;  // L is known, always 0
  double rmse_scale = 0.0;
  double rmse_mean = 0.0;
  double rmse_var = 0.0;
  double rel_rmse_mean = 0.0;  // rmse_mean / true_mean
  int n_errors = 0;
};

struct NoiseEvalConfig {
  RadarParams params = RadarParams::defaults();
  std::vector<double> snr_grid{-10.0, -5.0, 0.0, 5.0, 10.0};
  int trials = 100;
  int n_targets = 20;
  double stationary_fraction_max = 0.5;
  std::uint64_t seed = 1;
  TruncConfig trunc;
  int threads = 0;

  void validate() const;
};

/// Truth per frame: scale N M sigma^2, mean L N M sigma^2, variance L (N M sigma^2)^2.
std::vector<RmseReport> noise_rmse(const NoiseEvalConfig& cfg);

/// Pairs (F^-1(p_i; L, theta), empirical type-7 quantile at p_i) with
/// p_i = (i - 0.5) / n_points.
std::vector<std::pair<double, double>> qq_data(std::vector<double> samples,
                                               const GammaNoiseModel& model, int n_points);

// ---- misc --------------------------------------------------------------------

/// Runs body(i) for i in [0, n) on up to `threads` workers (0: hardware).
/// Exceptions from body are rethrown after all workers finish.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace ctcfar
