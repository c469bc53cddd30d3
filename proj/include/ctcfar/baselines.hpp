#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "ctcfar/detector.hpp"

namespace ctcfar {

struct WindowConfig {
  int train_fast = 10;  // reference half-window beyond the guard, range axis
  int train_slow = 6;   // same, Doppler axis
  int guard = 5;        // guard cells per side on both axes
  int os_rank = 0;      // 1-based ascending rank; 0 selects ceil(n / 2)
  int tm_trim = 3;      // cells dropped at each extreme

  int half_fast() const { return guard + train_fast; }
  int half_slow() const { return guard + train_slow; }
  /// Number of reference cells in the ring.
  int ring_size() const;
  /// Throws unless the window fits a rows x cols map.
  void validate(int rows, int cols) const;

  friend auto operator<=>(const WindowConfig&, const WindowConfig&) = default;
};

enum class BaselineKind { CA, CAGO, CASO, OS, TM, TS };

std::string_view to_string(BaselineKind kind);
std::optional<BaselineKind> baseline_from_string(std::string_view name);

/// Per-cell noise statistic g over the reference ring, for every cell.
/// The ring is the (2 hf + 1) x (2 hs + 1) rectangle minus the
/// (2 guard + 1)^2 guard block, wrapped circularly. CAGO / CASO split the ring
/// into equal leading (earlier range) and lagging halves.
NcaMap window_statistic(const NcaMap& map, BaselineKind kind, const WindowConfig& wcfg);

/// Detect every cell whose value exceeds scale * g. Integer-bin detections.
DetectionSet sliding_cfar(const NcaMap& map, const RadarParams& params, BaselineKind kind,
                          const WindowConfig& wcfg, double scale);

/// Monte Carlo calibration of `scale` on Gamma(L, 1) noise maps so the
/// empirical exceedance rate matches p_fa. Cached per argument tuple.
double calibrate_scale(BaselineKind kind, const WindowConfig& wcfg, int shape_L, double p_fa,
                       std::uint64_t seed);

/// Empirical fraction of cells with value > scale * g.
double exceedance_rate(const NcaMap& map, BaselineKind kind, const WindowConfig& wcfg,
                       double scale);

/// Global truncated-statistics CFAR: every cell above mu_hat (1 + alpha).
DetectionSet ts_cfar(const NcaMap& map, const RadarParams& params, int shape_L, double p_fa,
                     const TruncConfig& trunc);

/// TS-CFAR that censors each detection and re-estimates the background
/// before taking the next strongest cell.
DetectionSet ts_cfar_iterative(const NcaMap& map, const RadarParams& params, int shape_L,
                               double p_fa, const TruncConfig& trunc, int k_max);

}  // namespace ctcfar
