#include "ctcfar/baselines.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <tuple>
#include <vector>

#include "ctcfar/error.hpp"

namespace ctcfar {

namespace {

int wrap(int i, int n) {
  int r = i % n;
  return r < 0 ? r + n : r;
}

// Circularly padded copy of the map with a summed-area table over it.
class PaddedMap {
 public:
  PaddedMap(const NcaMap& map, int pad_r, int pad_c)
      : rows_(static_cast<int>(map.rows())),
        cols_(static_cast<int>(map.cols())),
        pad_r_(pad_r),
        pad_c_(pad_c),
        padded_(rows_ + 2 * pad_r, cols_ + 2 * pad_c),
        sat_(NcaMap::Zero(rows_ + 2 * pad_r + 1, cols_ + 2 * pad_c + 1)) {
    for (int j = 0; j < padded_.cols(); ++j) {
      const int q = wrap(j - pad_c, cols_);
      for (int i = 0; i < padded_.rows(); ++i) padded_(i, j) = map(wrap(i - pad_r, rows_), q);
    }
    for (int j = 0; j < padded_.cols(); ++j) {
      for (int i = 0; i < padded_.rows(); ++i) {
        sat_(i + 1, j + 1) = padded_(i, j) + sat_(i, j + 1) + sat_(i + 1, j) - sat_(i, j);
      }
    }
  }

  // Inclusive rectangle in map coordinates relative to cell (r, v).
  double rect(int r, int v, int r0, int r1, int c0, int c1) const {
    if (r0 > r1 || c0 > c1) return 0.0;
    const int a0 = r + pad_r_ + r0;
    const int a1 = r + pad_r_ + r1 + 1;
    const int b0 = v + pad_c_ + c0;
    const int b1 = v + pad_c_ + c1 + 1;
    return sat_(a1, b1) - sat_(a0, b1) - sat_(a1, b0) + sat_(a0, b0);
  }

  double at(int r, int v, int dr, int dc) const { return padded_(r + pad_r_ + dr, v + pad_c_ + dc); }

 private:
  int rows_;
  int cols_;
  int pad_r_;
  int pad_c_;
  NcaMap padded_;
  NcaMap sat_;
};

struct HalfSums {
  double lead = 0.0;
  double lag = 0.0;
};

HalfSums half_sums(const PaddedMap& pm, int r, int v, const WindowConfig& w) {
  const int hf = w.half_fast();
  const int hs = w.half_slow();
  const int g = w.guard;
  HalfSums s;
  s.lead = pm.rect(r, v, -hf, -1, -hs, hs) - pm.rect(r, v, -g, -1, -g, g) +
           pm.rect(r, v, 0, 0, -hs, -g - 1);
  s.lag = pm.rect(r, v, 1, hf, -hs, hs) - pm.rect(r, v, 1, g, -g, g) +
          pm.rect(r, v, 0, 0, g + 1, hs);
  // Summed-area differences can leave tiny negative residue.
  s.lead = std::max(s.lead, 0.0);
  s.lag = std::max(s.lag, 0.0);
  return s;
}

void gather_ring(const PaddedMap& pm, int r, int v, const WindowConfig& w,
                 std::vector<double>& buf) {
  buf.clear();
  const int hf = w.half_fast();
  const int hs = w.half_slow();
  const int g = w.guard;
  for (int dc = -hs; dc <= hs; ++dc) {
    const bool in_guard_c = std::abs(dc) <= g;
    for (int dr = -hf; dr <= hf; ++dr) {
      if (in_guard_c && std::abs(dr) <= g) continue;
      buf.push_back(pm.at(r, v, dr, dc));
    }
  }
}

constexpr int kSmallTrim = 16;

// Sum of the t smallest plus the t largest values, one pass. Needs
// 2 t <= buf.size().
double extreme_sum_small(const std::vector<double>& buf, int t) {
  std::array<double, kSmallTrim> lo;  // ascending
  std::array<double, kSmallTrim> hi;  // descending
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (double x : buf) {
    if (x < lo[t - 1]) {
      int i = t - 1;
      for (; i > 0 && lo[i - 1] > x; --i) lo[i] = lo[i - 1];
      lo[i] = x;
    }
    if (x > hi[t - 1]) {
      int i = t - 1;
      for (; i > 0 && hi[i - 1] < x; --i) hi[i] = hi[i - 1];
      hi[i] = x;
    }
  }
  double sum = 0.0;
  for (int i = 0; i < t; ++i) sum += lo[i];
  for (int i = 0; i < t; ++i) sum += hi[i];
  return sum;
}

int os_index(const WindowConfig& w) {
  const int n = w.ring_size();
  const int rank = w.os_rank > 0 ? w.os_rank : (n + 1) / 2;
  return rank - 1;
}

}  // namespace

int WindowConfig::ring_size() const {
  return (2 * half_fast() + 1) * (2 * half_slow() + 1) - (2 * guard + 1) * (2 * guard + 1);
}

void WindowConfig::validate(int rows, int cols) const {
  if (train_fast < 0 || train_slow < 0 || guard < 0 || os_rank < 0 || tm_trim < 0) {
    config_error("window counts must be non-negative");
  }
  if (2 * half_fast() + 1 > rows || 2 * half_slow() + 1 > cols) {
    config_error("CFAR window larger than the map");
  }
  const int n = ring_size();
  if (n < 2) config_error("CFAR window has no reference cells");
  if (os_rank > n) config_error("OS rank exceeds the number of reference cells");
  if (2 * tm_trim >= n) config_error("TM trim removes every reference cell");
}

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::CA: return "ca";
    case BaselineKind::CAGO: return "cago";
    case BaselineKind::CASO: return "caso";
    case BaselineKind::OS: return "os";
    case BaselineKind::TM: return "tm";
    case BaselineKind::TS: return "ts";
  }
  return "unknown";
}

std::optional<BaselineKind> baseline_from_string(std::string_view name) {
  for (auto k : {BaselineKind::CA, BaselineKind::CAGO, BaselineKind::CASO, BaselineKind::OS,
                 BaselineKind::TM, BaselineKind::TS}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

NcaMap window_statistic(const NcaMap& map, BaselineKind kind, const WindowConfig& wcfg) {
  const int rows = static_cast<int>(map.rows());
  const int cols = static_cast<int>(map.cols());
  wcfg.validate(rows, cols);
  if (kind == BaselineKind::TS) config_error("TS-CFAR has no sliding-window statistic");

  const PaddedMap pm(map, wcfg.half_fast(), wcfg.half_slow());
  const int n = wcfg.ring_size();
  const double half = n / 2;
  const int trim = wcfg.tm_trim;
  const int kth = os_index(wcfg);
  std::vector<double> buf;
  buf.reserve(static_cast<std::size_t>(n));

  NcaMap stat(rows, cols);
  for (int v = 0; v < cols; ++v) {
    for (int r = 0; r < rows; ++r) {
      double g = 0.0;
      switch (kind) {
        case BaselineKind::CA: {
          const HalfSums s = half_sums(pm, r, v, wcfg);
          g = (s.lead + s.lag) / n;
          break;
        }
        case BaselineKind::CAGO: {
          const HalfSums s = half_sums(pm, r, v, wcfg);
          g = std::max(s.lead, s.lag) / half;
          break;
        }
        case BaselineKind::CASO: {
          const HalfSums s = half_sums(pm, r, v, wcfg);
          g = std::min(s.lead, s.lag) / half;
          break;
        }
        case BaselineKind::OS: {
          gather_ring(pm, r, v, wcfg, buf);
          std::nth_element(buf.begin(), buf.begin() + kth, buf.end());
          g = buf[static_cast<std::size_t>(kth)];
          break;
        }
        case BaselineKind::TM: {
          const HalfSums s = half_sums(pm, r, v, wcfg);
          double trimmed = 0.0;
          if (trim > 0 && trim <= kSmallTrim) {
            gather_ring(pm, r, v, wcfg, buf);
            trimmed = extreme_sum_small(buf, trim);
          } else if (trim > 0) {
            gather_ring(pm, r, v, wcfg, buf);
            std::nth_element(buf.begin(), buf.begin() + trim, buf.end());
            for (int i = 0; i < trim; ++i) trimmed += buf[static_cast<std::size_t>(i)];
            std::nth_element(buf.begin() + trim, buf.end() - trim, buf.end());
            for (int i = n - trim; i < n; ++i) trimmed += buf[static_cast<std::size_t>(i)];
          }
          g = std::max((s.lead + s.lag - trimmed) / (n - 2 * trim), 0.0);
          break;
        }
        case BaselineKind::TS: break;
      }
      stat(r, v) = g;
    }
  }
  return stat;
}

DetectionSet sliding_cfar(const NcaMap& map, const RadarParams& params, BaselineKind kind,
                          const WindowConfig& wcfg, double scale) {
  if (!(scale > 0.0)) config_error("CFAR scale must be positive");
  const NcaMap stat = window_statistic(map, kind, wcfg);
  DetectionSet out;
  out.terminated_by = Termination::Scan;
  for (int v = 0; v < map.cols(); ++v) {
    for (int r = 0; r < map.rows(); ++r) {
      if (map(r, v) > scale * stat(r, v)) {
        Detection d;
        d.peak.r_ind = r;
        d.peak.v_ind = v;
        d.peak.r_hat = r;
        d.peak.v_hat = v;
        d.peak.range_m = range_of_bin(params, r);
        d.peak.velocity_mps = velocity_of_bin(params, v);
        d.power = map(r, v);
        out.detections.push_back(d);
      }
    }
  }
  return out;
}

double exceedance_rate(const NcaMap& map, BaselineKind kind, const WindowConfig& wcfg,
                       double scale) {
  const NcaMap stat = window_statistic(map, kind, wcfg);
  const auto hits = (map.array() > scale * stat.array()).count();
  return static_cast<double>(hits) / static_cast<double>(map.size());
}

namespace {

constexpr int kCalibrationRows = 256;
constexpr int kCalibrationCols = 128;
constexpr long kCalibrationCells = 1L << 20;

using CalibrationKey = std::tuple<BaselineKind, WindowConfig, int, double, std::uint64_t>;

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

std::map<CalibrationKey, double>& cache() {
  static std::map<CalibrationKey, double> c;
  return c;
}

NcaMap gamma_noise_map(int rows, int cols, int shape_L, std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), 0x63616c69u};
  std::mt19937_64 rng(seq);
  std::gamma_distribution<double> gamma(shape_L, 1.0);
  NcaMap m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = gamma(rng);
  return m;
}

}  // namespace

double calibrate_scale(BaselineKind kind, const WindowConfig& wcfg, int shape_L, double p_fa,
                       std::uint64_t seed) {
  if (kind == BaselineKind::TS) config_error("TS-CFAR is not scale-calibrated");
  if (shape_L < 1) config_error("Gamma shape must be >= 1");
  if (!(p_fa > 0.0 && p_fa < 1.0)) config_error("p_fa must lie in (0, 1)");
  const int rows = std::max(kCalibrationRows, 2 * wcfg.half_fast() + 1);
  const int cols = std::max(kCalibrationCols, 2 * wcfg.half_slow() + 1);
  wcfg.validate(rows, cols);

  const CalibrationKey key{kind, wcfg, shape_L, p_fa, seed};
  {
    std::lock_guard lock(cache_mutex());
    if (auto it = cache().find(key); it != cache().end()) return it->second;
  }

  const long per_map = static_cast<long>(rows) * cols;
  const int n_maps = static_cast<int>((kCalibrationCells + per_map - 1) / per_map);
  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(per_map) * n_maps);
  for (int i = 0; i < n_maps; ++i) {
    const NcaMap noise = gamma_noise_map(rows, cols, shape_L, seed, i);
    const NcaMap stat = window_statistic(noise, kind, wcfg);
    for (Eigen::Index c = 0; c < noise.size(); ++c) {
      const double g = stat.data()[c];
      ratios.push_back(g > 0.0 ? noise.data()[c] / g : std::numeric_limits<double>::infinity());
    }
  }

  // The exceedance count of x / g > s is a step function of s; the scale that
  // hits p_fa sits between the k-th and (k+1)-th largest ratio.
  const auto total = static_cast<double>(ratios.size());
  const auto k = static_cast<std::size_t>(std::llround(p_fa * total));
  if (k < 10 || k + 1 >= ratios.size()) {
    throw Error(ErrorKind::Numerical, "p_fa outside the resolvable range of the calibration set");
  }
  std::sort(ratios.begin(), ratios.end(), std::greater<>());
  const double scale = 0.5 * (ratios[k - 1] + ratios[k]);
  const auto hits = static_cast<double>(
      std::upper_bound(ratios.begin(), ratios.end(), scale, std::greater<>()) - ratios.begin());
  if (!(std::isfinite(scale) && scale > 0.0) || std::abs(hits / total - p_fa) > 0.1 * p_fa) {
    throw Error(ErrorKind::Numerical, "CFAR scale calibration did not converge");
  }

  std::lock_guard lock(cache_mutex());
  cache().emplace(key, scale);
  return scale;
}

DetectionSet ts_cfar(const NcaMap& map, const RadarParams& params, int shape_L, double p_fa,
                     const TruncConfig& trunc) {
  const GammaNoiseModel model = estimate_noise(map, shape_L, trunc);
  const double threshold = model.mu_z * (1.0 + alpha_from_pfa(shape_L, p_fa));
  DetectionSet out;
  out.noise_model = model;
  out.terminated_by = Termination::Scan;
  for (int v = 0; v < map.cols(); ++v) {
    for (int r = 0; r < map.rows(); ++r) {
      if (map(r, v) > threshold) {
        Detection d;
        d.peak.r_ind = r;
        d.peak.v_ind = v;
        d.peak.r_hat = r;
        d.peak.v_hat = v;
        d.peak.range_m = range_of_bin(params, r);
        d.peak.velocity_mps = velocity_of_bin(params, v);
        d.power = map(r, v);
        out.detections.push_back(d);
      }
    }
  }
  return out;
}

DetectionSet ts_cfar_iterative(const NcaMap& map, const RadarParams& params, int shape_L,
                               double p_fa, const TruncConfig& trunc, int k_max) {
  if (k_max < 1) config_error("k_max must be >= 1");
  const double alpha = alpha_from_pfa(shape_L, p_fa);
  std::vector<bool> censored(static_cast<std::size_t>(map.size()), false);
  DetectionSet out;
  out.terminated_by = Termination::KMax;
  for (int k = 0; k < k_max; ++k) {
    NcaMap remaining(map.size() - k, 1);
    Eigen::Index fill = 0;
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < map.size(); ++i) {
      if (censored[static_cast<std::size_t>(i)]) continue;
      remaining(fill++, 0) = map.data()[i];
      if (best < 0 || map.data()[i] > map.data()[best]) best = i;
    }
    const GammaNoiseModel model = estimate_noise(remaining, shape_L, trunc);
    out.noise_model = model;
    const double value = map.data()[best];
    if (!(value > model.mu_z * (1.0 + alpha))) {
      out.terminated_by = Termination::Threshold;
      break;
    }
    censored[static_cast<std::size_t>(best)] = true;
    const int r = static_cast<int>(best % map.rows());
    const int v = static_cast<int>(best / map.rows());
    Detection d;
    d.peak.r_ind = r;
    d.peak.v_ind = v;
    d.peak.r_hat = r;
    d.peak.v_hat = v;
    d.peak.range_m = range_of_bin(params, r);
    d.peak.velocity_mps = velocity_of_bin(params, v);
    d.power = value;
    d.iteration = k;
    out.detections.push_back(d);
  }
  return out;
}

}  // namespace ctcfar
