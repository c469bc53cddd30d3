#include "ctcfar/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "ctcfar/error.hpp"
#include "ctcfar/spectrum.hpp"

namespace ctcfar {

namespace {

int wrap(long i, long n) {
  long r = i % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

int circular_distance(int a, int b, int n) {
  const int d = std::abs(a - b) % n;
  return std::min(d, n - d);
}

std::optional<BaselineKind> baseline_of(DetectorTag tag) {
  switch (tag) {
    case DetectorTag::CA: return BaselineKind::CA;
    case DetectorTag::CAGO: return BaselineKind::CAGO;
    case DetectorTag::CASO: return BaselineKind::CASO;
    case DetectorTag::OS: return BaselineKind::OS;
    case DetectorTag::TM: return BaselineKind::TM;
    default: return std::nullopt;
  }
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& x) {
  MeanSe out;
  if (x.empty()) return out;
  const double n = static_cast<double>(x.size());
  out.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

bool recoverable(const Error& e) { return e.kind() != ErrorKind::Config; }

}  // namespace

std::string_view to_string(DetectorTag tag) {
  switch (tag) {
    case DetectorTag::CT: return "ct";
    case DetectorTag::CA: return "ca";
    case DetectorTag::CAGO: return "cago";
    case DetectorTag::CASO: return "caso";
    case DetectorTag::OS: return "os";
    case DetectorTag::TM: return "tm";
    case DetectorTag::TS: return "ts";
  }
  return "unknown";
}

std::vector<DetectorTag> all_detectors() {
  return {DetectorTag::CT, DetectorTag::CA, DetectorTag::CAGO, DetectorTag::CASO,
          DetectorTag::OS, DetectorTag::TM, DetectorTag::TS};
}

std::optional<DetectorTag> detector_from_string(std::string_view name) {
  for (auto t : all_detectors()) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

DetectionSet run_detector(DetectorTag tag, const RdStack& stack, const NcaMap& power,
                          const DetectorSettings& s) {
  const int shape_L = static_cast<int>(stack.channels.size());
  if (tag == DetectorTag::CT) return detect(stack, s.ct);
  if (tag == DetectorTag::TS) return ts_cfar(power, stack.params, shape_L, s.ct.p_fa, s.ct.trunc);
  const BaselineKind kind = *baseline_of(tag);
  const double scale = calibrate_scale(kind, s.window, shape_L, s.ct.p_fa, s.calibration_seed);
  return sliding_cfar(power, stack.params, kind, s.window, scale);
}

DetectionSet run_detector(DetectorTag tag, const RdStack& stack, const DetectorSettings& s) {
  if (tag == DetectorTag::CT) return detect(stack, s.ct);
  return run_detector(tag, stack, nca(stack), s);
}

void prepare_detectors(const std::vector<DetectorTag>& tags, int shape_L,
                       const DetectorSettings& s) {
  for (auto tag : tags) {
    if (auto kind = baseline_of(tag)) {
      calibrate_scale(*kind, s.window, shape_L, s.ct.p_fa, s.calibration_seed);
    }
  }
}

void MatchConfig::validate() const {
  if (!(range_tol >= 0.0) || !(doppler_tol >= 0.0)) {
    config_error("match tolerances must be >= 0");
  }
}

CellIndex truth_cell(const TargetTruth& t, const RadarParams& params) {
  const BinPosition b = truth_bins(t, params);
  return {wrap(std::lround(b.range_bin), params.samples),
          wrap(std::lround(b.doppler_bin), params.chirps)};
}

MatchCounts match_detections(const DetectionSet& dets, const std::vector<TargetTruth>& truths,
                             const RadarParams& params, const MatchConfig& cfg) {
  cfg.validate();
  const int n = params.samples;
  const int m = params.chirps;

  std::vector<CellIndex> cells;
  cells.reserve(truths.size());
  for (const auto& t : truths) cells.push_back(truth_cell(t, params));

  std::vector<std::size_t> order(dets.detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& da = dets.detections[a];
    const auto& db = dets.detections[b];
    if (da.power != db.power) return da.power > db.power;
    if (da.peak.r_ind != db.peak.r_ind) return da.peak.r_ind < db.peak.r_ind;
    return da.peak.v_ind < db.peak.v_ind;
  });

  std::vector<bool> taken(cells.size(), false);
  MatchCounts out;
  for (std::size_t i : order) {
    const auto& d = dets.detections[i];
    const int r = wrap(d.peak.r_ind, n);
    const int v = wrap(d.peak.v_ind, m);
    std::optional<std::size_t> best;
    long best_d2 = 0;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (taken[j]) continue;
      const int dr = circular_distance(r, cells[j].r, n);
      const int dv = circular_distance(v, cells[j].v, m);
      if (dr > cfg.range_tol || dv > cfg.doppler_tol) continue;
      const long d2 = static_cast<long>(dr) * dr + static_cast<long>(dv) * dv;
      const bool better =
          !best || d2 < best_d2 ||
          (d2 == best_d2 && (cells[j].r < cells[*best].r ||
                             (cells[j].r == cells[*best].r && cells[j].v < cells[*best].v)));
      if (better) {
        best = j;
        best_d2 = d2;
      }
    }
    if (best) {
      taken[*best] = true;
      ++out.n_tp;
    } else {
      ++out.n_fp;
    }
  }
  out.n_fn = static_cast<long>(cells.size()) - out.n_tp;
  return out;
}

MetricsReport metrics(long n_tp, long n_fp, long truths, long map_cells) {
  if (n_tp < 0 || n_fp < 0 || truths < 0 || n_tp > truths || map_cells <= truths) {
    config_error("inconsistent metric counts");
  }
  MetricsReport r;
  r.n_tp = n_tp;
  r.n_fp = n_fp;
  r.n_fn = truths - n_tp;
  r.n_p = truths;
  r.n_n = map_cells - truths;
  if (truths > 0) r.pd = static_cast<double>(n_tp) / static_cast<double>(truths);
  r.pfa = static_cast<double>(n_fp) / static_cast<double>(r.n_n);
  r.pa = n_tp + n_fp > 0 ? static_cast<double>(n_tp) / static_cast<double>(n_tp + n_fp) : 0.0;
  return r;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (n <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void McConfig::validate() const {
  params.validate();
  if (trials < 1) config_error("trials must be >= 1");
  if (snr_grid.empty() || pfa_grid.empty() || target_counts.empty() || detectors.empty()) {
    config_error("Monte Carlo grids must be non-empty");
  }
  for (double p : pfa_grid) {
    if (!(p > 0.0 && p < 1.0)) config_error("p_fa values must lie in (0, 1)");
  }
  for (int k : target_counts) {
    if (k < 0) config_error("target counts must be >= 0");
  }
  if (!(stationary_fraction_max >= 0.0 && stationary_fraction_max <= 1.0)) {
    config_error("stationary fraction must lie in [0, 1]");
  }
  settings.ct.validate();
  match.validate();
}

std::vector<McRow> monte_carlo(const McConfig& cfg) {
  cfg.validate();
  const RadarParams& params = cfg.params;
  const long cells = static_cast<long>(params.samples) * params.chirps;
  const std::size_t n_pfa = cfg.pfa_grid.size();
  const std::size_t n_det = cfg.detectors.size();
  const auto trials = static_cast<std::size_t>(cfg.trials);

  std::vector<DetectorSettings> settings(n_pfa, cfg.settings);
  for (std::size_t p = 0; p < n_pfa; ++p) {
    settings[p].ct.p_fa = cfg.pfa_grid[p];
    prepare_detectors(cfg.detectors, params.channels, settings[p]);
  }

  struct TrialResult {
    bool ok = false;
    double pd = 0.0;
    double pfa = 0.0;
    double pa = 0.0;
    double ms = 0.0;
  };

  std::vector<McRow> rows;
  for (int k : cfg.target_counts) {
    for (double snr : cfg.snr_grid) {
      // [p_fa][detector][trial]
      std::vector<TrialResult> results(n_pfa * n_det * trials);
      auto slot = [&](std::size_t p, std::size_t d, std::size_t t) -> TrialResult& {
        return results[(p * n_det + d) * trials + t];
      };

      // Warm-up so first-touch costs (plans, caches) stay out of the timings.
      {
        const Scenario sc =
            random_scenario(params, k, snr, cfg.stationary_fraction_max, cfg.base_seed);
        const RdStack stack = rd_transform(synthesize_cube(sc));
        for (std::size_t d = 0; d < n_det; ++d) {
          try {
            run_detector(cfg.detectors[d], stack, settings[0]);
          } catch (const Error& e) {
            if (!recoverable(e)) throw;
          }
        }
      }

      parallel_for(cfg.trials, cfg.threads, [&](int t) {
        const Scenario sc = random_scenario(params, k, snr, cfg.stationary_fraction_max,
                                            cfg.base_seed ^ static_cast<std::uint64_t>(t));
        const RdStack stack = rd_transform(synthesize_cube(sc));
        for (std::size_t p = 0; p < n_pfa; ++p) {
          for (std::size_t d = 0; d < n_det; ++d) {
            TrialResult& res = slot(p, d, static_cast<std::size_t>(t));
            try {
              const auto t0 = std::chrono::steady_clock::now();
              const DetectionSet dets = run_detector(cfg.detectors[d], stack, settings[p]);
              const auto t1 = std::chrono::steady_clock::now();
              const MatchCounts mc = match_detections(dets, sc.targets, params, cfg.match);
              const MetricsReport mr = metrics(mc.n_tp, mc.n_fp, k, cells);
              res.ok = true;
              res.pd = mr.pd.value_or(0.0);
              res.pfa = mr.pfa;
              res.pa = mr.pa;
              res.ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            } catch (const Error& e) {
              if (!recoverable(e)) throw;
            }
          }
        }
      });

      for (std::size_t p = 0; p < n_pfa; ++p) {
        for (std::size_t d = 0; d < n_det; ++d) {
          std::vector<double> pd, pfa, pa, ms;
          int errors = 0;
          for (std::size_t t = 0; t < trials; ++t) {
            const TrialResult& r = slot(p, d, t);
            if (!r.ok) {
              ++errors;
              continue;
            }
            pd.push_back(r.pd);
            pfa.push_back(r.pfa);
            pa.push_back(r.pa);
            ms.push_back(r.ms);
          }
          McRow row;
          row.detector = cfg.detectors[d];
          row.snr_db = snr;
          row.p_fa = cfg.pfa_grid[p];
          row.n_targets = k;
          row.trials = static_cast<int>(pd.size());
          row.n_errors = errors;
          const MeanSe s_pd = mean_se(pd);
          const MeanSe s_pfa = mean_se(pfa);
          const MeanSe s_pa = mean_se(pa);
          if (k > 0 && !pd.empty()) row.pd = s_pd.mean;
          row.pd_se = s_pd.se;
          row.pfa_emp = s_pfa.mean;
          row.pfa_se = s_pfa.se;
          row.pa = s_pa.mean;
          row.pa_se = s_pa.se;
          row.runtime_ms_mean = mean_se(ms).mean;
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

void NoiseEvalConfig::validate() const {
  params.validate();
  if (trials < 1) config_error("trials must be >= 1");
  if (snr_grid.empty()) config_error("SNR grid must be non-empty");
  if (n_targets < 0) config_error("target count must be >= 0");
  if (!(stationary_fraction_max >= 0.0 && stationary_fraction_max <= 1.0)) {
    config_error("stationary fraction must lie in [0, 1]");
  }
  trunc.validate();
}

std::vector<RmseReport> noise_rmse(const NoiseEvalConfig& cfg) {
  cfg.validate();
  const double cells = static_cast<double>(cfg.params.samples) * cfg.params.chirps;
  const int shape_L = cfg.params.channels;

  std::vector<RmseReport> out;
  for (double snr : cfg.snr_grid) {
    struct Sq {
      bool ok = false;
      double scale = 0.0;
      double mean = 0.0;
      double var = 0.0;
      double true_scale = 0.0;
    };
    std::vector<Sq> sq(static_cast<std::size_t>(cfg.trials));
    parallel_for(cfg.trials, cfg.threads, [&](int t) {
      const Scenario sc = random_scenario(cfg.params, cfg.n_targets, snr,
                                          cfg.stationary_fraction_max,
                                          cfg.seed ^ static_cast<std::uint64_t>(t));
      const NcaMap power = nca(rd_transform(synthesize_cube(sc)));
      Sq& s = sq[static_cast<std::size_t>(t)];
      try {
        const GammaNoiseModel m = estimate_noise(power, shape_L, cfg.trunc);
        const double theta = cells * sc.noise_var;
        const double mean = shape_L * theta;
        const double var = shape_L * theta * theta;
        const double var_hat = shape_L * m.theta * m.theta;
        s.ok = true;
        s.true_scale = theta;
        s.scale = (m.theta - theta) * (m.theta - theta);
        s.mean = (m.mu_z - mean) * (m.mu_z - mean);
        s.var = (var_hat - var) * (var_hat - var);
      } catch (const Error& e) {
        if (!recoverable(e)) throw;
      }
    });

    RmseReport r;
    r.snr_db = snr;
    double scale = 0.0, mean = 0.0, var = 0.0, truth = 0.0;
    for (const Sq& s : sq) {
      if (!s.ok) {
        ++r.n_errors;
        continue;
      }
      ++r.trials;
      scale += s.scale;
      mean += s.mean;
      var += s.var;
      truth += s.true_scale;
    }
    if (r.trials > 0) {
      const double n = r.trials;
      r.true_scale = truth / n;
      r.true_mean = shape_L * r.true_scale;
      r.true_var = shape_L * r.true_scale * r.true_scale;
      r.rmse_scale = std::sqrt(scale / n);
      r.rmse_mean = std::sqrt(mean / n);
      r.rmse_var = std::sqrt(var / n);
      r.rel_rmse_mean = r.true_mean > 0.0 ? r.rmse_mean / r.true_mean : 0.0;
    }
    out.push_back(r);
  }
  return out;
}

std::vector<std::pair<double, double>> qq_data(std::vector<double> samples,
                                               const GammaNoiseModel& model, int n_points) {
  if (samples.empty()) config_error("qq_data needs at least one sample");
  if (n_points < 1) config_error("qq_data needs n_points >= 1");
  if (!(model.theta > 0.0) || model.shape_L < 1) config_error("qq_data needs a valid model");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());

  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(n_points));
  for (int i = 1; i <= n_points; ++i) {
    const double p = (i - 0.5) / n_points;
    const double theoretical = model.theta * invert_gamma_cdf(model.shape_L, 1.0 - p);
    const double h = (n - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, samples.size() - 1);
    const double empirical = samples[lo] + (h - std::floor(h)) * (samples[hi] - samples[lo]);
    out.emplace_back(theoretical, empirical);
  }
  return out;
}

}  // namespace ctcfar
