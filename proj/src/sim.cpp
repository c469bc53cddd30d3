#include "ctcfar/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "ctcfar/error.hpp"

namespace ctcfar {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

void append_words(std::vector<std::uint32_t>& words, std::uint64_t v) {
  words.push_back(static_cast<std::uint32_t>(v));
  words.push_back(static_cast<std::uint32_t>(v >> 32));
}

// The initial phase depends only on the seed and the target itself, so adding
// or removing other targets leaves it unchanged.
double target_phase(std::uint64_t seed, const TargetTruth& t) {
  std::vector<std::uint32_t> words;
  append_words(words, seed);
  for (double v : {t.range, t.velocity, t.angle, t.amplitude}) {
    append_words(words, std::bit_cast<std::uint64_t>(v));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::mt19937_64 rng(seq);
  return std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
}

std::mt19937_64 noise_rng(std::uint64_t seed) {
  std::vector<std::uint32_t> words;
  append_words(words, seed);
  words.push_back(0x6e6f6973u);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

void validate_target(const TargetTruth& t, const RadarParams& p) {
  if (!(t.range > 0.0 && t.range < p.max_range())) {
    config_error("target range " + std::to_string(t.range) + " m outside (0, " +
                 std::to_string(p.max_range()) + ")");
  }
  if (!(std::abs(t.velocity) < p.max_velocity())) {
    config_error("target velocity " + std::to_string(t.velocity) + " m/s exceeds +/-" +
                 std::to_string(p.max_velocity()));
  }
  if (!(std::abs(t.angle) < std::numbers::pi / 2.0)) {
    config_error("target angle must lie in (-pi/2, pi/2)");
  }
  if (!(t.amplitude >= 0.0 && std::isfinite(t.amplitude))) {
    config_error("target amplitude must be finite and non-negative");
  }
}

int circular_distance(int a, int b, int period) {
  int d = std::abs(a - b) % period;
  return std::min(d, period - d);
}

}  // namespace

RadarParams RadarParams::defaults() {
  RadarParams p;
  p.f_c = 77e9;
  p.slope = 120.023e12;
  p.bandwidth = 3.413e9;
  p.f_s = 9e6;
  p.samples = 256;
  p.chirps = 128;
  p.t_chirp = p.bandwidth / p.slope;
  p.t_pri = 40e-6;
  p.channels = 4;
  p.lambda = kSpeedOfLight / p.f_c;
  p.spacing = p.lambda / 2.0;
  return p;
}

void RadarParams::validate() const {
  if (samples < 4) config_error("samples per chirp must be >= 4");
  if (chirps < 4) config_error("chirps per frame must be >= 4");
  if (channels < 1) config_error("channel count must be >= 1");
  if (!(f_c > 0.0 && slope > 0.0 && f_s > 0.0 && t_chirp > 0.0 && bandwidth > 0.0)) {
    config_error("f_c, slope, bandwidth, f_s and t_chirp must be positive");
  }
  if (!rel_close(bandwidth, slope * t_chirp, 1e-6)) {
    config_error("bandwidth must equal slope * t_chirp (1e-6 relative)");
  }
  if (!rel_close(lambda, kSpeedOfLight / f_c, 1e-9)) {
    config_error("lambda must equal c / f_c (1e-9 relative)");
  }
  if (!(t_pri >= t_chirp)) config_error("t_pri must be >= t_chirp");
  if (spacing < 0.0) config_error("element spacing must be non-negative");
}

BinPosition truth_bins(const TargetTruth& target, const RadarParams& p) {
  const double f_b = 2.0 * p.slope * target.range / kSpeedOfLight;
  const double f_d = 2.0 * target.velocity * p.f_c / kSpeedOfLight;
  BinPosition pos;
  pos.range_bin = (f_b + f_d) * p.samples / p.f_s;
  double v = f_d * p.t_pri * p.chirps;
  v = std::fmod(v, static_cast<double>(p.chirps));
  if (v < 0.0) v += p.chirps;
  pos.doppler_bin = v;
  return pos;
}

DataCube synthesize_cube(const Scenario& scenario) {
  const RadarParams& p = scenario.params;
  p.validate();
  if (!(scenario.noise_var >= 0.0) || !std::isfinite(scenario.noise_var)) {
    config_error("noise variance must be finite and non-negative");
  }
  for (const auto& t : scenario.targets) validate_target(t, p);

  const int n_samp = p.samples;
  const int n_chirp = p.chirps;
  DataCube cube;
  cube.params = p;
  cube.channels.assign(p.channels, Eigen::MatrixXcd::Zero(n_samp, n_chirp));

  Eigen::VectorXcd fast(n_samp);
  Eigen::VectorXcd slow(n_chirp);
  for (const auto& t : scenario.targets) {
    const double f_b = 2.0 * p.slope * t.range / kSpeedOfLight;
    const double f_d = 2.0 * t.velocity * p.f_c / kSpeedOfLight;
    // Fast time is indexed by the sample period 1/f_s.
    for (int n = 0; n < n_samp; ++n) {
      fast[n] = std::polar(1.0, kTwoPi * (f_b + f_d) * n / p.f_s);
    }
    for (int m = 0; m < n_chirp; ++m) {
      slow[m] = std::polar(1.0, kTwoPi * f_d * m * p.t_pri);
    }
    const Complex envelope = std::polar(t.amplitude, target_phase(scenario.seed, t));
    const double steer = kTwoPi * p.element_spacing() * std::sin(t.angle) / p.lambda;
    for (int l = 0; l < p.channels; ++l) {
      const Complex gain = envelope * std::polar(1.0, -steer * l);
      cube.channels[l].noalias() += (gain * fast) * slow.transpose();
    }
  }

  if (scenario.noise_var > 0.0) {
    auto rng = noise_rng(scenario.seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(scenario.noise_var / 2.0));
    for (auto& ch : cube.channels) {
      for (Eigen::Index i = 0; i < ch.size(); ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        ch.data()[i] += Complex(re, im);
      }
    }
  }
  return cube;
}

double mean_signal_power(const Scenario& scenario) {
  Scenario clean = scenario;
  clean.noise_var = 0.0;
  const DataCube cube = synthesize_cube(clean);
  double total = 0.0;
  Eigen::Index count = 0;
  for (const auto& ch : cube.channels) {
    total += ch.squaredNorm();
    count += ch.size();
  }
  return total / static_cast<double>(count);
}

Scenario random_scenario(const RadarParams& params, int n_targets, double snr_db,
                         double stationary_fraction_max, std::uint64_t seed) {
  params.validate();
  if (n_targets < 0) config_error("n_targets must be >= 0");
  if (!(stationary_fraction_max >= 0.0 && stationary_fraction_max <= 1.0)) {
    config_error("stationary_fraction_max must lie in [0, 1]");
  }
  if (static_cast<long long>(n_targets) >
      static_cast<long long>(params.samples) * params.chirps) {
    config_error("n_targets exceeds the number of distinct range-Doppler bins");
  }

  std::vector<std::uint32_t> words;
  append_words(words, seed);
  words.push_back(0x7363656eu);
  std::seed_seq seq(words.begin(), words.end());
  std::mt19937_64 rng(seq);

  const double r_max = params.max_range();
  const double v_max = params.max_velocity();
  // Keep clear of the DC bin and the open interval ends.
  std::uniform_real_distribution<double> range_dist(params.range_per_bin(),
                                                    r_max - params.range_per_bin());
  std::uniform_real_distribution<double> vel_dist(-v_max, v_max);
  std::uniform_real_distribution<double> angle_dist(-std::numbers::pi / 2.0,
                                                    std::numbers::pi / 2.0);

  const int max_stationary =
      static_cast<int>(std::floor(stationary_fraction_max * n_targets));
  const int n_stationary = std::uniform_int_distribution<int>(0, max_stationary)(rng);

  Scenario sc;
  sc.params = params;
  sc.seed = seed;
  std::vector<std::pair<int, int>> occupied;
  constexpr int kMaxAttempts = 10000;
  for (int k = 0; k < n_targets; ++k) {
    const bool stationary = k < n_stationary;
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      TargetTruth t;
      t.range = range_dist(rng);
      t.velocity = stationary ? 0.0 : vel_dist(rng);
      do {
        t.angle = angle_dist(rng);
      } while (std::abs(t.angle) >= std::numbers::pi / 2.0);
      if (std::abs(t.velocity) >= v_max) continue;
      const BinPosition pos = truth_bins(t, params);
      const int rb = static_cast<int>(std::lround(pos.range_bin)) % params.samples;
      const int vb = static_cast<int>(std::lround(pos.doppler_bin)) % params.chirps;
      const bool clash = std::any_of(occupied.begin(), occupied.end(), [&](const auto& o) {
        return circular_distance(o.first, rb, params.samples) < kMinTargetSeparationBins &&
               circular_distance(o.second, vb, params.chirps) < kMinTargetSeparationBins;
      });
      if (clash) continue;
      occupied.emplace_back(rb, vb);
      sc.targets.push_back(t);
      placed = true;
    }
    if (!placed) {
      config_error("could not place " + std::to_string(n_targets) +
                   " separated targets in the range-Doppler grid");
    }
  }
  // Stationary targets were drawn first; shuffle so their position in the list
  // carries no information.
  std::shuffle(sc.targets.begin(), sc.targets.end(), rng);

  const double snr_lin = std::pow(10.0, snr_db / 10.0);
  const double signal =
      sc.targets.empty() ? kEmptySceneReferencePower : mean_signal_power(sc);
  sc.noise_var = signal / snr_lin;
  return sc;
}

}  // namespace ctcfar
