#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace ctcfar {

using Complex = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;

/// FMCW frame geometry and waveform. Units are SI throughout.
struct RadarParams {
  double f_c = 77e9;            // start frequency [Hz]
  double slope = 120.023e12;    // sweep slope [Hz/s]
  double bandwidth = 3.413e9;   // sweep bandwidth [Hz]
  double f_s = 9e6;             // ADC rate [samples/s]
  int samples = 256;            // N, samples per chirp
  int chirps = 128;             // M, chirps per frame
  double t_chirp = 3.413e9 / 120.023e12;  // T_c [s]
  double t_pri = 40e-6;         // chirp repetition interval [s]
  int channels = 4;             // L
  double spacing = 0.0;         // element spacing [m]; 0 selects lambda/2
  double lambda = kSpeedOfLight / 77e9;

  /// Simulation defaults (77 GHz, 120.023 MHz/us, 3.413 GHz, 9 Msps,
  /// 256 x 128, 4 channels at half-wavelength spacing).
  static RadarParams defaults();

  /// Throws ErrorKind::Config when an invariant is broken.
  void validate() const;

  double element_spacing() const { return spacing > 0.0 ? spacing : lambda / 2.0; }
  double range_per_bin() const { return kSpeedOfLight * f_s / (2.0 * slope * samples); }
  double velocity_per_bin() const { return lambda / (2.0 * chirps * t_pri); }
  /// Upper range bound for simulated targets (half the complex-sampling span).
  double max_range() const { return f_s * kSpeedOfLight / (2.0 * slope) * 0.5; }
  double max_velocity() const { return lambda / (4.0 * t_pri); }
};

struct TargetTruth {
  double range = 0.0;      // m
  double velocity = 0.0;   // m/s, signed
  double angle = 0.0;      // rad
  double amplitude = 1.0;  // complex-envelope magnitude
};

struct Scenario {
  RadarParams params;
  std::vector<TargetTruth> targets;
  double noise_var = 0.0;  // sigma^2 per complex sample
  std::uint64_t seed = 0;
};

/// Complex baseband samples; channels[l](n, m) is sample n of chirp m.
struct DataCube {
  RadarParams params;
  std::vector<Eigen::MatrixXcd> channels;
};

/// Fractional (range, Doppler) bin where a target's spectral peak sits.
/// Doppler is reduced to [0, M).
struct BinPosition {
  double range_bin = 0.0;
  double doppler_bin = 0.0;
};

BinPosition truth_bins(const TargetTruth& target, const RadarParams& params);

/// Signal power used as the 0 dB reference when a scene has no targets.
inline constexpr double kEmptySceneReferencePower = 1.0;

/// Minimum Chebyshev distance, in bins, between the peaks of two targets
/// drawn by random_scenario.
inline constexpr int kMinTargetSeparationBins = 3;

DataCube synthesize_cube(const Scenario& scenario);

Scenario random_scenario(const RadarParams& params, int n_targets, double snr_db,
                         double stationary_fraction_max, std::uint64_t seed);

/// Mean |s|^2 over the noiseless cube of a scenario (noise_var ignored).
double mean_signal_power(const Scenario& scenario);

}  // namespace ctcfar
