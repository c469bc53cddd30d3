#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ctcfar/eval.hpp"

namespace ctcfar {

/// Everything the command-line drivers need. Loaded from INI-style text with
/// sections [radar] [scenario] [detector] [window] [montecarlo] [match]
/// [noise_eval] [output]; unknown sections or keys are rejected.
struct RunConfig {
  RadarParams radar = RadarParams::defaults();

  // [scenario]
  int n_targets = 20;
  double snr_db = 0.0;
  double stationary_fraction_max = 0.5;
  std::uint64_t seed = 1;
  std::vector<TargetTruth> targets;  // explicit list; replaces the random draw when set
  bool explicit_targets = false;

  // [detector] and [window]
  DetectorTag detector = DetectorTag::CT;
  DetectorSettings settings;

  // [montecarlo]
  McConfig mc;

  // [match]
  MatchConfig match;

  // [noise_eval]
  NoiseEvalConfig noise;
  int qq_points = 100;
  double qq_snr_db = 0.0;

  // [output]
  std::string out_dir = ".";

  /// Copies the shared radar / detector / match settings into mc and noise
  /// and validates the result.
  void finalize();
};

/// Applies the keys in `text` on top of `cfg`. `source` names the input in
/// error messages.
void apply_config(RunConfig& cfg, std::istream& text, const std::string& source);
void apply_config_file(RunConfig& cfg, const std::string& path);

/// Locates `<name>.cfg` in `dirs` (first match wins).
std::string find_preset(const std::string& name, const std::vector<std::string>& dirs);

/// Parses "range:velocity:angle[:amplitude]" entries separated by ';'.
std::vector<TargetTruth> parse_targets(const std::string& text);

}  // namespace ctcfar
