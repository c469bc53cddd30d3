#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ctcfar/config.hpp"
#include "ctcfar/error.hpp"

namespace ctcfar {

/// Process exit status for each error kind; 0 is success.
int exit_code(ErrorKind kind);

inline constexpr int kExitUsage = 1;

/// Shortest round-trip decimal text of v ("." separator, locale independent).
std::string format_double(double v);

/// Scenario described by the config: the explicit target list when given,
/// otherwise a random draw. Noise variance follows snr_db either way.
Scenario build_scenario(const RunConfig& cfg);

/// Writes an RDC1 cube to out_path and the truth table CSV to `truth`.
Scenario cmd_simulate(const RunConfig& cfg, const std::string& out_path, std::ostream& truth);

struct DetectOutputs {
  std::string detections_csv;
  std::string noise_csv;
};

/// Runs cfg.detector on the cube and writes detections.csv and
/// noise_model.csv into out_dir.
DetectionSet cmd_detect(const std::string& cube_path, const RunConfig& cfg,
                        const std::string& out_dir, DetectOutputs* paths = nullptr);

void write_detections_csv(std::ostream& out, DetectorTag tag, const DetectionSet& dets);
void write_noise_model_csv(std::ostream& out, const DetectionSet& dets);

/// Writes montecarlo.csv into out_dir.
std::vector<McRow> cmd_montecarlo(const RunConfig& cfg, const std::string& out_dir);
void write_montecarlo_csv(std::ostream& out, const std::vector<McRow>& rows);

/// Writes noise_rmse.csv and noise_qq.csv into out_dir.
void cmd_noise_eval(const RunConfig& cfg, const std::string& out_dir);
void write_rmse_csv(std::ostream& out, const std::vector<RmseReport>& rows);
void write_qq_csv(std::ostream& out, const std::vector<std::pair<double, double>>& pairs);

}  // namespace ctcfar
