// ctcfar: simulate FMCW frames, run CFAR detectors, and drive Monte Carlo sweeps.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctcfar/commands.hpp"

#ifndef CTCFAR_PRESET_DIR
#define CTCFAR_PRESET_DIR "presets"
#endif

namespace {

struct CommonOptions {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string detector;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_detector) {
  cmd->add_option("--config", o.config, "INI configuration file (applied after --preset)");
  cmd->add_option("--preset", o.preset, "named preset from the presets directory");
  cmd->add_option("--seed", o.seed, "overrides every seed in the configuration");
  cmd->add_option("--out", o.out, "output file (simulate) or directory");
  if (with_detector) {
    cmd->add_option("--detector", o.detector, "detector")
        ->check(CLI::IsMember({"ct", "ca", "cago", "caso", "os", "tm", "ts"}));
  }
}

std::vector<std::string> preset_dirs() {
  std::vector<std::string> dirs;
  if (const char* env = std::getenv("CTCFAR_PRESET_DIR")) dirs.emplace_back(env);
  dirs.emplace_back(CTCFAR_PRESET_DIR);
  dirs.emplace_back("presets");
  return dirs;
}

ctcfar::RunConfig load(const CommonOptions& o) {
  ctcfar::RunConfig cfg;
  if (!o.preset.empty()) {
    ctcfar::apply_config_file(cfg, ctcfar::find_preset(o.preset, preset_dirs()));
  }
  if (!o.config.empty()) ctcfar::apply_config_file(cfg, o.config);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.mc.base_seed = *o.seed;
    cfg.noise.seed = *o.seed;
  }
  if (!o.detector.empty()) cfg.detector = *ctcfar::detector_from_string(o.detector);
  cfg.finalize();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CT-CFAR radar detection toolkit"};
  app.require_subcommand(1);

  CommonOptions sim_opts, det_opts, mc_opts, noise_opts;
  std::string cube_path;

  auto* sim = app.add_subcommand("simulate", "write an RDC1 cube; truth table CSV on stdout");
  add_common(sim, sim_opts, false);

  auto* det = app.add_subcommand("detect", "run a detector on an RDC1 cube");
  add_common(det, det_opts, true);
  det->add_option("cube", cube_path, "RDC1 cube file")->required();

  auto* mc = app.add_subcommand("montecarlo", "Monte Carlo detection sweep");
  add_common(mc, mc_opts, false);

  auto* noise = app.add_subcommand("noise_eval", "noise-model RMSE and Q-Q data");
  add_common(noise, noise_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ctcfar::kExitUsage;
  }

  try {
    if (sim->parsed()) {
      const auto cfg = load(sim_opts);
      const std::string out = sim_opts.out.empty() ? cfg.out_dir + "/cube.rdc" : sim_opts.out;
      ctcfar::cmd_simulate(cfg, out, std::cout);
    } else if (det->parsed()) {
      const auto cfg = load(det_opts);
      ctcfar::DetectOutputs paths;
      const auto dets = ctcfar::cmd_detect(cube_path, cfg,
                                           det_opts.out.empty() ? cfg.out_dir : det_opts.out,
                                           &paths);
      std::cerr << dets.detections.size() << " detections (" << ctcfar::to_string(cfg.detector)
                << ", stop: " << ctcfar::to_string(dets.terminated_by) << ") -> "
                << paths.detections_csv << '\n';
    } else if (mc->parsed()) {
      const auto cfg = load(mc_opts);
      const auto rows = ctcfar::cmd_montecarlo(cfg, mc_opts.out.empty() ? cfg.out_dir : mc_opts.out);
      std::cerr << rows.size() << " Monte Carlo rows written\n";
    } else if (noise->parsed()) {
      const auto cfg = load(noise_opts);
      ctcfar::cmd_noise_eval(cfg, noise_opts.out.empty() ? cfg.out_dir : noise_opts.out);
    }
  } catch (const ctcfar::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ctcfar::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ctcfar::kExitUsage;
  }
  return 0;
}
