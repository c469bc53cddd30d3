#include "ctcfar/commands.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "ctcfar/cube_io.hpp"
#include "ctcfar/spectrum.hpp"

namespace ctcfar {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

std::filesystem::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory " + dir + ": " + ec.message());
  return std::filesystem::path(dir);
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Parse: return 3;
    case ErrorKind::Degenerate: return 4;
    case ErrorKind::Numerical: return 5;
    case ErrorKind::Estimation: return 6;
    case ErrorKind::Io: return 7;
  }
  return 1;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

Scenario build_scenario(const RunConfig& cfg) {
  if (!cfg.explicit_targets) {
    return random_scenario(cfg.radar, cfg.n_targets, cfg.snr_db, cfg.stationary_fraction_max,
                           cfg.seed);
  }
  Scenario sc;
  sc.params = cfg.radar;
  sc.targets = cfg.targets;
  sc.seed = cfg.seed;
  const double signal = sc.targets.empty() ? kEmptySceneReferencePower : mean_signal_power(sc);
  sc.noise_var = signal / std::pow(10.0, cfg.snr_db / 10.0);
  return sc;
}

Scenario cmd_simulate(const RunConfig& cfg, const std::string& out_path, std::ostream& truth) {
  const Scenario sc = build_scenario(cfg);
  const DataCube cube = synthesize_cube(sc);
  write_cube_file(out_path, cube);
  truth << "range_m,velocity_mps,angle_rad,amplitude\n";
  for (const auto& t : sc.targets) {
    truth << format_double(t.range) << ',' << format_double(t.velocity) << ','
          << format_double(t.angle) << ',' << format_double(t.amplitude) << '\n';
  }
  return sc;
}

void write_detections_csv(std::ostream& out, DetectorTag tag, const DetectionSet& dets) {
  out << "detector,r_ind,v_ind,r_hat,v_hat,range_m,velocity_mps,power,iteration\n";
  for (const auto& d : dets.detections) {
    out << to_string(tag) << ',' << d.peak.r_ind << ',' << d.peak.v_ind << ','
        << format_double(d.peak.r_hat) << ',' << format_double(d.peak.v_hat) << ','
        << format_double(d.peak.range_m) << ',' << format_double(d.peak.velocity_mps) << ','
        << format_double(d.power) << ',' << d.iteration << '\n';
  }
}

void write_noise_model_csv(std::ostream& out, const DetectionSet& dets) {
  out << "L,mu_z,theta,T_hat,iterations,converged\n";
  if (const auto& m = dets.noise_model) {
    out << m->shape_L << ',' << format_double(m->mu_z) << ',' << format_double(m->theta) << ','
        << format_double(m->trunc_threshold) << ',' << m->iterations << ','
        << (m->converged ? "true" : "false") << '\n';
  }
}

DetectionSet cmd_detect(const std::string& cube_path, const RunConfig& cfg,
                        const std::string& out_dir, DetectOutputs* paths) {
  const DataCube cube = read_cube_file(cube_path);
  const RdStack stack = rd_transform(cube);
  const NcaMap power = nca(stack);
  if (power.maxCoeff() == 0.0) {
    throw Error(ErrorKind::Degenerate, "cube " + cube_path + " has an all-zero power map");
  }
  const DetectionSet dets = run_detector(cfg.detector, stack, power, cfg.settings);

  const auto dir = ensure_dir(out_dir);
  const auto det_path = dir / "detections.csv";
  const auto noise_path = dir / "noise_model.csv";
  {
    auto out = open_output(det_path);
    write_detections_csv(out, cfg.detector, dets);
    finish(out, det_path);
  }
  {
    auto out = open_output(noise_path);
    write_noise_model_csv(out, dets);
    finish(out, noise_path);
  }
  if (paths) *paths = {det_path.string(), noise_path.string()};
  return dets;
}

void write_montecarlo_csv(std::ostream& out, const std::vector<McRow>& rows) {
  out << "detector,snr_db,p_fa,n_targets,trials,pd,pd_se,pfa_emp,pa,runtime_ms_mean,"
         "pfa_se,pa_se,n_errors\n";
  for (const auto& r : rows) {
    out << to_string(r.detector) << ',' << format_double(r.snr_db) << ','
        << format_double(r.p_fa) << ',' << r.n_targets << ',' << r.trials << ',' << opt(r.pd)
        << ',' << format_double(r.pd_se) << ',' << format_double(r.pfa_emp) << ','
        << format_double(r.pa) << ',' << format_double(r.runtime_ms_mean) << ','
        << format_double(r.pfa_se) << ',' << format_double(r.pa_se) << ',' << r.n_errors
        << '\n';
  }
}

std::vector<McRow> cmd_montecarlo(const RunConfig& cfg, const std::string& out_dir) {
  const std::vector<McRow> rows = monte_carlo(cfg.mc);
  const auto path = ensure_dir(out_dir) / "montecarlo.csv";
  auto out = open_output(path);
  write_montecarlo_csv(out, rows);
  finish(out, path);
  return rows;
}

void write_rmse_csv(std::ostream& out, const std::vector<RmseReport>& rows) {
  out << "snr_db,trials,true_scale,true_mean,true_var,rmse_shape,rmse_scale,rmse_mean,"
         "rmse_var,rel_rmse_mean,n_errors\n";
  for (const auto& r : rows) {
    out << format_double(r.snr_db) << ',' << r.trials << ',' << format_double(r.true_scale)
        << ',' << format_double(r.true_mean) << ',' << format_double(r.true_var) << ','
        << format_double(r.rmse_shape) << ',' << format_double(r.rmse_scale) << ','
        << format_double(r.rmse_mean) << ',' << format_double(r.rmse_var) << ','
        << format_double(r.rel_rmse_mean) << ',' << r.n_errors << '\n';
  }
}

void write_qq_csv(std::ostream& out, const std::vector<std::pair<double, double>>& pairs) {
  out << "theoretical_quantile,empirical_quantile\n";
  for (const auto& [t, e] : pairs) out << format_double(t) << ',' << format_double(e) << '\n';
}

void cmd_noise_eval(const RunConfig& cfg, const std::string& out_dir) {
  const auto rows = noise_rmse(cfg.noise);

  const Scenario sc = random_scenario(cfg.radar, cfg.noise.n_targets, cfg.qq_snr_db,
                                      cfg.stationary_fraction_max, cfg.noise.seed);
  const NcaMap power = nca(rd_transform(synthesize_cube(sc)));
  const GammaNoiseModel model = estimate_noise(power, cfg.radar.channels, cfg.noise.trunc);
  const std::vector<double> samples(power.data(), power.data() + power.size());
  const auto pairs = qq_data(samples, model, cfg.qq_points);

  const auto dir = ensure_dir(out_dir);
  {
    const auto path = dir / "noise_rmse.csv";
    auto out = open_output(path);
    write_rmse_csv(out, rows);
    finish(out, path);
  }
  {
    const auto path = dir / "noise_qq.csv";
    auto out = open_output(path);
    write_qq_csv(out, pairs);
    finish(out, path);
  }
}

}  // namespace ctcfar
