#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ctcfar/baselines.hpp"
#include "ctcfar/cube_io.hpp"
#include "ctcfar/detector.hpp"
#include "ctcfar/error.hpp"
#include "ctcfar/eval.hpp"
#include "ctcfar/noise_est.hpp"
#include "ctcfar/sim.hpp"
#include "ctcfar/spectrum.hpp"

namespace py = pybind11;
using namespace ctcfar;

namespace {

using CArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

// (L, N, M) complex array <-> per-channel N x M matrices
CArray to_array(const std::vector<Eigen::MatrixXcd>& chans) {
  const auto L = static_cast<py::ssize_t>(chans.size());
  const py::ssize_t N = L ? chans[0].rows() : 0, M = L ? chans[0].cols() : 0;
  CArray out({L, N, M});
  auto v = out.mutable_unchecked<3>();
  for (py::ssize_t l = 0; l < L; ++l)
    for (py::ssize_t n = 0; n < N; ++n)
      for (py::ssize_t m = 0; m < M; ++m) v(l, n, m) = chans[l](n, m);
  return out;
}

std::vector<Eigen::MatrixXcd> from_array(const CArray& a, const RadarParams& p) {
  if (a.ndim() != 3) throw Error(ErrorKind::Config, "expected an (L, N, M) array");
  auto v = a.unchecked<3>();
  if (v.shape(0) != p.channels || v.shape(1) != p.samples || v.shape(2) != p.chirps)
    throw Error(ErrorKind::Config, "array shape does not match params (channels, samples, chirps)");
  std::vector<Eigen::MatrixXcd> chans(v.shape(0), Eigen::MatrixXcd(v.shape(1), v.shape(2)));
  for (py::ssize_t l = 0; l < v.shape(0); ++l)
    for (py::ssize_t n = 0; n < v.shape(1); ++n)
      for (py::ssize_t m = 0; m < v.shape(2); ++m) chans[l](n, m) = v(l, n, m);
  return chans;
}

RdStack stack_of(const CArray& rd, const RadarParams& p) {
  RdStack s;
  s.params = p;
  s.channels = from_array(rd, p);
  return s;
}

DetectorTag tag_of(const std::string& name) {
  auto t = detector_from_string(name);
  if (!t) throw Error(ErrorKind::Config, "unknown detector: " + name);
  return *t;
}

py::dict detections_dict(const DetectionSet& d) {
  std::vector<int> r, v, it;
  std::vector<double> rh, vh, rm, vm, pw;
  for (const auto& x : d.detections) {
    r.push_back(x.peak.r_ind);
    v.push_back(x.peak.v_ind);
    rh.push_back(x.peak.r_hat);
    vh.push_back(x.peak.v_hat);
    rm.push_back(x.peak.range_m);
    vm.push_back(x.peak.velocity_mps);
    pw.push_back(x.power);
    it.push_back(x.iteration);
  }
  py::dict out;
  out["r_ind"] = py::array(py::cast(r));
  out["v_ind"] = py::array(py::cast(v));
  out["r_hat"] = py::array(py::cast(rh));
  out["v_hat"] = py::array(py::cast(vh));
  out["range_m"] = py::array(py::cast(rm));
  out["velocity_mps"] = py::array(py::cast(vm));
  out["power"] = py::array(py::cast(pw));
  out["iteration"] = py::array(py::cast(it));
  out["terminated_by"] = std::string(to_string(d.terminated_by));
  out["noise_model"] = d.noise_model ? py::cast(*d.noise_model) : py::none();
  return out;
}

}  // namespace

PYBIND11_MODULE(_ctcfar, m) {
  m.doc() = "CT-CFAR detection, FMCW simulation and baseline CFAR detectors.";

  static py::exception<Error> base(m, "CtcfarError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // config errors map onto ValueError, everything else keeps the library type
      if (e.kind() == ErrorKind::Config)
        PyErr_SetString(PyExc_ValueError, e.what());
      else
        py::set_error(base, e.what());
    }
  });

  py::class_<RadarParams>(m, "RadarParams")
      .def(py::init([] { return RadarParams::defaults(); }))
      .def_static("defaults", &RadarParams::defaults)
      .def_readwrite("f_c", &RadarParams::f_c)
      .def_readwrite("slope", &RadarParams::slope)
      .def_readwrite("bandwidth", &RadarParams::bandwidth)
      .def_readwrite("f_s", &RadarParams::f_s)
      .def_readwrite("samples", &RadarParams::samples)
      .def_readwrite("chirps", &RadarParams::chirps)
      .def_readwrite("t_chirp", &RadarParams::t_chirp)
      .def_readwrite("t_pri", &RadarParams::t_pri)
      .def_readwrite("channels", &RadarParams::channels)
      .def_readwrite("spacing", &RadarParams::spacing)
      .def_readwrite("lambda_", &RadarParams::lambda)
      .def("validate", &RadarParams::validate)
      .def("range_per_bin", &RadarParams::range_per_bin)
      .def("velocity_per_bin", &RadarParams::velocity_per_bin)
      .def("max_range", &RadarParams::max_range)
      .def("max_velocity", &RadarParams::max_velocity);

  py::class_<TargetTruth>(m, "Target")
      .def(py::init([](double range, double velocity, double angle, double amplitude) {
             return TargetTruth{range, velocity, angle, amplitude};
           }),
           py::arg("range"), py::arg("velocity") = 0.0, py::arg("angle") = 0.0,
           py::arg("amplitude") = 1.0)
      .def_readwrite("range", &TargetTruth::range)
      .def_readwrite("velocity", &TargetTruth::velocity)
      .def_readwrite("angle", &TargetTruth::angle)
      .def_readwrite("amplitude", &TargetTruth::amplitude)
      .def("__repr__", [](const TargetTruth& t) {
        return "Target(range=" + std::to_string(t.range) + ", velocity=" + std::to_string(t.velocity) +
               ", angle=" + std::to_string(t.angle) + ")";
      });

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("params", &Scenario::params)
      .def_readwrite("targets", &Scenario::targets)
      .def_readwrite("noise_var", &Scenario::noise_var)
      .def_readwrite("seed", &Scenario::seed);

  py::class_<GammaNoiseModel>(m, "GammaNoiseModel")
      .def_readonly("shape_L", &GammaNoiseModel::shape_L)
      .def_readonly("mu_z", &GammaNoiseModel::mu_z)
      .def_readonly("theta", &GammaNoiseModel::theta)
      .def_readonly("trunc_threshold", &GammaNoiseModel::trunc_threshold)
      .def_readonly("u_q", &GammaNoiseModel::u_q)
      .def_readonly("g_u", &GammaNoiseModel::g_u)
      .def_readonly("iterations", &GammaNoiseModel::iterations)
      .def_readonly("converged", &GammaNoiseModel::converged);

  m.def("random_scenario", &random_scenario, py::arg("params"), py::arg("n_targets"),
        py::arg("snr_db"), py::arg("stationary_fraction_max") = 0.5, py::arg("seed") = 1);

  m.def(
      "simulate", [](const Scenario& sc) { return to_array(synthesize_cube(sc).channels); },
      py::arg("scenario"), "Raw (L, N, M) beat-signal cube of a scenario.");

  m.def(
      "truth_bins",
      [](const TargetTruth& t, const RadarParams& p) {
        const auto b = truth_bins(t, p);
        return py::make_tuple(b.range_bin, b.doppler_bin);
      },
      py::arg("target"), py::arg("params"));

  m.def(
      "rd_transform",
      [](const CArray& cube, const RadarParams& p) {
        DataCube c;
        c.params = p;
        c.channels = from_array(cube, p);
        return to_array(rd_transform(c).channels);
      },
      py::arg("cube"), py::arg("params"));

  m.def(
      "nca", [](const CArray& rd, const RadarParams& p) -> NcaMap { return nca(stack_of(rd, p)); },
      py::arg("rd"), py::arg("params"));

  m.def(
      "estimate_noise",
      [](const NcaMap& map, int shape_L, double p_fa_internal, double tol, int max_iter) {
        TruncConfig cfg;
        cfg.p_fa_internal = p_fa_internal;
        cfg.tol = tol;
        cfg.max_iter = max_iter;
        return estimate_noise(map, shape_L, cfg);
      },
      py::arg("map"), py::arg("shape_L"), py::arg("p_fa_internal") = 1e-3, py::arg("tol") = 1e-5,
      py::arg("max_iter") = 100);

  m.def("invert_gamma_cdf", &invert_gamma_cdf, py::arg("shape_L"), py::arg("p_fa"));
  m.def("truncation_gain", &truncation_gain, py::arg("shape_L"), py::arg("u_q"));
  m.def("alpha_from_pfa", &alpha_from_pfa, py::arg("shape_L"), py::arg("p_fa"));

  m.def(
      "detect",
      [](const CArray& rd, const RadarParams& p, const std::string& detector, double p_fa,
         int slow_half_window, int patch_half_width, int k_max) {
        DetectorSettings s;
        s.ct.p_fa = p_fa;
        s.ct.slow_half_window = slow_half_window;
        s.ct.patch_half_width = patch_half_width;
        s.ct.k_max = k_max;
        return detections_dict(run_detector(tag_of(detector), stack_of(rd, p), s));
      },
      py::arg("rd"), py::arg("params"), py::arg("detector") = "ct", py::arg("p_fa") = 1e-3,
      py::arg("slow_half_window") = 2, py::arg("patch_half_width") = 5, py::arg("k_max") = 64,
      "Run one detector on a range-Doppler stack; returns a dict of per-detection arrays.");

  m.def(
      "window_statistic",
      [](const NcaMap& map, const std::string& kind, int train_fast, int train_slow, int guard,
         int os_rank, int tm_trim) -> NcaMap {
        auto k = baseline_from_string(kind);
        if (!k) throw Error(ErrorKind::Config, "unknown baseline: " + kind);
        WindowConfig w{train_fast, train_slow, guard, os_rank, tm_trim};
        return window_statistic(map, *k, w);
      },
      py::arg("map"), py::arg("kind"), py::arg("train_fast") = 10, py::arg("train_slow") = 6,
      py::arg("guard") = 5, py::arg("os_rank") = 0, py::arg("tm_trim") = 3);

  m.def("detectors", [] {
    std::vector<std::string> out;
    for (auto t : all_detectors()) out.emplace_back(to_string(t));
    return out;
  });

  m.def(
      "monte_carlo",
      [](const std::vector<std::string>& detectors, const std::vector<double>& snr_grid,
         const std::vector<int>& target_counts, double p_fa, int trials, std::uint64_t seed,
         int threads) {
        McConfig cfg;
        cfg.detectors.clear();
        for (const auto& d : detectors) cfg.detectors.push_back(tag_of(d));
        cfg.snr_grid = snr_grid;
        cfg.target_counts = target_counts;
        cfg.pfa_grid = {p_fa};
        cfg.trials = trials;
        cfg.base_seed = seed;
        cfg.threads = threads;
        std::vector<py::dict> rows;
        for (const auto& r : monte_carlo(cfg)) {
          py::dict d;
          d["detector"] = std::string(to_string(r.detector));
          d["snr_db"] = r.snr_db;
          d["p_fa"] = r.p_fa;
          d["n_targets"] = r.n_targets;
          d["trials"] = r.trials;
          d["pd"] = r.pd ? py::cast(*r.pd) : py::none();
          d["pd_se"] = r.pd_se;
          d["pfa_emp"] = r.pfa_emp;
          d["pfa_se"] = r.pfa_se;
          d["pa"] = r.pa;
          d["pa_se"] = r.pa_se;
          d["runtime_ms_mean"] = r.runtime_ms_mean;
          d["n_errors"] = r.n_errors;
          rows.push_back(std::move(d));
        }
        return rows;
      },
      py::arg("detectors"), py::arg("snr_grid"), py::arg("target_counts") = std::vector<int>{20},
      py::arg("p_fa") = 1e-3, py::arg("trials") = 100, py::arg("seed") = 1, py::arg("threads") = 0);

  m.def(
      "write_cube",
      [](const std::string& path, const CArray& cube, const RadarParams& p) {
        DataCube c;
        c.params = p;
        c.channels = from_array(cube, p);
        write_cube_file(path, c);
      },
      py::arg("path"), py::arg("cube"), py::arg("params"));

  m.def(
      "read_cube",
      [](const std::string& path) {
        const auto c = read_cube_file(path);
        return py::make_tuple(to_array(c.channels), c.params);
      },
      py::arg("path"));
}
