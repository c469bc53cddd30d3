#include "ctcfar/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ctcfar/error.hpp"

namespace ctcfar {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  T value{};
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || s.empty()) {
    config_error("bad value '" + s + "' for " + key);
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& raw, const std::string& key) {
  std::vector<T> out;
  for (const auto& item : split(raw, ',')) out.push_back(parse_number<T>(item, key));
  if (out.empty()) config_error("empty list for " + key);
  return out;
}

DetectorTag parse_detector(const std::string& raw) {
  if (auto t = detector_from_string(trim(raw))) return *t;
  config_error("unknown detector '" + trim(raw) + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

struct Flags {
  bool t_chirp = false;
  bool bandwidth = false;
};

std::map<std::string, Setter> make_setters(Flags& flags) {
  std::map<std::string, Setter> m;
  auto num = [](auto member) {
    return [member](RunConfig& c, const std::string& v, const std::string& k) {
      using T = std::remove_reference_t<decltype(member(c))>;
      member(c) = parse_number<T>(v, k);
    };
  };

  // radar
  m["radar.f_c"] = num([](RunConfig& c) -> double& { return c.radar.f_c; });
  m["radar.slope"] = num([](RunConfig& c) -> double& { return c.radar.slope; });
  m["radar.bandwidth"] = [&flags](RunConfig& c, const std::string& v, const std::string& k) {
    c.radar.bandwidth = parse_number<double>(v, k);
    flags.bandwidth = true;
  };
  m["radar.f_s"] = num([](RunConfig& c) -> double& { return c.radar.f_s; });
  m["radar.samples"] = num([](RunConfig& c) -> int& { return c.radar.samples; });
  m["radar.chirps"] = num([](RunConfig& c) -> int& { return c.radar.chirps; });
  m["radar.t_chirp"] = [&flags](RunConfig& c, const std::string& v, const std::string& k) {
    c.radar.t_chirp = parse_number<double>(v, k);
    flags.t_chirp = true;
  };
  m["radar.t_pri"] = num([](RunConfig& c) -> double& { return c.radar.t_pri; });
  m["radar.channels"] = num([](RunConfig& c) -> int& { return c.radar.channels; });
  m["radar.spacing"] = num([](RunConfig& c) -> double& { return c.radar.spacing; });

  // scenario
  m["scenario.n_targets"] = num([](RunConfig& c) -> int& { return c.n_targets; });
  m["scenario.snr_db"] = num([](RunConfig& c) -> double& { return c.snr_db; });
  m["scenario.stationary_fraction_max"] =
      num([](RunConfig& c) -> double& { return c.stationary_fraction_max; });
  m["scenario.seed"] = num([](RunConfig& c) -> std::uint64_t& { return c.seed; });
  m["scenario.targets"] = [](RunConfig& c, const std::string& v, const std::string&) {
    c.targets = parse_targets(v);
    c.explicit_targets = true;
  };

  // detector
  m["detector.name"] = [](RunConfig& c, const std::string& v, const std::string&) {
    c.detector = parse_detector(v);
  };
  m["detector.p_fa"] = num([](RunConfig& c) -> double& { return c.settings.ct.p_fa; });
  m["detector.slow_half_window"] =
      num([](RunConfig& c) -> int& { return c.settings.ct.slow_half_window; });
  m["detector.patch_half_width"] =
      num([](RunConfig& c) -> int& { return c.settings.ct.patch_half_width; });
  m["detector.k_max"] = num([](RunConfig& c) -> int& { return c.settings.ct.k_max; });
  m["detector.threshold_norm"] = [](RunConfig& c, const std::string& v, const std::string& k) {
    const std::string s = trim(v);
    if (s == "normalized") {
      c.settings.ct.threshold_norm = ThresholdNorm::Normalized;
    } else if (s == "literal") {
      c.settings.ct.threshold_norm = ThresholdNorm::FullRowWidth;
    } else {
      config_error("bad value '" + s + "' for " + k + " (normalized|literal)");
    }
  };
  m["detector.trunc_p_fa"] =
      num([](RunConfig& c) -> double& { return c.settings.ct.trunc.p_fa_internal; });
  m["detector.tol"] = num([](RunConfig& c) -> double& { return c.settings.ct.trunc.tol; });
  m["detector.eps_rel"] =
      num([](RunConfig& c) -> double& { return c.settings.ct.trunc.eps_rel; });
  m["detector.max_iter"] = num([](RunConfig& c) -> int& { return c.settings.ct.trunc.max_iter; });
  m["detector.init"] = [](RunConfig& c, const std::string& v, const std::string& k) {
    const std::string s = trim(v);
    if (s == "median") {
      c.settings.ct.trunc.init = InitStrategy::Median;
    } else if (s == "mean") {
      c.settings.ct.trunc.init = InitStrategy::Mean;
    } else {
      config_error("bad value '" + s + "' for " + k + " (median|mean)");
    }
  };
  m["detector.calibration_seed"] =
      num([](RunConfig& c) -> std::uint64_t& { return c.settings.calibration_seed; });

  // window
  m["window.train_fast"] = num([](RunConfig& c) -> int& { return c.settings.window.train_fast; });
  m["window.train_slow"] = num([](RunConfig& c) -> int& { return c.settings.window.train_slow; });
  m["window.guard"] = num([](RunConfig& c) -> int& { return c.settings.window.guard; });
  m["window.os_rank"] = num([](RunConfig& c) -> int& { return c.settings.window.os_rank; });
  m["window.tm_trim"] = num([](RunConfig& c) -> int& { return c.settings.window.tm_trim; });

  // montecarlo
  m["montecarlo.trials"] = num([](RunConfig& c) -> int& { return c.mc.trials; });
  m["montecarlo.snr_grid"] = [](RunConfig& c, const std::string& v, const std::string& k) {
    c.mc.snr_grid = parse_list<double>(v, k);
  };
  m["montecarlo.pfa_grid"] = [](RunConfig& c, const std::string& v, const std::string& k) {
    c.mc.pfa_grid = parse_list<double>(v, k);
  };
  m["montecarlo.target_counts"] = [](RunConfig& c, const std::string& v, const std::string& k) {
    c.mc.target_counts = parse_list<int>(v, k);
  };
  m["montecarlo.base_seed"] = num([](RunConfig& c) -> std::uint64_t& { return c.mc.base_seed; });
  m["montecarlo.detectors"] = [](RunConfig& c, const std::string& v, const std::string& k) {
    c.mc.detectors.clear();
    for (const auto& name : split(v, ',')) c.mc.detectors.push_back(parse_detector(name));
    if (c.mc.detectors.empty()) config_error("empty list for " + k);
  };
  m["montecarlo.threads"] = num([](RunConfig& c) -> int& { return c.mc.threads; });

  // match
  m["match.range_tol"] = num([](RunConfig& c) -> double& { return c.match.range_tol; });
  m["match.doppler_tol"] = num([](RunConfig& c) -> double& { return c.match.doppler_tol; });

  // noise_eval
  m["noise_eval.snr_grid"] = [](RunConfig& c, const std::string& v, const std::string& k) {
    c.noise.snr_grid = parse_list<double>(v, k);
  };
  m["noise_eval.trials"] = num([](RunConfig& c) -> int& { return c.noise.trials; });
  m["noise_eval.n_targets"] = num([](RunConfig& c) -> int& { return c.noise.n_targets; });
  m["noise_eval.seed"] = num([](RunConfig& c) -> std::uint64_t& { return c.noise.seed; });
  m["noise_eval.qq_points"] = num([](RunConfig& c) -> int& { return c.qq_points; });
  m["noise_eval.qq_snr_db"] = num([](RunConfig& c) -> double& { return c.qq_snr_db; });
  m["noise_eval.threads"] = num([](RunConfig& c) -> int& { return c.noise.threads; });

  // output
  m["output.dir"] = [](RunConfig& c, const std::string& v, const std::string&) {
    c.out_dir = trim(v);
  };
  return m;
}

}  // namespace

void RunConfig::finalize() {
  radar.lambda = kSpeedOfLight / radar.f_c;
  radar.validate();
  settings.ct.validate();
  settings.window.validate(radar.samples, radar.chirps);
  match.validate();
  if (n_targets < 0) config_error("n_targets must be >= 0");
  if (!(stationary_fraction_max >= 0.0 && stationary_fraction_max <= 1.0)) {
    config_error("stationary_fraction_max must lie in [0, 1]");
  }
  if (qq_points < 1) config_error("qq_points must be >= 1");

  mc.params = radar;
  mc.settings = settings;
  mc.match = match;
  mc.stationary_fraction_max = stationary_fraction_max;
  mc.validate();

  noise.params = radar;
  noise.trunc = settings.ct.trunc;
  noise.stationary_fraction_max = stationary_fraction_max;
  noise.validate();
}

void apply_config(RunConfig& cfg, std::istream& text, const std::string& source) {
  pt::ptree tree;
  try {
    pt::read_ini(text, tree);
  } catch (const pt::ini_parser_error& e) {
    config_error(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  Flags flags;
  const auto setters = make_setters(flags);
  for (const auto& [section, body] : tree) {
    if (!body.data().empty() && body.empty()) {
      config_error(source + ": key '" + section + "' outside any section");
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = setters.find(full);
      if (it == setters.end()) config_error(source + ": unknown key '" + full + "'");
      it->second(cfg, value.data(), full);
    }
  }
  if ((tree.get_child_optional("radar.slope") || flags.bandwidth) && !flags.t_chirp) {
    cfg.radar.t_chirp = cfg.radar.bandwidth / cfg.radar.slope;
  }
  cfg.radar.lambda = kSpeedOfLight / cfg.radar.f_c;
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file " + path);
  apply_config(cfg, in, path);
}

std::string find_preset(const std::string& name, const std::vector<std::string>& dirs) {
  if (name.empty() || name.find('/') != std::string::npos) {
    config_error("bad preset name '" + name + "'");
  }
  for (const auto& dir : dirs) {
    const auto path = std::filesystem::path(dir) / (name + ".cfg");
    if (std::filesystem::is_regular_file(path)) return path.string();
  }
  config_error("preset '" + name + "' not found");
}

std::vector<TargetTruth> parse_targets(const std::string& text) {
  std::vector<TargetTruth> out;
  for (const auto& entry : split(text, ';')) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(entry);
    while (std::getline(in, item, ':')) parts.push_back(item);
    if (parts.size() < 3 || parts.size() > 4) {
      config_error("target '" + entry + "' must be range:velocity:angle[:amplitude]");
    }
    TargetTruth t;
    t.range = parse_number<double>(parts[0], "scenario.targets");
    t.velocity = parse_number<double>(parts[1], "scenario.targets");
    t.angle = parse_number<double>(parts[2], "scenario.targets");
    if (parts.size() == 4) t.amplitude = parse_number<double>(parts[3], "scenario.targets");
    out.push_back(t);
  }
  return out;
}

}  // namespace ctcfar
