#include <cmath>
#include <set>
#include <utility>

#include <gtest/gtest.h>

#include "ctcfar/detector.hpp"
#include "ctcfar/error.hpp"
#include "oracles.hpp"

using namespace ctcfar;

namespace {

RdStack frame(const Scenario& sc) { return rd_transform(synthesize_cube(sc)); }

std::set<std::pair<int, int>> cells_of(const DetectionSet& d) {
  std::set<std::pair<int, int>> out;
  for (const auto& det : d.detections) out.emplace(det.peak.r_ind, det.peak.v_ind);
  return out;
}

int circ_dist(double a, double b, int n) {
  const double d = std::fmod(std::abs(a - b), n);
  return static_cast<int>(std::lround(std::min(d, n - d)));
}

}  // namespace

TEST(Alpha, ClosedForms) {
  EXPECT_NEAR(alpha_from_pfa(1, 1e-3), std::log(1000.0) - 1.0, 1e-9);
  EXPECT_NEAR(alpha_from_pfa(1, 1e-3), 5.907755, 1e-6);
  EXPECT_NEAR(alpha_from_pfa(4, 1.0 - 1e-12), -1.0, 0.01);
  EXPECT_GT(alpha_from_pfa(4, 1e-6), alpha_from_pfa(4, 1e-3));
}

TEST(Alpha, NoiseOnlyExceedance) {
  const double p_fa = 1e-3;
  const double alpha = alpha_from_pfa(4, p_fa);
  long hits = 0, cells = 0;
  for (std::uint64_t s = 0; s < 32; ++s) {
    const NcaMap m = oracle::gamma_map(256, 128, 4.0, 2.0, 300 + s);
    const double mu = estimate_noise(m, 4, TruncConfig{}).mu_z;
    hits += ((m.array() - mu) > alpha * mu).count();
    cells += m.size();
  }
  ASSERT_GE(cells, 1000000);
  const double rate = double(hits) / cells;
  EXPECT_GE(rate, 0.5 * p_fa);
  EXPECT_LE(rate, 2.0 * p_fa);
}

TEST(AdaptiveThreshold, ConstantNoise) {
  const NcaMap ng = NcaMap::Constant(256, 64, 3.0);
  const NcaMap ns = NcaMap::Zero(256, 64);
  EXPECT_NEAR(adaptive_threshold(ng, ns, 10, 2.5, 2, ThresholdNorm::Normalized), 7.5, 1e-12);
  EXPECT_NEAR(adaptive_threshold(ng, ns, 0, 2.5, 2, ThresholdNorm::Normalized), 7.5, 1e-12);
}

TEST(AdaptiveThreshold, SidelobeMass) {
  const NcaMap ng = NcaMap::Constant(256, 64, 3.0);
  NcaMap ns = NcaMap::Zero(256, 64);
  ns(17, 62) = 400.0;  // inside the wrapped window of v = 0, r = 2
  ns(30, 5) = 1e6;     // outside it
  const double t = adaptive_threshold(ng, ns, 0, 2.0, 2, ThresholdNorm::Normalized);
  EXPECT_NEAR(t, 2.0 * (3.0 + 400.0 / (256.0 * 5.0)), 1e-12);
}

TEST(AdaptiveThreshold, LiteralDivisor) {
  const NcaMap ng = NcaMap::Constant(256, 128, 1.5);
  const NcaMap ns = NcaMap::Zero(256, 128);
  const double t = adaptive_threshold(ng, ns, 64, 2.0, 2, ThresholdNorm::FullRowWidth);
  EXPECT_NEAR(t, 2.0 * 1.5 * 1280.0 / 261.0, 1e-9);
}

TEST(Detect, NoiseOnlyCount) {
  const auto p = RadarParams::defaults();
  DetectorConfig cfg;
  double total = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto sc = random_scenario(p, 0, 0.0, 0.5, 9000 + s);
    total += detect(frame(sc), cfg).detections.size();
  }
  const double mean = total / 100.0;
  EXPECT_GE(mean, 16.0);
  EXPECT_LE(mean, 66.0);
}

TEST(Detect, SingleStrongTarget) {
  const auto p = RadarParams::defaults();
  DetectorConfig cfg;
  int good = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto sc = random_scenario(p, 1, 20.0, 0.0, 700 + s);
    const auto truth = truth_bins(sc.targets[0], p);
    const auto result = detect(frame(sc), cfg);
    int near = 0;
    for (const auto& d : result.detections) {
      near += circ_dist(d.peak.r_ind, truth.range_bin, p.samples) <= 1 &&
              circ_dist(d.peak.v_ind, truth.doppler_bin, p.chirps) <= 1;
    }
    good += near == 1;
  }
  EXPECT_GE(good, 99);
}

TEST(Detect, AllZeroIsDegenerate) {
  Scenario sc;
  sc.params = RadarParams::defaults();
  try {
    detect(frame(sc), DetectorConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Degenerate);
  }
}

TEST(Detect, ScaleInvariance) {
  const auto sc = random_scenario(RadarParams::defaults(), 10, 0.0, 0.5, 42);
  const auto base = synthesize_cube(sc);
  const auto ref = cells_of(detect(rd_transform(base), DetectorConfig{}));
  ASSERT_FALSE(ref.empty());
  for (double c : {0.5, 4.0, 3.7}) {
    DataCube scaled = base;
    for (auto& ch : scaled.channels) ch *= c;
    EXPECT_EQ(cells_of(detect(rd_transform(scaled), DetectorConfig{})), ref) << c;
  }
}

TEST(Detect, HaltsWithinKMax) {
  const auto sc = random_scenario(RadarParams::defaults(), 20, 10.0, 0.5, 5);
  const RdStack stack = frame(sc);
  for (int k : {1, 3, 10}) {
    DetectorConfig cfg;
    cfg.k_max = k;
    const auto r = detect(stack, cfg);
    EXPECT_EQ(static_cast<int>(r.detections.size()), k);
    EXPECT_EQ(r.terminated_by, Termination::KMax);
    for (int i = 0; i < k; ++i) EXPECT_EQ(r.detections[i].iteration, i);
  }
  const auto full = detect(stack, DetectorConfig{});
  EXPECT_LE(full.detections.size(), 64u);
  ASSERT_TRUE(full.noise_model.has_value());
}

TEST(Detect, PowersNonincreasingOnSeparatedTargets) {
  auto p = RadarParams::defaults();
  Scenario sc;
  sc.params = p;
  const double dr = p.range_per_bin();
  const double dv = p.velocity_per_bin();
  sc.targets = {TargetTruth{20.3 * dr, 10.2 * dv, 0.1, 1.0}, TargetTruth{50.6 * dr, -20.4 * dv, -0.3, 0.7},
                TargetTruth{80.1 * dr, 40.7 * dv, 0.5, 1.3}, TargetTruth{110.45 * dr, -50.1 * dv, 0.0, 0.4}};
  sc.noise_var = 1e-6;
  sc.seed = 8;
  const auto r = detect(frame(sc), DetectorConfig{});
  ASSERT_GE(r.detections.size(), 4u);
  for (std::size_t i = 1; i < r.detections.size(); ++i) {
    EXPECT_LE(r.detections[i].power, r.detections[i - 1].power);
  }
  // The four targets come out first.
  for (std::size_t i = 0; i < 4; ++i) {
    bool matched = false;
    for (const auto& t : sc.targets) {
      const auto b = truth_bins(t, p);
      matched |= circ_dist(r.detections[i].peak.r_ind, b.range_bin, p.samples) <= 1 &&
                 circ_dist(r.detections[i].peak.v_ind, b.doppler_bin, p.chirps) <= 1;
    }
    EXPECT_TRUE(matched) << i;
  }
}

TEST(Detect, ConfigValidation) {
  DetectorConfig cfg;
  cfg.p_fa = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = DetectorConfig{};
  cfg.k_max = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = DetectorConfig{};
  cfg.slow_half_window = -1;
  EXPECT_THROW(cfg.validate(), Error);
}
