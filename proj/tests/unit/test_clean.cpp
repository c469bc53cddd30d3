#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ctcfar/clean.hpp"
#include "ctcfar/error.hpp"
#include "oracles.hpp"

using namespace ctcfar;

namespace {

RadarParams small_params(int n, int m, int l) {
  auto p = RadarParams::defaults();
  p.samples = n;
  p.chirps = m;
  p.channels = l;
  return p;
}

// Stack of L channels holding gains[l] * tone at fractional bins (fr, fv).
RdStack tone_stack(const RadarParams& p, double fr, double fv, const std::vector<Complex>& gains) {
  RdStack s;
  s.params = p;
  for (const auto& g : gains) s.channels.push_back(oracle::dft2(oracle::tone2(p.samples, p.chirps, fr, fv, g)));
  return s;
}

}  // namespace

TEST(Candan, SymmetricNeighbourhoodIsZero) {
  EXPECT_EQ(candan_delta(Complex(2, 1), Complex(5, 0), Complex(2, 1), 64), 0.0);
}

TEST(Candan, OnGridToneIsZero) {
  EXPECT_EQ(candan_delta(0.0, Complex(256, 0), 0.0, 256), 0.0);
}

TEST(Candan, FlatNeighbourhoodIsZero) {
  EXPECT_EQ(candan_delta(Complex(1, 0), Complex(1, 0), Complex(1, 0), 64), 0.0);
}

TEST(Candan, FractionalToneFromDirectDft) {
  for (double delta : {0.3, -0.3, 0.1, -0.45, 0.49}) {
    const int len = 256, p0 = 40;
    const auto x = oracle::tone(len, p0 + delta, 0.7);
    const double est = candan_delta(oracle::dft_bin(x, p0 - 1), oracle::dft_bin(x, p0),
                                    oracle::dft_bin(x, p0 + 1), len);
    EXPECT_LT(std::abs(est - delta), 0.01) << delta;
  }
}

TEST(Candan, ClampedToHalfBin) {
  // A neighbourhood that is not a peak pushes the raw estimate beyond 0.5.
  const double d = candan_delta(Complex(0.0, 0.0), Complex(1.0, 0.0), Complex(3.0, 0.0), 64);
  EXPECT_LE(std::abs(d), 0.5);
}

TEST(RefinePeak, OnGridTargetHasZeroOffsets) {
  const auto p = small_params(32, 16, 2);
  const auto stack = tone_stack(p, 7.0, 3.0, {Complex(1, 0), Complex(0, 1)});
  const auto peak = refine_peak(stack, 7, 3);
  EXPECT_NEAR(peak.delta_r, 0.0, 1e-9);
  EXPECT_NEAR(peak.delta_v, 0.0, 1e-9);
}

TEST(RefinePeak, OffGridTargetRecovered) {
  const auto p = small_params(64, 32, 3);
  const auto stack = tone_stack(p, 20.3, 9.0 - 0.2, {1.0, Complex(0.5, 0.2), Complex(-1.0, 0.3)});
  const auto peak = refine_peak(stack, 20, 9);
  EXPECT_LT(std::abs(peak.r_hat - 20.3), 0.01);
  EXPECT_LT(std::abs(peak.v_hat - 8.8), 0.01);
  EXPECT_NEAR(peak.range_m, peak.r_hat * p.range_per_bin(), 1e-12);
}

TEST(RefinePeak, IdenticalChannelsGiveSingleChannelValue) {
  const auto p = small_params(64, 32, 3);
  const auto stack = tone_stack(p, 11.2, 5.4, {1.0, 1.0, 1.0});
  RdStack single = stack;
  single.channels.resize(1);
  const auto a = refine_peak(stack, 11, 5);
  const auto b = refine_peak(single, 11, 5);
  EXPECT_NEAR(a.delta_r, b.delta_r, 1e-15);
  EXPECT_NEAR(a.delta_v, b.delta_v, 1e-15);
}

TEST(RefinePeak, WrapsAtEdges) {
  const auto p = small_params(32, 16, 1);
  const auto stack = tone_stack(p, 0.2, 15.0 + 0.3, {1.0});
  const auto peak = refine_peak(stack, 0, 15);
  EXPECT_LT(std::abs(peak.delta_r - 0.2), 0.02);
  EXPECT_LT(std::abs(peak.delta_v - 0.3), 0.02);
}

TEST(VelocityOfBin, SignedWrap) {
  const auto p = RadarParams::defaults();
  EXPECT_NEAR(velocity_of_bin(p, 1.0), p.velocity_per_bin(), 1e-12);
  EXPECT_NEAR(velocity_of_bin(p, 127.0), -p.velocity_per_bin(), 1e-12);
  EXPECT_NEAR(velocity_of_bin(p, 64.0), -64 * p.velocity_per_bin(), 1e-12);
}

TEST(BuildTemplate, IntegerBinsAreDelta) {
  const auto p = small_params(64, 32, 1);
  const auto t = build_template(p, 10.0, 5.0, 2);
  ASSERT_EQ(t.values.rows(), 5);
  EXPECT_EQ(t.center, (CellIndex{10, 5}));
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 5; ++b) {
      if (a == 2 && b == 2) {
        EXPECT_NEAR(std::abs(t.values(a, b)), 64.0 * 32.0, 1e-9);
      } else {
        EXPECT_EQ(std::abs(t.values(a, b)), 0.0);
      }
    }
  }
}

TEST(BuildTemplate, MatchesDirectDftOfTone) {
  const auto p = small_params(32, 16, 1);
  const double fr = 12.37, fv = 6.71;
  const auto spec = oracle::dft2(oracle::tone2(32, 16, fr, fv));
  const int rt = 3;
  const auto t = build_template(p, fr, fv, rt);
  for (int a = -rt; a <= rt; ++a) {
    for (int b = -rt; b <= rt; ++b) {
      const Complex ref = spec((t.center.r + a + 32) % 32, (t.center.v + b + 16) % 16);
      EXPECT_LT(std::abs(t.values(a + rt, b + rt) - ref), 1e-6 * spec.cwiseAbs().maxCoeff());
    }
  }
}

TEST(BuildTemplate, ConjugateSymmetry) {
  const auto p = small_params(64, 32, 1);
  const int rt = 2;
  const auto t = build_template(p, 0.3, 0.4, rt, CellIndex{0, 0});
  const auto u = build_template(p, -0.3, -0.4, rt, CellIndex{0, 0});
  for (int a = 0; a < 2 * rt + 1; ++a) {
    for (int b = 0; b < 2 * rt + 1; ++b) {
      EXPECT_LT(std::abs(t.values(a, b) - std::conj(u.values(2 * rt - a, 2 * rt - b))), 1e-9);
    }
  }
}

TEST(FitGains, ExactRecovery) {
  const auto p = small_params(64, 32, 3);
  const auto t = build_template(p, 10.3, 4.6, 2, CellIndex{10, 5});
  const std::vector<Complex> a{Complex(1.5, -0.5), Complex(-0.2, 0.9), Complex(3.0, 0.0)};
  std::vector<Eigen::MatrixXcd> ys;
  for (const auto& g : a) ys.push_back(t.values * g);
  const auto gains = fit_gains(ys, t, 0.0);
  for (int l = 0; l < 3; ++l) EXPECT_LT(std::abs(gains.gains[l] - a[l]), 1e-12 * std::abs(a[l]));
}

TEST(FitGains, OrthogonalObservationGivesZero) {
  const auto p = small_params(64, 32, 1);
  const auto t = build_template(p, 10.0, 5.0, 2);
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(5, 5);
  y(0, 0) = Complex(4.0, 1.0);  // template is zero off-centre
  EXPECT_EQ(std::abs(fit_gains({y}, t).gains[0]), 0.0);
}

TEST(FitGains, NeverWorseThanZeroFit) {
  const auto p = small_params(64, 32, 1);
  const auto t = build_template(p, 10.4, 5.2, 2);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 50.0);
  Eigen::MatrixXcd y = t.values * Complex(0.7, 0.1);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] += Complex(g(rng), g(rng));
  const Complex a = fit_gains({y}, t).gains[0];
  EXPECT_LE((y - t.values * a).norm(), y.norm());
}

TEST(FitGains, ZeroTemplateIsError) {
  TemplatePatch t;
  t.values = Eigen::MatrixXcd::Zero(5, 5);
  t.half_width = 2;
  EXPECT_THROW(fit_gains({Eigen::MatrixXcd::Ones(5, 5)}, t), Error);
}

TEST(ReconstructPcut, ZeroGainsGiveZeroMap) {
  const auto p = small_params(64, 32, 2);
  const auto t = build_template(p, 10.3, 5.1, 2);
  ChannelGains g;
  g.gains = Eigen::VectorXcd::Zero(2);
  EXPECT_EQ(reconstruct_pcut(t, g, 64, 32).maxCoeff(), 0.0);
}

TEST(ReconstructPcut, IntegerTemplateSingleEntry) {
  const auto p = small_params(64, 32, 1);
  const auto t = build_template(p, 10.0, 5.0, 2);
  ChannelGains g;
  g.gains = Eigen::VectorXcd::Ones(1);
  const NcaMap m = reconstruct_pcut(t, g, 64, 32);
  EXPECT_NEAR(m(10, 5), std::pow(64.0 * 32.0, 2), 1e-6);
  EXPECT_EQ((m.array() > 0.0).count(), 1);
}

TEST(ReconstructPcut, WrapsAroundEdges) {
  const auto p = small_params(64, 32, 1);
  const auto t = build_template(p, 0.4, 31.4, 2, CellIndex{0, 31});
  ChannelGains g;
  g.gains = Eigen::VectorXcd::Ones(1);
  const NcaMap m = reconstruct_pcut(t, g, 64, 32);
  EXPECT_GT(m(62, 0), 0.0);
  EXPECT_GT(m(2, 29), 0.0);
  EXPECT_EQ(m(10, 10), 0.0);
}

TEST(ReconstructPcut, MatchesNoiselessFrame) {
  Scenario sc;
  sc.params = RadarParams::defaults();
  sc.targets = {TargetTruth{2.0, 6.0, 0.3, 1.0}};
  sc.seed = 4;
  const RdStack stack = rd_transform(synthesize_cube(sc));
  const NcaMap power = nca(stack);
  Eigen::Index r = 0, v = 0;
  power.maxCoeff(&r, &v);
  const auto peak = refine_peak(stack, int(r), int(v));
  const CellIndex c{int(r), int(v)};
  const int rt = 2;
  const auto t = build_template(sc.params, peak.r_hat, peak.v_hat, rt, c);
  const auto gains = fit_gains(extract_patches(stack, c, rt), t);
  const NcaMap pcut = reconstruct_pcut(t, gains, stack.rows(), stack.cols());
  for (int a = -rt; a <= rt; ++a) {
    for (int b = -rt; b <= rt; ++b) {
      const double ref = power(int(r) + a, int(v) + b);
      EXPECT_NEAR(pcut(int(r) + a, int(v) + b), ref, 0.01 * ref + 1e-9 * power.maxCoeff());
    }
  }
}

TEST(SubtractAndUpdate, ZeroPcut) {
  NcaMap residual = NcaMap::Constant(8, 8, 2.0);
  NcaMap hist = NcaMap::Constant(8, 8, 0.5);
  subtract_and_update(residual, NcaMap::Zero(8, 8), hist, CellIndex{3, 4});
  EXPECT_EQ(residual(3, 4), 0.0);
  EXPECT_EQ(residual(2, 4), 2.0);
  EXPECT_EQ((residual.array() == 2.0).count(), 63);
  EXPECT_TRUE(hist == NcaMap::Constant(8, 8, 0.5));
}

TEST(SubtractAndUpdate, ClampsAndSkipsCentreInHistory) {
  NcaMap residual = NcaMap::Constant(8, 8, 1.0);
  NcaMap hist = NcaMap::Zero(8, 8);
  NcaMap pcut = NcaMap::Zero(8, 8);
  pcut(3, 4) = 10.0;
  pcut(3, 5) = 3.0;
  pcut(2, 4) = 0.25;
  subtract_and_update(residual, pcut, hist, CellIndex{3, 4});
  EXPECT_EQ(residual(3, 5), 0.0);
  EXPECT_EQ(residual(2, 4), 0.75);
  EXPECT_EQ(hist(3, 4), 0.0);
  EXPECT_EQ(hist(3, 5), 3.0);
  EXPECT_EQ(hist(2, 4), 0.25);
  EXPECT_GE(residual.minCoeff(), 0.0);
}

TEST(SubtractAndUpdate, NoiselessTargetResidualEnergy) {
  Scenario sc;
  sc.params = RadarParams::defaults();
  sc.targets = {TargetTruth{3.33, -7.0, -0.2, 1.0}};
  sc.seed = 2;
  const RdStack stack = rd_transform(synthesize_cube(sc));
  NcaMap residual = nca(stack);
  Eigen::Index r = 0, v = 0;
  residual.maxCoeff(&r, &v);
  const CellIndex c{int(r), int(v)};
  const int rt = 2;
  const auto peak = refine_peak(stack, c.r, c.v);
  const auto t = build_template(sc.params, peak.r_hat, peak.v_hat, rt, c);
  const auto gains = fit_gains(extract_patches(stack, c, rt), t);
  const NcaMap pcut = reconstruct_pcut(t, gains, stack.rows(), stack.cols());
  auto patch_energy = [&](const NcaMap& m) {
    double e = 0.0;
    for (int a = -rt; a <= rt; ++a) {
      for (int b = -rt; b <= rt; ++b) e += m((c.r + a + 256) % 256, (c.v + b + 128) % 128);
    }
    return e;
  };
  const double before = patch_energy(residual);
  NcaMap hist = NcaMap::Zero(residual.rows(), residual.cols());
  subtract_and_update(residual, pcut, hist, c);
  EXPECT_LT(patch_energy(residual), 0.01 * before);
}

TEST(Clean, GainEquivariance) {
  const auto p = small_params(32, 16, 2);
  const auto stack = tone_stack(p, 9.3, 4.2, {1.0, Complex(0.3, 0.8)});
  const Complex c(1.7, -0.6);
  RdStack scaled = stack;
  for (auto& ch : scaled.channels) ch *= c;
  const CellIndex centre{9, 4};
  const auto t = build_template(p, 9.3, 4.2, 2, centre);
  const auto g0 = fit_gains(extract_patches(stack, centre, 2), t);
  const auto g1 = fit_gains(extract_patches(scaled, centre, 2), t);
  for (int l = 0; l < 2; ++l) EXPECT_LT(std::abs(g1.gains[l] - c * g0.gains[l]), 1e-9);
  const NcaMap p0 = reconstruct_pcut(t, g0, 32, 16);
  const NcaMap p1 = reconstruct_pcut(t, g1, 32, 16);
  EXPECT_LT((p1 - std::norm(c) * p0).cwiseAbs().maxCoeff(), 1e-9 * p1.maxCoeff());
}
