#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fwm/calibration.hpp"
#include "fwm/dispersion.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace fwm;
using support::omega_nm;

TEST(Dispersion, BetaAtReferenceIsBeta0) {
  const auto& f = paper_fiber();
  for (Axis a : kAxes) EXPECT_EQ(beta(f, a, f.omega0()), f.axis(a).beta[0]);
}

TEST(Dispersion, LinearDispersionIsExact) {
  const auto f = support::uniform_fiber(support::simple_beta(1.45, 1.47, 0.0));
  const double b1 = f.slow.beta[1];
  for (double d : {-3e14, -1e13, 2e12, 4e14}) {
    const double got = beta(f, Axis::Slow, f.omega0() + d) - beta(f, Axis::Slow, f.omega0());
    EXPECT_NEAR(got, b1 * d, 1e-12 * f.slow.beta[0]);
  }
}

TEST(Dispersion, MatchesManualTaylorSum) {
  const auto& f = paper_fiber();
  for (Axis a : kAxes)
    for (double nm : {580.0, 640.0, 705.0, 800.0, 930.0}) {
      const double w = omega_nm(nm);
      const double want = oracle::taylor(f.axis(a).beta, f.omega0(), w);
      EXPECT_NEAR(beta(f, a, w), want, 1e-12 * std::abs(want));
    }
}

TEST(Dispersion, OutsideWindowIsDomainErrorNamingWindow) {
  const auto& f = paper_fiber();
  try {
    beta(f, Axis::Slow, omega_nm(400));
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("window"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("nm"), std::string::npos);
  }
  EXPECT_THROW(group_index(f, Axis::Fast, omega_nm(1200)), DomainError);
}

TEST(Dispersion, GroupIndexOfLinearBetaIsConstant) {
  const auto f = support::uniform_fiber(support::simple_beta(1.45, 1.47, 0.0));
  for (double nm : {600.0, 705.0, 900.0})
    EXPECT_NEAR(group_index(f, Axis::Fast, omega_nm(nm)), kSpeedOfLight * f.fast.beta[1], 1e-15);
}

TEST(Dispersion, GroupIndexMatchesFiniteDifferenceAtRandomPoints) {
  const auto& f = paper_fiber();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(f.omega_min() * 1.001, f.omega_max() * 0.999);
  const double h = 1e-6 * f.omega0();
  for (int k = 0; k < 100; ++k) {
    const double w = u(rng);
    const Axis a = k % 2 ? Axis::Slow : Axis::Fast;
    const double fd =
        kSpeedOfLight * oracle::central_difference([&](double x) { return beta(f, a, x); }, w, h);
    const double ng = group_index(f, a, w);
    EXPECT_LT(std::abs(ng - fd) / ng, 1e-6) << "omega " << w;
  }
}

TEST(Dispersion, PresetGroupVelocityMatchedPumpAndIdler) {
  const auto& f = paper_fiber();
  const double np = group_index(f, Axis::Slow, omega_nm(705));
  const double ni = group_index(f, Axis::Fast, omega_nm(860));
  EXPECT_LT(std::abs(np - ni) / np, 1e-3);
}

TEST(Dispersion, ConstructedZeroDispersionWavelength) {
  // beta2(omega) = beta2 + beta3 (omega - omega0), zero at 800 nm.
  const double w0 = omega_nm(705), wz = omega_nm(800);
  const double b2 = 2e-26;
  auto f = support::uniform_fiber(support::simple_beta(1.45, 1.47, b2, -b2 / (wz - w0), 0.0));
  f.fast.beta[2] = -b2;
  f.fast.beta[3] = b2 / (wz - w0);
  for (Axis a : kAxes)
    EXPECT_NEAR(zero_dispersion_wavelength(f, a) / kNanometre, 800.0, 0.01);
}

TEST(Dispersion, PresetZeroDispersionNear800nm) {
  for (Axis a : kAxes) {
    const double z = zero_dispersion_wavelength(paper_fiber(), a) / kNanometre;
    EXPECT_GE(z, 780.0);
    EXPECT_LE(z, 820.0);
  }
}

TEST(Dispersion, NoZeroDispersionIsError) {
  const auto f = support::uniform_fiber(support::simple_beta(1.45, 1.47, 3e-26, 0.0, 0.0));
  try {
    zero_dispersion_wavelength(f, Axis::Slow);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("no ZDW in window"), std::string::npos);
  }
}

TEST(Dispersion, OrderOutsideFourToSixRejected) {
  auto f = support::uniform_fiber({1.0, 1.0, 1.0, 1.0});
  EXPECT_THROW(f.validate(), InvalidArgument);
  f = support::uniform_fiber(std::vector<double>(8, 0.0));
  EXPECT_THROW(f.validate(), InvalidArgument);
  f = support::uniform_fiber(std::vector<double>(7, 0.0));
  EXPECT_NO_THROW(f.validate());
}

TEST(Dispersion, FiberInvariants) {
  auto f = paper_fiber();
  f.length = -0.1;
  EXPECT_THROW(f.validate(), InvalidArgument);
  f = paper_fiber();
  f.gamma = -1.0;
  EXPECT_THROW(f.validate(), InvalidArgument);
  f = paper_fiber();
  f.fast.omega0 *= 1.01;
  EXPECT_THROW(f.validate(), InvalidArgument);
}

TEST(Dispersion, ZeroTemperatureStepIsIdentity) {
  const auto& f = paper_fiber();
  const auto g = apply_temperature(f, 0.0);
  for (Axis a : kAxes)
    for (double nm : {600.0, 705.0, 860.0})
      EXPECT_EQ(beta(f, a, omega_nm(nm)), beta(g, a, omega_nm(nm)));
}

TEST(Dispersion, TemperatureStepsCompose) {
  const auto& f = paper_fiber();
  for (auto [a, b] : {std::pair{3.0, 4.5}, {-7.25, 2.0}, {40.0, -60.0}}) {
    const auto two = apply_temperature(apply_temperature(f, a), b);
    const auto one = apply_temperature(f, a + b);
    for (Axis ax : kAxes)
      for (double nm : {600.0, 705.0, 860.0}) {
        EXPECT_EQ(beta(two, ax, omega_nm(nm)), beta(one, ax, omega_nm(nm)));
        EXPECT_EQ(beta_derivative(two, ax, omega_nm(nm), 1), beta_derivative(one, ax, omega_nm(nm), 1));
      }
  }
}

TEST(Dispersion, TemperatureShiftsOnlyTheFastAxisSplitting) {
  const auto& f = paper_fiber();
  const auto g = apply_temperature(f, 10.0);
  const double w = omega_nm(650);
  EXPECT_EQ(beta(f, Axis::Slow, w), beta(g, Axis::Slow, w));
  EXPECT_NEAR(beta(g, Axis::Fast, w) - beta(f, Axis::Fast, w), f.dn_dT * 10.0 * w / kSpeedOfLight,
              1e-9 * beta(f, Axis::Fast, w));
  EXPECT_EQ(beta_derivative(f, Axis::Fast, w, 2), beta_derivative(g, Axis::Fast, w, 2));
}

TEST(Dispersion, TemperatureStepLimit) {
  EXPECT_THROW(apply_temperature(paper_fiber(), 100.5), InvalidArgument);
  EXPECT_THROW(apply_temperature(paper_fiber(), -101), InvalidArgument);
  EXPECT_NO_THROW(apply_temperature(paper_fiber(), -100));
}

namespace {
double signal_at(const FiberSpec& f) {
  return solve_signal_idler(f, {Axis::Slow, Axis::Fast}, 705 * kNanometre, 100.0)->signal_wavelength;
}
}  // namespace

TEST(Dispersion, PresetTenKelvinShiftsSignal110pm) {
  const auto& f = paper_fiber();
  const double shift = signal_at(apply_temperature(f, 10.0)) - signal_at(f);
  EXPECT_NEAR(std::abs(shift) / kPicometre, 110.0, 11.0);
}

TEST(Dispersion, TemperatureShiftIsLinear) {
  const auto& f = paper_fiber();
  const double s1 = signal_at(apply_temperature(f, 5.0)) - signal_at(f);
  const double s2 = signal_at(apply_temperature(f, 10.0)) - signal_at(f);
  EXPECT_NEAR(s2, 2.0 * s1, 0.01 * std::abs(s2));
}

TEST(Calibration, PaperTargetsReproduceOperatingPoint) {
  const auto& f = paper_fiber();
  const auto pt = solve_signal_idler(f, {Axis::Slow, Axis::Fast}, 705 * kNanometre, 100.0);
  ASSERT_TRUE(pt);
  EXPECT_NEAR(pt->signal_wavelength / kNanometre, 597.0, 2.0);
  EXPECT_NEAR(pt->idler_wavelength / kNanometre, 860.0, 3.0);
  const auto slope = signal_slope(f, {Axis::Slow, Axis::Fast}, 705 * kNanometre, 100.0);
  ASSERT_TRUE(slope);
  EXPECT_LT(std::abs(*slope), 0.05);
}

TEST(Calibration, EveryPaperTargetWithinTolerance) {
  for (const auto& r : evaluate_targets(paper_fiber(), paper_targets()))
    EXPECT_TRUE(r.ok) << r.name << " = " << r.value << " (target " << r.target << ")";
}

TEST(Calibration, Deterministic) {
  const auto a = calibrate_preset(paper_targets());
  const auto b = calibrate_preset(paper_targets());
  for (Axis ax : kAxes) EXPECT_EQ(a.axis(ax).beta, b.axis(ax).beta);
  EXPECT_EQ(a.dn_dT, b.dn_dT);
}

TEST(Calibration, SlowBeta0FixedByNominalIndex) {
  const auto& f = paper_fiber();
  EXPECT_NEAR(phase_index(f, Axis::Slow, f.omega0()), 1.45, 1e-12);
}

TEST(Calibration, RoundTripFromSyntheticGenerator) {
  FiberSpec gen = paper_fiber();
  gen.slow.beta[2] *= 1.05;
  gen.fast.beta[3] *= 0.9;
  gen.fast.beta[4] += 2e-56;
  gen.fast.beta[0] += 3.0;
  const ProcessConfig pc{Axis::Slow, Axis::Fast};
  const PumpSpec pump;
  const double band = 2e12;
  const auto targets = targets_from_fiber(gen, pc, pump, band);
  const auto fit = calibrate_preset(targets);

  const auto centre = solve_signal_idler(gen, pc, pump.wavelength, pump.peak_power);
  ASSERT_TRUE(centre);
  double worst = 0.0;
  for (int a = 0; a <= 14; ++a)
    for (int b = 0; b <= 14; ++b) {
      const double ws = centre->signal_omega() + band * (a / 7.0 - 1.0);
      const double wi = centre->idler_omega() + band * (b / 7.0 - 1.0);
      worst = std::max(worst, std::abs(delta_k(fit, pc, ws, wi, pump.peak_power) -
                                       delta_k(gen, pc, ws, wi, pump.peak_power)));
    }
  EXPECT_LT(worst, 1e-2);
}

TEST(Calibration, UnreachableTargetReportsResiduals) {
  auto t = paper_targets();
  t.idler_fwhm = 10 * kNanometre;
  try {
    calibrate_preset(t);
    FAIL() << "expected CalibrationError";
  } catch (const CalibrationError& e) {
    bool missed = false;
    for (const auto& r : e.residuals())
      if (!r.ok && r.name.find("idler FWHM") != std::string::npos) missed = true;
    EXPECT_TRUE(missed);
    EXPECT_GE(e.residuals().size(), 5u);
  }
}
