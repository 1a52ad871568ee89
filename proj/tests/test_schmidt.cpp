#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fwm/calibration.hpp"
#include "fwm/schmidt.hpp"
#include "oracles.hpp"

using namespace fwm;

namespace {
const ProcessConfig kCross{Axis::Slow, Axis::Fast};

const JSAmplitude& preset_jsa() {
  static const JSAmplitude jsa = [] {
    const PumpSpec pump;
    return build_jsa(paper_fiber(), pump, kCross, default_grid(paper_fiber(), pump, kCross));
  }();
  return jsa;
}

JSAmplitude double_gaussian(double sp, double sm, std::size_t n = 256) {
  const double std_s = 0.5 * std::sqrt(sp * sp + sm * sm);
  const auto s = oracle::axis(0.0, 7.0 * std_s, n);
  return oracle::make_jsa(s, s, [&](double a, double b) {
    return std::exp(-(a + b) * (a + b) / (4 * sp * sp)) * std::exp(-(a - b) * (a - b) / (4 * sm * sm));
  });
}

void expect_valid(const SchmidtResult& r) {
  double sum = 0.0;
  for (std::size_t k = 0; k < r.probabilities.size(); ++k) {
    EXPECT_GE(r.probabilities[k], 0.0);
    if (k) {
      EXPECT_LE(r.probabilities[k], r.probabilities[k - 1]);
    }
    sum += r.probabilities[k];
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
  EXPECT_GE(r.schmidt_number, 1.0);
  EXPECT_GT(r.purity, 0.0);
  EXPECT_LE(r.purity, 1.0);
}
}  // namespace

TEST(Schmidt, SeparableHasUnitK) {
  const auto s = oracle::axis(1.0, 0.5, 200), i = oracle::axis(2.0, 0.7, 150);
  const auto jsa = oracle::make_jsa(s, i, [](double a, double b) {
    return std::exp(-30 * (a - 1.1) * (a - 1.1)) * std::complex<double>(std::cos(4 * b), std::sin(4 * b)) /
           (1.0 + 40 * (b - 2.0) * (b - 2.0));
  });
  const auto r = schmidt_decompose(jsa);
  expect_valid(r);
  EXPECT_NEAR(r.schmidt_number, 1.0, 1e-6);
  EXPECT_LT(1.0 - r.probabilities.front(), 1e-10);
}

TEST(Schmidt, DoubleGaussianMatchesClosedForm) {
  for (int k = 0; k <= 10; ++k) {
    const double ratio = std::pow(5.0, (k - 5) / 5.0);  // 0.2 .. 5, log spaced
    const double sm = 1.0, sp = ratio * sm;
    const auto r = schmidt_decompose(double_gaussian(sp, sm));
    expect_valid(r);
    const double want = oracle::double_gaussian_k(sp, sm);
    EXPECT_NEAR(r.schmidt_number, want, 0.01 * want) << "ratio " << ratio;
  }
}

TEST(Schmidt, RandomJsasPurityTimesKIsOne) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto s = oracle::axis(10.0, 1.0, 40), i = oracle::axis(5.0, 2.0, 32);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXcd m(40, 32);
    for (Eigen::Index a = 0; a < 40; ++a)
      for (Eigen::Index b = 0; b < 32; ++b) m(a, b) = {n(rng), trial % 2 ? n(rng) : 0.0};
    const auto jsa = oracle::make_jsa(s, i, [&](double a, double b) {
      const auto ia = static_cast<Eigen::Index>(std::lround((a - 9.0) / (2.0 / 39)));
      const auto ib = static_cast<Eigen::Index>(std::lround((b - 3.0) / (4.0 / 31)));
      return m(ia, ib);
    });
    const auto r = schmidt_decompose(jsa);
    expect_valid(r);
    const auto rho = heralded_density_matrix(jsa, Arm::Idler);
    EXPECT_NEAR(purity(rho) * r.schmidt_number, 1.0, 1e-6);
    EXPECT_NEAR(rho.trace(), 1.0, 1e-9);
  }
}

TEST(Schmidt, RandomSeparableJsasHaveUnitK) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto s = oracle::axis(10.0, 1.0, 40), i = oracle::axis(5.0, 2.0, 32);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXcd u(40), v(32);
    for (auto& x : u) x = {n(rng), n(rng)};
    for (auto& x : v) x = {n(rng), n(rng)};
    const auto jsa = oracle::make_jsa(s, i, [&](double a, double b) {
      return u(std::lround((a - 9.0) / (2.0 / 39))) * v(std::lround((b - 3.0) / (4.0 / 31)));
    });
    EXPECT_NEAR(schmidt_decompose(jsa).schmidt_number, 1.0, 1e-6);
    EXPECT_NEAR(purity(heralded_density_matrix(jsa, Arm::Signal)), 1.0, 1e-6);
  }
}

TEST(Schmidt, PresetSchmidtNumberBand) {
  const double k = schmidt_decompose(preset_jsa()).schmidt_number;
  EXPECT_GE(k, 1.10);
  EXPECT_LE(k, 1.45);
}

TEST(Schmidt, HeraldedPurityIsInverseK) {
  const auto r = schmidt_decompose(preset_jsa());
  for (Arm arm : {Arm::Idler, Arm::Signal}) {
    const auto rho = heralded_density_matrix(preset_jsa(), arm);
    EXPECT_NEAR(purity(rho), 1.0 / r.schmidt_number, 1e-6);
    EXPECT_NEAR(purity(rho), r.purity, 1e-6);
    EXPECT_NEAR(rho.trace(), 1.0, 1e-9);
  }
}

TEST(Schmidt, RankOneHeraldsProjector) {
  const auto s = oracle::axis(0.0, 1.0, 64);
  const auto jsa = oracle::make_jsa(s, s, [](double a, double b) {
    return std::exp(-8 * a * a) * std::exp(-3 * (b - 0.2) * (b - 0.2));
  });
  EXPECT_NEAR(purity(heralded_density_matrix(jsa, Arm::Idler)), 1.0, 1e-6);
}

TEST(Schmidt, DensityMatrixInvariants) {
  const auto rho = heralded_density_matrix(preset_jsa(), Arm::Idler);
  const Eigen::MatrixXcd m = rho.rho * rho.d_omega();
  EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-8);

  SpectralDensityMatrix bad = rho;
  bad.rho(0, 1) += std::complex<double>(0.0, 1.0) / rho.d_omega();
  EXPECT_THROW(bad.check_invariants(), NumericError);
  SpectralDensityMatrix negative = rho;
  negative.rho(3, 3) -= 0.5 / rho.d_omega();
  EXPECT_THROW(negative.check_invariants(), NumericError);
}

TEST(Schmidt, PurityOfProjectorAndMaximallyMixed) {
  const auto omega = oracle::axis(2.0, 1.0, 50);
  const auto p = oracle::pure_state(omega, [](double w) { return std::exp(-10 * (w - 2) * (w - 2)); });
  EXPECT_NEAR(purity(p), 1.0, 1e-9);
  const double d = (omega.back() - omega.front()) / 49.0;
  SpectralDensityMatrix mixed{omega, Eigen::MatrixXcd::Identity(50, 50) / (50.0 * d)};
  EXPECT_NEAR(mixed.trace(), 1.0, 1e-12);
  EXPECT_NEAR(purity(mixed), 1.0 / 50.0, 1e-6);
}

TEST(Schmidt, WideIdlerFilterBarelyChangesPurity) {
  const double base = purity(heralded_density_matrix(preset_jsa(), Arm::Idler));
  const auto centre = jsa_centre(paper_fiber(), kCross, PumpSpec{});
  FilterSpec f{FilterShape::TopHat, centre.idler_wavelength, 10 * kNanometre, 1.0};
  const double filtered = purity(heralded_density_matrix(preset_jsa(), Arm::Idler, f));
  EXPECT_LT(std::abs(filtered - base) / base, 1e-3);
}

TEST(Schmidt, NarrowerHeraldFilterNeverLowersPurity) {
  const auto centre = jsa_centre(paper_fiber(), kCross, PumpSpec{});
  double previous = purity(heralded_density_matrix(preset_jsa(), Arm::Idler));
  for (double nm : {10.0, 4.0, 2.0, 1.0, 0.5, 0.25}) {
    FilterSpec f{FilterShape::TopHat, centre.idler_wavelength, nm * kNanometre, 1.0};
    const double p = purity(heralded_density_matrix(preset_jsa(), Arm::Idler, f));
    EXPECT_GE(p, previous - 1e-12) << nm << " nm";
    previous = p;
  }
}

TEST(Schmidt, FilterOutsideGridRejected) {
  FilterSpec f{FilterShape::TopHat, 700 * kNanometre, 1 * kNanometre, 1.0};
  EXPECT_THROW(heralded_density_matrix(preset_jsa(), Arm::Idler, f), InvalidArgument);
}

TEST(Schmidt, LongerFibreIsMoreFactorable) {
  const auto kl = k_vs_length(paper_fiber(), PumpSpec{}, kCross, {0.4, 1.0});
  EXPECT_LT(kl[1].second, kl[0].second);
}

TEST(Schmidt, KAtLeastOneForAllLengths) {
  for (const auto& [L, K] : k_vs_length(paper_fiber(), PumpSpec{}, kCross, {0.1, 0.25, 0.6, 1.5, 2.0}))
    EXPECT_GE(K, 1.0) << L;
  EXPECT_THROW(k_vs_length(paper_fiber(), PumpSpec{}, kCross, {2.5}), InvalidArgument);
  EXPECT_THROW(k_vs_length(paper_fiber(), PumpSpec{}, kCross, {0.0}), InvalidArgument);
}

TEST(Schmidt, GridRefinementStable) {
  GridSettings fine;
  fine.n_signal = fine.n_idler = 1024;
  const double coarse = k_vs_length(paper_fiber(), PumpSpec{}, kCross, {0.4})[0].second;
  const double refined = k_vs_length(paper_fiber(), PumpSpec{}, kCross, {0.4}, fine)[0].second;
  EXPECT_LT(std::abs(refined - coarse) / refined, 0.01);
}

TEST(Schmidt, GaussianPhaseMatchingLowersK) {
  const PumpSpec pump;
  const auto grid = default_grid(paper_fiber(), pump, kCross);
  const auto g = build_jsa(paper_fiber(), pump, kCross, grid, {PhaseMatchShape::Gaussian, true});
  EXPECT_LT(schmidt_decompose(g).schmidt_number, schmidt_decompose(preset_jsa()).schmidt_number);
}
