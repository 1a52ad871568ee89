#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "fwm/error.hpp"
#include "fwm/jsa.hpp"

namespace fwm {

struct SchmidtResult {
  std::vector<double> probabilities;  // descending, sum 1
  double schmidt_number = 1.0;        // K = 1 / sum p^2
  double purity = 1.0;                // 1 / K
};

/// Schmidt probabilities below this are dropped before computing K.
inline constexpr double kSchmidtFloor = 1e-12;

/// Singular values of F sqrt(d omega_s d omega_i), squared and renormalised.
inline SchmidtResult schmidt_decompose(const JSAmplitude& jsa) {
  const double measure = std::sqrt(jsa.cell());
  Eigen::VectorXd sv;
  if (jsa.is_real()) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(jsa.amplitude.real() * measure);
    sv = svd.singularValues();
  } else {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(jsa.amplitude * measure);
    sv = svd.singularValues();
  }
  if (!sv.allFinite() || sv.size() == 0 || !(sv(0) > 0.0)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "schmidt_decompose: SVD failed (size %ldx%ld, max |F| %.3g)",
                  static_cast<long>(jsa.amplitude.rows()), static_cast<long>(jsa.amplitude.cols()),
                  jsa.amplitude.cwiseAbs().maxCoeff());
    throw NumericError(buf);
  }

  const double total = sv.squaredNorm();
  SchmidtResult r;
  double kept = 0.0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    const double p = sv(k) * sv(k) / total;
    if (p < kSchmidtFloor) break;  // singular values are sorted descending
    r.probabilities.push_back(p);
    kept += p;
  }
  double sum_sq = 0.0;
  for (double& p : r.probabilities) {
    p /= kept;
    sum_sq += p * p;
  }
  r.schmidt_number = 1.0 / sum_sq;
  r.purity = sum_sq;
  return r;
}

/// Reduced single-photon state on a uniform frequency axis. `rho` is a density
/// per unit frequency squared: Tr = sum rho_jj d_omega.
struct SpectralDensityMatrix {
  std::vector<double> omega;
  Eigen::MatrixXcd rho;

  double d_omega() const { return (omega.back() - omega.front()) / double(omega.size() - 1); }
  double trace() const { return rho.diagonal().real().sum() * d_omega(); }

  /// Hermitian to 1e-10 and positive semidefinite to -1e-8 (relative to the trace).
  void check_invariants() const {
    const Eigen::MatrixXcd m = rho * d_omega();
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
      throw NumericError("density matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("density matrix eigen solve failed");
    if (es.eigenvalues().minCoeff() < -1e-8)
      throw NumericError("density matrix is not positive semidefinite");
  }
};

inline bool same_axis(const SpectralDensityMatrix& a, const SpectralDensityMatrix& b) {
  if (a.omega.size() != b.omega.size()) return false;
  for (std::size_t k = 0; k < a.omega.size(); ++k)
    if (std::abs(a.omega[k] - b.omega[k]) > 1e-12 * std::abs(a.omega[k])) return false;
  return true;
}

/// State of the photon in the other arm after detecting `herald_arm` (optionally
/// behind a filter). Unit trace.
inline SpectralDensityMatrix heralded_density_matrix(
    const JSAmplitude& jsa, Arm herald_arm, const std::optional<FilterSpec>& herald_filter = {}) {
  const bool herald_idler = herald_arm == Arm::Idler;
  const auto& herald_axis = herald_idler ? jsa.grid.idler : jsa.grid.signal;
  const double d_herald = herald_idler ? jsa.grid.d_idler() : jsa.grid.d_signal();

  Eigen::VectorXd weight(static_cast<Eigen::Index>(herald_axis.size()));
  for (std::size_t k = 0; k < herald_axis.size(); ++k)
    weight(static_cast<Eigen::Index>(k)) =
        (herald_filter ? herald_filter->transmission(herald_axis[k]) : 1.0) * d_herald;
  if (herald_filter) {
    herald_filter->validate();
    const double lo = wavelength_from_omega(herald_axis.back());
    const double hi = wavelength_from_omega(herald_axis.front());
    if (!(herald_filter->centre >= lo && herald_filter->centre <= hi))
      throw InvalidArgument("herald filter centre outside the grid");
  }

  SpectralDensityMatrix out;
  const Eigen::MatrixXcd F = herald_idler ? Eigen::MatrixXcd(jsa.amplitude)
                                          : Eigen::MatrixXcd(jsa.amplitude.transpose());
  out.omega = herald_idler ? jsa.grid.signal : jsa.grid.idler;
  out.rho = F * weight.asDiagonal() * F.adjoint();
  const double tr = out.trace();
  if (!(tr > 0.0)) throw NumericError("heralded state has zero norm after filtering");
  out.rho /= tr;
  out.check_invariants();
  return out;
}

/// Tr(rho^2) with the grid measure.
inline double purity(const SpectralDensityMatrix& rho) {
  const double d = rho.d_omega();
  return rho.rho.cwiseAbs2().sum() * d * d;
}

/// K(L) for each fibre length, rebuilding the grid for the narrowing phase matching.
inline std::vector<std::pair<double, double>> k_vs_length(const FiberSpec& fiber,
                                                          const PumpSpec& pump,
                                                          const ProcessConfig& process,
                                                          const std::vector<double>& lengths,
                                                          const GridSettings& settings = {},
                                                          const JsaOptions& options = {}) {
  std::vector<std::pair<double, double>> out;
  for (double L : lengths) {
    if (!(L > 0.0 && L <= 2.0)) throw InvalidArgument("k_vs_length: lengths must be in (0, 2] m");
    FiberSpec f = fiber;
    f.length = L;
    const auto grid = default_grid(f, pump, process, settings, options.include_nonlinear_shift);
    out.emplace_back(L, schmidt_decompose(build_jsa(f, pump, process, grid, options)).schmidt_number);
  }
  return out;
}

}  // namespace fwm
