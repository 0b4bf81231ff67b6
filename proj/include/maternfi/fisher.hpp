#pragma once

// Fisher information about eta = (sigma2, tau2, vartheta, nu) for Gaussian data
// with covariance Psi = sigma2 Sigma_vartheta + tau2 I, evaluated at a design:
//
//   I_kl = 1/2 tr(Psi^{-1} Psi_k Psi^{-1} Psi_l),  Psi_k = dPsi/deta_k.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maternfi/design.hpp"
#include "maternfi/matern.hpp"

namespace maternfi {

struct FisherOptions {
  QuadratureSpec quadrature{};
  int threads = 1;  // <= 0: all cores
};

struct FisherInfo {
  Eigen::Matrix4d matrix = Eigen::Matrix4d::Zero();  // order sigma2, tau2, vartheta, nu
  CovarianceParams params{};
  std::size_t design_size = 0;
  std::uint64_t design_hash = 0;  // fingerprint of the coordinates used
};

// Inverse Cramér-Rao bounds: 1 / (I^{-1})_kk.
struct InfoVector {
  double sigma2 = 0.0;
  double tau2 = 0.0;
  double vartheta = 0.0;
  double nu = 0.0;

  std::array<double, 4> to_array() const { return {sigma2, tau2, vartheta, nu}; }
  double operator[](Param p) const { return to_array()[index_of(p)]; }
};

struct InfluenceResult {
  double lambda_star = 0.0;
  Eigen::Vector4d delta_star = Eigen::Vector4d::Zero();
  // Set when the top eigenvalue is repeated; delta_star is then one unit vector of the eigenspace.
  bool degenerate = false;
};

// FNV-1a over the coordinate bytes.
std::uint64_t design_fingerprint(std::span<const Point> points);

Eigen::MatrixXd cov_matrix(const CovarianceParams& params, std::span<const Point> points);

// dPsi/dsigma2 = Sigma, dPsi/dtau2 = I, dPsi/dvartheta and dPsi/dnu = sigma2 times the
// entrywise correlation derivatives (zero diagonals).
std::array<Eigen::MatrixXd, 4> cov_matrix_derivs(const CovarianceParams& params,
                                                 std::span<const Point> points,
                                                 const FisherOptions& options = {});

// Throws FactorizationError (with the offending pair when two points coincide) if Psi is not
// positive definite.
FisherInfo fisher_matrix(const CovarianceParams& params, std::span<const Point> points,
                         const FisherOptions& options = {});

// Throws SingularInformationError when the reciprocal condition number of the
// equilibrated matrix is at or below kMinReciprocalCondition.
inline constexpr double kMinReciprocalCondition = 1e-14;
InfoVector info_vector(const FisherInfo& fisher);
InfoVector info_vector(const Eigen::Matrix4d& fisher);

// Reciprocal 2-norm condition number of D^{-1/2} I D^{-1/2}, D = diag(I); 0 if any
// diagonal entry is not positive.
double equilibrated_rcond(const Eigen::Matrix4d& fisher);

// grad zeta = vartheta^{-2 nu} (1, 0, -2 sigma2 nu / vartheta, -2 sigma2 log vartheta).
Eigen::Vector4d zeta_gradient(const CovarianceParams& params);

// ((grad zeta)^T I^{-1} grad zeta)^{-1}.
double microergodic_info(const FisherInfo& fisher);
double microergodic_info(const CovarianceParams& params, std::span<const Point> points,
                         const FisherOptions& options = {});

// Top eigenpair of a symmetric matrix; the largest-magnitude component of delta_star is
// positive. Throws DomainError if the input is not symmetric to 1e-10 relative.
InfluenceResult local_influence(const Eigen::Matrix4d& fisher);
inline InfluenceResult local_influence(const FisherInfo& fisher) {
  return local_influence(fisher.matrix);
}

struct SurfaceGrid {
  std::vector<double> vartheta;
  std::vector<double> nu;

  std::size_t size() const { return vartheta.size() * nu.size(); }
  // Inclusive arithmetic sequence lo, lo + step, ..., <= hi (with a 1e-9 step slack).
  static std::vector<double> sequence(double lo, double hi, double step);
};

struct SurfaceRow {
  double vartheta = 0.0;
  double nu = 0.0;
  std::optional<InfoVector> info;
  std::optional<double> info_zeta;
  std::string status = "ok";  // "ok" or the error message for this grid point
};

// One row per (vartheta, nu) in vartheta-major order, sigma2 and tau2 taken from `base`.
// Failures are recorded per row. Rows may be computed concurrently; order is fixed.
std::vector<SurfaceRow> info_surface(const CovarianceParams& base, std::span<const Point> points,
                                     const SurfaceGrid& grid, const FisherOptions& options = {});

struct SampleSizeRow {
  int n = 0;
  double r_max = 0.0;
  std::optional<InfoVector> info;
  std::optional<double> info_zeta;
  std::string status = "ok";
};

// Information at each sample size; make_design(n) builds the design, which is rescaled by
// its region diameter before evaluation.
std::vector<SampleSizeRow> info_vs_sample_size(
    const CovarianceParams& params, std::span<const int> sizes,
    const std::function<SamplingDesign(int)>& make_design, const FisherOptions& options = {});

}  // namespace maternfi
