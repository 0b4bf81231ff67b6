#include "maternfi/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "maternfi/errors.hpp"
#include "maternfi/parallel.hpp"

namespace maternfi {

namespace {

using Eigen::MatrixXd;

std::string describe(const CovarianceParams& p) {
  return "(sigma2=" + std::to_string(p.sigma2) + ", tau2=" + std::to_string(p.tau2) +
         ", vartheta=" + std::to_string(p.vartheta) + ", nu=" + std::to_string(p.nu) + ")";
}

[[noreturn]] void report_factorization_failure(const CovarianceParams& params,
                                               std::span<const Point> points) {
  if (auto dup = find_duplicate(points)) {
    throw FactorizationError("covariance matrix is singular: points " +
                                 std::to_string(dup->first) + " and " +
                                 std::to_string(dup->second) + " coincide",
                             dup->first, dup->second);
  }
  throw FactorizationError("covariance matrix is not numerically positive definite at " +
                           describe(params));
}

// Fills the correlation matrix and, when requested, both correlation derivatives.
void assemble(const CovarianceParams& params, std::span<const Point> points,
              const FisherOptions& options, MatrixXd& corr, MatrixXd* d_vartheta,
              MatrixXd* d_nu) {
  const auto n = static_cast<Eigen::Index>(points.size());
  const MaternKernel kernel(params.vartheta, params.nu, options.quadrature);
  corr.setIdentity(n, n);
  if (d_vartheta) d_vartheta->setZero(n, n);
  if (d_nu) d_nu->setZero(n, n);
  const bool derivs = d_vartheta != nullptr;

  parallel_for(points.size(), options.threads, [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double r = distance(points[row], points[static_cast<std::size_t>(j)]);
      if (derivs) {
        const MaternTerms t = kernel.terms(r);
        corr(i, j) = corr(j, i) = t.corr;
        (*d_vartheta)(i, j) = (*d_vartheta)(j, i) = t.d_vartheta;
        (*d_nu)(i, j) = (*d_nu)(j, i) = t.d_nu;
      } else {
        corr(i, j) = corr(j, i) = kernel.corr(r);
      }
    }
  });
}

}  // namespace

std::uint64_t design_fingerprint(std::span<const Point> points) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const Point& p : points) {
    for (double v : {p.x, p.y}) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof v);
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
      }
    }
  }
  return h;
}

MatrixXd cov_matrix(const CovarianceParams& params, std::span<const Point> points) {
  params.validate();
  MatrixXd psi;
  assemble(params, points, {}, psi, nullptr, nullptr);
  psi *= params.sigma2;
  psi.diagonal().array() += params.tau2;
  return psi;
}

std::array<MatrixXd, 4> cov_matrix_derivs(const CovarianceParams& params,
                                          std::span<const Point> points,
                                          const FisherOptions& options) {
  params.validate();
  std::array<MatrixXd, 4> d;
  assemble(params, points, options, d[0], &d[2], &d[3]);
  const auto n = static_cast<Eigen::Index>(points.size());
  d[1] = MatrixXd::Identity(n, n);
  d[2] *= params.sigma2;
  d[3] *= params.sigma2;
  return d;
}

FisherInfo fisher_matrix(const CovarianceParams& params, std::span<const Point> points,
                         const FisherOptions& options) {
  if (points.empty()) throw DesignError("fisher_matrix: design has no points");
  auto derivs = cov_matrix_derivs(params, points, options);

  MatrixXd psi = params.sigma2 * derivs[0];
  psi.diagonal().array() += params.tau2;
  const Eigen::LLT<MatrixXd> llt(psi);
  if (llt.info() != Eigen::Success) report_factorization_failure(params, points);

  // W_k = Psi^{-1} Psi_k, overwriting the derivative matrices.
  for (auto& w : derivs) w = llt.solve(w);

  FisherInfo out;
  out.params = params;
  out.design_size = points.size();
  out.design_hash = design_fingerprint(points);
  for (int k = 0; k < 4; ++k) {
    for (int l = k; l < 4; ++l) {
      const double v = 0.5 * (derivs[k].array() * derivs[l].transpose().array()).sum();
      out.matrix(k, l) = v;
      out.matrix(l, k) = v;
    }
  }
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  return out;
}

double equilibrated_rcond(const Eigen::Matrix4d& fisher) {
  const Eigen::Vector4d diag = fisher.diagonal();
  if ((diag.array() <= 0.0).any() || !diag.allFinite()) return 0.0;
  const Eigen::Vector4d scale = diag.array().rsqrt();
  const Eigen::Matrix4d eq = scale.asDiagonal() * fisher * scale.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(eq, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(3);
  if (!(hi > 0.0) || !(lo > 0.0)) return 0.0;
  return lo / hi;
}

namespace {

// Inverse of a positive definite 4x4 after the conditioning check.
Eigen::Matrix4d checked_inverse(const Eigen::Matrix4d& fisher) {
  const double rcond = equilibrated_rcond(fisher);
  if (!(rcond > kMinReciprocalCondition)) {
    throw SingularInformationError(
        "Fisher information matrix is singular (reciprocal condition " + std::to_string(rcond) +
            ")",
        rcond);
  }
  const Eigen::Vector4d scale = fisher.diagonal().array().rsqrt();
  const Eigen::Matrix4d eq = scale.asDiagonal() * fisher * scale.asDiagonal();
  const Eigen::Matrix4d eq_inv = eq.llt().solve(Eigen::Matrix4d::Identity());
  return scale.asDiagonal() * eq_inv * scale.asDiagonal();
}

}  // namespace

InfoVector info_vector(const Eigen::Matrix4d& fisher) {
  const Eigen::Matrix4d inv = checked_inverse(fisher);
  return {1.0 / inv(0, 0), 1.0 / inv(1, 1), 1.0 / inv(2, 2), 1.0 / inv(3, 3)};
}

InfoVector info_vector(const FisherInfo& fisher) { return info_vector(fisher.matrix); }

Eigen::Vector4d zeta_gradient(const CovarianceParams& p) {
  const double scale = std::pow(p.vartheta, -2.0 * p.nu);
  return scale * Eigen::Vector4d(1.0, 0.0, -2.0 * p.sigma2 * p.nu / p.vartheta,
                                 -2.0 * p.sigma2 * std::log(p.vartheta));
}

double microergodic_info(const FisherInfo& fisher) {
  const Eigen::Matrix4d inv = checked_inverse(fisher.matrix);
  const Eigen::Vector4d g = zeta_gradient(fisher.params);
  return 1.0 / g.dot(inv * g);
}

double microergodic_info(const CovarianceParams& params, std::span<const Point> points,
                         const FisherOptions& options) {
  return microergodic_info(fisher_matrix(params, points, options));
}

InfluenceResult local_influence(const Eigen::Matrix4d& fisher) {
  if (!fisher.allFinite()) throw DomainError("local_influence: matrix has non-finite entries");
  const double scale = std::max(fisher.cwiseAbs().maxCoeff(), 1e-300);
  if ((fisher - fisher.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw DomainError("local_influence: matrix is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(fisher);
  if (eig.info() != Eigen::Success) {
    throw DomainError("local_influence: eigen-decomposition failed");
  }
  InfluenceResult out;
  out.lambda_star = eig.eigenvalues()(3);
  out.delta_star = eig.eigenvectors().col(3).normalized();
  Eigen::Index arg = 0;
  out.delta_star.cwiseAbs().maxCoeff(&arg);
  if (out.delta_star(arg) < 0.0) out.delta_star = -out.delta_star;
  const double gap = eig.eigenvalues()(3) - eig.eigenvalues()(2);
  out.degenerate = gap <= 1e-10 * std::max(std::fabs(out.lambda_star), 1e-300);
  return out;
}

std::vector<double> SurfaceGrid::sequence(double lo, double hi, double step) {
  if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    throw ConfigError("grid", "need finite lo <= hi and step > 0");
  }
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  out.reserve(count);
  for (long k = 0; k < count; ++k) out.push_back(lo + k * step);
  return out;
}

std::vector<SurfaceRow> info_surface(const CovarianceParams& base, std::span<const Point> points,
                                     const SurfaceGrid& grid, const FisherOptions& options) {
  std::vector<SurfaceRow> rows(grid.size());
  const std::size_t n_nu = grid.nu.size();
  for (std::size_t a = 0; a < grid.vartheta.size(); ++a) {
    for (std::size_t b = 0; b < n_nu; ++b) {
      rows[a * n_nu + b].vartheta = grid.vartheta[a];
      rows[a * n_nu + b].nu = grid.nu[b];
    }
  }
  FisherOptions inner = options;
  inner.threads = 1;
  parallel_for(rows.size(), options.threads, [&](std::size_t k) {
    SurfaceRow& row = rows[k];
    try {
      CovarianceParams p = base;
      p.vartheta = row.vartheta;
      p.nu = row.nu;
      const FisherInfo fi = fisher_matrix(p, points, inner);
      row.info = info_vector(fi);
      row.info_zeta = microergodic_info(fi);
    } catch (const std::exception& e) {
      row.info.reset();
      row.info_zeta.reset();
      row.status = e.what();
    }
  });
  return rows;
}

std::vector<SampleSizeRow> info_vs_sample_size(
    const CovarianceParams& params, std::span<const int> sizes,
    const std::function<SamplingDesign(int)>& make_design, const FisherOptions& options) {
  std::vector<SampleSizeRow> rows;
  rows.reserve(sizes.size());
  for (int n : sizes) {
    SampleSizeRow row;
    row.n = n;
    try {
      const SamplingDesign design = make_design(n);
      design.validate();
      const RescaledDesign scaled = rescale(design);
      row.r_max = scaled.r_max;
      const FisherInfo fi = fisher_matrix(params, scaled.points, options);
      row.info = info_vector(fi);
      row.info_zeta = microergodic_info(fi);
    } catch (const std::exception& e) {
      row.status = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace maternfi
