#pragma once

// Reference computations used only by the tests. Each one takes a route that
// does not share code with the implementation it is compared against.

#include <array>
#include <cmath>
#include <functional>
#include <span>

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>

#include "maternfi/design.hpp"
#include "maternfi/fisher.hpp"
#include "maternfi/matern.hpp"
#include "maternfi/specialfun.hpp"

namespace oracle {

// K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt by exp-sinh quadrature.
inline double bessel_k_integral(double nu, double x) {
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [nu, x](double t) {
    const double e = nu * t - x * std::cosh(t);
    if (e < -745.0 || !std::isfinite(e)) return 0.0;
    return 0.5 * (std::exp(e) + std::exp(-nu * t - x * std::cosh(t)));
  };
  return integrator.integrate(f, 1e-15);
}

// d/dnu K_nu(x) = int_0^inf t exp(-x cosh t) sinh(nu t) dt by exp-sinh quadrature.
inline double bessel_k_dnu_integral(double nu, double x) {
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [nu, x](double t) {
    const double e = nu * t - x * std::cosh(t);
    if (e < -745.0 || !std::isfinite(e)) return 0.0;
    return 0.5 * t * (std::exp(e) - std::exp(-nu * t - x * std::cosh(t)));
  };
  return integrator.integrate(f, 1e-15);
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double relative_error(double value, double reference) {
  return std::fabs(value - reference) / std::fabs(reference);
}

// d/dnu of the correlation by the chain rule on K(r) = h(nu) K_nu(b(nu)), b = 2 r sqrt(nu)/vartheta:
// (1/2 + log(sqrt(nu) r/vartheta) - psi(nu)) K(r) + h(nu) [dK_nu/dnu(b) + dK_nu/dx(b) r/(vartheta sqrt(nu))].
// `dk_dnu` supplies the order-derivative of K at fixed argument.
inline double dcorr_dnu_chain_rule(double vartheta, double nu, double r,
                                   const std::function<double(double, double)>& dk_dnu) {
  const double b = 2.0 * r * std::sqrt(nu) / vartheta;
  const double h = 2.0 / std::tgamma(nu) * std::pow(std::sqrt(nu) * r / vartheta, nu);
  const double k = h * maternfi::bessel_k(nu, b);
  const double dk_db = maternfi::bessel_k_dx(nu, b);
  return (0.5 + std::log(std::sqrt(nu) * r / vartheta) - maternfi::digamma(nu)) * k +
         h * (dk_dnu(nu, b) + dk_db * r / (vartheta * std::sqrt(nu)));
}

// Correlation straight from the defining formula with std::tgamma and std::pow.
inline double matern_corr_direct(double vartheta, double nu, double r) {
  if (r == 0.0) return 1.0;
  const double w = 2.0 * std::sqrt(nu) * r / vartheta;
  return std::pow(w, nu) * maternfi::bessel_k(nu, w) / (std::pow(2.0, nu - 1.0) * std::tgamma(nu));
}

// Psi = sigma2 Sigma + tau2 I, built with the direct correlation formula.
inline Eigen::MatrixXd cov_matrix_direct(const maternfi::CovarianceParams& p,
                                         std::span<const maternfi::Point> pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double r = maternfi::distance(pts[i], pts[j]);
      m(i, j) = p.sigma2 * matern_corr_direct(p.vartheta, p.nu, r) + (i == j ? p.tau2 : 0.0);
    }
  }
  return m;
}

// Fisher matrix with Psi_k from central differences of Psi (relative step `rel`)
// and a dense explicit inverse: I_kl = 1/2 tr(Psi^-1 Psi_k Psi^-1 Psi_l).
inline Eigen::Matrix4d fisher_brute_force(const maternfi::CovarianceParams& p,
                                          std::span<const maternfi::Point> pts,
                                          double rel = 1e-5) {
  const Eigen::MatrixXd inv = cov_matrix_direct(p, pts).inverse();
  std::array<Eigen::MatrixXd, 4> dpsi;
  for (int k = 0; k < 4; ++k) {
    const auto param = static_cast<maternfi::Param>(k);
    const double v = p.get(param);
    const double h = rel * std::max(std::fabs(v), 1.0);
    maternfi::CovarianceParams up = p;
    maternfi::CovarianceParams dn = p;
    up.set(param, v + h);
    dn.set(param, v - h);
    if (param == maternfi::Param::Tau2 && v - h < 0.0) {
      dn.set(param, v);
      dpsi[k] = (cov_matrix_direct(up, pts) - cov_matrix_direct(dn, pts)) / h;
    } else {
      dpsi[k] = (cov_matrix_direct(up, pts) - cov_matrix_direct(dn, pts)) / (2.0 * h);
    }
  }
  Eigen::Matrix4d out;
  for (int k = 0; k < 4; ++k) {
    for (int l = 0; l < 4; ++l) {
      out(k, l) = 0.5 * (inv * dpsi[k] * inv * dpsi[l]).trace();
    }
  }
  return out;
}

}  // namespace oracle
