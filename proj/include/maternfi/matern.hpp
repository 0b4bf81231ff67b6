#pragma once

// Matérn correlation in the Handcock-Stein parametrization
//
//   K(r) = 2^{1-nu} / Gamma(nu) * (2 sqrt(nu) r / vartheta)^nu * K_nu(2 sqrt(nu) r / vartheta)
//
// and its partial derivatives in the range vartheta and smoothness nu.

#include <array>
#include <string_view>

#include "maternfi/specialfun.hpp"

namespace maternfi {

// Index of a covariance parameter; also the row/column order of every 4x4 matrix.
enum class Param : int { Sigma2 = 0, Tau2 = 1, Vartheta = 2, Nu = 3 };

inline constexpr std::array<Param, 4> kAllParams = {Param::Sigma2, Param::Tau2, Param::Vartheta,
                                                    Param::Nu};
inline constexpr std::array<std::string_view, 4> kParamNames = {"sigma2", "tau2", "vartheta",
                                                                "nu"};

constexpr int index_of(Param p) { return static_cast<int>(p); }

// Parses "sigma2" / "tau2" / "vartheta" / "nu"; throws ConfigError otherwise.
Param param_from_name(std::string_view name);

// eta = (sigma2, tau2, vartheta, nu).
struct CovarianceParams {
  double sigma2 = 1.0;   // partial sill
  double tau2 = 0.0;     // nugget
  double vartheta = 1.0; // range, distance units
  double nu = 0.5;       // smoothness

  // Throws DomainError naming the first field that violates
  // sigma2 > 0, tau2 >= 0, vartheta > 0, nu > 0.
  void validate() const;

  double sill() const { return sigma2 + tau2; }
  double nugget_to_sill() const { return tau2 / (sigma2 + tau2); }
  // Microergodic combination sigma2 / vartheta^(2 nu).
  double zeta() const;

  double get(Param p) const;
  void set(Param p, double value);
  std::array<double, 4> to_array() const { return {sigma2, tau2, vartheta, nu}; }
  static CovarianceParams from_array(const std::array<double, 4>& a) {
    return {a[0], a[1], a[2], a[3]};
  }
};

// Correlation and both parameter derivatives at one distance.
struct MaternTerms {
  double corr = 1.0;
  double d_vartheta = 0.0;
  double d_nu = 0.0;
};

// Matérn correlation with the parameter-only factors (Gamma, digamma) hoisted,
// for evaluating many distances at one (vartheta, nu).
class MaternKernel {
 public:
  MaternKernel(double vartheta, double nu, QuadratureSpec spec = {});

  double vartheta() const { return vartheta_; }
  double nu() const { return nu_; }

  double corr(double r) const;
  double d_vartheta(double r) const;
  double d_nu(double r) const;
  // All three at once, sharing the Bessel evaluations.
  MaternTerms terms(double r) const;

 private:
  double scaled_arg(double r) const;
  void check_distance(double r) const;

  double vartheta_;
  double nu_;
  double log_two_over_gamma_;  // log(2 / Gamma(nu))
  double digamma_nu_;
  QuadratureSpec spec_;
};

double matern_corr(double vartheta, double nu, double r);

// sigma2 K(r) + tau2 [same_location].
double matern_cov(const CovarianceParams& params, double r, bool same_location);

// 4 nu^{(nu+1)/2} r^{nu+1} / (Gamma(nu) vartheta^{nu+2}) K_{nu-1}(2 sqrt(nu) r / vartheta).
double dcorr_dvartheta(double vartheta, double nu, double r);

// [log(sqrt(nu) r / vartheta) - psi(nu)] K(r)
//   - h(nu) [ r/(vartheta sqrt(nu)) K_{nu-1}(w) - int_0^inf t sinh(nu t) e^{-w cosh t} dt ],
// with w = 2 r sqrt(nu) / vartheta and h(nu) = 2/Gamma(nu) (sqrt(nu) r / vartheta)^nu.
double dcorr_dnu(double vartheta, double nu, double r, const QuadratureSpec& spec = {});

}  // namespace maternfi
