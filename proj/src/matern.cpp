#include "maternfi/matern.hpp"

#include <cmath>
#include <string>

#include "maternfi/errors.hpp"

namespace maternfi {

Param param_from_name(std::string_view name) {
  for (Param p : kAllParams) {
    if (kParamNames[index_of(p)] == name) return p;
  }
  throw ConfigError("parameter", "unknown parameter name '" + std::string(name) +
                                     "' (expected sigma2, tau2, vartheta or nu)");
}

void CovarianceParams::validate() const {
  auto fail = [](const char* field, double v, const char* rule) {
    throw DomainError(std::string("CovarianceParams.") + field + " must be " + rule + ", got " +
                      std::to_string(v));
  };
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) fail("sigma2", sigma2, "finite and > 0");
  if (!(tau2 >= 0.0) || !std::isfinite(tau2)) fail("tau2", tau2, "finite and >= 0");
  if (!(vartheta > 0.0) || !std::isfinite(vartheta)) fail("vartheta", vartheta, "finite and > 0");
  if (!(nu > 0.0) || !std::isfinite(nu)) fail("nu", nu, "finite and > 0");
}

double CovarianceParams::zeta() const { return sigma2 / std::pow(vartheta, 2.0 * nu); }

double CovarianceParams::get(Param p) const {
  switch (p) {
    case Param::Sigma2: return sigma2;
    case Param::Tau2: return tau2;
    case Param::Vartheta: return vartheta;
    case Param::Nu: return nu;
  }
  return 0.0;
}

void CovarianceParams::set(Param p, double value) {
  switch (p) {
    case Param::Sigma2: sigma2 = value; break;
    case Param::Tau2: tau2 = value; break;
    case Param::Vartheta: vartheta = value; break;
    case Param::Nu: nu = value; break;
  }
}

MaternKernel::MaternKernel(double vartheta, double nu, QuadratureSpec spec)
    : vartheta_(vartheta), nu_(nu), spec_(spec) {
  if (!(vartheta > 0.0) || !std::isfinite(vartheta)) {
    throw DomainError("matern: vartheta must be finite and > 0, got " + std::to_string(vartheta));
  }
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw DomainError("matern: nu must be finite and > 0, got " + std::to_string(nu));
  }
  spec_.validate();
  log_two_over_gamma_ = std::log(2.0) - std::lgamma(nu);
  digamma_nu_ = digamma(nu);
}

void MaternKernel::check_distance(double r) const {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw DomainError("matern: distance must be finite and >= 0, got " + std::to_string(r));
  }
}

double MaternKernel::scaled_arg(double r) const { return 2.0 * std::sqrt(nu_) * r / vartheta_; }

double MaternKernel::corr(double r) const {
  check_distance(r);
  if (r == 0.0) return 1.0;
  const double w = scaled_arg(r);
  const double log_h = log_two_over_gamma_ + nu_ * std::log(0.5 * w);
  try {
    return std::exp(log_h) * bessel_k(nu_, w);
  } catch (const OverflowError&) {
    // K_nu(w) beyond DBL_MAX means w^nu is below 1e-308: correlation is 1 to double precision.
    return 1.0;
  }
}

double MaternKernel::d_vartheta(double r) const {
  check_distance(r);
  if (r == 0.0) return 0.0;
  const double w = scaled_arg(r);
  const double h = std::exp(log_two_over_gamma_ + nu_ * std::log(0.5 * w));
  try {
    return (w / vartheta_) * h * bessel_k(nu_ - 1.0, w);
  } catch (const OverflowError&) {
    return 0.0;
  }
}

double MaternKernel::d_nu(double r) const { return terms(r).d_nu; }

MaternTerms MaternKernel::terms(double r) const {
  check_distance(r);
  if (r == 0.0) return {1.0, 0.0, 0.0};

  const double w = scaled_arg(r);
  const double log_half_w = std::log(0.5 * w);
  const double h = std::exp(log_two_over_gamma_ + nu_ * log_half_w);

  double k_nu = 0.0;
  double k_nu_minus_1 = 0.0;
  try {
    k_nu = bessel_k(nu_, w);
    k_nu_minus_1 = bessel_k(nu_ - 1.0, w);
  } catch (const OverflowError&) {
    return {1.0, 0.0, 0.0};
  }
  if (w < 1e-6) {
    throw PrecisionWarning("matern: scaled distance " + std::to_string(w) +
                           " below 1e-6 in the smoothness derivative");
  }

  MaternTerms out;
  out.corr = h * k_nu;
  out.d_vartheta = (w / vartheta_) * h * k_nu_minus_1;

  const auto integral = detail::bessel_k_dnu_scaled(nu_, w, spec_);
  const double dk_dnu = integral.scaled_value * std::exp(-w);
  // r / (vartheta sqrt(nu)) == w / (2 nu)
  out.d_nu = (log_half_w - digamma_nu_) * out.corr -
             h * ((0.5 * w / nu_) * k_nu_minus_1 - dk_dnu);
  return out;
}

double matern_corr(double vartheta, double nu, double r) {
  return MaternKernel(vartheta, nu).corr(r);
}

double matern_cov(const CovarianceParams& params, double r, bool same_location) {
  params.validate();
  const double c = params.sigma2 * matern_corr(params.vartheta, params.nu, r);
  return same_location ? c + params.tau2 : c;
}

double dcorr_dvartheta(double vartheta, double nu, double r) {
  return MaternKernel(vartheta, nu).d_vartheta(r);
}

double dcorr_dnu(double vartheta, double nu, double r, const QuadratureSpec& spec) {
  return MaternKernel(vartheta, nu, spec).d_nu(r);
}

}  // namespace maternfi
