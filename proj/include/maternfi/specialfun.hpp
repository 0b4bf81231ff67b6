#pragma once

// Modified Bessel function of the second kind K_nu(x) for real order, its
// derivatives in x and in the order nu, and the digamma function.

namespace maternfi {

// Controls the adaptive quadrature behind the order-derivative of K_nu.
struct QuadratureSpec {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_subdivisions = 200;

  // Throws DomainError unless abs_tol > 0, rel_tol > 0 and max_subdivisions >= 1.
  void validate() const;
};

// K_nu(x) for x > 0. Negative orders fold onto |nu|.
// Throws DomainError for x <= 0 and OverflowError when K_nu(x) is not a finite double.
double bessel_k(double nu, double x);

// d/dx K_nu(x) = -(K_{nu-1}(x) + (nu/x) K_nu(x)).
double bessel_k_dx(double nu, double x);

// d/dnu K_nu(x) = int_0^inf t exp(-x cosh t) sinh(nu t) dt, by adaptive quadrature.
// Requires nu > 0 and x > 0. Throws PrecisionWarning for x < 1e-6 and
// QuadratureError when the tolerance is not met.
double bessel_k_dnu(double nu, double x, const QuadratureSpec& spec = {});

// Exact order-derivative at a non-negative integer order m:
// (m!/2) sum_{j=0}^{m-1} (x/2)^(j-m) K_j(x) / (j! (m-j)).
double bessel_k_dnu_integer(int m, double x);

// psi(x) for x > 0.
double digamma(double x);

// Upper integration limit for the order-derivative integral: the point past
// which x (cosh t - 1) - nu t - ln t stays above the double underflow exponent.
double dnu_truncation_point(double nu, double x);

namespace detail {

struct DnuIntegral {
  double scaled_value;  // e^x * d/dnu K_nu(x)
  double scaled_error;
  double t_max;
  int subdivisions;
};

// Exponentially scaled order-derivative; no small-argument check.
DnuIntegral bessel_k_dnu_scaled(double nu, double x, const QuadratureSpec& spec);

}  // namespace detail

}  // namespace maternfi
