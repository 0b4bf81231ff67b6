#pragma once

// Gaussian log-likelihood for z = F beta + e, e ~ N(0, Psi(eta)), maximum
// likelihood over eta with beta concentrated out by GLS, profile
// log-likelihoods and a finite-difference observed information matrix.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "maternfi/design.hpp"
#include "maternfi/matern.hpp"

namespace maternfi {

enum class Transform { None, Sqrt, Log };

std::string_view to_string(Transform t);
// "none", "sqrt", "log"; throws ConfigError otherwise.
Transform transform_from_string(std::string_view name);
// Throws DomainError for values outside the transform's domain (negative for sqrt,
// non-positive for log).
double apply_transform(Transform t, double value);

struct GeoDataset {
  SamplingDesign design;
  Eigen::MatrixXd covariates;  // n x p, first column ones by convention
  Eigen::VectorXd z;
  Transform transform = Transform::None;  // already applied to z

  std::size_t size() const { return design.size(); }
  // Row counts agree, covariates have full column rank p <= n, values are finite.
  void validate() const;
};

// Dataset with an intercept-only mean.
GeoDataset make_dataset(SamplingDesign design, Eigen::VectorXd z);

// -1/2 [n log 2 pi + log det Psi + (z - F beta)^T Psi^{-1} (z - F beta)].
// Throws FactorizationError when Psi is not positive definite.
double loglik(const CovarianceParams& params, const Eigen::VectorXd& beta, const GeoDataset& data);

struct ProfiledBeta {
  Eigen::VectorXd beta;
  double loglik = 0.0;
};

// beta_hat = (F^T Psi^{-1} F)^{-1} F^T Psi^{-1} z and the log-likelihood there.
ProfiledBeta profile_beta(const CovarianceParams& params, const GeoDataset& data);

// true = held at its initial value.
using FixedMask = std::array<bool, 4>;

// Parses "nu" or "nu=0.5"; sets the mask bit and, with a value, the parameter.
void apply_fix(std::string_view spec, FixedMask& mask, CovarianceParams& params);

struct FitOptions {
  int max_iterations = 4000;    // simplex iterations per start
  double simplex_tol = 1e-7;    // simplex size in log coordinates
  double loglik_tol = 1e-8;     // objective change between restarts
  double initial_step = 0.3;    // initial simplex step in log coordinates
  int starts = 3;               // 1: init; 2: + vartheta halved; 3: + nu doubled
  bool polish = true;           // quasi-Newton refinement of the best start
};

struct FitResult {
  CovarianceParams params_hat;
  Eigen::VectorXd beta_hat;
  double loglik = 0.0;
  FixedMask fixed{};
  bool converged = false;
  int iterations = 0;   // simplex iterations, summed over starts and restarts
  int evaluations = 0;  // log-likelihood evaluations
};

// Maximizes the beta-profiled log-likelihood over the free entries of eta, searching in
// log coordinates. Fixed entries are returned unchanged; tau2 = 0 is only allowed fixed.
FitResult mle_fit(const GeoDataset& data, const CovarianceParams& init, const FixedMask& fixed = {},
                  const FitOptions& options = {});

// Negative beta-profiled log-likelihood as a function of the log of the free parameters.
// Returns `penalty` where Psi cannot be factorized or the parameters leave the search box.
class ProfiledObjective {
 public:
  ProfiledObjective(const GeoDataset& data, const CovarianceParams& base, const FixedMask& fixed);

  inline static constexpr double penalty = 1e100;

  int dimension() const { return static_cast<int>(free_.size()); }
  const std::vector<Param>& free_params() const { return free_; }
  Eigen::VectorXd to_log(const CovarianceParams& p) const;
  CovarianceParams from_log(const Eigen::VectorXd& x) const;
  double operator()(const Eigen::VectorXd& x) const;
  long evaluations() const { return evaluations_; }

 private:
  const GeoDataset* data_;
  CovarianceParams base_;
  std::vector<Param> free_;
  mutable long evaluations_ = 0;
};

struct ProfileRow {
  std::vector<double> values;  // one per profiled parameter
  CovarianceParams params;     // profiled values plus nuisance estimates
  Eigen::VectorXd beta;
  double loglik = 0.0;
  bool converged = false;
  std::string status = "ok";
};

// Profile over one or two parameters: for each point of the product grid (first axis
// outermost) the remaining free parameters are maximized, starting from `start` and from
// the previous row's solution. `fixed` holds further parameters fixed.
std::vector<ProfileRow> profile_loglik(const GeoDataset& data, std::span<const Param> which,
                                       const std::vector<std::vector<double>>& axes,
                                       const CovarianceParams& start, const FixedMask& fixed = {},
                                       const FitOptions& options = {});

struct ObservedInfo {
  Eigen::MatrixXd matrix;     // over free parameters, natural scale
  std::vector<Param> params;  // row/column labels
  std::vector<double> steps;  // absolute step per parameter
  bool positive_definite = false;
};

// Central-difference Hessian of f at x with per-coordinate steps h, symmetrized.
Eigen::MatrixXd central_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                                const Eigen::VectorXd& x, const Eigen::VectorXd& h);

// Negative Hessian of the beta-profiled log-likelihood in (sigma2, tau2, vartheta, nu) over
// the free parameters, step rel_step * |eta_k|.
ObservedInfo observed_info_fd(const GeoDataset& data, const CovarianceParams& params_hat,
                              const FixedMask& fixed = {}, double rel_step = 1e-4);

inline double nugget_to_sill(const CovarianceParams& p) { return p.nugget_to_sill(); }

// z = F beta + L e with L L^T = Psi and e standard normal from Rng(seed). An empty
// covariate matrix means an intercept-only mean.
GeoDataset simulate_dataset(const CovarianceParams& params, const SamplingDesign& design,
                            const Eigen::VectorXd& beta, std::uint64_t seed,
                            const Eigen::MatrixXd& covariates = {});

}  // namespace maternfi
