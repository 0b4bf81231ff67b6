#include "maternfi/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include "maternfi/errors.hpp"
#include "maternfi/fisher.hpp"
#include "maternfi/random.hpp"

namespace maternfi {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::None: return "none";
    case Transform::Sqrt: return "sqrt";
    case Transform::Log: return "log";
  }
  return "none";
}

Transform transform_from_string(std::string_view name) {
  if (name == "none") return Transform::None;
  if (name == "sqrt") return Transform::Sqrt;
  if (name == "log") return Transform::Log;
  throw ConfigError("transform", "expected none, sqrt or log, got '" + std::string(name) + "'");
}

double apply_transform(Transform t, double value) {
  switch (t) {
    case Transform::None:
      return value;
    case Transform::Sqrt:
      if (!(value >= 0.0)) throw DomainError("sqrt transform needs z >= 0, got " + std::to_string(value));
      return std::sqrt(value);
    case Transform::Log:
      if (!(value > 0.0)) throw DomainError("log transform needs z > 0, got " + std::to_string(value));
      return std::log(value);
  }
  return value;
}

void GeoDataset::validate() const {
  design.validate();
  const auto n = static_cast<Eigen::Index>(design.size());
  if (z.size() != n) {
    throw ConfigError("z", std::to_string(z.size()) + " observations for " + std::to_string(n) +
                               " locations");
  }
  if (covariates.rows() != n) {
    throw ConfigError("covariates", std::to_string(covariates.rows()) + " rows for " +
                                        std::to_string(n) + " locations");
  }
  if (covariates.cols() < 1 || covariates.cols() > n) {
    throw ConfigError("covariates", "need 1 <= p <= n columns, got " +
                                        std::to_string(covariates.cols()));
  }
  if (!z.allFinite()) throw ConfigError("z", "non-finite observation");
  if (!covariates.allFinite()) throw ConfigError("covariates", "non-finite entry");
  const Eigen::ColPivHouseholderQR<MatrixXd> qr(covariates);
  if (qr.rank() < covariates.cols()) {
    throw ConfigError("covariates", "matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                                        " < " + std::to_string(covariates.cols()) + ")");
  }
}

GeoDataset make_dataset(SamplingDesign design, VectorXd z) {
  GeoDataset d;
  const auto n = static_cast<Eigen::Index>(design.size());
  d.design = std::move(design);
  d.covariates = MatrixXd::Ones(n, 1);
  d.z = std::move(z);
  return d;
}

namespace {

Eigen::LLT<MatrixXd> factorize(const CovarianceParams& params, const GeoDataset& data) {
  Eigen::LLT<MatrixXd> llt(cov_matrix(params, data.design.points));
  if (llt.info() != Eigen::Success) {
    if (auto dup = find_duplicate(data.design.points)) {
      throw FactorizationError("covariance matrix is singular: points " +
                                   std::to_string(dup->first) + " and " +
                                   std::to_string(dup->second) + " coincide",
                               dup->first, dup->second);
    }
    throw FactorizationError("covariance matrix is not numerically positive definite");
  }
  return llt;
}

double gaussian_loglik(const Eigen::LLT<MatrixXd>& llt, const VectorXd& whitened_residual) {
  const auto n = static_cast<double>(whitened_residual.size());
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + logdet + whitened_residual.squaredNorm());
}

}  // namespace

double loglik(const CovarianceParams& params, const VectorXd& beta, const GeoDataset& data) {
  if (beta.size() != data.covariates.cols()) {
    throw ConfigError("beta", "length " + std::to_string(beta.size()) + " does not match " +
                                  std::to_string(data.covariates.cols()) + " covariates");
  }
  const auto llt = factorize(params, data);
  const VectorXd r = llt.matrixL().solve(data.z - data.covariates * beta);
  return gaussian_loglik(llt, r);
}

ProfiledBeta profile_beta(const CovarianceParams& params, const GeoDataset& data) {
  const auto llt = factorize(params, data);
  const MatrixXd a = llt.matrixL().solve(data.covariates);
  const VectorXd b = llt.matrixL().solve(data.z);
  const Eigen::ColPivHouseholderQR<MatrixXd> qr(a);
  if (qr.rank() < a.cols()) throw ConfigError("covariates", "matrix is rank deficient");
  ProfiledBeta out;
  out.beta = qr.solve(b);
  out.loglik = gaussian_loglik(llt, b - a * out.beta);
  return out;
}

void apply_fix(std::string_view spec, FixedMask& mask, CovarianceParams& params) {
  const auto eq = spec.find('=');
  const Param p = param_from_name(spec.substr(0, eq));
  mask[index_of(p)] = true;
  if (eq == std::string_view::npos) return;
  const std::string text(spec.substr(eq + 1));
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw ConfigError("fix", "cannot parse value '" + text + "'");
  }
  params.set(p, value);
}

// ---- objective ----

namespace {

constexpr double kLogScaleBound = 40.0;  // |log eta_k| for sigma2, tau2, vartheta
constexpr double kNuMin = 1e-2;
constexpr double kNuMax = 50.0;

}  // namespace

ProfiledObjective::ProfiledObjective(const GeoDataset& data, const CovarianceParams& base,
                                     const FixedMask& fixed)
    : data_(&data), base_(base) {
  for (Param p : kAllParams) {
    if (!fixed[index_of(p)]) free_.push_back(p);
  }
}

VectorXd ProfiledObjective::to_log(const CovarianceParams& p) const {
  VectorXd x(dimension());
  for (int k = 0; k < dimension(); ++k) x(k) = std::log(p.get(free_[k]));
  return x;
}

CovarianceParams ProfiledObjective::from_log(const VectorXd& x) const {
  CovarianceParams p = base_;
  for (int k = 0; k < dimension(); ++k) p.set(free_[k], std::exp(x(k)));
  return p;
}

double ProfiledObjective::operator()(const VectorXd& x) const {
  ++evaluations_;
  for (int k = 0; k < dimension(); ++k) {
    if (!std::isfinite(x(k))) return penalty;
    if (free_[k] == Param::Nu) {
      if (x(k) < std::log(kNuMin) || x(k) > std::log(kNuMax)) return penalty;
    } else if (std::fabs(x(k)) > kLogScaleBound) {
      return penalty;
    }
  }
  try {
    const double ll = profile_beta(from_log(x), *data_).loglik;
    return std::isfinite(ll) ? -ll : penalty;
  } catch (const std::exception&) {
    return penalty;
  }
}

// ---- optimizers ----

namespace {

struct GslVector {
  explicit GslVector(const VectorXd& v) : ptr(gsl_vector_alloc(static_cast<std::size_t>(v.size()))) {
    for (Eigen::Index i = 0; i < v.size(); ++i) gsl_vector_set(ptr, static_cast<std::size_t>(i), v(i));
  }
  ~GslVector() { gsl_vector_free(ptr); }
  GslVector(const GslVector&) = delete;
  GslVector& operator=(const GslVector&) = delete;
  gsl_vector* ptr;
};

VectorXd to_eigen(const gsl_vector* v) {
  VectorXd out(static_cast<Eigen::Index>(v->size));
  for (std::size_t i = 0; i < v->size; ++i) out(static_cast<Eigen::Index>(i)) = gsl_vector_get(v, i);
  return out;
}

double gsl_objective(const gsl_vector* v, void* params) {
  return (*static_cast<const ProfiledObjective*>(params))(to_eigen(v));
}

struct SearchResult {
  VectorXd x;
  double f = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// One simplex run to the size tolerance or the iteration budget.
SearchResult simplex_run(const ProfiledObjective& obj, const VectorXd& x0, double step,
                         const FitOptions& options, int budget) {
  const auto dim = static_cast<std::size_t>(obj.dimension());
  gsl_multimin_function fn{&gsl_objective, dim, const_cast<ProfiledObjective*>(&obj)};
  GslVector x(x0);
  GslVector steps(VectorXd::Constant(x0.size(), step));
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
  SearchResult out;
  gsl_multimin_fminimizer_set(s, &fn, x.ptr, steps.ptr);
  // Besides the size test, stop once a window of iterations gains less than loglik_tol:
  // along a direction where the objective flattens out (tau2 -> 0 in log scale) the
  // simplex would otherwise keep walking without ever shrinking.
  const int window = 10 * static_cast<int>(dim);
  double window_start = gsl_multimin_fminimizer_minimum(s);
  while (out.iterations < budget) {
    ++out.iterations;
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), options.simplex_tol) ==
        GSL_SUCCESS) {
      out.converged = true;
      break;
    }
    if (out.iterations % window == 0) {
      const double now = gsl_multimin_fminimizer_minimum(s);
      if (window_start - now <= options.loglik_tol) {
        out.converged = true;
        break;
      }
      window_start = now;
    }
  }
  out.x = to_eigen(gsl_multimin_fminimizer_x(s));
  out.f = gsl_multimin_fminimizer_minimum(s);
  gsl_multimin_fminimizer_free(s);
  return out;
}

// Simplex search restarted at its own optimum until a restart no longer improves the
// objective by more than loglik_tol; a collapsed simplex can otherwise stall off-optimum.
SearchResult simplex_search(const ProfiledObjective& obj, const VectorXd& x0,
                            const FitOptions& options) {
  SearchResult best{x0, obj(x0), 0, false};
  if (best.f >= ProfiledObjective::penalty) return best;
  double step = options.initial_step;
  for (int restart = 0; restart < 6; ++restart) {
    const int budget = options.max_iterations - best.iterations;
    if (budget <= 0) break;
    SearchResult r = simplex_run(obj, best.x, step, options, budget);
    const double gain = best.f - r.f;
    r.iterations += best.iterations;
    if (r.f <= best.f) {
      best.x = r.x;
      best.f = r.f;
    }
    best.iterations = r.iterations;
    best.converged = r.converged && restart > 0 && gain <= options.loglik_tol;
    if (best.converged) break;
    step = std::max(0.05, 0.25 * step);
  }
  return best;
}

VectorXd central_gradient(const ProfiledObjective& obj, const VectorXd& x, double h) {
  VectorXd g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    VectorXd up = x;
    VectorXd dn = x;
    up(k) += h;
    dn(k) -= h;
    g(k) = (obj(up) - obj(dn)) / (2.0 * h);
  }
  return g;
}

constexpr double kGradientStep = 1e-4;

void gsl_gradient(const gsl_vector* v, void* params, gsl_vector* g) {
  const auto& obj = *static_cast<const ProfiledObjective*>(params);
  const VectorXd grad = central_gradient(obj, to_eigen(v), kGradientStep);
  for (Eigen::Index k = 0; k < grad.size(); ++k) gsl_vector_set(g, static_cast<std::size_t>(k), grad(k));
}

void gsl_value_gradient(const gsl_vector* v, void* params, double* f, gsl_vector* g) {
  *f = gsl_objective(v, params);
  gsl_gradient(v, params, g);
}

// BFGS with central-difference gradients, started at x0.
SearchResult quasi_newton(const ProfiledObjective& obj, const VectorXd& x0) {
  const auto dim = static_cast<std::size_t>(obj.dimension());
  gsl_multimin_function_fdf fn{&gsl_objective, &gsl_gradient, &gsl_value_gradient, dim,
                               const_cast<ProfiledObjective*>(&obj)};
  GslVector x(x0);
  gsl_multimin_fdfminimizer* s =
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, dim);
  gsl_multimin_fdfminimizer_set(s, &fn, x.ptr, 1e-3, 0.1);
  SearchResult out;
  while (out.iterations < 100) {
    ++out.iterations;
    if (gsl_multimin_fdfminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_gradient(gsl_multimin_fdfminimizer_gradient(s), 1e-5) == GSL_SUCCESS) {
      out.converged = true;
      break;
    }
  }
  out.x = to_eigen(gsl_multimin_fdfminimizer_x(s));
  out.f = gsl_multimin_fdfminimizer_minimum(s);
  gsl_multimin_fdfminimizer_free(s);
  return out;
}

struct GslQuiet {
  GslQuiet() : previous(gsl_set_error_handler_off()) {}
  ~GslQuiet() { gsl_set_error_handler(previous); }
  gsl_error_handler_t* previous;
};

}  // namespace

FitResult mle_fit(const GeoDataset& data, const CovarianceParams& init, const FixedMask& fixed,
                  const FitOptions& options) {
  data.validate();
  init.validate();
  if (data.size() <= static_cast<std::size_t>(data.covariates.cols())) {
    throw ConfigError("data", "need more observations than covariates");
  }
  if (!fixed[index_of(Param::Tau2)] && init.tau2 <= 0.0) {
    throw ConfigError("tau2", "a free nugget needs a positive starting value");
  }
  if (options.max_iterations < 1 || options.starts < 1 || !(options.simplex_tol > 0.0) ||
      !(options.initial_step > 0.0)) {
    throw ConfigError("fit", "max_iterations, starts, simplex_tol and initial_step must be positive");
  }

  const GslQuiet quiet;
  const ProfiledObjective obj(data, init, fixed);
  FitResult out;
  out.fixed = fixed;

  if (obj.dimension() == 0) {
    const ProfiledBeta pb = profile_beta(init, data);
    out.params_hat = init;
    out.beta_hat = pb.beta;
    out.loglik = pb.loglik;
    out.converged = true;
    out.evaluations = 1;
    return out;
  }

  std::vector<CovarianceParams> starts{init};
  if (options.starts >= 2 && !fixed[index_of(Param::Vartheta)]) {
    CovarianceParams s = init;
    s.vartheta *= 0.5;
    starts.push_back(s);
  }
  if (options.starts >= 3 && !fixed[index_of(Param::Nu)]) {
    CovarianceParams s = init;
    s.nu *= 2.0;
    starts.push_back(s);
  }

  SearchResult best;
  for (const CovarianceParams& s : starts) {
    SearchResult r = simplex_search(obj, obj.to_log(s), options);
    out.iterations += r.iterations;
    if (r.f < best.f) best = std::move(r);
  }
  if (!(best.f < ProfiledObjective::penalty)) {
    throw FactorizationError("no starting point gives a positive definite covariance matrix");
  }

  if (options.polish) {
    const SearchResult q = quasi_newton(obj, best.x);
    if (q.f < best.f) {
      best.x = q.x;
      best.f = q.f;
      best.converged = best.converged || q.converged;
    }
  }

  out.params_hat = obj.from_log(best.x);
  // Fixed entries are copied back bit-for-bit rather than passing through exp(log(.)).
  for (Param p : kAllParams) {
    if (fixed[index_of(p)]) out.params_hat.set(p, init.get(p));
  }
  const ProfiledBeta pb = profile_beta(out.params_hat, data);
  out.beta_hat = pb.beta;
  out.loglik = pb.loglik;
  out.converged = best.converged;
  out.evaluations = static_cast<int>(obj.evaluations());
  return out;
}

std::vector<ProfileRow> profile_loglik(const GeoDataset& data, std::span<const Param> which,
                                       const std::vector<std::vector<double>>& axes,
                                       const CovarianceParams& start, const FixedMask& fixed,
                                       const FitOptions& options) {
  if (which.empty() || which.size() > 2) {
    throw ConfigError("profile", "profile over one or two parameters");
  }
  if (which.size() == 2 && which[0] == which[1]) {
    throw ConfigError("profile", "the two profiled parameters must differ");
  }
  if (axes.size() != which.size()) {
    throw ConfigError("grid", "need one value list per profiled parameter");
  }
  for (std::size_t a = 0; a < axes.size(); ++a) {
    if (axes[a].empty()) throw ConfigError("grid", "empty value list");
    for (double v : axes[a]) {
      const bool ok = which[a] == Param::Tau2 ? v >= 0.0 : v > 0.0;
      if (!ok || !std::isfinite(v)) {
        throw ConfigError("grid", std::string(kParamNames[index_of(which[a])]) +
                                      " value out of range: " + std::to_string(v));
      }
    }
  }

  FixedMask mask = fixed;
  for (Param p : which) mask[index_of(p)] = true;
  FitOptions single = options;
  single.starts = 1;

  const std::size_t n_inner = which.size() == 2 ? axes[1].size() : 1;
  const std::size_t total = axes[0].size() * n_inner;
  std::vector<ProfileRow> rows;
  rows.reserve(total);
  std::optional<CovarianceParams> previous;

  for (std::size_t k = 0; k < total; ++k) {
    ProfileRow row;
    row.values.push_back(axes[0][k / n_inner]);
    if (which.size() == 2) row.values.push_back(axes[1][k % n_inner]);

    std::vector<CovarianceParams> inits{start};
    if (previous) inits.push_back(*previous);
    std::optional<FitResult> best;
    std::string last_error;
    for (CovarianceParams init : inits) {
      for (std::size_t a = 0; a < which.size(); ++a) init.set(which[a], row.values[a]);
      try {
        FitResult fit = mle_fit(data, init, mask, single);
        if (!best || fit.loglik > best->loglik) best = std::move(fit);
      } catch (const std::exception& e) {
        last_error = e.what();
      }
    }
    if (best) {
      row.params = best->params_hat;
      row.beta = best->beta_hat;
      row.loglik = best->loglik;
      row.converged = best->converged;
      if (!row.converged) row.status = "not converged";
      previous = best->params_hat;
    } else {
      row.params = start;
      for (std::size_t a = 0; a < which.size(); ++a) row.params.set(which[a], row.values[a]);
      row.loglik = std::numeric_limits<double>::quiet_NaN();
      row.status = last_error;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd central_hessian(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                         const VectorXd& h) {
  const Eigen::Index d = x.size();
  if (h.size() != d) throw DomainError("central_hessian: step vector has the wrong length");
  for (Eigen::Index k = 0; k < d; ++k) {
    if (!(h(k) > 0.0) || !std::isfinite(h(k)) || x(k) + h(k) == x(k)) {
      throw DomainError("central_hessian: step " + std::to_string(k) + " underflows or is invalid");
    }
  }
  MatrixXd out(d, d);
  const double f0 = f(x);
  auto shifted = [&](Eigen::Index i, double si, Eigen::Index j, double sj) {
    VectorXd y = x;
    y(i) += si * h(i);
    y(j) += sj * h(j);
    return f(y);
  };
  for (Eigen::Index i = 0; i < d; ++i) {
    VectorXd up = x;
    VectorXd dn = x;
    up(i) += h(i);
    dn(i) -= h(i);
    out(i, i) = (f(up) - 2.0 * f0 + f(dn)) / (h(i) * h(i));
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double v = (shifted(i, 1, j, 1) - shifted(i, 1, j, -1) - shifted(i, -1, j, 1) +
                        shifted(i, -1, j, -1)) /
                       (4.0 * h(i) * h(j));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  if (!out.allFinite()) throw OverflowError("central_hessian: non-finite result");
  return out;
}

ObservedInfo observed_info_fd(const GeoDataset& data, const CovarianceParams& params_hat,
                              const FixedMask& fixed, double rel_step) {
  params_hat.validate();
  if (!(rel_step > 0.0)) throw DomainError("observed_info_fd: rel_step must be positive");
  ObservedInfo out;
  for (Param p : kAllParams) {
    if (!fixed[index_of(p)]) out.params.push_back(p);
  }
  const auto d = static_cast<Eigen::Index>(out.params.size());
  VectorXd x(d);
  VectorXd h(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    x(k) = params_hat.get(out.params[k]);
    h(k) = rel_step * std::fabs(x(k));
    out.steps.push_back(h(k));
  }
  auto negll = [&](const VectorXd& y) {
    CovarianceParams p = params_hat;
    for (Eigen::Index k = 0; k < d; ++k) p.set(out.params[k], y(k));
    return -profile_beta(p, data).loglik;
  };
  out.matrix = central_hessian(negll, x, h);
  out.positive_definite = d > 0 && Eigen::LLT<MatrixXd>(out.matrix).info() == Eigen::Success;
  return out;
}

GeoDataset simulate_dataset(const CovarianceParams& params, const SamplingDesign& design,
                            const VectorXd& beta, std::uint64_t seed, const MatrixXd& covariates) {
  design.validate();
  const auto n = static_cast<Eigen::Index>(design.size());
  GeoDataset d;
  d.design = design;
  d.covariates = covariates.size() == 0 ? MatrixXd::Ones(n, 1) : covariates;
  if (d.covariates.rows() != n || d.covariates.cols() != beta.size()) {
    throw ConfigError("covariates", "shape does not match the design and beta");
  }
  const Eigen::LLT<MatrixXd> llt(cov_matrix(params, design.points));
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("covariance matrix is not numerically positive definite");
  }
  Rng rng(seed);
  VectorXd e(n);
  for (Eigen::Index i = 0; i < n; ++i) e(i) = rng.normal();
  d.z = d.covariates * beta + llt.matrixL() * e;
  return d;
}

}  // namespace maternfi
