#include "cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "maternfi/design.hpp"
#include "maternfi/errors.hpp"
#include "maternfi/fisher.hpp"
#include "maternfi/io.hpp"
#include "maternfi/likelihood.hpp"

namespace maternfi::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string invocation(int argc, const char* const* argv) {
  std::string out = "maternfi";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    out += ' ';
    if (arg.empty() || arg.find_first_of(" \t'\"$\\") != std::string::npos) {
      out += '\'';
      for (char c : arg) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
      out += '\'';
    } else {
      out += arg;
    }
  }
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& field) {
  std::vector<double> out;
  for (const std::string& s : split(text, ',')) {
    try {
      out.push_back(io::parse_number(s, field));
    } catch (const IoError&) {
      throw ConfigError(field, "cannot parse number '" + s + "'");
    }
  }
  if (out.empty()) throw ConfigError(field, "empty list");
  return out;
}

// "lo,hi,step" (or "lo:hi:step") as an inclusive arithmetic sequence.
std::vector<double> parse_range(std::string text, const std::string& field) {
  for (char& c : text) {
    if (c == ':') c = ',';
  }
  const auto v = parse_doubles(text, field);
  if (v.size() != 3) throw ConfigError(field, "expected lo,hi,step");
  if (v[1] < v[0]) throw ConfigError(field, "empty grid (hi < lo)");
  try {
    return SurfaceGrid::sequence(v[0], v[1], v[2]);
  } catch (const ConfigError& e) {
    throw ConfigError(field, e.what());
  }
}

Region parse_region(const std::string& text) {
  const auto v = parse_doubles(text, "region");
  if (v.size() != 4) throw ConfigError("region", "expected xmin,xmax,ymin,ymax");
  Region r{v[0], v[1], v[2], v[3]};
  try {
    r.validate();
  } catch (const DesignError& e) {
    throw ConfigError("region", e.what());
  }
  return r;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json params_json(const CovarianceParams& p) {
  return {{"sigma2", p.sigma2}, {"tau2", p.tau2}, {"vartheta", p.vartheta}, {"nu", p.nu}};
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number_or_null(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

json info_json(const InfoVector& v) {
  json out;
  for (Param p : kAllParams) out["info_" + std::string(kParamNames[index_of(p)])] = v[p];
  return out;
}

json influence_json(const InfluenceResult& r) {
  json delta;
  for (Param p : kAllParams) delta[std::string(kParamNames[index_of(p)])] = r.delta_star(index_of(p));
  return {{"lambda_star", r.lambda_star}, {"delta_star", delta}, {"degenerate", r.degenerate}};
}

void write_json(const fs::path& path, const json& j) { io::write_atomic(path, j.dump(2) + "\n"); }

fs::path sidecar(const std::string& out) {
  fs::path p(out);
  p.replace_extension(".json");
  return p;
}

// ---- shared option blocks ----

struct DesignArgs {
  std::string type = "random";
  int n = 225;
  int n1 = 15;
  std::optional<int> n2;
  int nc = 10;
  int ppc = 4;
  std::optional<double> eps;
  std::optional<std::string> region;
  std::uint64_t seed = 1;
  std::string file;

  void add_to(CLI::App* app) {
    app->add_option("--type", type, "regular | random | bachoc | regular+cluster | file")
        ->capture_default_str();
    app->add_option("--n", n, "random design size")->capture_default_str();
    app->add_option("--n1", n1, "lattice points per side")->capture_default_str();
    app->add_option("--n2", n2, "second lattice side (bachoc; default n1)");
    app->add_option("--nc", nc, "number of clusters")->capture_default_str();
    app->add_option("--ppc", ppc, "points per cluster")->capture_default_str();
    app->add_option("--eps", eps, "bachoc perturbation (0.4) or cluster radius (0.04)");
    app->add_option("--region", region, "xmin,xmax,ymin,ymax (default unit square)");
    app->add_option("--seed", seed, "random seed")->capture_default_str();
    app->add_option("--design-file", file, "x,y or x,y,z CSV for --type file");
  }

  Region the_region() const { return region ? parse_region(*region) : Region::unit_square(); }

  SamplingDesign build() const { return build_with(n, n1); }

  // Design with n points, for sample-size sweeps.
  SamplingDesign build_for_size(int size) const {
    const DesignType t = design_type_from_string(type);
    if (t == DesignType::Random) return build_with(size, n1);
    if (t == DesignType::Regular || t == DesignType::Bachoc) {
      const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(size))));
      if (side * side != size) {
        throw ConfigError("sizes", std::to_string(size) + " is not a perfect square, needed for " +
                                       type + " designs");
      }
      DesignArgs copy = *this;
      copy.n2.reset();
      return copy.build_with(size, side);
    }
    throw ConfigError("type", "sample-size sweeps support random, regular and bachoc designs");
  }

 private:
  SamplingDesign build_with(int size, int side) const {
    switch (design_type_from_string(type)) {
      case DesignType::Regular:
        return regular_design(side, the_region());
      case DesignType::Random:
        return random_design(size, the_region(), seed);
      case DesignType::Bachoc:
        return bachoc_design(side, n2.value_or(side), eps.value_or(0.4), the_region(), seed);
      case DesignType::RegularCluster:
        return regular_cluster_design(side, nc, ppc, eps.value_or(0.04), the_region(), seed);
      case DesignType::File:
        return from_file();
    }
    throw ConfigError("type", "unknown design type");
  }

  SamplingDesign from_file() const {
    if (file.empty()) throw ConfigError("design-file", "required for --type file");
    const std::string text = io::read_file(file);
    std::optional<Region> declared;
    if (region) declared = parse_region(*region);
    // Accept either a design CSV or a dataset CSV (its locations are used).
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      if (!line.empty() && line[0] != '#') break;
    }
    if (line.rfind("x,y,z", 0) == 0) {
      SamplingDesign d = io::parse_dataset_csv(text).design;
      d.region = declared;
      d.validate();
      return d;
    }
    return io::parse_design_csv(text, declared);
  }
};

struct ParamArgs {
  double sigma2 = 1.0;
  double tau2 = 0.2;
  double vartheta = 0.2;
  double nu = 0.5;

  void add_to(CLI::App* app) {
    app->add_option("--sigma2", sigma2, "partial sill")->capture_default_str();
    app->add_option("--tau2", tau2, "nugget")->capture_default_str();
    app->add_option("--vartheta", vartheta, "range (original units)")->capture_default_str();
    app->add_option("--nu", nu, "smoothness")->capture_default_str();
  }

  CovarianceParams get() const {
    const CovarianceParams p{sigma2, tau2, vartheta, nu};
    p.validate();
    return p;
  }
};

struct FitArgs {
  std::string data;
  std::string transform = "none";
  std::vector<std::string> fix;
  std::optional<double> sigma2, tau2, vartheta, nu;
  int starts = 3;
  int max_iterations = 4000;
  bool polish = true;

  void add_to(CLI::App* app) {
    app->add_option("--data", data, "dataset CSV with header x,y,z[,f2..fp]")->required();
    app->add_option("--transform", transform, "none | sqrt | log, applied to z")
        ->capture_default_str();
    app->add_option("--fix", fix, "hold a parameter fixed, e.g. nu=0.5 (repeatable)");
    app->add_option("--sigma2", sigma2, "initial partial sill");
    app->add_option("--tau2", tau2, "initial nugget");
    app->add_option("--vartheta", vartheta, "initial range");
    app->add_option("--nu", nu, "initial smoothness");
    app->add_option("--starts", starts, "number of optimizer starts (1-3)")->capture_default_str();
    app->add_option("--max-iterations", max_iterations, "simplex iterations per start")
        ->capture_default_str();
    app->add_flag("--polish,!--no-polish", polish, "quasi-Newton refinement")
        ->capture_default_str();
  }

  GeoDataset load() const { return io::read_dataset_csv(data, transform_from_string(transform)); }

  FitOptions options() const {
    FitOptions o;
    o.starts = starts;
    o.max_iterations = max_iterations;
    o.polish = polish;
    return o;
  }

  // Starting values: given flags win; otherwise a split of the OLS residual variance and a
  // fifth of the design diameter.
  std::pair<CovarianceParams, FixedMask> init(const GeoDataset& d) const {
    const Eigen::VectorXd resid =
        d.z - d.covariates * d.covariates.colPivHouseholderQr().solve(d.z);
    const double var = std::max(resid.squaredNorm() / static_cast<double>(d.size()), 1e-12);
    const double diam = d.design.region ? d.design.region->diameter()
                                        : point_set_diameter(d.design.points);
    CovarianceParams p{sigma2.value_or(0.8 * var), tau2.value_or(0.2 * var),
                       vartheta.value_or(0.2 * (diam > 0.0 ? diam : 1.0)), nu.value_or(0.5)};
    FixedMask mask{};
    for (const std::string& f : fix) apply_fix(f, mask, p);
    p.validate();
    return {p, mask};
  }
};

FisherOptions fisher_options(int threads) {
  FisherOptions o;
  o.threads = threads;
  return o;
}

// Fisher-based block at a fitted eta, in coordinates divided by r_max.
json information_block(const GeoDataset& data, const CovarianceParams& eta, int threads) {
  const RescaledDesign rd = rescale(data.design);
  CovarianceParams scaled = eta;
  scaled.vartheta /= rd.r_max;
  json out;
  out["coordinates"] = "rescaled";
  out["r_max"] = rd.r_max;
  try {
    const FisherInfo fi = fisher_matrix(scaled, rd.points, fisher_options(threads));
    out["fisher_matrix"] = matrix_json(fi.matrix);
    out["influence"] = influence_json(local_influence(fi));
    try {
      out["info_vector"] = info_json(info_vector(fi));
      out["info_zeta"] = microergodic_info(fi);
    } catch (const SingularInformationError& e) {
      out["info_vector"] = nullptr;
      out["info_zeta"] = nullptr;
      out["error"] = e.what();
    }
  } catch (const std::exception& e) {
    out["error"] = e.what();
  }
  return out;
}

json observed_block(const GeoDataset& data, const FitResult& fit) {
  json out;
  try {
    const ObservedInfo obs = observed_info_fd(data, fit.params_hat, fit.fixed);
    json names = json::array();
    for (Param p : obs.params) names.push_back(kParamNames[index_of(p)]);
    out["params"] = names;
    out["matrix"] = matrix_json(obs.matrix);
    out["positive_definite"] = obs.positive_definite;
    if (obs.positive_definite) {
      const Eigen::MatrixXd inv = obs.matrix.inverse();
      json diag = json::array();
      for (Eigen::Index k = 0; k < inv.rows(); ++k) diag.push_back(inv(k, k));
      out["inverse_diagonal"] = diag;
    }
  } catch (const std::exception& e) {
    out["error"] = e.what();
  }
  return out;
}

struct FitRun {
  GeoDataset data;  // in the coordinates used for fitting
  FitResult fit;
  double scale = 1.0;  // fitting coordinates = raw / scale
};

FitRun run_fit(const FitArgs& args, bool rescale_coords) {
  FitRun run;
  run.data = args.load();
  auto [init, mask] = args.init(run.data);
  if (rescale_coords) {
    const RescaledDesign rd = rescale(run.data.design);
    run.scale = rd.r_max;
    run.data.design.points = rd.points;
    if (run.data.design.region) {
      Region& r = *run.data.design.region;
      r = {r.xmin / rd.r_max, r.xmax / rd.r_max, r.ymin / rd.r_max, r.ymax / rd.r_max};
    }
    if (!args.vartheta) init.vartheta /= rd.r_max;
  }
  run.fit = mle_fit(run.data, init, mask, args.options());
  return run;
}

json fit_json(const FitRun& run, const std::string& invocation_text, const std::string& transform,
              int threads) {
  const FitResult& f = run.fit;
  const double r_max = rescale(run.data.design).r_max * run.scale;
  CovarianceParams raw = f.params_hat;
  raw.vartheta *= run.scale;

  json j;
  j["version"] = MATERNFI_VERSION;
  j["invocation"] = invocation_text;
  j["n"] = run.data.size();
  j["p"] = run.data.covariates.cols();
  j["transform"] = transform;
  j["coordinates"] = run.scale == 1.0 ? "raw" : "rescaled";
  j["params_hat"] = params_json(raw);
  j["vartheta_raw"] = raw.vartheta;
  j["vartheta_rescaled"] = raw.vartheta / r_max;
  j["r_max"] = r_max;
  json beta = json::array();
  for (Eigen::Index k = 0; k < f.beta_hat.size(); ++k) beta.push_back(f.beta_hat(k));
  j["beta_hat"] = beta;
  j["loglik"] = f.loglik;
  json fixed = json::array();
  for (Param p : kAllParams) {
    if (f.fixed[index_of(p)]) fixed.push_back(kParamNames[index_of(p)]);
  }
  j["fixed"] = fixed;
  j["converged"] = f.converged;
  j["iterations"] = f.iterations;
  j["evaluations"] = f.evaluations;
  j["nugget_to_sill"] = nugget_to_sill(f.params_hat);
  j["information"] = information_block(run.data, f.params_hat, threads);
  j["observed_information"] = observed_block(run.data, f);
  return j;
}

// ---- commands ----

struct Common {
  std::string out;
  int threads = 0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-o,--out", c.out, "output path")->required();
  app->add_option("--threads", c.threads, "worker threads (0: all cores)")->capture_default_str();
}

int cmd_design(const DesignArgs& d, const Common& c, const std::string& meta,
               const std::string& inv, std::ostream& out) {
  const SamplingDesign design = d.build();
  design.validate();
  const RescaledDesign rd = rescale(design);
  write_json(meta.empty() ? sidecar(c.out) : fs::path(meta),
             json::parse(io::design_metadata_json(design, rd.r_max)));
  io::write_atomic(c.out, io::design_csv(design, io::comment_line(inv)));
  out << "wrote " << design.size() << " points to " << c.out << "\n";
  return 0;
}

int cmd_info_surface(const DesignArgs& d, const ParamArgs& pa, const Common& c,
                     const std::string& th_range, const std::string& nu_range, bool rescale_coords,
                     const std::string& inv, std::ostream& out) {
  SurfaceGrid grid{parse_range(th_range, "vartheta-range"), parse_range(nu_range, "nu-range")};
  if (grid.size() == 0) throw ConfigError("grid", "empty grid");
  const CovarianceParams base = pa.get();
  const SamplingDesign design = d.build();
  design.validate();
  std::vector<Point> pts = design.points;
  double r_max = 1.0;
  if (rescale_coords) {
    const RescaledDesign rd = rescale(design);
    pts = rd.points;
    r_max = rd.r_max;
  }
  const auto rows = info_surface(base, pts, grid, fisher_options(c.threads));
  std::string comment = io::comment_line(inv);
  comment += "# r_max: " + io::format_number(r_max) + (rescale_coords ? "" : " (not applied)") + "\n";
  io::write_atomic(c.out, io::surface_csv(rows, comment));
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.status != "ok";
  out << "wrote " << rows.size() << " rows to " << c.out;
  if (failed) out << " (" << failed << " rows failed, see status column)";
  out << "\n";
  return 0;
}

int cmd_info_vs_n(const DesignArgs& d, const ParamArgs& pa, const Common& c,
                  const std::string& sizes_text, bool rescale_coords, const std::string& inv,
                  std::ostream& out) {
  std::vector<int> sizes;
  for (double v : parse_doubles(sizes_text, "sizes")) {
    if (v < 1 || v != std::floor(v)) throw ConfigError("sizes", "sizes must be positive integers");
    sizes.push_back(static_cast<int>(v));
  }
  const CovarianceParams p = pa.get();
  // Fail early on sizes the design type cannot produce.
  for (int n : sizes) (void)d.build_for_size(n).size();
  std::vector<SampleSizeRow> rows;
  if (rescale_coords) {
    rows = info_vs_sample_size(p, sizes, [&](int n) { return d.build_for_size(n); },
                               fisher_options(c.threads));
  } else {
    for (int n : sizes) {
      SampleSizeRow row;
      row.n = n;
      row.r_max = 1.0;
      try {
        const FisherInfo fi = fisher_matrix(p, d.build_for_size(n).points, fisher_options(c.threads));
        row.info = info_vector(fi);
        row.info_zeta = microergodic_info(fi);
      } catch (const std::exception& e) {
        row.status = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  io::write_atomic(c.out, io::sample_size_csv(rows, io::comment_line(inv)));
  out << "wrote " << rows.size() << " rows to " << c.out << "\n";
  return 0;
}

int cmd_fit(const FitArgs& fa, const Common& c, bool rescale_coords, const std::string& inv,
            std::ostream& out) {
  const FitRun run = run_fit(fa, rescale_coords);
  write_json(c.out, fit_json(run, inv, fa.transform, c.threads));
  out << "loglik " << io::format_number(run.fit.loglik)
      << (run.fit.converged ? "" : " (not converged)") << "; report written to " << c.out << "\n";
  return 0;
}

int cmd_profile(const FitArgs& fa, const Common& c, const std::vector<std::string>& axes_text,
                bool rescale_coords, const std::string& inv, std::ostream& out) {
  if (axes_text.empty() || axes_text.size() > 2) {
    throw ConfigError("profile", "give one or two --profile name=lo:hi:step axes");
  }
  std::vector<Param> which;
  std::vector<std::vector<double>> axes;
  for (const std::string& a : axes_text) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw ConfigError("profile", "expected name=lo:hi:step");
    which.push_back(param_from_name(a.substr(0, eq)));
    axes.push_back(parse_range(a.substr(eq + 1), "profile"));
  }
  const FitRun run = run_fit(fa, rescale_coords);
  std::vector<std::vector<double>> fit_axes = axes;
  for (std::size_t k = 0; k < which.size(); ++k) {
    if (which[k] == Param::Vartheta) {
      for (double& v : fit_axes[k]) v /= run.scale;
    }
  }
  auto rows = profile_loglik(run.data, which, fit_axes, run.fit.params_hat, run.fit.fixed,
                             fa.options());
  for (auto& r : rows) {
    r.params.vartheta *= run.scale;
    for (std::size_t k = 0; k < which.size(); ++k) {
      if (which[k] == Param::Vartheta) r.values[k] *= run.scale;
    }
  }

  CovarianceParams mle = run.fit.params_hat;
  mle.vartheta *= run.scale;
  bool contains = true;
  for (std::size_t k = 0; k < which.size(); ++k) {
    const double v = mle.get(which[k]);
    const auto [lo, hi] = std::minmax_element(axes[k].begin(), axes[k].end());
    contains = contains && *lo <= v && v <= *hi;
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    if (std::isfinite(r.loglik)) best = std::max(best, r.loglik);
  }

  json summary;
  summary["version"] = MATERNFI_VERSION;
  summary["invocation"] = inv;
  json names = json::array();
  for (Param p : which) names.push_back(kParamNames[index_of(p)]);
  summary["profiled"] = names;
  summary["mle"] = params_json(mle);
  summary["mle_loglik"] = run.fit.loglik;
  summary["mle_converged"] = run.fit.converged;
  summary["contains_mle"] = contains;
  summary["max_profile_loglik"] = number_or_null(best);
  summary["rows"] = rows.size();

  std::string comment = io::comment_line(inv);
  comment += "# mle_loglik: " + io::format_number(run.fit.loglik) +
             "; contains_mle=" + (contains ? "true" : "false") + "\n";
  write_json(sidecar(c.out), summary);
  io::write_atomic(c.out, io::profile_csv(rows, which, comment));
  out << "wrote " << rows.size() << " rows to " << c.out << "; contains_mle=" << std::boolalpha
      << contains << "\n";
  return 0;
}

int cmd_influence(const FitArgs& fa, const Common& c, const std::string& matrix_path,
                  bool rescale_coords, const std::string& inv, std::ostream& out) {
  json j;
  j["version"] = MATERNFI_VERSION;
  j["invocation"] = inv;
  if (!matrix_path.empty()) {
    const Eigen::Matrix4d m = io::read_matrix4(matrix_path);
    j["source"] = "matrix";
    j["matrix"] = matrix_json(m);
    j.update(influence_json(local_influence(m)));
  } else {
    if (fa.data.empty()) throw ConfigError("data", "give --matrix or --data");
    const FitRun run = run_fit(fa, false);
    const FitResult& f = run.fit;
    j["source"] = "fit";
    j["params_hat"] = params_json(f.params_hat);
    j["loglik"] = f.loglik;
    j["converged"] = f.converged;
    const RescaledDesign rd = rescale(run.data.design);
    const double scale = rescale_coords ? rd.r_max : 1.0;
    CovarianceParams eta = f.params_hat;
    eta.vartheta /= scale;
    std::vector<Point> pts = run.data.design.points;
    for (Point& p : pts) p = {p.x / scale, p.y / scale};
    j["coordinates"] = rescale_coords ? "rescaled" : "raw";
    j["r_max"] = rd.r_max;
    const FisherInfo fi = fisher_matrix(eta, pts, fisher_options(c.threads));
    j["matrix"] = matrix_json(fi.matrix);
    j.update(influence_json(local_influence(fi)));
  }
  write_json(c.out, j);
  out << "lambda_star " << io::format_number(j["lambda_star"].get<double>()) << "; report written to "
      << c.out << "\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fisher information and likelihood analysis for Matérn covariance models",
               "maternfi"};
  app.set_version_flag("--version", MATERNFI_VERSION);
  app.require_subcommand(1);

  Common common;
  DesignArgs design;
  ParamArgs params;
  FitArgs fit;
  std::string meta;
  std::string th_range = "0.05,0.65,0.05";
  std::string nu_range = "0.1,1.5,0.1";
  std::string sizes = "100,225,400";
  std::vector<std::string> profile_axes;
  std::string matrix_path;
  bool rescale_info = true;
  bool rescale_fit = false;

  auto* design_cmd = app.add_subcommand("design", "generate a sampling design (CSV + JSON metadata)");
  design.add_to(design_cmd);
  add_common(design_cmd, common);
  design_cmd->add_option("--meta", meta, "metadata JSON path (default: output with .json)");

  auto* surface_cmd = app.add_subcommand("info-surface", "information over a (vartheta, nu) grid");
  design.add_to(surface_cmd);
  params.add_to(surface_cmd);
  add_common(surface_cmd, common);
  surface_cmd->add_option("--vartheta-range", th_range, "lo,hi,step")->capture_default_str();
  surface_cmd->add_option("--nu-range", nu_range, "lo,hi,step")->capture_default_str();
  surface_cmd->add_flag("--rescale,!--no-rescale", rescale_info,
                        "divide coordinates (and grid vartheta) by r_max")
      ->capture_default_str();

  auto* vsn_cmd = app.add_subcommand("info-vs-n", "information against sample size");
  design.add_to(vsn_cmd);
  params.add_to(vsn_cmd);
  add_common(vsn_cmd, common);
  vsn_cmd->add_option("--sizes", sizes, "comma-separated sample sizes")->capture_default_str();
  vsn_cmd->add_flag("--rescale,!--no-rescale", rescale_info, "divide coordinates by r_max")
      ->capture_default_str();

  auto* fit_cmd = app.add_subcommand("fit", "maximum likelihood fit (JSON report)");
  fit.add_to(fit_cmd);
  add_common(fit_cmd, common);
  fit_cmd->add_flag("--rescale,!--no-rescale", rescale_fit, "fit in coordinates divided by r_max")
      ->capture_default_str();

  auto* profile_cmd = app.add_subcommand("profile", "profile log-likelihood over 1 or 2 parameters");
  fit.add_to(profile_cmd);
  add_common(profile_cmd, common);
  profile_cmd->add_option("--profile", profile_axes, "name=lo:hi:step (once or twice)")->required();
  profile_cmd->add_flag("--rescale,!--no-rescale", rescale_fit, "fit in coordinates divided by r_max")
      ->capture_default_str();

  auto* influence_cmd = app.add_subcommand("influence", "top eigenpair of a Fisher matrix (JSON)");
  add_common(influence_cmd, common);
  influence_cmd->add_option("--matrix", matrix_path, "4x4 matrix file; skips fitting");
  fit.add_to(influence_cmd);
  influence_cmd->get_option("--data")->required(false);
  influence_cmd->add_flag("--rescale,!--no-rescale", rescale_info, "divide coordinates by r_max")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  const std::string inv = invocation(argc, argv);
  try {
    if (design_cmd->parsed()) return cmd_design(design, common, meta, inv, out);
    if (surface_cmd->parsed()) {
      return cmd_info_surface(design, params, common, th_range, nu_range, rescale_info, inv, out);
    }
    if (vsn_cmd->parsed()) return cmd_info_vs_n(design, params, common, sizes, rescale_info, inv, out);
    if (fit_cmd->parsed()) return cmd_fit(fit, common, rescale_fit, inv, out);
    if (profile_cmd->parsed()) {
      return cmd_profile(fit, common, profile_axes, rescale_fit, inv, out);
    }
    if (influence_cmd->parsed()) {
      return cmd_influence(fit, common, matrix_path, rescale_info, inv, out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace maternfi::cli
