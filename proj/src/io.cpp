#include "maternfi/io.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include <json.hpp>

#include "maternfi/errors.hpp"

namespace maternfi::io {

namespace fs = std::filesystem;

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Non-empty, non-comment lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string_view>> data_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    ++number;
    const std::string_view line = trim(text.substr(start, end - start));
    if (!line.empty() && line.front() != '#') out.emplace_back(number, line);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

// Free-text status without separators that would break the CSV row.
std::string csv_safe(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

std::string optional_number(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string("nan");
}

void append_info(std::string& out, const std::optional<InfoVector>& info,
                 const std::optional<double>& zeta) {
  for (Param p : kAllParams) {
    out += ',';
    out += info ? format_number((*info)[p]) : std::string("nan");
  }
  out += ',';
  out += optional_number(zeta);
}

}  // namespace

double parse_number(std::string_view text, std::string_view what) {
  text = trim(text);
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (text.empty() || res.ec != std::errc() || res.ptr != last) {
    throw IoError(std::string(what) + ": cannot parse number '" + std::string(text) + "'");
  }
  return value;
}

void write_atomic(const fs::path& path, std::string_view content) {
  static std::atomic<unsigned> counter{0};
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp." +
                              std::to_string(::getpid()) + "." + std::to_string(counter++));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError("cannot move output into place at '" + path.string() + "': " + ec.message());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string comment_line(std::string_view invocation) {
  std::string out = "# maternfi " MATERNFI_VERSION;
  if (!invocation.empty()) {
    out += ": ";
    for (char c : invocation) out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  out += '\n';
  return out;
}

std::string design_csv(const SamplingDesign& design, std::string_view comment) {
  std::string out(comment);
  out += "x,y\n";
  for (const Point& p : design.points) {
    out += format_number(p.x);
    out += ',';
    out += format_number(p.y);
    out += '\n';
  }
  return out;
}

SamplingDesign parse_design_csv(std::string_view text, std::optional<Region> region) {
  const auto lines = data_lines(text);
  if (lines.empty()) throw IoError("design file is empty");
  const auto header = split(lines.front().second, ',');
  if (header.size() != 2 || header[0] != "x" || header[1] != "y") {
    throw IoError("design file: expected header 'x,y'");
  }
  SamplingDesign d;
  d.label = DesignType::File;
  d.region = region;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto [number, line] = lines[k];
    const auto fields = split(line, ',');
    const std::string where = "design line " + std::to_string(number);
    if (fields.size() != 2) throw IoError(where + ": expected 2 fields");
    d.points.push_back({parse_number(fields[0], where), parse_number(fields[1], where)});
  }
  d.validate();
  return d;
}

SamplingDesign read_design_csv(const fs::path& path, std::optional<Region> region) {
  return parse_design_csv(read_file(path), region);
}

std::string design_metadata_json(const SamplingDesign& design, std::optional<double> r_max) {
  nlohmann::ordered_json j;
  j["n"] = design.size();
  j["label"] = std::string(to_string(design.label));
  j["seed"] = design.seed ? nlohmann::ordered_json(*design.seed) : nlohmann::ordered_json(nullptr);
  if (design.region) {
    const Region& r = *design.region;
    j["region"] = {{"xmin", r.xmin}, {"xmax", r.xmax}, {"ymin", r.ymin}, {"ymax", r.ymax}};
  } else {
    j["region"] = nullptr;
  }
  if (r_max) j["r_max"] = *r_max;
  return j.dump(2) + "\n";
}

GeoDataset parse_dataset_csv(std::string_view text, Transform transform) {
  const auto lines = data_lines(text);
  if (lines.empty()) throw IoError("data file is empty");
  const auto header = split(lines.front().second, ',');
  if (header.size() < 3 || header[0] != "x" || header[1] != "y" || header[2] != "z") {
    throw IoError("data file: header must start with 'x,y,z'");
  }
  const std::size_t width = header.size();
  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  if (n == 0) throw IoError("data file has no rows");

  GeoDataset d;
  d.transform = transform;
  d.design.label = DesignType::File;
  d.z.resize(n);
  d.covariates.resize(n, static_cast<Eigen::Index>(width - 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [number, line] = lines[static_cast<std::size_t>(i) + 1];
    const std::string where = "data line " + std::to_string(number);
    const auto fields = split(line, ',');
    if (fields.size() != width) {
      throw IoError(where + ": expected " + std::to_string(width) + " fields, got " +
                    std::to_string(fields.size()));
    }
    d.design.points.push_back({parse_number(fields[0], where), parse_number(fields[1], where)});
    try {
      d.z(i) = apply_transform(transform, parse_number(fields[2], where));
    } catch (const DomainError& e) {
      throw IoError(where + ": " + e.what());
    }
    d.covariates(i, 0) = 1.0;
    for (std::size_t c = 3; c < width; ++c) {
      d.covariates(i, static_cast<Eigen::Index>(c - 2)) = parse_number(fields[c], where);
    }
  }
  d.validate();
  return d;
}

GeoDataset read_dataset_csv(const fs::path& path, Transform transform) {
  return parse_dataset_csv(read_file(path), transform);
}

std::string surface_csv(std::span<const SurfaceRow> rows, std::string_view comment) {
  std::string out(comment);
  out += kSurfaceHeader;
  out += '\n';
  for (const SurfaceRow& r : rows) {
    out += format_number(r.vartheta);
    out += ',';
    out += format_number(r.nu);
    append_info(out, r.info, r.info_zeta);
    out += ',';
    out += csv_safe(r.status);
    out += '\n';
  }
  return out;
}

std::string sample_size_csv(std::span<const SampleSizeRow> rows, std::string_view comment) {
  std::string out(comment);
  out += kSampleSizeHeader;
  out += '\n';
  for (const SampleSizeRow& r : rows) {
    out += std::to_string(r.n);
    out += ',';
    out += format_number(r.r_max);
    append_info(out, r.info, r.info_zeta);
    out += ',';
    out += csv_safe(r.status);
    out += '\n';
  }
  return out;
}

std::string profile_csv(std::span<const ProfileRow> rows, std::span<const Param> which,
                        std::string_view comment) {
  Eigen::Index p = 0;
  for (const ProfileRow& r : rows) p = std::max(p, r.beta.size());
  std::string out(comment);
  for (Param w : which) {
    out += "profile_";
    out += kParamNames[index_of(w)];
    out += ',';
  }
  out += "loglik,sigma2,tau2,vartheta,nu";
  for (Eigen::Index k = 0; k < p; ++k) out += ",beta" + std::to_string(k);
  out += ",converged,status\n";
  for (const ProfileRow& r : rows) {
    for (double v : r.values) {
      out += format_number(v);
      out += ',';
    }
    out += format_number(r.loglik);
    for (double v : r.params.to_array()) {
      out += ',';
      out += format_number(v);
    }
    for (Eigen::Index k = 0; k < p; ++k) {
      out += ',';
      out += k < r.beta.size() ? format_number(r.beta(k)) : std::string("nan");
    }
    out += r.converged ? ",true," : ",false,";
    out += csv_safe(r.status);
    out += '\n';
  }
  return out;
}

Eigen::Matrix4d parse_matrix4(std::string_view text) {
  std::vector<double> values;
  for (const auto& [number, line] : data_lines(text)) {
    std::string cleaned(line);
    for (char& c : cleaned) {
      if (c == ',' || c == '\t' || c == ';') c = ' ';
    }
    std::istringstream ss(cleaned);
    std::string token;
    while (ss >> token) {
      values.push_back(parse_number(token, "matrix line " + std::to_string(number)));
    }
  }
  if (values.size() != 16) {
    throw IoError("matrix file: expected 16 numbers, got " + std::to_string(values.size()));
  }
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) m(i, j) = values[static_cast<std::size_t>(4 * i + j)];
  }
  return m;
}

Eigen::Matrix4d read_matrix4(const fs::path& path) { return parse_matrix4(read_file(path)); }

}  // namespace maternfi::io
