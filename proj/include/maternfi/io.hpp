#pragma once

// Text formats: design, dataset and table CSVs, JSON design metadata, 4x4 matrix files.
// Writers produce the whole artifact in memory and publish it with one rename.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "maternfi/design.hpp"
#include "maternfi/fisher.hpp"
#include "maternfi/likelihood.hpp"

namespace maternfi::io {

// Shortest text that parses back to the same double ("nan", "inf", "-inf" otherwise).
std::string format_number(double value);
// Whole-string parse; throws IoError naming `what` on failure.
double parse_number(std::string_view text, std::string_view what);

// Writes to a temporary file in the target directory, then renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// "# maternfi <version>: <invocation>\n"; empty invocation gives just the version.
std::string comment_line(std::string_view invocation);

// Header `x,y`, one point per row, preceded by `comment` (a complete line or empty).
std::string design_csv(const SamplingDesign& design, std::string_view comment = {});
// Reads `x,y` rows, skipping lines starting with '#'. The result has no region unless one
// is passed; it is validated before returning.
SamplingDesign parse_design_csv(std::string_view text, std::optional<Region> region = {});
SamplingDesign read_design_csv(const std::filesystem::path& path,
                               std::optional<Region> region = {});

// JSON object with n, label, seed, region and (when given) r_max.
std::string design_metadata_json(const SamplingDesign& design,
                                 std::optional<double> r_max = {});

// Header `x,y,z[,f2..fp]`; covariates become [1, f2..fp]; z passes through `transform`.
GeoDataset parse_dataset_csv(std::string_view text, Transform transform = Transform::None);
GeoDataset read_dataset_csv(const std::filesystem::path& path,
                            Transform transform = Transform::None);

inline constexpr std::string_view kSurfaceHeader =
    "vartheta,nu,info_sigma2,info_tau2,info_vartheta,info_nu,info_zeta,status";
std::string surface_csv(std::span<const SurfaceRow> rows, std::string_view comment = {});

inline constexpr std::string_view kSampleSizeHeader =
    "n,r_max,info_sigma2,info_tau2,info_vartheta,info_nu,info_zeta,status";
std::string sample_size_csv(std::span<const SampleSizeRow> rows, std::string_view comment = {});

// Columns: profiled parameter names, loglik, sigma2, tau2, vartheta, nu, beta0..,
// converged, status.
std::string profile_csv(std::span<const ProfileRow> rows, std::span<const Param> which,
                        std::string_view comment = {});

// 16 numbers separated by commas and/or whitespace, row-major; '#' lines ignored.
Eigen::Matrix4d parse_matrix4(std::string_view text);
Eigen::Matrix4d read_matrix4(const std::filesystem::path& path);

}  // namespace maternfi::io
