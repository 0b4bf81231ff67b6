#pragma once

// Sampling designs over an axis-aligned rectangle: regular lattice, uniform
// random, perturbed lattice (Bachoc) and lattice plus clusters.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace maternfi {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(const Point& a, const Point& b);

// [xmin, xmax] x [ymin, ymax]
struct Region {
  double xmin = 0.0;
  double xmax = 1.0;
  double ymin = 0.0;
  double ymax = 1.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double diameter() const;
  bool contains(const Point& p) const;           // closed rectangle
  bool contains_strictly(const Point& p) const;  // open rectangle
  // Throws DesignError for empty, inverted or non-finite bounds.
  void validate() const;

  static Region unit_square() { return {}; }
  friend bool operator==(const Region&, const Region&) = default;
};

enum class DesignType { Regular, Random, Bachoc, RegularCluster, File };

std::string_view to_string(DesignType type);
// Accepts "regular", "random", "bachoc", "regular+cluster", "file".
DesignType design_type_from_string(std::string_view name);

struct SamplingDesign {
  std::vector<Point> points;
  // Absent for file-ingested designs that declare no region.
  std::optional<Region> region;
  DesignType label = DesignType::File;
  std::optional<std::uint64_t> seed;

  std::size_t size() const { return points.size(); }
  // n >= 1, finite coordinates, all points inside the region, no duplicates.
  void validate() const;
};

// Coordinates divided by r_max, the diameter of the design region.
struct RescaledDesign {
  std::vector<Point> points;
  double r_max = 1.0;
};

// Returns indices (i, j), i < j, of the first pair of identical points, if any.
std::optional<std::pair<std::size_t, std::size_t>> find_duplicate(std::span<const Point> points);

// Largest pairwise distance within the point set.
double point_set_diameter(std::span<const Point> points);

// n1 x n1 lattice at cell centers, x-major order.
SamplingDesign regular_design(int n1, const Region& region = Region::unit_square());

// n i.i.d. uniform points in the open region.
SamplingDesign random_design(int n, const Region& region, std::uint64_t seed);

// n1 x n2 lattice (cell centers, spacing dx, dy) with node k moved by
// epsilon * X_k, X_k ~ unif((-dx, dx) x (-dy, dy)); epsilon in [0, 1/2).
SamplingDesign bachoc_design(int n1, int n2, double epsilon, const Region& region,
                             std::uint64_t seed);

// n1 x n1 lattice plus ppc - 1 satellites v + w, w ~ unif((-epsilon, epsilon)^2), around each
// of nc lattice nodes drawn without replacement. Satellites falling outside the region are
// redrawn. Total size n1^2 + nc (ppc - 1).
SamplingDesign regular_cluster_design(int n1, int nc, int ppc, double epsilon,
                                      const Region& region, std::uint64_t seed);

// Divides coordinates by the region diameter, or by the point-set diameter when the
// design declares no region.
RescaledDesign rescale(const SamplingDesign& design);

}  // namespace maternfi
