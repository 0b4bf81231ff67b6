#include "maternfi/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "maternfi/errors.hpp"
#include "maternfi/random.hpp"

namespace maternfi {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double Region::diameter() const { return std::hypot(width(), height()); }

bool Region::contains(const Point& p) const {
  return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
}

bool Region::contains_strictly(const Point& p) const {
  return p.x > xmin && p.x < xmax && p.y > ymin && p.y < ymax;
}

void Region::validate() const {
  const bool finite = std::isfinite(xmin) && std::isfinite(xmax) && std::isfinite(ymin) &&
                      std::isfinite(ymax);
  if (!finite || !(xmax > xmin) || !(ymax > ymin)) {
    throw DesignError("region must satisfy xmin < xmax and ymin < ymax with finite bounds");
  }
}

std::string_view to_string(DesignType type) {
  switch (type) {
    case DesignType::Regular: return "regular";
    case DesignType::Random: return "random";
    case DesignType::Bachoc: return "bachoc";
    case DesignType::RegularCluster: return "regular+cluster";
    case DesignType::File: return "file";
  }
  return "file";
}

DesignType design_type_from_string(std::string_view name) {
  for (DesignType t : {DesignType::Regular, DesignType::Random, DesignType::Bachoc,
                       DesignType::RegularCluster, DesignType::File}) {
    if (to_string(t) == name) return t;
  }
  throw ConfigError("type", "unknown design type '" + std::string(name) +
                                "' (expected regular, random, bachoc or regular+cluster)");
}

std::optional<std::pair<std::size_t, std::size_t>> find_duplicate(std::span<const Point> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].x != points[b].x) return points[a].x < points[b].x;
    if (points[a].y != points[b].y) return points[a].y < points[b].y;
    return a < b;
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (points[order[k - 1]] == points[order[k]]) {
      return std::make_pair(std::min(order[k - 1], order[k]), std::max(order[k - 1], order[k]));
    }
  }
  return std::nullopt;
}

double point_set_diameter(std::span<const Point> points) {
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      best = std::max(best, distance(points[i], points[j]));
    }
  }
  return best;
}

void SamplingDesign::validate() const {
  if (points.empty()) throw DesignError("design must contain at least one point");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y)) {
      throw DesignError("design point " + std::to_string(i) + " has non-finite coordinates");
    }
  }
  if (region) {
    region->validate();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!region->contains(points[i])) {
        throw DesignError("design point " + std::to_string(i) + " lies outside the region");
      }
    }
  }
  if (auto dup = find_duplicate(points)) {
    throw DesignError("design points " + std::to_string(dup->first) + " and " +
                      std::to_string(dup->second) + " have identical coordinates");
  }
}

namespace {

std::vector<Point> lattice(int nx, int ny, const Region& region) {
  const double dx = region.width() / nx;
  const double dy = region.height() / ny;
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(nx) * ny);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      pts.push_back({region.xmin + (i + 0.5) * dx, region.ymin + (j + 0.5) * dy});
    }
  }
  return pts;
}

void require_count(int value, int minimum, const char* field) {
  if (value < minimum) {
    throw ConfigError(field, "must be >= " + std::to_string(minimum) + ", got " +
                                 std::to_string(value));
  }
}

}  // namespace

SamplingDesign regular_design(int n1, const Region& region) {
  require_count(n1, 2, "n1");
  region.validate();
  return {lattice(n1, n1, region), region, DesignType::Regular, std::nullopt};
}

SamplingDesign random_design(int n, const Region& region, std::uint64_t seed) {
  require_count(n, 1, "n");
  region.validate();
  Rng rng(seed);
  std::vector<Point> pts;
  pts.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform_open();
    const double v = rng.uniform_open();
    pts.push_back({region.xmin + u * region.width(), region.ymin + v * region.height()});
  }
  return {std::move(pts), region, DesignType::Random, seed};
}

SamplingDesign bachoc_design(int n1, int n2, double epsilon, const Region& region,
                             std::uint64_t seed) {
  require_count(n1, 1, "n1");
  require_count(n2, 1, "n2");
  if (!(epsilon >= 0.0 && epsilon < 0.5)) {
    throw ConfigError("eps", "Bachoc perturbation must lie in [0, 0.5), got " +
                                 std::to_string(epsilon));
  }
  region.validate();
  const double dx = region.width() / n1;
  const double dy = region.height() / n2;
  std::vector<Point> pts = lattice(n1, n2, region);
  Rng rng(seed);
  for (Point& p : pts) {
    const double ux = 2.0 * rng.uniform_open() - 1.0;
    const double uy = 2.0 * rng.uniform_open() - 1.0;
    p.x += epsilon * (ux * dx);
    p.y += epsilon * (uy * dy);
  }
  return {std::move(pts), region, DesignType::Bachoc, seed};
}

SamplingDesign regular_cluster_design(int n1, int nc, int ppc, double epsilon,
                                      const Region& region, std::uint64_t seed) {
  require_count(n1, 2, "n1");
  require_count(nc, 0, "nc");
  require_count(ppc, 2, "ppc");
  if (nc > n1 * n1) {
    throw ConfigError("nc", "cluster count " + std::to_string(nc) + " exceeds lattice size " +
                                std::to_string(n1 * n1));
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("eps", "cluster radius must be > 0, got " + std::to_string(epsilon));
  }
  region.validate();

  std::vector<Point> pts = lattice(n1, n1, region);
  Rng rng(seed);

  // Partial Fisher-Yates: the first nc entries become the cluster centers.
  std::vector<std::size_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (int k = 0; k < nc; ++k) {
    const std::size_t pick = k + rng.below(idx.size() - k);
    std::swap(idx[k], idx[pick]);
  }

  pts.reserve(pts.size() + static_cast<std::size_t>(nc) * (ppc - 1));
  for (int k = 0; k < nc; ++k) {
    const Point center = pts[idx[k]];
    for (int s = 0; s < ppc - 1; ++s) {
      Point sat;
      do {
        sat.x = center.x + epsilon * (2.0 * rng.uniform_open() - 1.0);
        sat.y = center.y + epsilon * (2.0 * rng.uniform_open() - 1.0);
      } while (!region.contains_strictly(sat));
      pts.push_back(sat);
    }
  }
  return {std::move(pts), region, DesignType::RegularCluster, seed};
}

RescaledDesign rescale(const SamplingDesign& design) {
  double r_max = 0.0;
  if (design.region) {
    design.region->validate();
    r_max = design.region->diameter();
  } else {
    r_max = point_set_diameter(design.points);
  }
  if (!(r_max > 0.0) || !std::isfinite(r_max)) {
    throw DesignError("cannot rescale a design with zero diameter");
  }
  RescaledDesign out;
  out.r_max = r_max;
  out.points.reserve(design.points.size());
  for (const Point& p : design.points) out.points.push_back({p.x / r_max, p.y / r_max});
  return out;
}

}  // namespace maternfi
