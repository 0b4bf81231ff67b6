#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "maternfi/design.hpp"
#include "maternfi/errors.hpp"

using namespace maternfi;
using Catch::Approx;

namespace {

double min_pair_distance(const std::vector<Point>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, distance(pts[i], pts[j]));
  return best;
}

bool all_strictly_inside(const SamplingDesign& d) {
  return std::all_of(d.points.begin(), d.points.end(),
                     [&](const Point& p) { return d.region->contains_strictly(p); });
}

}  // namespace

TEST_CASE("regular lattice", "[design]") {
  const SamplingDesign d15 = regular_design(15);
  CHECK(d15.size() == 225);
  CHECK(min_pair_distance(d15.points) == Approx(1.0 / 15.0).epsilon(1e-12));
  CHECK(d15.label == DesignType::Regular);
  CHECK(all_strictly_inside(d15));
  CHECK(regular_design(14).size() == 196);

  const SamplingDesign d2 = regular_design(2);
  std::vector<Point> expected{{0.25, 0.25}, {0.25, 0.75}, {0.75, 0.25}, {0.75, 0.75}};
  auto got = d2.points;
  std::sort(got.begin(), got.end(), [](auto a, auto b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  CHECK(got == expected);

  const SamplingDesign scaled = regular_design(4, Region{10.0, 30.0, -2.0, 2.0});
  CHECK(scaled.points.front() == Point{12.5, -1.5});
  CHECK(all_strictly_inside(scaled));

  CHECK_THROWS_AS(regular_design(1), ConfigError);
  CHECK_THROWS_AS(regular_design(3, Region{0.0, 0.0, 0.0, 1.0}), DesignError);
  CHECK_THROWS_AS(regular_design(3, Region{1.0, 0.0, 0.0, 1.0}), DesignError);
}

TEST_CASE("random design", "[design]") {
  const SamplingDesign d = random_design(225, Region::unit_square(), 7);
  CHECK(d.size() == 225);
  CHECK(all_strictly_inside(d));
  CHECK(d.seed == 7u);

  const SamplingDesign one = random_design(1, Region::unit_square(), 99);
  REQUIRE(one.size() == 1);
  CHECK(Region::unit_square().contains_strictly(one.points[0]));

  CHECK(random_design(1000, Region::unit_square(), 2024).points ==
        random_design(1000, Region::unit_square(), 2024).points);
  CHECK(random_design(50, Region::unit_square(), 1).points !=
        random_design(50, Region::unit_square(), 2).points);
  CHECK_THROWS_AS(random_design(0, Region::unit_square(), 1), ConfigError);
}

TEST_CASE("random design stream is frozen", "[design][fixture]") {
  // Regression fixture for the portable generator.
  const SamplingDesign d = random_design(3, Region::unit_square(), 12345);
  const std::vector<Point> expected{{0.35762972288842593, 0.4004426170440612},
                                    {0.68938331700276856, 0.55973557064111557},
                                    {0.57445129399171102, 0.20769052686175465}};
  CHECK(d.points == expected);
}

TEST_CASE("Bachoc perturbed lattice", "[design]") {
  const SamplingDesign zero = bachoc_design(15, 15, 0.0, Region::unit_square(), 3);
  CHECK(zero.points == regular_design(15).points);

  const SamplingDesign lattice = regular_design(15);
  const SamplingDesign d = bachoc_design(15, 15, 0.4, Region::unit_square(), 3);
  REQUIRE(d.size() == 225);
  CHECK(d.label == DesignType::Bachoc);
  CHECK(all_strictly_inside(d));
  double max_dx = 0.0;
  double max_dy = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    max_dx = std::max(max_dx, std::fabs(d.points[i].x - lattice.points[i].x));
    max_dy = std::max(max_dy, std::fabs(d.points[i].y - lattice.points[i].y));
  }
  CHECK(max_dx <= 0.4 / 15.0);
  CHECK(max_dy <= 0.4 / 15.0);
  CHECK(max_dx > 0.0);

  CHECK(bachoc_design(2, 3, 0.1, Region::unit_square(), 5).size() == 6);
  CHECK(bachoc_design(15, 15, 0.4, Region::unit_square(), 3).points == d.points);
  CHECK_THROWS_AS(bachoc_design(3, 3, 0.5, Region::unit_square(), 1), ConfigError);
  CHECK_THROWS_AS(bachoc_design(3, 3, -0.1, Region::unit_square(), 1), ConfigError);
}

TEST_CASE("regular plus cluster", "[design]") {
  const SamplingDesign d = regular_cluster_design(14, 10, 4, 0.04, Region::unit_square(), 11);
  CHECK(d.size() == 226);
  CHECK(d.label == DesignType::RegularCluster);
  CHECK(all_strictly_inside(d));
  CHECK_NOTHROW(d.validate());

  // The first n1^2 points are the lattice; every satellite is within epsilon of some node.
  const SamplingDesign lattice = regular_design(14);
  CHECK(std::equal(lattice.points.begin(), lattice.points.end(), d.points.begin()));
  for (std::size_t i = 196; i < d.size(); ++i) {
    const bool near = std::any_of(lattice.points.begin(), lattice.points.end(), [&](const Point& v) {
      return std::fabs(d.points[i].x - v.x) < 0.04 && std::fabs(d.points[i].y - v.y) < 0.04;
    });
    CHECK(near);
  }

  CHECK(regular_cluster_design(14, 0, 4, 0.04, Region::unit_square(), 11).points ==
        lattice.points);
  CHECK(regular_cluster_design(3, 2, 2, 0.01, Region::unit_square(), 4).size() == 11);

  // Large epsilon near the boundary still yields interior points.
  const SamplingDesign wide = regular_cluster_design(3, 9, 5, 0.3, Region::unit_square(), 8);
  CHECK(wide.size() == 9 + 9 * 4);
  CHECK(all_strictly_inside(wide));

  CHECK_THROWS_AS(regular_cluster_design(3, 10, 2, 0.01, Region::unit_square(), 1), ConfigError);
  CHECK_THROWS_AS(regular_cluster_design(3, 2, 1, 0.01, Region::unit_square(), 1), ConfigError);
  CHECK_THROWS_AS(regular_cluster_design(3, 2, 2, 0.0, Region::unit_square(), 1), ConfigError);
}

TEST_CASE("validation", "[design]") {
  SamplingDesign d;
  d.region = Region::unit_square();
  CHECK_THROWS_AS(d.validate(), DesignError);
  d.points = {{0.1, 0.2}, {0.5, 0.5}, {0.1, 0.2}};
  CHECK_THROWS_WITH(d.validate(), Catch::Matchers::ContainsSubstring("0") &&
                                      Catch::Matchers::ContainsSubstring("2"));
  auto dup = find_duplicate(d.points);
  REQUIRE(dup);
  CHECK(dup->first == 0);
  CHECK(dup->second == 2);
  d.points = {{0.1, 0.2}, {1.5, 0.5}};
  CHECK_THROWS_AS(d.validate(), DesignError);
  d.points = {{0.1, std::nan("")}};
  CHECK_THROWS_AS(d.validate(), DesignError);
  d.points = {{0.1, 0.2}, {1.0, 1.0}};
  CHECK_NOTHROW(d.validate());
  d.region.reset();
  d.points = {{-100.0, 3.0}, {4.0, 5.0}};
  CHECK_NOTHROW(d.validate());
}

TEST_CASE("design type names round-trip", "[design]") {
  for (DesignType t : {DesignType::Regular, DesignType::Random, DesignType::Bachoc,
                       DesignType::RegularCluster, DesignType::File}) {
    CHECK(design_type_from_string(to_string(t)) == t);
  }
  CHECK(to_string(DesignType::RegularCluster) == "regular+cluster");
  CHECK_THROWS(design_type_from_string("hexagonal"));
}

TEST_CASE("rescale", "[design]") {
  const SamplingDesign d = random_design(40, Region::unit_square(), 5);
  const RescaledDesign s = rescale(d);
  CHECK(s.r_max == Approx(std::sqrt(2.0)).epsilon(1e-15));
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(s.points[i].x == Approx(d.points[i].x / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(s.points[i].y == Approx(d.points[i].y / std::sqrt(2.0)).epsilon(1e-15));
  }
  // Pairwise distance ratios are preserved.
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = i + 1; j < 10; ++j) {
      CHECK(distance(s.points[i], s.points[j]) ==
            Approx(distance(d.points[i], d.points[j]) / s.r_max).epsilon(1e-14));
    }
  }

  // A region whose diameter is already 1 maps to itself.
  const double side = 1.0 / std::sqrt(2.0);
  const Region unit_diam{0.0, side, 0.0, side};
  const SamplingDesign u = random_design(10, unit_diam, 9);
  const RescaledDesign us = rescale(u);
  CHECK(us.r_max == Approx(1.0).epsilon(1e-15));
  for (std::size_t i = 0; i < u.size(); ++i) {
    CHECK(us.points[i].x == Approx(u.points[i].x).epsilon(1e-15));
  }

  // No declared region: the point-set diameter is used.
  SamplingDesign f;
  f.points = {{0.0, 0.0}, {3.0, 4.0}, {1.0, 1.0}};
  const RescaledDesign fs = rescale(f);
  CHECK(fs.r_max == Approx(5.0));
  CHECK(fs.points[1] == Point{0.6, 0.8});
  CHECK(point_set_diameter(f.points) == Approx(5.0));

  SamplingDesign single;
  single.points = {{1.0, 1.0}};
  CHECK_THROWS_AS(rescale(single), DesignError);
}
