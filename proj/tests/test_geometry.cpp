#include "agdcert/geometry.hpp"

#include <cmath>

#include <doctest.h>

#include "testutil.hpp"

using namespace agdcert;

TEST_CASE("bregman divergence, euclidean") {
  const Geometry g = Geometry::euclidean(FeasibleSet::whole_space(2));
  CHECK(bregman_divergence(g, {0.0, 0.0}, {3.0, 4.0}) == doctest::Approx(12.5));
  CHECK(bregman_divergence(g, {1.0, 2.0}, {1.0, 2.0}) == 0.0);
}

TEST_CASE("bregman divergence, entropy") {
  const Geometry g = Geometry::entropy(FeasibleSet::simplex(2));
  CHECK(bregman_divergence(g, {0.5, 0.5}, {0.5, 0.5}) == doctest::Approx(0.0));
  // 0 log 0 = 0 convention on the second argument.
  CHECK(bregman_divergence(g, {0.5, 0.5}, {1.0, 0.0}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(bregman_divergence(g, {0.0, 1.0}, {0.5, 0.5}), DomainError);
}

TEST_CASE("pinsker-type lower bound on seeded simplex pairs") {
  const Geometry g = Geometry::entropy(FeasibleSet::simplex(4));
  SplitMix64 rng(404);
  for (int i = 0; i < 200; ++i) {
    const Vec x = sample_feasible_interior(g.set, rng, 1e-2);
    const Vec z = sample_feasible(g.set, rng);
    const double v = bregman_divergence(g, x, z);
    const double l1 = norm1(sub(x, z));
    CHECK(v >= 0.5 * l1 * l1 - 1e-12);
  }
}

TEST_CASE("euclidean projection") {
  SUBCASE("box clamp") {
    const FeasibleSet box = FeasibleSet::box({0.0, 0.0}, {1.0, 1.0});
    CHECK(project(box, {2.0, -1.0}) == Vec{1.0, 0.0});
  }
  SUBCASE("simplex threshold, interior support") {
    const Vec p = project(FeasibleSet::simplex(3), {0.6, 0.1, 0.1});
    CHECK(p[0] == doctest::Approx(0.6667).epsilon(1e-3));
    CHECK(p[1] == doctest::Approx(0.1667).epsilon(1e-3));
    CHECK(p[2] == doctest::Approx(0.1667).epsilon(1e-3));
  }
  SUBCASE("simplex threshold, vertex") {
    const Vec p = project(FeasibleSet::simplex(2), {2.0, 0.0});
    CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(0.0).epsilon(1e-14));
  }
  SUBCASE("ball is identity inside, radial outside") {
    const FeasibleSet ball = FeasibleSet::ball({0.0, 0.0}, 1.0);
    CHECK(project(ball, {0.3, 0.1}) == Vec{0.3, 0.1});
    const Vec p = project(ball, {2.0, 0.0});
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(0.0));
  }
  SUBCASE("idempotent and nonexpansive on seeded pairs") {
    SplitMix64 rng(9);
    const std::vector<FeasibleSet> sets = {
        FeasibleSet::box({-1.0, -2.0}, {2.0, 0.5}),
        FeasibleSet::ball({0.5, -0.5}, 1.5),
        FeasibleSet::simplex(2),
    };
    for (const auto& set : sets) {
      for (int i = 0; i < 100; ++i) {
        Vec x(2), y(2);
        for (int j = 0; j < 2; ++j) {
          x[j] = 4.0 * rng.normal();
          y[j] = 4.0 * rng.normal();
        }
        const Vec px = project(set, x), py = project(set, y);
        CHECK(set.contains(px, 1e-12));
        CHECK(norm2(sub(project(set, px), px)) <= 1e-12);
        CHECK(norm2(sub(px, py)) <= norm2(sub(x, y)) + 1e-12);
      }
    }
  }
}

TEST_CASE("bregman prox closed forms") {
  SUBCASE("whole space is a gradient step") {
    const Geometry g = Geometry::euclidean(FeasibleSet::whole_space(1));
    const ProxResult r = bregman_prox(g, {1.0}, {1.0}, 2.0);
    CHECK(r.point[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.vi_residual <= 1e-9);
  }
  SUBCASE("entropy multiplicative update") {
    const Geometry g = Geometry::entropy(FeasibleSet::simplex(2));
    const ProxResult r = bregman_prox(g, {std::log(4.0), 0.0}, {0.5, 0.5}, 1.0);
    CHECK(r.point[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(r.point[1] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(r.vi_residual <= 1e-9);
  }
  SUBCASE("ball projection of an exterior target") {
    const Geometry g = Geometry::euclidean(FeasibleSet::ball({0.0, 0.0}, 1.0));
    const ProxResult r = bregman_prox(g, {0.0, 0.0}, {2.0, 0.0}, 1.0);
    CHECK(r.point[0] == doctest::Approx(1.0));
    CHECK(r.point[1] == doctest::Approx(0.0));
  }
  SUBCASE("anchor must be feasible") {
    const Geometry g = Geometry::euclidean(FeasibleSet::ball({0.0, 0.0}, 1.0));
    CHECK_THROWS_AS(bregman_prox(g, {0.0, 0.0}, {5.0, 0.0}, 1.0), ConfigError);
  }
}

TEST_CASE("prox three-point inequality holds at random probes") {
  SplitMix64 rng(777);
  const std::vector<Geometry> geoms = {
      Geometry::euclidean(FeasibleSet::box({-1.0, 0.0, -0.5}, {1.0, 2.0, 0.5})),
      Geometry::euclidean(FeasibleSet::ball({0.0, 0.0, 0.0}, 2.0)),
      Geometry::euclidean(FeasibleSet::simplex(3)),
      Geometry::euclidean(FeasibleSet::whole_space(3)),
      Geometry::entropy(FeasibleSet::simplex(3)),
  };
  int checked = 0;
  for (const auto& geom : geoms) {
    for (int trial = 0; trial < 200; ++trial) {
      Vec g(3);
      for (double& v : g) v = 2.0 * rng.normal();
      const Vec anchor = geom.dgf == Geometry::Dgf::negative_entropy
                             ? sample_feasible_interior(geom.set, rng, 1e-2)
                             : sample_feasible(geom.set, rng);
      const double eta = 0.25 + 4.0 * rng.next_double();
      const ProxResult r = bregman_prox(geom, g, anchor, eta);
      CHECK(geom.set.contains(r.point, 1e-12));
      CHECK(r.vi_residual <= 1e-9);
      const Vec w = sample_feasible(geom.set, rng);
      const double lhs = dot(g, sub(r.point, w));
      const double rhs = eta * (bregman_divergence(geom, anchor, w) -
                                bregman_divergence(geom, r.point, w) -
                                bregman_divergence(geom, anchor, r.point));
      CHECK(lhs <= rhs + 1e-9);
      ++checked;
    }
  }
  CHECK(checked == 1000);
}

TEST_CASE("euclidean prox agrees with a brute-force 2-d minimizer") {
  SplitMix64 rng(31);
  const std::vector<FeasibleSet> sets = {
      FeasibleSet::box({-1.0, -1.0}, {1.0, 2.0}),
      FeasibleSet::ball({0.25, -0.25}, 1.0),
      FeasibleSet::simplex(2),
      FeasibleSet::whole_space(2),
  };
  for (const auto& set : sets) {
    const Geometry geom = Geometry::euclidean(set);
    for (int trial = 0; trial < 25; ++trial) {
      Vec g(2);
      for (double& v : g) v = 2.0 * rng.normal();
      const Vec anchor = sample_feasible(set, rng);
      const double eta = 0.5 + 2.0 * rng.next_double();
      const Vec fast = bregman_prox(geom, g, anchor, eta).point;
      const Vec slow = testutil::brute_force_euclidean_prox(set, g, anchor, eta);
      CHECK(norm2(sub(fast, slow)) <= 1e-6);
    }
  }
}

TEST_CASE("diameters and divergence sups") {
  CHECK(*set_diameter(Geometry::euclidean(FeasibleSet::ball({0.0}, 1.0))) ==
        doctest::Approx(2.0));
  CHECK(*set_diameter(Geometry::euclidean(
            FeasibleSet::box({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}))) ==
        doctest::Approx(std::sqrt(3.0)));
  CHECK(*set_diameter(Geometry::euclidean(FeasibleSet::simplex(3))) ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK(!set_diameter(Geometry::euclidean(FeasibleSet::whole_space(2))));
  CHECK(!set_diameter(Geometry::entropy(FeasibleSet::simplex(3))));
  CHECK(!max_divergence(Geometry::entropy(FeasibleSet::simplex(3))));
  CHECK(*max_divergence(Geometry::euclidean(FeasibleSet::ball({0.0}, 1.0))) ==
        doctest::Approx(2.0));
}

TEST_CASE("geometry pairing rules") {
  CHECK_THROWS_AS(Geometry::entropy(FeasibleSet::box({0.0}, {1.0})), ConfigError);
}
