#include <doctest.h>

#include <cmath>
#include <random>

#include "milstroud/lof.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace milstroud;

namespace {

ProximityContext line(std::initializer_list<double> xs) {
  std::vector<oracle::Point> pts;
  for (double x : xs) pts.push_back({x});
  return ProximityContext(to_instances(pts));
}

std::vector<oracle::Point> grid(int side, double spacing = 1.0) {
  std::vector<oracle::Point> pts;
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) pts.push_back({i * spacing, j * spacing});
  }
  return pts;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("k_distance") {
  const auto ctx = line({0.0, 1.0, 3.0});
  CHECK(k_distance(ctx, ctx.at(0), 2) == 3.0);
  CHECK(k_distance(ctx, ctx.at(0), 1) == 1.0);

  SUBCASE("coinciding query sees only the other point") {
    const auto two = line({5.0, 7.5});
    CHECK(k_distance(two, two.at(0), 1) == 2.5);
  }
  SUBCASE("center of four points on the unit circle") {
    ProximityContext circle(to_instances({{1, 0}, {0, 1}, {-1, 0}, {0, -1}}));
    const Instance center{99, {0.0, 0.0}};
    CHECK(k_distance(circle, ProximityContext::external(center), 3) == doctest::Approx(1.0));
  }
  SUBCASE("insufficient neighbors names k and the available count") {
    try {
      k_distance(ctx, ctx.at(0), 3);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("k=3") != std::string::npos);
      CHECK(msg.find("2 available") != std::string::npos);
    }
    CHECK_THROWS_AS(k_distance(ctx, ctx.at(0), 0), ConfigError);
  }
}

TEST_CASE("k_neighborhood includes ties") {
  const auto ctx = line({0.0, 1.0, -1.0, 5.0});
  CHECK(k_neighborhood(ctx, ctx.at(0), 1).size() == 2);
  CHECK(k_neighborhood(ctx, ctx.at(0), 2).size() == 2);
  CHECK(k_neighborhood(ctx, ctx.at(0), 3).size() == 3);
}

TEST_CASE("reachability_distance") {
  // dist(a,b)=5 with k_distance(b)=2, and dist(a,b)=1 with k_distance(b)=2.
  const auto ctx = line({0.0, 5.0, 7.0, 3.0});
  REQUIRE(k_distance(ctx, ctx.at(1), 1) == 2.0);
  CHECK(reachability_distance(ctx, ctx.at(0), 1, 1) == 5.0);
  const auto near = line({0.0, 1.0, 3.0});
  REQUIRE(k_distance(near, near.at(1), 2) == 2.0);
  CHECK(reachability_distance(near, near.at(0), 1, 2) == 2.0);

  SUBCASE("neighboring pairs of a 3x3 grid reach by k_distance(b)") {
    const auto pts = grid(3);
    ProximityContext g(to_instances(pts));
    for (std::size_t k : {1u, 2u, 3u, 4u}) {
      for (std::size_t a = 0; a < pts.size(); ++a) {
        for (std::size_t b = 0; b < pts.size(); ++b) {
          if (a == b || oracle::dist(pts[a], pts[b]) != 1.0) continue;
          const double kd = oracle::k_distance(pts, pts[b], static_cast<long>(b), k);
          if (kd < 1.0) continue;
          CHECK(reachability_distance(g, g.at(a), b, k) == kd);
        }
      }
    }
  }
}

TEST_CASE("local_reachability_density") {
  SUBCASE("two neighbors at reachability 2 and 4") {
    const auto ctx = line({0.0, -6.0, -5.0, -4.0, -2.0});
    CHECK(k_neighborhood(ctx, ctx.at(0), 2).size() == 2);
    CHECK(reachability_distance(ctx, ctx.at(0), 4, 2) == 2.0);
    CHECK(reachability_distance(ctx, ctx.at(0), 3, 2) == 4.0);
    const double lrd = local_reachability_density(ctx, ctx.at(0), 2);
    CHECK(lrd == doctest::Approx(2.0 / 6.0).epsilon(1e-15));
    std::vector<oracle::Point> pts = {{0.0}, {-6.0}, {-5.0}, {-4.0}, {-2.0}};
    CHECK(lrd == doctest::Approx(oracle::lrd(pts, pts[0], 0, 2)).epsilon(1e-15));
  }
  SUBCASE("constant reachability r gives 1/r") {
    ProximityContext circle(to_instances({{2, 0}, {0, 2}, {-2, 0}, {0, -2}}));
    const Instance center{9, {0.0, 0.0}};
    // Every circle point has k-distance 2*sqrt(2) for k=2.
    const double r = 2.0 * std::sqrt(2.0);
    CHECK(local_reachability_density(circle, ProximityContext::external(center), 2) ==
          doctest::Approx(1.0 / r));
  }
  SUBCASE("duplicates hit the ceiling") {
    const auto ctx = line({1.0, 1.0, 1.0, 1.0});
    CHECK(local_reachability_density(ctx, ctx.at(0), 3) == kLrdCeiling);
  }
}

TEST_CASE("lof_score") {
  SUBCASE("interior of a uniform grid scores 1") {
    const auto pts = grid(12);
    ProximityContext g(to_instances(pts));
    LofModel model(g, 4);
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto x = pts[i][0];
      const auto y = pts[i][1];
      if (x < 2 || y < 2 || x > 9 || y > 9) continue;
      const double s = model.score_reference(i).value();
      CHECK(s == doctest::Approx(1.0).epsilon(0.05));
      sum += s;
      ++count;
    }
    const double mean = sum / count;
    CHECK(mean >= 0.95);
    CHECK(mean <= 1.05);
  }
  SUBCASE("far outlier matches the brute-force oracle") {
    std::mt19937_64 rng(11);
    auto pts = oracle::random_points(rng, 10, 2);
    pts.push_back({100.0, 0.0});
    ProximityContext ctx(to_instances(pts));
    const double s = lof_score(ctx, ctx.at(10), {3, LofScope::ReferenceGlobal}).value();
    const double expect = oracle::lof(pts, pts[10], 10, 3);
    CHECK(rel_err(s, expect) < 1e-9);
    CHECK(s > 10.0);
  }
  SUBCASE("all points identical") {
    const auto ctx = line({2.0, 2.0, 2.0, 2.0, 2.0});
    for (std::size_t i = 0; i < 5; ++i) CHECK(lof_score(ctx, ctx.at(i), {2}).value() == 1.0);
  }
  SUBCASE("infeasible k is reported, not capped") {
    CHECK_THROWS_AS(bag_local_lof(to_instances({{0.0}, {1.0}, {2.0}}), 3), ConfigError);
    CHECK_NOTHROW(bag_local_lof(to_instances({{0.0}, {1.0}, {2.0}}), 2));
  }
}

TEST_CASE("lof oracle equivalence on random data") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nDist(2, 40);
  std::uniform_int_distribution<int> dDist(1, 6);
  for (int trial = 0; trial < 60; ++trial) {
    const auto n = static_cast<std::size_t>(nDist(rng));
    auto pts = oracle::random_points(rng, n, static_cast<std::size_t>(dDist(rng)));
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(10, n - 1))(rng);
    LofModel model(ProximityContext(to_instances(pts)), k);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(rel_err(model.score_reference(i).value(), oracle::lof(pts, pts[i], static_cast<long>(i), k)) <
            1e-9);
    }
    const auto q = oracle::random_points(rng, 1, pts[0].size())[0];
    CHECK(rel_err(model.score(ProximityContext::external({0, q})).value(), oracle::lof(pts, q, -1, k)) <
          1e-9);
  }
}

TEST_CASE("lof is invariant under rigid motions") {
  std::mt19937_64 rng(5);
  const auto pts = oracle::random_points(rng, 30, 2);
  const double theta = 0.7;
  std::vector<oracle::Point> moved;
  for (const auto& p : pts) {
    moved.push_back({std::cos(theta) * p[0] - std::sin(theta) * p[1] + 13.0,
                     std::sin(theta) * p[0] + std::cos(theta) * p[1] - 4.0});
  }
  for (std::size_t k : {1u, 3u, 7u}) {
    const auto a = bag_local_lof(to_instances(pts), k);
    const auto b = bag_local_lof(to_instances(moved), k);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(rel_err(b[i], a[i]) < 1e-9);
  }
}

TEST_CASE("moving a point away from a cluster never lowers its lof") {
  std::mt19937_64 rng(8);
  auto pts = oracle::random_points(rng, 20, 2);
  ProximityContext ctx(to_instances(pts));
  LofModel model(ctx, 5);
  double prev = 0.0;
  for (double r = 0.0; r <= 40.0; r += 0.5) {
    const Instance q{0, {r, r * 0.5}};
    const double s = model.score(ProximityContext::external(q)).value();
    if (r >= 3.0) CHECK(s >= prev - 1e-12);
    prev = s;
  }
}
