#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "tailsim/oracles.hpp"
#include "tailsim/reduced_rejection.hpp"
#include "test_util.hpp"

using namespace tailsim;

TEST_CASE("tangency point of the product right tail is the symmetric root") {
  const auto f = product_target(3);
  const auto model = uniform_box(3);
  const auto spec = make_tail_spec(f, model, TailSide::right, 0.1);
  const auto x0 = tangency_point(f, model, spec);
  const double expected = std::cbrt(0.9);
  for (double v : x0) REQUIRE(v == Catch::Approx(expected).epsilon(1e-10));
  REQUIRE(x0[0] == Catch::Approx(0.965489).margin(5e-7));
  // level-set membership residual
  REQUIRE(f.evaluate(x0) == Catch::Approx(0.9).margin(1e-10));
}

TEST_CASE("tangency for linear targets falls on the level hyperplane") {
  const auto f = sum_target(3);
  const auto model = uniform_box(3);
  const auto spec = make_tail_spec(f, model, TailSide::right, 0.3);
  const auto x0 = tangency_point(f, model, spec);
  double s = 0.0;
  for (double v : x0) s += v;
  REQUIRE(s == Catch::Approx(2.7).margin(1e-10));
}

TEST_CASE("tangency fails at a zero-gradient corner") {
  const auto f = product_target(3);
  const auto model = uniform_box(3);
  const auto spec = make_tail_spec(f, model, TailSide::left, 0.01);
  REQUIRE_THROWS_WITH(tangency_point(f, model, spec),
                      Catch::Matchers::ContainsSubstring("tangency failure"));
}

TEST_CASE("curvature classification at corners") {
  // product at its maximum corner: mixed eigenvalues, no full-space certificate
  const auto prod = product_target(3);
  REQUIRE(check_curvature(prod, std::vector<double>{1.0, 1.0, 1.0}) ==
          CurvatureClass::indefinite);
  // linear target: zero Hessian is not negative definite either
  const auto sum = sum_target(3);
  REQUIRE(check_curvature(sum, std::vector<double>{1.0, 1.0, 1.0}) == CurvatureClass::indefinite);
  // two-dimensional product complement: also mixed
  TargetFunction comp;
  comp.dimension = 2;
  comp.monotone_signs = {-1, -1};
  comp.evaluate = [](std::span<const double> x) { return 1.0 - x[0] * x[1]; };
  REQUIRE(check_curvature(comp, std::vector<double>{1.0, 1.0}) == CurvatureClass::indefinite);
}

TEST_CASE("containment certificates decide between tangent and fallback") {
  const auto model3 = uniform_box(3);

  // product right tail: certified, the worked construction stands
  const auto prod = product_target(3);
  const auto right = make_tail_spec(prod, model3, TailSide::right, 0.1);
  REQUIRE(make_tangent_region(prod, model3, right).containment_certified);

  // linear target: flat level sets, certified and exact
  const auto sum = sum_target(3);
  const auto sright = make_tail_spec(sum, model3, TailSide::right, 0.3);
  REQUIRE(make_tangent_region(sum, model3, sright).containment_certified);

  // unavailability right tail: the level set spills over the plane near the
  // box edges, so the tangent region must be refused in favour of the secant
  const auto r = reliability_target(0.999, 0.9999);
  const auto rspec = make_tail_spec(r.target, r.model, TailSide::right, 5e-5);
  REQUIRE_FALSE(make_tangent_region(r.target, r.model, rspec).containment_certified);
}

TEST_CASE("moving hyperplane bounds for the product right tail") {
  const auto f = product_target(3);
  const auto model = uniform_box(3);
  const auto spec = make_tail_spec(f, model, TailSide::right, 0.1);
  const auto region = make_tangent_region(f, model, spec);
  const auto lo = model.lower_corner(), hi = model.upper_corner();

  const double delta = 1.0 - std::cbrt(0.9);
  auto b1 = hyperplane_bounds(region, 0, {}, lo, hi);
  REQUIRE(b1.has_value());
  REQUIRE(b1->first == Catch::Approx(1.0 - 3.0 * delta).epsilon(1e-10));
  REQUIRE(b1->first == Catch::Approx(0.896468).margin(5e-7));
  REQUIRE(b1->second == 1.0);

  const std::vector<double> prefix{0.95};
  auto b2 = hyperplane_bounds(region, 1, prefix, lo, hi);
  REQUIRE(b2.has_value());
  REQUIRE(b2->first == Catch::Approx(2.0 - 3.0 * delta - 0.95).epsilon(1e-10));
  REQUIRE(b2->first == Catch::Approx(0.946468).margin(5e-7));
}

TEST_CASE("secant hyperplane for the unavailability case") {
  const double alpha = 0.999, beta = 0.9999, eps = 5e-5;
  const auto r = reliability_target(alpha, beta);
  const auto spec = make_tail_spec(r.target, r.model, TailSide::right, eps);
  const auto region = secant_hyperplane(r.target, r.model, spec);

  // plane: x1 + x2 + x3 = 3 beta + eps / (alpha beta^2); check via the
  // normal-form offset at the anchor
  const double expected_offset = 3.0 * beta + eps / (alpha * beta * beta);
  double offset = 0.0;
  // all offsets equal, so the plane is sum-form; reconstruct the sum at the anchor
  for (std::size_t k = 0; k < 3; ++k) offset += region.anchor[k];
  REQUIRE(offset == Catch::Approx(expected_offset).epsilon(1e-12));
  REQUIRE(offset - 3.0 * beta == Catch::Approx(5.006e-5).epsilon(1e-3));

  // sequential ranges reproduce the closed forms
  const auto lo = r.model.lower_corner(), hi = r.model.upper_corner();
  const double epsp = eps / (alpha * beta * beta);
  auto b1 = hyperplane_bounds(region, 0, {}, lo, hi);
  REQUIRE(b1->first == Catch::Approx(beta).margin(1e-14));
  REQUIRE(b1->second == Catch::Approx(beta + epsp).epsilon(1e-10));
  const std::vector<double> prefix{beta + 0.4 * epsp};
  auto b2 = hyperplane_bounds(region, 1, prefix, lo, hi);
  REQUIRE(b2->second == Catch::Approx(2.0 * beta - prefix[0] + epsp).epsilon(1e-10));
}

TEST_CASE("secant against the symmetric product level set matches the tangent plane") {
  const auto f = product_target(3);
  const auto model = uniform_box(3);
  const auto spec = make_tail_spec(f, model, TailSide::right, 0.1);
  const auto secant = secant_hyperplane(f, model, spec);
  const auto tangent = make_tangent_region(f, model, spec);
  // both planes are sum-form; compare their offsets at the first coordinate axis
  // tangent: sum x = 3 cbrt(0.9); secant: edge crossing at x_i = 0.9
  double tangent_offset = 0.0;
  for (double v : tangent.anchor) tangent_offset += v;
  REQUIRE(tangent_offset == Catch::Approx(3.0 * std::cbrt(0.9)).epsilon(1e-10));
  double secant_offset = 0.0;
  for (double v : secant.anchor) secant_offset += v;
  REQUIRE(secant_offset == Catch::Approx(2.9).epsilon(1e-12));
  // the secant cuts deeper than the tangent for this concave level set
  REQUIRE(secant_offset < tangent_offset);
}

TEST_CASE("degenerate zero-width secant sits on the corner") {
  const auto f = product_target(3);
  const auto model = uniform_box(3);
  TailSpec spec = make_tail_spec(f, model, TailSide::right, 0.1);
  spec.epsilon = 0.0;
  const auto region = secant_hyperplane(f, model, spec);
  REQUIRE(region.anchor == std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("min-corner draws honour the threshold split") {
  REQUIRE(std::cbrt(0.01) == Catch::Approx(0.215443).margin(5e-7));
  Rng rng(5150);
  const double t = std::cbrt(0.01);
  for (int k = 0; k < 2000; ++k) {
    const auto d = min_corner_region_draw(3, 0.01, rng);
    const bool early_low = std::min(d.x[0], d.x[1]) < t;
    if (early_low) {
      REQUIRE(d.score == 1.0);
    } else {
      REQUIRE(d.score == Catch::Approx(t));
      REQUIRE(d.x[2] <= t);
    }
    REQUIRE(std::min({d.x[0], d.x[1], d.x[2]}) < t);
  }
}

TEST_CASE("linear targets reject nothing") {
  const auto f = sum_target(3);
  const auto model = uniform_box(3);
  const auto spec = make_tail_spec(f, model, TailSide::right, 0.2);
  const auto res = run_reduced_rejection(f, model, spec, 4000, Rng(77), RegionKind::tangent);
  REQUIRE(res.stats.m_accepted == 4000);
  REQUIRE(res.stats.count_rejection == 0.0);
}

TEST_CASE("accepted points satisfy the tail predicate exactly") {
  const auto f = product_target(3);
  const auto model = uniform_box(3);

  const auto right = make_tail_spec(f, model, TailSide::right, 0.1);
  const auto res = run_reduced_rejection(f, model, right, 5000, Rng(31), RegionKind::tangent);
  REQUIRE(res.stats.m_accepted == res.points.size());
  for (const auto& pt : res.points) REQUIRE(in_tail(right, pt.z));

  const auto left = make_tail_spec(f, model, TailSide::left, 0.01);
  const auto mres = run_reduced_rejection(f, model, left, 5000, Rng(32), RegionKind::min_corner);
  for (const auto& pt : mres.points) REQUIRE(in_tail(left, pt.z));
  REQUIRE(mres.stats.count_rejection > 0.5);  // most of the min-corner box misses the tail
}

TEST_CASE("min-corner preconditions") {
  const auto f = product_target(3);
  const auto model = uniform_box(3);
  const auto right = make_tail_spec(f, model, TailSide::right, 0.1);
  REQUIRE_THROWS_AS(run_reduced_rejection(f, model, right, 10, Rng(1), RegionKind::min_corner),
                    ConfigError);
  const auto r = reliability_target(0.999, 0.9999);
  const auto rspec = make_tail_spec(r.target, r.model, TailSide::right, 5e-5);
  // box is [beta, 1], not the unit box
  REQUIRE_THROWS_AS(
      run_reduced_rejection(r.target, r.model, mirror_tail_spec(rspec), 10, Rng(1),
                            RegionKind::min_corner),
      ConfigError);
}

TEST_CASE("weighted scores absorb the rejection correctly") {
  const auto f = product_target(3);
  const auto model = uniform_box(3);
  const auto right = make_tail_spec(f, model, TailSide::right, 0.1);
  const double exact = 1.0 - product_uniform_cdf(3, 0.9);
  const auto res = run_reduced_rejection(f, model, right, 200000, Rng(88), RegionKind::tangent);
  double acc = 0.0;
  for (const auto& pt : res.points) acc += pt.score;
  const double est = acc / static_cast<double>(res.stats.m_total);
  REQUIRE(est == Catch::Approx(exact).epsilon(0.05));

  const auto left = make_tail_spec(f, model, TailSide::left, 0.01);
  const auto mres = run_reduced_rejection(f, model, left, 200000, Rng(89), RegionKind::min_corner);
  double macc = 0.0;
  for (const auto& pt : mres.points) macc += pt.score;
  const double mest = macc / static_cast<double>(mres.stats.m_total);
  REQUIRE(mest == Catch::Approx(product_uniform_cdf(3, 0.01)).epsilon(0.02));
}

TEST_CASE("count rejection tracks the sequential-scheme acceptance probability") {
  const auto f = product_target(3);
  const auto model = uniform_box(3);

  const auto right = make_tail_spec(f, model, TailSide::right, 0.1);
  const auto res = run_reduced_rejection(f, model, right, 20000, Rng(90), RegionKind::tangent);
  const double quad = 1.0 - test_util::tangent_acceptance_product3(0.1);
  REQUIRE(res.stats.count_rejection == Catch::Approx(quad).margin(0.02));

  const auto left = make_tail_spec(f, model, TailSide::left, 0.01);
  const auto mres = run_reduced_rejection(f, model, left, 20000, Rng(91), RegionKind::min_corner);
  const double mquad = 1.0 - test_util::min_corner_acceptance_product3(0.01);
  REQUIRE(mres.stats.count_rejection == Catch::Approx(mquad).margin(0.02));
}

TEST_CASE("containment audit on brute-force tail points") {
  // configurations whose tail probabilities allow a direct Monte Carlo audit
  // slack absorbs rounding in the plane coefficients, about 1e-9 in the
  // normalised plane units, i.e. far below any geometric violation
  auto inside_halfspace = [](const HyperplaneRegion& region, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k)
      s += region.normal[k] * (x[k] - region.anchor[k]);
    return region.corner_side_positive ? s >= -1e-9 : s <= 1e-9;
  };

  const auto f = product_target(3);
  const auto model = uniform_box(3);

  SECTION("tangent region, product right tail") {
    const auto spec = make_tail_spec(f, model, TailSide::right, 0.3);
    const auto region = make_tangent_region(f, model, spec);
    REQUIRE(region.containment_certified);
    const auto bf = brute_force_tail_cdf(f, model, spec, 2000000, Rng(4001));
    REQUIRE(bf.hits >= 10000);
    for (const auto& pt : bf.raw_hits) REQUIRE(inside_halfspace(region, pt.x));
  }

  SECTION("min-corner region, product left tail") {
    const auto spec = make_tail_spec(f, model, TailSide::left, 0.01);
    const double threshold = std::cbrt(0.01);
    const auto bf = brute_force_tail_cdf(f, model, spec, 1000000, Rng(4002));
    REQUIRE(bf.hits >= 100000);
    for (const auto& pt : bf.raw_hits)
      REQUIRE(std::min({pt.x[0], pt.x[1], pt.x[2]}) < threshold);
  }

  SECTION("secant region, unavailability right tail") {
    const auto r = reliability_target(0.999, 0.9999);
    const auto spec = make_tail_spec(r.target, r.model, TailSide::right, 5e-5);
    const auto region = secant_hyperplane(r.target, r.model, spec);
    const auto bf = brute_force_tail_cdf(r.target, r.model, spec, 6000000, Rng(4003));
    REQUIRE(bf.hits >= 100000);
    for (const auto& pt : bf.raw_hits) REQUIRE(inside_halfspace(region, pt.x));
  }
}
