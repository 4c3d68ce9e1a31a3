#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tailsim/equal_scores.hpp"
#include "tailsim/estimator.hpp"
#include "tailsim/no_rejection.hpp"
#include "tailsim/oracles.hpp"

using namespace tailsim;

namespace {

/// Sup distance between two step CDFs over the union of their jump points.
double two_sample_sup(const TailCdf& a, const TailCdf& b) {
  auto value_at = [](const TailCdf& c, double z) {
    double v = 0.0;
    for (const auto& p : c.points) {
      if (p.z > z) break;
      v = p.cdf;
    }
    return v;
  };
  double sup = 0.0;
  for (const auto& p : a.points) sup = std::max(sup, std::fabs(p.cdf - value_at(b, p.z)));
  for (const auto& p : b.points) sup = std::max(sup, std::fabs(value_at(a, p.z) - p.cdf));
  return sup;
}

}  // namespace

TEST_CASE("single-stage tables reduce to the truncated base distribution") {
  const auto f = sum_target(1);
  const auto model = uniform_box(1);
  const auto spec = make_tail_spec(f, model, TailSide::right, 0.1);
  const auto tables = build_sampling_tables(f, model, spec, 64);
  REQUIRE(tables.score == Catch::Approx(0.1).epsilon(1e-12));
  Rng rng(3);
  for (int k = 0; k < 500; ++k) {
    const auto pt = draw_equal_score_sample(tables, rng);
    REQUIRE(pt.z > 0.9);
    REQUIRE(pt.z <= 1.0);
    REQUIRE(pt.score == tables.score);
    REQUIRE(realized_score(tables, pt.x) == Catch::Approx(tables.score).epsilon(1e-9));
  }
}

TEST_CASE("resolution guard") {
  const auto f = sum_target(2);
  const auto model = uniform_box(2);
  const auto spec = make_tail_spec(f, model, TailSide::right, 0.1);
  REQUIRE_THROWS_AS(build_sampling_tables(f, model, spec, 4), ConfigError);
}

TEST_CASE("dimension guard") {
  const auto f = sum_target(5);
  const auto model = uniform_box(5);
  const auto spec = make_tail_spec(f, model, TailSide::right, 0.1);
  REQUIRE_THROWS_AS(build_sampling_tables(f, model, spec, 64), ConfigError);
}

TEST_CASE("emitted score equals the exact tail mass up to quadrature error") {
  const auto f = sum_target(3);
  const auto model = uniform_box(3);
  const auto spec = make_tail_spec(f, model, TailSide::right, 0.1);
  const auto tables = build_sampling_tables(f, model, spec, 64);
  // corner simplex mass eps^3 / 3!
  REQUIRE(tables.score == Catch::Approx(0.1 * 0.1 * 0.1 / 6.0).epsilon(1e-6));
}

TEST_CASE("scores are constant across draws") {
  const auto f = sum_target(3);
  const auto model = uniform_box(3);
  const auto spec = make_tail_spec(f, model, TailSide::right, 0.1);
  const auto tables = build_sampling_tables(f, model, spec, 64);
  const Rng root(2718);

  double w_min = 1e300, w_max = 0.0;
  for (int k = 0; k < 1000; ++k) {
    Rng rng = root.split(k);
    const auto pt = draw_equal_score_sample(tables, rng);
    REQUIRE(pt.score == tables.score);  // emitted score is the table constant
    REQUIRE(in_tail(spec, pt.z));
    const double w = realized_score(tables, pt.x);
    w_min = std::min(w_min, w);
    w_max = std::max(w_max, w);
  }
  // realised importance ratios spread only by table error
  REQUIRE(w_max / w_min <= 1.0 + 1e-3);
}

TEST_CASE("tables through the negation path: unavailability target") {
  const auto r = reliability_target(0.999, 0.9999);
  const auto spec = make_tail_spec(r.target, r.model, TailSide::right, 5e-5);
  const auto tables = build_sampling_tables(r.target, r.model, spec, 64);
  Rng rng(10);
  for (int k = 0; k < 300; ++k) {
    const auto pt = draw_equal_score_sample(tables, rng);
    REQUIRE(in_tail(spec, pt.z));
  }
  // score approximates the exact tail probability of the right tail
  const double exact = 1.0 - reliability_cdf(spec.z_max - spec.epsilon, 0.999, 0.9999);
  REQUIRE(tables.score == Catch::Approx(exact).epsilon(1e-3));
}

TEST_CASE("assembled cdf agrees with the guaranteed-tail sampler") {
  const auto f = sum_target(3);
  const auto model = uniform_box(3);
  const auto spec = make_tail_spec(f, model, TailSide::right, 0.1);
  const std::size_t m = 2000;

  const auto tables = build_sampling_tables(f, model, spec, 64);
  std::vector<WeightedPoint> eq(m);
  const Rng root(1);
  for (std::size_t j = 0; j < m; ++j) {
    Rng rng = root.split(j);
    eq[j] = draw_equal_score_sample(tables, rng);
  }
  const auto eq_cdf = conditional(assemble_tail_cdf(eq, m, spec.side));

  const auto nr = run_tail_simulation(f, model, spec, m, Rng(2));
  const auto nr_cdf = conditional(assemble_tail_cdf(nr.points, m, spec.side));

  REQUIRE(two_sample_sup(eq_cdf, nr_cdf) <= 0.05);
}
