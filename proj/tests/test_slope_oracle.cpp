#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "taylor/problems.hpp"
#include "taylor/slope_oracle.hpp"

using namespace taylor;
using testing_util::grid1d;
using testing_util::theta_grid;

namespace {
constexpr double h = 1e-3;
double footnote(double t) { return std::abs(0.5 * t * t + t); }
}  // namespace

TEST_CASE("grid layout is row major with the last axis fastest") {
  const GridFunction f = GridFunction::sample([](const Vector& x) { return 10.0 * x[0] + x[1]; },
                                              Box(vec({0.0, 0.0}), vec({1.0, 2.0})), 0.5);
  CHECK(f.count(0) == 3);
  CHECK(f.count(1) == 5);
  CHECK(f.size() == 15);
  CHECK(f.node(1)[0] == doctest::Approx(0.0));
  CHECK(f.node(1)[1] == doctest::Approx(0.5));
  CHECK(f.node(5)[0] == doctest::Approx(0.5));
  CHECK(f.value(7) == doctest::Approx(6.0));
  CHECK(f.nearest_node(vec({0.49, 1.1})) == 7);
}

TEST_CASE("interpolation is used only without a source") {
  const GridFunction sampled = grid1d([](double t) { return t * t; }, 0.0, 1.0, 0.5);
  CHECK(sampled.value_at(vec({0.25})) == doctest::Approx(0.0625));
  const GridFunction bare(Box(vec({0.0}), vec({1.0})), 0.5, {0.0, 0.25, 1.0});
  CHECK(bare.value_at(vec({0.25})) == doctest::Approx(0.125));
  CHECK(bare.value_at(vec({0.5})) == doctest::Approx(0.25));
}

TEST_CASE("grid constructor rejects a value count that does not match the box") {
  CHECK_THROWS_AS(GridFunction(Box(vec({0.0}), vec({1.0})), 0.5, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("slope_at |t| examples") {
  const GridFunction f = grid1d([](double t) { return std::abs(t); }, -1.0, 1.0, h);
  for (double r : {h, 2 * h, 10 * h, 0.5}) CHECK(slope_at(f, vec({0.0}), r) == 0.0);
  CHECK(slope_at(f, vec({0.5}), 2 * h) == doctest::Approx(1.0).epsilon(h));
}

TEST_CASE("slope_at footnote function at 0.1 is 1.1") {
  const GridFunction f = grid1d(footnote, -3.0, 3.0, h);
  CHECK(std::abs(slope(f, vec({0.1})) - 1.1) <= 2 * h);
}

TEST_CASE("slope_at throws on a degenerate neighbourhood") {
  const GridFunction f = grid1d([](double t) { return t; }, 0.0, 1.0, 0.1);
  CHECK_THROWS_AS(slope_at(f, vec({0.5}), 0.05), DegenerateGridError);
  CHECK_THROWS(GridFunction(Box(vec({0.0}), vec({0.0})), 0.1, {1.0}));
}

TEST_CASE("limiting_slope_at examples") {
  const GridFunction fn = grid1d(footnote, -3.0, 3.0, h);
  CHECK(limiting_slope_at(fn, vec({0.0})) == doctest::Approx(0.0));
  const GridFunction sq = grid1d([](double t) { return t * t; }, -1.0, 1.0, h);
  CHECK(limiting_slope_at(sq, vec({0.0})) == doctest::Approx(0.0));
  const GridFunction ab = grid1d([](double t) { return std::abs(t); }, -1.0, 1.0, h);
  CHECK(std::abs(limiting_slope_at(ab, vec({0.5})) - 1.0) <= 5 * h);
}

TEST_CASE("limiting slope never exceeds the slope at the base point") {
  const GridFunction f = grid1d([](double t) { return std::sin(3 * t) + std::abs(t - 0.2); }, -1, 1, h);
  for (double x : {-0.7, -0.1, 0.2, 0.55}) {
    CHECK(limiting_slope_at(f, vec({x})) <= slope(f, vec({x})) + 1e-15);
  }
}

TEST_CASE("dist_to_set examples") {
  PointSet s0{{vec({0.0})}};
  CHECK(dist_to_set(vec({0.3}), s0) == doctest::Approx(0.3));
  CHECK(dist_to_set(vec({0.0}), s0) == 0.0);
  PointSet s2{{vec({0.0, 0.0}), vec({2.0, 2.0})}};
  CHECK(dist_to_set(vec({1.0, 1.0}), s2) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS(dist_to_set(vec({0.0}), PointSet{}));
}

TEST_CASE("find_certificate_witness examples") {
  const GridFunction fn = grid1d(footnote, -3.0, 3.0, h);
  SUBCASE("footnote first step") {
    const auto w = find_certificate_witness(fn, vec({1.0}), vec({0.25}), 1.0);
    REQUIRE(w.has_value());
    CHECK(std::abs(w->point[0] - 0.25) <= 0.75 + 7 * h);
    CHECK(w->slope <= 3.75);
  }
  const GridFunction sq = grid1d([](double t) { return t * t; }, -2.0, 2.0, h);
  SUBCASE("zero step at a minimizer is its own witness") {
    const auto w = find_certificate_witness(sq, vec({0.0}), vec({0.0}), 1.0);
    REQUIRE(w.has_value());
    CHECK(std::abs(w->point[0]) <= h);
  }
  SUBCASE("zero step at a non-stationary point has no witness") {
    CHECK_FALSE(find_certificate_witness(sq, vec({0.5}), vec({0.5}), 1.0).has_value());
  }
  SUBCASE("model equal to f, step to the minimizer") {
    const auto w = find_certificate_witness(sq, vec({1.0}), vec({0.0}), 1.0);
    REQUIRE(w.has_value());
    CHECK(w->point[0] == doctest::Approx(0.0));
  }
}

TEST_CASE("witness search prefers the lowest value") {
  const GridFunction sq = grid1d([](double t) { return t * t; }, -2.0, 2.0, h);
  WitnessQuery q{vec({0.3}), 0.5, 1.0, 10.0, witness_slack(1.0, h)};
  const auto w = find_witness(sq, q);
  REQUIRE(w.has_value());
  CHECK(w->point[0] == doctest::Approx(0.0));
}

TEST_CASE("estimate_kl_parameters on t^2") {
  const GridFunction f = grid1d([](double t) { return t * t; }, -1.0, 1.0, h);
  const KlEstimate e = estimate_kl_parameters(f, 0.0, f.box(), theta_grid());
  CHECK(e.theta == doctest::Approx(0.5));
  CHECK(e.alpha == doctest::Approx(0.5).epsilon(0.05));
  // the one-sided slope proxy is biased by O(h) next to the minimizer
  CHECK(e.residual <= h);
}

TEST_CASE("estimate_kl_parameters on |t| picks the smallest candidate") {
  const GridFunction f = grid1d([](double t) { return std::abs(t); }, -1.0, 1.0, h);
  const KlEstimate e = estimate_kl_parameters(f, 0.0, f.box(), theta_grid());
  CHECK(e.theta == doctest::Approx(0.05));
  // slope is 1 off the origin, so alpha is the envelope max |t|^theta
  CHECK(e.alpha == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("estimate_kl_parameters on t^4 finds theta 3/4") {
  const GridFunction f = grid1d([](double t) { return std::pow(t, 4); }, -1.0, 1.0, h);
  const KlEstimate e = estimate_kl_parameters(f, 0.0, f.box(), theta_grid());
  CHECK(e.theta == doctest::Approx(0.75));
  CHECK(e.alpha == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("estimate_kl_parameters with nothing above f* is a hypothesis error") {
  const GridFunction f = grid1d([](double) { return 1.0; }, -1.0, 1.0, 0.1);
  CHECK_THROWS_AS(estimate_kl_parameters(f, 1.0, f.box(), theta_grid()), HypothesisError);
}

TEST_CASE("sublevel_nodes collects the minimizers") {
  const GridFunction f = grid1d([](double t) { return std::abs(t * t - 0.25); }, -1.0, 1.0, h);
  const PointSet s = sublevel_nodes(f, 0.0, 1e-12);
  REQUIRE(s.points.size() == 2);
  CHECK(s.points[0][0] == doctest::Approx(-0.5));
  CHECK(s.points[1][0] == doctest::Approx(0.5));
}

TEST_CASE("property: slope converges to the gradient norm on a halving ladder") {
  auto f1 = [](double t) { return std::sin(t) + 0.5 * t * t; };
  double prev = 1.0;
  for (double s = 1e-2; s > 1e-3; s /= 2) {
    const GridFunction g = grid1d(f1, 0.0, 1.0, s);
    const double err = std::abs(slope(g, g.nearest_node(vec({0.3}))) - (std::cos(0.3) + 0.3));
    CHECK(err <= 2.0 * s);
    CHECK(err <= prev);
    prev = err;
  }
  for (double s = 2e-2; s > 2e-3; s /= 2) {
    const GridFunction g = GridFunction::sample(
        [](const Vector& x) { return x[0] * x[0] + 2 * x[1] * x[1]; }, Box(vec({-1, -1}), vec({1, 1})), s);
    const std::size_t k = g.nearest_node(vec({0.3, 0.2}));
    const Vector y = g.node(k);
    const double grad = std::hypot(2 * y[0], 4 * y[1]);
    CHECK(std::abs(slope(g, k) - grad) <= 40.0 * s);
  }
}

TEST_CASE("property: slope vanishes at neighbourhood minima") {
  const GridFunction f = grid1d([](double t) { return std::sin(7 * t) + 0.3 * std::cos(19 * t); }, -2, 2, h);
  int minima = 0;
  for (std::size_t k = 1; k + 1 < f.size(); ++k) {
    if (f.value(k) <= f.value(k - 1) && f.value(k) <= f.value(k + 1)) {
      CHECK(slope(f, k) == 0.0);
      ++minima;
    }
  }
  CHECK(minima >= 4);
}

TEST_CASE("property: witness exists for random steps toward a minimizer under a verified model") {
  // f(t) = t^2 is its own Taylor model at any base point; every exact step
  // lands on 0 and the witness is the minimizer.
  const GridFunction sq = grid1d([](double t) { return t * t; }, -2.0, 2.0, h);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.9, 1.9);
  for (int i = 0; i < 50; ++i) {
    const double x = u(rng);
    const double eta = 2.0;
    const double x_plus = x * (eta / (2.0 + eta));  // argmin t^2 + eta/2 (t - x)^2
    CHECK(find_certificate_witness(sq, vec({x}), vec({x_plus}), eta).has_value());
  }
}
