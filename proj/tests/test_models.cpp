#include <doctest.h>

#include <cmath>

#include "taylor/models.hpp"
#include "taylor/problem.hpp"

using namespace taylor;

namespace {
QuadraticModel scalar_model(double (*f)(double), double (*df)(double), double x, double b, double eta) {
  return build_quadratic_model([f](const Vector& y) { return f(y[0]); },
                               [df](const Vector& y) { return Vector::Constant(1, df(y[0])); },
                               vec({x}), Matrix::Constant(1, 1, b), eta);
}
double sq(double t) { return t * t; }
double dsq(double t) { return 2 * t; }
double quartic(double t) { return std::pow(t, 4); }
double dquartic(double t) { return 4 * std::pow(t, 3); }
double sine(double t) { return std::sin(t); }
double cosine(double t) { return std::cos(t); }
}  // namespace

TEST_CASE("growth function examples") {
  const GrowthFunction w = GrowthFunction::power(2.0, 2.0);
  CHECK(w.value(0.5) == doctest::Approx(0.25));
  CHECK(w.derivative(0.5) == doctest::Approx(1.0));
  const GrowthFunction v = GrowthFunction::power(3.0, 1.5);
  CHECK(v.value(1.0) == doctest::Approx(2.0));
  CHECK(v.derivative(1.0) == doctest::Approx(3.0));
  for (const GrowthFunction& g : {w, v, GrowthFunction::power(1.0, 3.0)}) {
    CHECK(g.value(0.0) == 0.0);
    CHECK(g.derivative(0.0) == 0.0);
  }
}

TEST_CASE("growth function rejects invalid parameters") {
  CHECK_THROWS(GrowthFunction::power(-1.0, 2.0));
  CHECK_THROWS(GrowthFunction::power(1.0, 1.0));
  CHECK_THROWS(GrowthFunction::custom([](double t) { return t + 1; }, [](double) { return 1.0; }));
  CHECK_THROWS(GrowthFunction::custom([](double t) { return -t * t; }, [](double t) { return -2 * t; }));
}

TEST_CASE("custom growth evaluates through its callables") {
  const GrowthFunction w = GrowthFunction::custom([](double t) { return t * t * t / 3; },
                                                  [](double t) { return t * t; }, "cubic");
  CHECK(w.value(3.0) == doctest::Approx(9.0));
  CHECK(w.derivative(3.0) == doctest::Approx(9.0));
  CHECK(w.proximity_ratio(3.0) == doctest::Approx(1.0));
  CHECK_FALSE(w.is_power());
}

TEST_CASE("property: power growth with r > 1 is proper, w/w' = t/r -> 0") {
  for (double r : {1.25, 1.5, 2.0, 3.0, 4.5}) {
    const GrowthFunction w = GrowthFunction::power(1.7, r);
    CHECK(w.proper());
    double prev = 1e300;
    for (int k = 1; k <= 40; ++k) {
      const double t = std::ldexp(1.0, -k);
      const double ratio = w.value(t) / w.derivative(t);
      CHECK(ratio == doctest::Approx(t / r).epsilon(1e-12));
      CHECK(w.derivative(t) < prev);
      prev = w.derivative(t);
    }
  }
}

TEST_CASE("property: quadratic proximity ratio 2w(d)/w'(d) equals d") {
  for (double eta : {0.1, 1.0, 7.5}) {
    const GrowthFunction w = GrowthFunction::quadratic(eta);
    for (double d : {1e-6, 0.01, 0.3, 2.0, 100.0}) CHECK(2.0 * w.proximity_ratio(d) == doctest::Approx(d).epsilon(1e-14));
  }
}

TEST_CASE("quadratic model of t^2 with the Hessian is exact") {
  const QuadraticModel m = scalar_model(sq, dsq, 1.0, 2.0, 0.0);
  for (double y : {-3.0, -0.5, 0.0, 1.0, 2.5}) CHECK(m.model(vec({y})) == doctest::Approx(y * y));
  const auto mr = verify_model_error([](const Vector& y) { return y[0] * y[0]; }, m.model,
                                     uniform_samples(Box(vec({-3}), vec({3})), 500, 1));
  CHECK(mr.holds());
  REQUIRE(m.minimizer().has_value());
  CHECK((*m.minimizer())[0] == doctest::Approx(0.0));
}

TEST_CASE("gradient-step model minimizer is x - step f'(x)") {
  const QuadraticModel m = scalar_model(sq, dsq, 1.0, 1.0 / 0.25, 0.0);
  REQUIRE(m.minimizer().has_value());
  CHECK((*m.minimizer())[0] == doctest::Approx(0.5));
}

TEST_CASE("singular curvature has no minimizer") {
  const QuadraticModel m = scalar_model(sq, dsq, 1.0, 0.0, 0.0);
  CHECK_FALSE(m.minimizer().has_value());
}

TEST_CASE("sin model t + t^2/2 with eta 1 violates on positive t") {
  const QuadraticModel m = scalar_model(sine, cosine, 0.0, 1.0, 1.0);
  CHECK(m.model(vec({0.5})) == doctest::Approx(0.625));
  const auto mr = verify_model_error([](const Vector& y) { return std::sin(y[0]); }, m.model,
                                     uniform_samples(Box(vec({-2}), vec({2})), 1000, 3));
  CHECK(mr.max_violation > 0.0);
  CHECK(mr.worst_point[0] > 0.0);
  CHECK(mr.max_quadratic_ratio > 0.5);
}

TEST_CASE("verify_model_error examples") {
  SUBCASE("model equal to f") {
    TaylorModel m;
    m.base_point = vec({0.2});
    m.evaluate = [](const Vector& y) { return std::exp(y[0]); };
    const auto r = verify_model_error([](const Vector& y) { return std::exp(y[0]); }, m,
                                      uniform_samples(Box(vec({-1}), vec({1})), 200, 5));
    CHECK(r.holds());
  }
  SUBCASE("t^4 at 0 with B=0 and w=t^2 fails at y=2") {
    const QuadraticModel m = scalar_model(quartic, dquartic, 0.0, 0.0, 2.0);
    const auto r = verify_model_error([](const Vector& y) { return std::pow(y[0], 4); }, m.model,
                                      {vec({-1.0}), vec({0.5}), vec({2.0})});
    CHECK(r.max_violation == doctest::Approx(12.0));
    CHECK(r.worst_point[0] == doctest::Approx(2.0));
  }
}

TEST_CASE("uniform samples are seeded and stay in the box") {
  const Box b(vec({-1, 2}), vec({0, 3}));
  const auto a = uniform_samples(b, 100, 42);
  const auto c = uniform_samples(b, 100, 42);
  const auto d = uniform_samples(b, 100, 43);
  REQUIRE(a.size() == 100);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b.contains(a[i]));
    CHECK(a[i] == c[i]);
    differs = differs || a[i] != d[i];
  }
  CHECK(differs);
}
