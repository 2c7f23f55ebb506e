#include <doctest.h>

#include <cmath>
#include <random>

#include "taylor/composite.hpp"
#include "taylor/problems.hpp"
#include "taylor/subsolver.hpp"
#include "taylor/support_set.hpp"

using namespace taylor;

namespace {

// Brute-force projection over dense members of the set, 2-d only.
Vector brute_projection(const SupportSet& Z, const Vector& p) {
  std::vector<Vector> members;
  if (Z.kind() == SupportSet::Kind::Simplex) {
    for (int i = 0; i <= 100000; ++i) members.push_back(vec({i / 1e5, 1.0 - i / 1e5}));
  } else {
    const int n = 801;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Vector z = vec({-1.5 + 3.0 * i / (n - 1), -1.5 + 3.0 * j / (n - 1)});
        if (Z.contains(z, 1e-12)) members.push_back(z);
      }
    }
  }
  Vector best = members.front();
  for (const Vector& z : members) {
    if ((z - p).norm() < (best - p).norm()) best = z;
  }
  return best;
}

}  // namespace

TEST_CASE("support set basics") {
  const SupportSet a = SupportSet::interval(2.0);
  CHECK(a.diameter() == doctest::Approx(4.0));
  CHECK(a.support(vec({-3.0})) == doctest::Approx(6.0));
  CHECK(a.project(vec({5.0}))[0] == doctest::Approx(2.0));
  const SupportSet b = SupportSet::ball(3, 2.0);
  CHECK(b.diameter() == doctest::Approx(4.0));
  CHECK(b.support(vec({3, 4, 0})) == doctest::Approx(10.0));
  const SupportSet s = SupportSet::simplex(3);
  CHECK(s.support(vec({0.2, -1, 0.7})) == doctest::Approx(0.7));
  CHECK(s.diameter() == doctest::Approx(std::sqrt(2.0)));
  const SupportSet x = SupportSet::box(vec({-1, 0}), vec({1, 3}));
  CHECK(x.diameter() == doctest::Approx(std::sqrt(13.0)));
  CHECK(x.max_norm() == doctest::Approx(std::sqrt(10.0)));
  CHECK_THROWS(SupportSet::box(vec({1}), vec({0})));
  CHECK_THROWS(SupportSet::ball(2, -1));
}

TEST_CASE("property: projections match a brute-force oracle") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  const std::vector<SupportSet> sets{SupportSet::box(vec({-1, -0.5}), vec({0.5, 1})),
                                     SupportSet::ball(2, 0.8), SupportSet::simplex(2)};
  for (const SupportSet& Z : sets) {
    for (int i = 0; i < 6; ++i) {
      Vector p(2);
      p << u(rng), u(rng);
      const Vector exact = Z.project(p);
      CHECK(Z.contains(exact, 1e-12));
      // no member is closer, and the oracle's best is within a grid cell
      const Vector oracle = brute_projection(Z, p);
      CHECK((p - exact).norm() <= (p - oracle).norm() + 1e-12);
      CHECK((p - oracle).norm() - (p - exact).norm() <= 6e-3);
      // variational inequality <p - P, w - P> <= 0 on random members
      for (int j = 0; j < 200; ++j) {
        Vector w(2);
        w << u(rng), u(rng);
        w = Z.project(w);
        CHECK((p - exact).dot(w - exact) <= 1e-12);
      }
    }
  }
}

TEST_CASE("support argmax attains the support value") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  const std::vector<SupportSet> sets{SupportSet::interval(1.5), SupportSet::box(vec({-1, 0, 2}), vec({1, 2, 3})),
                                     SupportSet::ball(3, 2.0), SupportSet::simplex(3)};
  for (const SupportSet& Z : sets) {
    for (int i = 0; i < 30; ++i) {
      Vector y(Z.dimension());
      for (int k = 0; k < y.size(); ++k) y[k] = g(rng);
      const Vector a = Z.argmax(y);
      CHECK(Z.contains(a, 1e-12));
      CHECK(a.dot(y) == doctest::Approx(Z.support(y)));
    }
  }
}

TEST_CASE("dual value examples on the footnote problem") {
  const ProblemSpec s = make_problem("footnote");
  const Linearization lin = linearize(s.problem, vec({1.0}));
  SUBCASE("z = 1") {
    const DualValue d = dual_value(s.problem, lin, vec({1.0}));
    CHECK(d.y[0] == doctest::Approx(-1.0));
    CHECK(d.phi == doctest::Approx(-0.5));
    CHECK(d.phi <= model_value(s.problem, lin, vec({-1.0})));
  }
  SUBCASE("z = 0 recovers y = x with phi = 0") {
    const DualValue d = dual_value(s.problem, lin, vec({0.0}));
    CHECK(d.y[0] == doctest::Approx(1.0));
    CHECK(d.phi == doctest::Approx(0.0));
  }
}

TEST_CASE("property: weak duality over random dual points and samples") {
  for (const char* name : {"footnote", "support_l1", "l1_scalar", "rosen_ls"}) {
    const ProblemSpec s = make_problem(name);
    const SupportSet Z = *s.problem.h.support_set(s.problem.c.output_dim);
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 2.0);
    for (const Vector& x : uniform_samples(s.problem.working_box, 5, 2)) {
      const Linearization lin = linearize(s.problem, x);
      for (int i = 0; i < 10; ++i) {
        Vector z(Z.dimension());
        for (int k = 0; k < z.size(); ++k) z[k] = g(rng);
        const DualValue d = dual_value(s.problem, lin, Z.project(z));
        for (const Vector& y : uniform_samples(s.problem.working_box, 100, i)) {
          CHECK(d.phi <= model_value(s.problem, lin, y) + 1e-10);
        }
      }
    }
  }
}

TEST_CASE("property: gap rate holds at every iteration") {
  for (const char* name : {"footnote", "support_l1", "l1_scalar", "rosen_ls", "abs_shift"}) {
    const ProblemSpec s = make_problem(name);
    for (const Vector& x : uniform_samples(s.problem.working_box, 10, 4)) {
      const Linearization lin = linearize(s.problem, x);
      const DualState st = solve_dual_accelerated(s.problem, lin, DualOptions{1e-9, 200000});
      const double C = dual_rate_constant(s.problem, lin);
      REQUIRE(!st.gap_trace.empty());
      for (std::size_t k = 0; k < st.gap_trace.size(); ++k) {
        CHECK(st.gap_trace[k] <= dual_rate_bound(C, static_cast<int>(k)) + 1e-10);
        CHECK(st.gap_trace[k] >= -1e-10);
      }
      CHECK(st.worst_rate_excess <= 1e-10);
      CHECK(st.gap <= 1e-9);
    }
  }
}

TEST_CASE("footnote dual solve lands near the exact minimizer 0.25") {
  const ProblemSpec s = make_problem("footnote");
  const Linearization lin = linearize(s.problem, vec({1.0}));
  const DualState st = solve_dual_accelerated(s.problem, lin, DualOptions{1e-6, 100000});
  CHECK(std::abs(st.y[0] - 0.25) <= 1e-3);
  CHECK(std::abs(st.y[0] - 0.25) <= std::sqrt(2 * st.gap / lin.rho) + 1e-12);
}

TEST_CASE("property: 1-d exactness at eps 1e-10") {
  for (const char* name : {"footnote", "l1_scalar", "abs_shift"}) {
    const ProblemSpec s = make_problem(name);
    for (const Vector& x : uniform_samples(s.problem.working_box, 20, 6)) {
      const Linearization lin = linearize(s.problem, x);
      const DualState st = solve_dual_accelerated(s.problem, lin, DualOptions{1e-10, 400000});
      const Vector exact = minimize_model_exact(s.problem, lin);
      CHECK((st.y - exact).norm() <= std::sqrt(2e-10 / lin.rho) + 1e-12);
    }
  }
}

TEST_CASE("singleton support set converges at once with zero gap") {
  const ProblemSpec s = make_problem("quadratic2d");
  const Linearization lin = linearize(s.problem, vec({1.0, 0.1}));
  const DualState st = solve_dual_accelerated(s.problem, lin, DualOptions{1e-12, 10});
  CHECK(st.iteration <= 1);
  CHECK(std::abs(st.gap) <= 1e-14);
  const Vector expected = lin.x - lin.J.transpose() * Vector::Ones(1) / lin.rho;
  CHECK((st.y - expected).norm() <= 1e-14);
}

TEST_CASE("iteration cap raises with the best state attached") {
  const ProblemSpec s = make_problem("support_l1");
  const Linearization lin = linearize(s.problem, vec({0.7}));
  try {
    solve_dual_accelerated(s.problem, lin, DualOptions{1e-16, 3});
    FAIL("expected a subsolver error");
  } catch (const SubsolverError& e) {
    CHECK(e.best().iteration == 3);
    CHECK(e.best().y.size() == 1);
  }
}

TEST_CASE("iterations_for_gap examples") {
  const int k = iterations_for_gap(4.0, 1e-4);
  CHECK(k >= 195);
  CHECK(k <= 201);
  CHECK(iterations_for_gap(4.0, 1.0) == 1);
  CHECK(iterations_for_gap(4.0, 100.0) == 1);
  for (double eps = 1e-4; eps > 1e-10; eps /= 2) {
    const double ratio = static_cast<double>(iterations_for_gap(4.0, eps / 2)) / iterations_for_gap(4.0, eps);
    CHECK(ratio == doctest::Approx(std::sqrt(2.0)).epsilon(0.02));
  }
  int prev = 0;
  for (double eps = 1.0; eps > 1e-12; eps /= 3) {
    const int n = iterations_for_gap(4.0, eps);
    CHECK(n >= prev);
    CHECK(4.0 / ((n + 1.0) * (n + 2.0)) <= eps);
    prev = n;
  }
  CHECK_THROWS(iterations_for_gap(4.0, 0.0));
}
