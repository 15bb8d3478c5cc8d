#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "smoothlab/error.hpp"
#include "smoothlab/support.hpp"

using namespace smoothlab;
using fixtures::a1;
using fixtures::a2;

namespace {

bool same(const NonNegMatrix& x, const NonNegMatrix& y, double tol = 1e-13) {
  return x.matrix().max_abs_diff(y.matrix()) < tol;
}

NonNegMatrix product(const SemigroupEnumeration& e, const Word& w) {
  NonNegMatrix p = NonNegMatrix::identity(e.generators.front().dim());
  for (std::size_t g : w) p = p * e.generators[g];
  return p;
}

bool has_direction(const std::vector<LambdaDirection>& set, const Vector& v) {
  for (const auto& l : set)
    if (std::abs(l.direction[0] - v[0]) < 1e-10 && std::abs(l.direction[1] - v[1]) < 1e-10) return true;
  return false;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("semigroup enumeration") {
  const auto ex1 = fixtures::ex1();
  CHECK(enumerate_semigroup(ex1, 0).elements.size() == 1);
  const auto e1 = enumerate_semigroup(ex1, 1);
  CHECK(e1.elements.size() == 3);
  const auto e2 = enumerate_semigroup(ex1, 2);
  REQUIRE(e2.elements.size() == 7);
  // a_i a_j = v_i <u, v_j> u^T / 25 with u = (1, 1)
  const Vector cv{2.0, 3.0};
  for (const auto& el : e2.elements) {
    CHECK(same(product(e2, el.word), el.matrix));
    if (el.word.size() == 2) {
      const NonNegMatrix gi = e2.generators[el.word[0]];
      const double c = cv[el.word[1] == 0 ? 0 : 1];
      CHECK(same(el.matrix, gi.scaled(c / 5.0)));
    }
  }
  // closure: products of enumerated elements with total length <= L are enumerated
  const auto e3 = enumerate_semigroup(ex1, 3);
  for (const auto& x : e3.elements)
    for (const auto& y : e3.elements) {
      if (x.word.size() + y.word.size() > 3) continue;
      const NonNegMatrix p = x.matrix * y.matrix;
      bool found = false;
      for (const auto& z : e3.elements) found = found || same(z.matrix, p, 1e-12);
      CHECK(found);
    }
  CHECK(code_of([&] { enumerate_semigroup(ex1, 10, 20); }) == ErrorCode::BudgetExceeded);
}

TEST_CASE("allowability and positivity") {
  CHECK(check_allowability(enumerate_semigroup(fixtures::ex1(), 3)));
  CHECK(check_allowability(enumerate_semigroup({NonNegMatrix::identity(2)}, 3)));
  CHECK_FALSE(check_allowability(enumerate_semigroup({NonNegMatrix::from_rows({{0, 1}, {0, 0}})}, 2)));
  CHECK(check_positivity(enumerate_semigroup(fixtures::ex1(), 1)));
  CHECK_FALSE(check_positivity(enumerate_semigroup({NonNegMatrix::identity(2)}, 4)));
  CHECK(check_positivity(enumerate_semigroup(
      {NonNegMatrix::from_rows({{0, 1}, {1, 0}}), NonNegMatrix::from_rows({{1, 1}, {1, 1}})}, 1)));
}

TEST_CASE("lambda set") {
  const auto l1 = lambda_set(enumerate_semigroup(fixtures::ex1(), 3));
  CHECK(l1.size() == 2);
  CHECK(has_direction(l1, {0.5, 0.5}));
  CHECK(has_direction(l1, {1.0 / 3.0, 2.0 / 3.0}));
  const auto l2 = lambda_set(enumerate_semigroup(fixtures::ex2(), 3));
  CHECK(l2.size() == 3);
  CHECK(has_direction(l2, {0.4, 0.6}));
  CHECK(lambda_set(enumerate_semigroup({NonNegMatrix::identity(2)}, 3)).empty());
  CHECK(lambda_stable(fixtures::ex1(), 1));
  CHECK(lambda_stable(fixtures::ex2(), 1));
  // nested in L
  const auto small = lambda_set(enumerate_semigroup(fixtures::ex2(), 1));
  for (const auto& l : small) CHECK(has_direction(l2, l.direction));
}

TEST_CASE("cone hull and membership") {
  const auto ex1_hull = cone_hull({{0.5, 0.5}, {1.0 / 3.0, 2.0 / 3.0}}, 2);
  CHECK(ex1_hull.extremes.size() == 2);
  CHECK(membership(ex1_hull, Vector{0.0, 0.0}));
  CHECK(membership(ex1_hull, Vector{1.0, 1.0}));
  CHECK_FALSE(membership(ex1_hull, Vector{2.0, 1.0}));
  CHECK(membership(ex1_hull, Vector{1.0, 2.0}));
  CHECK(code_of([&] { membership(ex1_hull, Vector{-1.0, 2.0}); }) == ErrorCode::NegativeInput);

  const auto ray = cone_hull({{1.0, 3.0}}, 1);
  CHECK(membership(ray, Vector{2.0, 6.0}));
  CHECK_FALSE(membership(ray, Vector{2.0, 5.0}));

  // three collinear points on the 2-simplex
  const std::vector<Vector> line{{0.2, 0.3, 0.5}, {0.3, 0.3, 0.4}, {0.4, 0.3, 0.3}};
  const auto h2 = cone_hull(line, 2), h3 = cone_hull(line, 3);
  CHECK(h2.extremes.size() == 2);
  std::mt19937_64 gen(2);
  std::exponential_distribution<double> ex(1.0);
  for (int k = 0; k < 500; ++k) {
    Vector x{ex(gen), ex(gen), ex(gen)};
    if (k % 2 == 0) {
      const double t = ex(gen) / (1 + ex(gen));
      x = {0.2 + 0.2 * std::min(t, 1.0), 0.3, 0.5 - 0.2 * std::min(t, 1.0)};
    }
    CHECK(membership(h2, x) == membership(h3, x));
    const double c = 0.1 + ex(gen);
    Vector cx = x;
    for (double& v : cx) v *= c;
    CHECK(membership(h3, x) == membership(h3, cx));
  }

  // triangle plus an interior point; d = 3 polygon and d = 4 NNLS paths
  const std::vector<Vector> tri{{0.6, 0.2, 0.2}, {0.2, 0.6, 0.2}, {0.2, 0.2, 0.6}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
  const auto ht = cone_hull(tri, 3);
  CHECK(ht.extremes.size() == 3);
  CHECK(membership(ht, Vector{1, 1, 1}));
  CHECK_FALSE(membership(ht, Vector{1, 0, 0}));
  // capped at one term only the rays themselves are inside
  const auto ht1 = cone_hull(tri, 1);
  CHECK(membership(ht1, Vector{3, 1, 1}));
  CHECK_FALSE(membership(ht1, Vector{2, 2, 1}));
  CHECK(membership(cone_hull(tri, 2), Vector{0.4, 0.4, 0.2}));

  const std::vector<Vector> quad{{0.4, 0.2, 0.2, 0.2}, {0.2, 0.4, 0.2, 0.2}, {0.2, 0.2, 0.4, 0.2},
                                 {0.2, 0.2, 0.2, 0.4}, {0.25, 0.25, 0.25, 0.25}};
  const auto h4 = cone_hull(quad, 4);
  CHECK(h4.extremes.size() == 4);
  CHECK(membership(h4, Vector{1, 1, 1, 1}));
  CHECK(membership(h4, Vector{0.4, 0.2, 0.2, 0.2}));
  CHECK_FALSE(membership(h4, Vector{1, 0, 0, 0}));
  // idempotence
  const auto again = cone_hull(h4.extremes, 4);
  CHECK(again.extremes.size() == h4.extremes.size());
}

TEST_CASE("l1 / l2 witnesses") {
  const auto w1 = find_l1_l2(fixtures::ex1(), 3);
  CHECK(w1.l1->radius == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(w1.l2->radius == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(same(w1.l1->matrix, a1().scaled(2.0)));
  CHECK(same(w1.l2->matrix, a2().scaled(2.0)));

  const auto w2 = find_l1_l2(fixtures::ex2(), 3);
  CHECK(w2.l1->radius == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w2.l2->radius == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(same(w2.l1->matrix, (a1() + a2()).scaled(0.5)));
  for (const auto* w : {&*w2.l1, &*w2.l2}) CHECK(w->matrix.min_entry() > 0.0);

  // every Y realization has radius exactly 1: no witness at any depth
  const auto flat = ModelSpec::explicit_atoms(2, {{1.0, {a1().scaled(1.25), a1().scaled(1.25)}}});
  CHECK(code_of([&] { find_l1_l2(flat, 3); }) == ErrorCode::NotFound);
  // Example 3 has l1 but its Y sums never exceed radius 1
  const auto w3 = search_l1_l2(fixtures::ex3(), 3);
  CHECK(w3.l1.has_value());
  CHECK_FALSE(w3.l2.has_value());
}

TEST_CASE("greedy theta expansion") {
  const auto b = dyadic_expand(0.625, 0.5, 6);
  CHECK(b == std::vector<int>{1, 0, 1, 0, 0, 0});
  for (int e : dyadic_expand(1.5, 0.6, 40)) CHECK(e == 1);
  const auto c = dyadic_expand(1.0, 0.6, 7);
  CHECK(c == std::vector<int>{1, 1, 0, 0, 0, 0, 1});
  CHECK(code_of([] { dyadic_expand(1.6, 0.6, 5); }) == ErrorCode::OutOfRange);

  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double theta = 0.5 + 0.45 * u(gen);
    const double x = u(gen) * theta / (1 - theta);
    const auto eta = dyadic_expand(x, theta, 60);
    double partial = 0.0, p = 1.0, prev = 0.0;
    for (int e : eta) {
      p *= theta;
      partial += e * p;
      CHECK(partial >= prev);
      CHECK(partial <= x);
      prev = partial;
    }
    CHECK(x - partial <= std::pow(theta, 60) / (1 - theta) + 1e-15);
  }
}

TEST_CASE("empirical support check") {
  const auto hull = cone_hull({{0.5, 0.5}, {1.0 / 3.0, 2.0 / 3.0}}, 2);
  const auto pool = constant_pool(10, Vector{0.5, 0.5});
  const auto chk = empirical_support_check(pool, hull);
  CHECK(chk.inside_fraction == 1.0);
  REQUIRE(chk.gaps.size() == 2);
  // gap at the v2 extreme equals |v1 - v2|_1 = 1/3
  CHECK(std::max(chk.gaps[0], chk.gaps[1]) == doctest::Approx(1.0 / 3.0));
  CHECK(std::min(chk.gaps[0], chk.gaps[1]) == 0.0);
}
