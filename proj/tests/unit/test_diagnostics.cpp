#include <cmath>
#include <complex>

#include "doctest.h"
#include "fixtures.hpp"
#include "smoothlab/cascade.hpp"
#include "smoothlab/diagnostics.hpp"
#include "smoothlab/error.hpp"
#include "smoothlab/rng.hpp"

using namespace smoothlab;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

SamplePool small_pool() {
  SamplePool p{2, {0.1, 0.7, 1.3, 0.2, 0.5, 0.5, 2.0, 0.01}, 0};
  return p;
}

}  // namespace

TEST_CASE("ecf and laplace basics") {
  const auto pool = small_pool();
  const Vector zero{0.0, 0.0};
  const auto e0 = ecf_estimate(pool, zero);
  CHECK(e0.value.real() == 1.0);
  CHECK(e0.value.imag() == 0.0);
  CHECK(e0.se == doctest::Approx(0.5));

  const Vector z0{0.3, 1.1};
  const auto c = constant_pool(7, z0);
  const Vector t{2.0, -5.0};
  const auto ec = ecf_estimate(c, t);
  const std::complex<double> want = std::exp(std::complex<double>(0.0, 2.0 * 0.3 - 5.0 * 1.1));
  CHECK(std::abs(ec.value - want) < 1e-14);

  const auto plus = ecf_estimate(pool, t);
  const Vector neg{-2.0, 5.0};
  const auto minus = ecf_estimate(pool, neg);
  CHECK(plus.value.real() == minus.value.real());
  CHECK(plus.value.imag() == -minus.value.imag());
  CHECK(std::abs(plus.value) <= 1.0);

  const Vector lo{0.5, 0.5}, hi{0.5, 2.0};
  CHECK(laplace_estimate(pool, hi).value <= laplace_estimate(pool, lo).value);
  CHECK(laplace_estimate(pool, zero).value == 1.0);
  CHECK(laplace_estimate(c, t).value == doctest::Approx(std::exp(-(2.0 * 0.3 - 5.0 * 1.1))));
}

TEST_CASE("probe directions cover the full sphere") {
  const auto p2 = probe_directions(2);
  CHECK(p2.size() == 32);
  bool negative = false;
  for (const auto& v : p2) {
    CHECK(std::abs(std::abs(v[0]) + std::abs(v[1]) - 1.0) < 1e-14);
    negative = negative || (v[0] < 0 && v[1] > 0);
  }
  CHECK(negative);
  const auto p3 = probe_directions(3);
  CHECK(p3.size() == 128);
  CHECK(p3 == probe_directions(3));
}

TEST_CASE("decay fit on synthetic curves") {
  std::vector<double> r, m1, m2;
  for (int j = 0; j <= 14; ++j) {
    const double x = std::ldexp(1.0, j);
    r.push_back(x);
    m1.push_back(1.0 / x);
    m2.push_back(std::min(1.0, 5.0 * std::pow(x, -0.5)));
  }
  const auto f1 = decay_fit(r, m1);
  CHECK(f1.a_hat == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f1.ci_lo == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f1.ci_hi == doctest::Approx(1.0).epsilon(1e-9));
  const auto f2 = decay_fit(r, m2);
  CHECK(f2.a_hat == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(f2.ci_lo <= 0.5);
  CHECK(f2.ci_hi >= 0.5);

  std::vector<double> flat(r.size(), 0.95);
  CHECK(code_of([&] { decay_fit(r, flat); }) == ErrorCode::InsufficientDecay);
}

TEST_CASE("Example 2 transform decays") {
  const auto run = run_fixed_point(fixtures::ex2(), 100000, 30, std::nullopt, 77);
  double sup = 0.0;
  for (const auto& p : probe_directions(2, 32)) {
    const Vector t{200.0 * p[0], 200.0 * p[1]};
    sup = std::max(sup, std::abs(ecf_estimate(run.pool, t).value));
  }
  CHECK(sup < 0.2);

  const auto curve = transform_curve(run.pool, 32, 14);
  CHECK(curve.radii.size() == 15);
  for (double m : curve.modulus) {
    CHECK(m >= 0.0);
    CHECK(m <= 1.0);
  }
  REQUIRE(curve.fit);
  CHECK(curve.fit->a_hat > 0.0);
  CHECK(curve.fit->ci_lo > 0.0);
}

TEST_CASE("kill counts") {
  // Example 2: every branch keeps at least two children alive
  const auto ex2 = fixtures::ex2();
  const auto grid = probe_directions(2, 128);
  const auto k2 = kill_counts(ex2, grid, {0.0}, 0, 1);
  CHECK(k2.exact);
  for (const auto& law : k2.law) {
    CHECK(law[0][0] == 0.0);
    CHECK(law[0][1] == 0.0);
  }
  CHECK(k2.min_mean[0] >= 2.0);
  REQUIRE(k2.largest_delta);

  // Example 1, t = (1,-1): a1^T t = 0, a2^T t != 0; pairs (a1,a1), mixed, (a2,a2)
  const auto k1 = kill_counts(fixtures::ex1(), {{1.0, -1.0}}, {0.0}, 0, 1);
  CHECK(k1.law[0][0][0] == doctest::Approx(0.25));
  CHECK(k1.law[0][0][1] == doctest::Approx(0.5));
  CHECK(k1.law[0][0][2] == doctest::Approx(0.25));
  CHECK(k1.means[0][0] == doctest::Approx(1.0));

  // huge delta kills everything
  const auto big = kill_counts(ex2, grid, {1e9}, 0, 1);
  CHECK(big.min_mean[0] == 0.0);
  CHECK_FALSE(big.largest_delta);

  // nonincreasing in delta; homogeneous in t
  const std::vector<double> deltas{0.0, 0.05, 0.1, 0.2, 0.4};
  const auto a = kill_counts(ex2, grid, deltas, 0, 1);
  std::vector<Vector> scaled = grid;
  for (auto& t : scaled)
    for (auto& v : t) v *= 37.5;
  const auto b = kill_counts(ex2, scaled, deltas, 0, 1);
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = 0; j < deltas.size(); ++j) {
      CHECK(a.means[i][j] == b.means[i][j]);
      if (j > 0) CHECK(a.means[i][j] <= a.means[i][j - 1]);
    }

  // Monte Carlo fallback agrees with the exact law
  const auto mc = kill_counts(fixtures::ex1(), {{1.0, -1.0}}, {0.0}, 40000, 3, 0.0, 1);
  CHECK_FALSE(mc.exact);
  CHECK(mc.law[0][0][0] == doctest::Approx(0.25).epsilon(0.05));
  const auto mc2 = kill_counts(fixtures::ex1(), {{37.0, -37.0}}, {0.0}, 40000, 3, 0.0, 1);
  CHECK(mc2.law[0][0] == mc.law[0][0]);
}

TEST_CASE("harmonic moment") {
  const auto c = constant_pool(10, Vector{1.0, 1.0});
  const auto h = harmonic_moment(c, 1.0, 1e-6);
  CHECK(h.value == doctest::Approx(0.5));
  CHECK(h.stable);

  SamplePool p{1, {}, 0};
  RandomStream rng(5, 0);
  for (int i = 0; i < 10000; ++i) p.values.push_back(rng.uniform());
  double prev = harmonic_moment(p, 0.8, 1e-12).value;
  for (double fl : {1e-9, 1e-6, 1e-3, 1e-1}) {
    const double v = harmonic_moment(p, 0.8, fl).value;
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("small-ball exponent") {
  SamplePool p{1, {}, 0};
  RandomStream rng(9, 0);
  for (int i = 0; i < 200000; ++i) p.values.push_back(rng.uniform());
  const auto sb = small_ball_exponent(p);
  CHECK(sb.slope == doctest::Approx(1.0).epsilon(0.05));
  CHECK(sb.ci_lo <= sb.slope);
  CHECK(sb.ci_hi >= sb.slope);

  const auto c = constant_pool(1000, Vector{2.0});
  CHECK(code_of([&] { small_ball_exponent(c, {0.5, 1.0}); }) == ErrorCode::EmptyTail);
}

TEST_CASE("absolute-continuity condition") {
  const auto c2 = check_condition9(fixtures::ex2());
  CHECK(c2.survivor_always);
  CHECK(c2.not_single_survivor);
  CHECK(c2.holds);
  CHECK(c2.min_count_on_grid >= 2);
  CHECK(c2.min_survivor_norm > 0.0);

  // Example 1: the branch (a1, a1) kills t = (1,-1)
  const auto c1 = check_condition9(fixtures::ex1());
  CHECK_FALSE(c1.survivor_always);
  CHECK(c1.not_single_survivor);
  CHECK_FALSE(c1.holds);

  // a two-child branch of rank-one matrices: t in ker a1^T leaves one
  // survivor there, and the full-rank singleton branch keeps exactly one
  const auto b = NonNegMatrix::from_rows({{0.5, 0.1}, {0.2, 0.4}});
  const auto one = ModelSpec::explicit_atoms(2, {{0.5, {b}}, {0.5, {fixtures::a1(), fixtures::a2(), fixtures::a1()}}});
  const auto c3 = check_condition9(one);
  CHECK(c3.survivor_always);
  CHECK_FALSE(c3.not_single_survivor);
  // replacing the pair by full-rank children removes every single-survivor t
  const auto two = ModelSpec::explicit_atoms(2, {{0.5, {b}}, {0.5, {b, b.transpose()}}});
  const auto c4 = check_condition9(two);
  CHECK(c4.survivor_always);
  CHECK(c4.not_single_survivor);
  CHECK(c4.holds);

  const auto rep = check_conditions(fixtures::ex2());
  CHECK(rep.c1);
  CHECK(rep.c2_allowable);
  CHECK(rep.c2_positive);
  CHECK(rep.c3);
  CHECK(rep.c9.holds);
}
