// Acceptance suite. `acceptance --criterion N` runs one criterion, no
// arguments runs all twelve. One line per criterion:
//   criterion N: PASS|FAIL  <name> (<seconds>s)  <details>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "smoothlab/cascade.hpp"
#include "smoothlab/diagnostics.hpp"
#include "smoothlab/error.hpp"
#include "smoothlab/matrix.hpp"
#include "smoothlab/model.hpp"
#include "smoothlab/rng.hpp"
#include "smoothlab/spectral.hpp"
#include "smoothlab/support.hpp"

using namespace smoothlab;

namespace {

NonNegMatrix a1() { return NonNegMatrix::from_rows({{0.2, 0.2}, {0.2, 0.2}}); }
NonNegMatrix a2() { return NonNegMatrix::from_rows({{0.2, 0.2}, {0.4, 0.4}}); }

ModelSpec ex1() { return ModelSpec::iid_coefficients(2, {{2, 1.0}}, {{0.5, a1()}, {0.5, a2()}}); }
ModelSpec ex2() { return ModelSpec::scalar_randomized(2, {a1(), a2(), a1() + a2()}, {{0.25, 0.5}, {0.75, 0.5}}); }
ModelSpec ex3() { return ModelSpec::explicit_atoms(2, {{0.25, {a1()}}, {0.25, {a2()}}, {0.5, {a1(), a2()}}}); }

// root of (5/2)^a + (5/3)^a = 4 by plain bisection
double a0_oracle() {
  double lo = 0.0, hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::pow(2.5, mid) + std::pow(5.0 / 3.0, mid) < 4.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct Result {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[FAILED " << what << "] ";
    }
  }
};

std::string g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// 1. exact spectral identities
void exact_identities(Result& r) {
  const double rad = spectral_radius(a1() + a2());
  r.detail << "r(a1+a2)=" << g(rad) << " ";
  r.require(std::abs(rad - 1.0) <= 1e-12, "r(a1+a2)=1");
  const std::vector<std::pair<const char*, ModelSpec>> models{{"ex1", ex1()}, {"ex2", ex2()}, {"ex3", ex3()}};
  for (const auto& [name, spec] : models) {
    const double m1 = spec.expected_n() * kappa_one_exact(spec);
    r.detail << name << ":m(1)=" << g(m1) << " ";
    r.require(std::abs(m1 - 1.0) <= 1e-12, std::string(name) + " m(1)=1");
  }
}

// 2. kappa~ closed form on Example 3
void kappa_tilde_closed_form(Result& r) {
  const auto spec = ex3();
  KappaTildeOptions o;
  o.grid_size = 512;
  o.cross_check = false;
  o.estimate_discretization = false;
  double worst = 0.0;
  for (double s : {-1.5, -1.0, -0.5, 0.0, 1.0}) {
    const double want = (std::pow(2.0, s) + std::pow(3.0, s)) / (2.0 * std::pow(5.0, s));
    const double got = kappa_tilde(spec, s, o).value;
    worst = std::max(worst, std::abs(got - want));
    r.detail << "s=" << s << ":" << g(got) << "/" << g(want) << " ";
  }
  r.detail << "max_err=" << g(worst);
  r.require(worst <= 1e-3, "|kappa~ - closed form| <= 1e-3");
}

// 3. critical exponent on Example 3
void critical_exponent_check(Result& r) {
  const auto a0 = critical_exponent(ex3(), 1e-10, 512);
  const double want = a0_oracle();
  r.require(a0.has_value(), "a0 exists");
  if (!a0) return;
  r.detail << "a0=" << g(*a0) << " oracle=" << g(want) << " err=" << g(std::abs(*a0 - want));
  r.require(std::abs(*a0 - want) <= 1e-3, "|a0 - oracle| <= 1e-3");
}

// 4. Lyapunov exponent of Example 1
void lyapunov_check(Result& r) {
  const auto est = lyapunov_estimate(ex1(), 1000, 10000, 4);
  const double closed = 0.5 * std::log(6.0 / 25.0);
  r.detail << "gamma=" << g(est.value) << " se=" << g(est.se) << " closed=" << g(closed) << " bound=" << g(-std::log(2.0));
  r.require(std::abs(est.value - closed) <= 0.02, "|gamma - closed| <= 0.02");
  r.require(est.value + 3.0 * est.se < -std::log(2.0), "gamma + 3 se < -log 2");
}

// 5. support cone of Example 1
void support_cone(Result& r) {
  const auto run = run_fixed_point(ex1(), 100000, 50, std::nullopt, 5);
  const auto hull = cone_hull({{0.5, 0.5}, {1.0 / 3.0, 2.0 / 3.0}}, 2);
  const auto chk = empirical_support_check(run.pool, hull, 1e-9);
  r.detail << "inside=" << g(chk.inside_fraction) << " gaps=";
  for (double gap : chk.gaps) r.detail << g(gap) << " ";
  r.require(chk.inside_fraction == 1.0, "inside_fraction = 1");
  r.require(chk.gaps.size() == 2, "two extremes");
  for (double gap : chk.gaps) r.require(gap < 0.05, "gap < 0.05");
}

// 6. Condition 3 witnesses
void witnesses(Result& r) {
  const std::vector<std::pair<const char*, ModelSpec>> models{{"ex1", ex1()}, {"ex2", ex2()}, {"ex3", ex3()}};
  for (const auto& [name, spec] : models) {
    const auto s = search_l1_l2(spec, 3);
    const std::string n = name;
    r.detail << n << ":l1=" << (s.l1 ? g(s.l1->radius) : "none") << ",l2=" << (s.l2 ? g(s.l2->radius) : "none") << " ";
    r.require(s.l1 && s.l1->radius < 1.0 && s.l1->matrix.min_entry() > 0.0, n + " l1");
    r.require(s.l2 && s.l2->radius > 1.0 && s.l2->matrix.min_entry() > 0.0, n + " l2");
    if (n == "ex1") {
      r.require(s.l1 && std::abs(s.l1->radius - 0.8) <= 1e-12, "ex1 r(l1)=0.8");
      r.require(s.l2 && std::abs(s.l2->radius - 1.2) <= 1e-12, "ex1 r(l2)=1.2");
    }
  }
}

// 7. greedy theta-expansion
void dyadic(Result& r) {
  RandomStream rng(7, 0);
  double worst_ratio = 0.0;
  std::size_t overshoots = 0;
  for (int i = 0; i < 1000; ++i) {
    const double theta = 0.5 + 0.45 * rng.uniform();
    const double x = theta / (1.0 - theta) * rng.uniform();
    const auto eta = dyadic_expand(x, theta, 60);
    double partial = 0.0, power = 1.0;
    for (int e : eta) {
      power *= theta;
      partial += e * power;
      if (partial > x) ++overshoots;
    }
    const double bound = std::pow(theta, 60) / (1.0 - theta);
    worst_ratio = std::max(worst_ratio, (x - partial) / bound);
  }
  r.detail << "max err/bound=" << g(worst_ratio) << " overshoots=" << overshoots;
  r.require(worst_ratio <= 1.0, "error <= theta^60/(1-theta)");
  r.require(overshoots == 0, "partial sums <= x");
}

Vector random_direction(RandomStream& rng, std::size_t d) {
  Vector x(d);
  for (auto& v : x) v = rng.exponential();
  if (rng.uniform() < 0.2) x[rng.below(d)] = 0.0;  // boundary points too
  return Direction::normalize(x).coords();
}

NonNegMatrix random_positive(RandomStream& rng, std::size_t d) {
  std::vector<double> e(d * d);
  for (auto& v : e) v = 0.01 + rng.exponential();
  return NonNegMatrix::from_row_major(d, e);
}

// 8. Hennion metric property suite
void hennion_suite(Result& r) {
  RandomStream rng(8, 0);
  std::size_t bad_range = 0, bad_l1 = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t d = 2 + rng.below(4);
    const auto x = random_direction(rng, d), y = random_direction(rng, d);
    const double dist = hennion_distance(x, y);
    if (!(dist >= 0.0 && dist <= 1.0)) ++bad_range;
    Vector diff(d);
    for (std::size_t k = 0; k < d; ++k) diff[k] = x[k] - y[k];
    if (norm1(diff) > 2.0 * dist + 1e-12) ++bad_l1;
  }
  std::size_t bad_contract = 0, bad_hilbert = 0, bad_sub = 0, literal_quarter = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t d = 2 + rng.below(4);
    const auto gm = random_positive(rng, d), hm = random_positive(rng, d);
    const double c = hennion_coefficient(gm), quarter = birkhoff_coefficient(gm);
    for (int j = 0; j < 10; ++j) {
      const Direction x(random_direction(rng, d)), y(random_direction(rng, d));
      const auto gx = act(gm, x), gy = act(gm, y);
      const double before = hennion_distance(x, y), after = hennion_distance(gx, gy);
      if (after > c * before + 1e-9) ++bad_contract;
      if (after > quarter * before + 1e-9) ++literal_quarter;
      const double hb = hilbert_distance(x.coords(), y.coords());
      if (std::isfinite(hb) && hilbert_distance(gx.coords(), gy.coords()) > quarter * hb + 1e-9) ++bad_hilbert;
    }
    if (hennion_coefficient(gm * hm) > hennion_coefficient(gm) * hennion_coefficient(hm) + 1e-9) ++bad_sub;
  }
  r.detail << "d>1:" << bad_range << " l1>2d:" << bad_l1 << " d-contraction(c=tanh(D/2)):" << bad_contract
           << " hilbert-contraction(tanh(D/4)):" << bad_hilbert << " submult:" << bad_sub
           << " (info: d vs tanh(D/4) exceeded in " << literal_quarter << "/10000 pairs)";
  r.require(bad_range == 0, "d in [0,1]");
  r.require(bad_l1 == 0, "|x-y| <= 2d");
  r.require(bad_contract == 0, "d contraction");
  r.require(bad_hilbert == 0, "Hilbert contraction");
  r.require(bad_sub == 0, "submultiplicativity");
}

// 9. martingale mean of Example 1
void martingale_mean(Result& r) {
  const auto spec = ex1();
  const std::size_t seeds = 10000;
  double s[2] = {0, 0}, s2[2] = {0, 0};
  for (std::size_t i = 0; i < seeds; ++i) {
    const auto w = martingale_sample(spec, 12, 900000 + i);
    for (int k = 0; k < 2; ++k) {
      s[k] += w[k];
      s2[k] += w[k] * w[k];
    }
  }
  const double want[2] = {0.4, 0.6};
  for (int k = 0; k < 2; ++k) {
    const double n = static_cast<double>(seeds);
    const double mean = s[k] / n;
    const double se = std::sqrt(std::max(0.0, s2[k] / n - mean * mean) / (n - 1.0));
    r.detail << "W" << k + 1 << "=" << g(mean) << "+-" << g(se) << " ";
    r.require(std::abs(mean - want[k]) <= 4.0 * se, "within 4 se");
  }
}

// 10. absolute-continuity evidence on Example 2
void absolute_continuity(Result& r) {
  const auto spec = ex2();
  const auto kc = kill_counts(spec, probe_directions(2, 128), {0.0}, 0, 1);
  r.detail << "min E[N0]=" << g(kc.min_mean[0]) << " exact=" << kc.exact << " ";
  r.require(kc.exact && kc.min_mean[0] >= 2.0, "min E[N0(t)] >= 2");
  const auto run = run_fixed_point(spec, 100000, 50, std::nullopt, 10);
  const auto curve = transform_curve(run.pool, 32, 14, 10);
  r.detail << "|phi|(2^14)=" << g(curve.modulus.back()) << " ";
  r.require(curve.modulus.back() < 0.2, "sup modulus at 2^14 < 0.2");
  r.require(curve.fit.has_value(), "decay fit");
  if (curve.fit) {
    r.detail << "a_hat=" << g(curve.fit->a_hat) << " ci=[" << g(curve.fit->ci_lo) << "," << g(curve.fit->ci_hi) << "]";
    r.require(curve.fit->ci_lo > 0.0, "ci excludes 0");
  }
}

// 11. harmonic-moment phase split on Example 3
void harmonic_split(Result& r) {
  const auto spec = ex3();
  const auto law = sample_norm_law(spec, 1000000, 100, 11);
  const auto lo = harmonic_moment(law.pool, 0.4, 1e-10);
  const auto hi = harmonic_moment(law.pool, 1.5, 1e-10);
  const auto sb = small_ball_exponent(law.pool, {}, 400, 11);
  const auto a0 = critical_exponent(spec);
  r.detail << "alpha=" << g(law.alpha) << " b=0.4 stable=" << lo.stable << " b=1.5 stable=" << hi.stable
           << " ladder(1.5)=";
  for (double v : hi.ladder) r.detail << g(v) << " ";
  r.detail << "slope=" << g(sb.slope) << " a0=" << (a0 ? g(*a0) : "none");
  r.require(lo.stable, "b=0.4 stable");
  r.require(!hi.stable, "b=1.5 unstable");
  r.require(a0 && std::abs(sb.slope - *a0) <= 0.15, "|slope - a0| <= 0.15");
}

// 12. spectral-radius monotonicity
void monotonicity(Result& r) {
  RandomStream rng(12, 0);
  std::size_t bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t d = 2 + rng.below(4);
    std::vector<double> a(d * d), b(d * d);
    bool b_nonzero = false;
    for (std::size_t k = 0; k < d * d; ++k) {
      a[k] = rng.uniform() < 0.4 ? 0.0 : rng.exponential();
      b[k] = rng.uniform() < 0.5 ? 0.0 : rng.exponential();
      if (a[k] + b[k] == 0.0) b[k] = 0.01 + rng.uniform();
      b_nonzero = b_nonzero || b[k] > 0.0;
    }
    if (!b_nonzero) b[0] = 0.5;
    const auto am = NonNegMatrix::from_row_major(d, a), bm = NonNegMatrix::from_row_major(d, b);
    if (!(spectral_radius(am) < spectral_radius(am + bm))) ++bad;
  }
  r.detail << "violations=" << bad << "/10000";
  r.require(bad == 0, "r(a) < r(a+b)");
}

struct Criterion {
  const char* name;
  std::function<void(Result&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"exact spectral identities", exact_identities},
      {"kappa~ closed form (ex3)", kappa_tilde_closed_form},
      {"critical exponent (ex3)", critical_exponent_check},
      {"Lyapunov inequality (ex1)", lyapunov_check},
      {"support cone (ex1)", support_cone},
      {"l1/l2 witnesses", witnesses},
      {"greedy theta-expansion", dyadic},
      {"Hennion metric suite", hennion_suite},
      {"martingale mean (ex1)", martingale_mean},
      {"absolute-continuity evidence (ex2)", absolute_continuity},
      {"harmonic-moment phase split (ex3)", harmonic_split},
      {"spectral-radius monotonicity", monotonicity},
  };
  return all;
}

bool run_one(int n) {
  const auto& c = criteria()[static_cast<std::size_t>(n - 1)];
  Result r;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    c.run(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail << "[exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("criterion %d: %s  %s (%.1fs)  %s\n", n, r.pass ? "PASS" : "FAIL", c.name, secs, r.detail.str().c_str());
  std::fflush(stdout);
  return r.pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      which.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 2;
    }
  }
  if (which.empty())
    for (int n = 1; n <= 12; ++n) which.push_back(n);
  bool ok = true;
  for (int n : which) {
    if (n < 1 || n > 12) {
      std::fprintf(stderr, "criterion must be in 1..12\n");
      return 2;
    }
    ok = run_one(n) && ok;
  }
  return ok ? 0 : 1;
}
