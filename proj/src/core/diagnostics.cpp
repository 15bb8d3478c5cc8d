#include "smoothlab/diagnostics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "smoothlab/error.hpp"
#include "smoothlab/parallel.hpp"
#include "smoothlab/rng.hpp"
#include "smoothlab/spectral.hpp"
#include "smoothlab/support.hpp"

namespace smoothlab {

namespace {

void require_nonempty(const SamplePool& pool) {
  if (pool.size() == 0) fail(ErrorCode::InvalidArgument, "empty pool");
}

void require_dim(const SamplePool& pool, std::span<const double> t) {
  if (t.size() != pool.dim) fail(ErrorCode::InvalidArgument, "dimension mismatch between t and pool");
}

double gaussian(RandomStream& rng) {
  // Box-Muller, cosine branch only; keeps the stream layout simple.
  const double u = rng.uniform_open();
  const double v = rng.uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

struct LineFit {
  double slope = 0.0;
  bool ok = false;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<std::size_t>& idx) {
  const double n = static_cast<double>(idx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i : idx) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i : idx) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 1e-300) return {};
  return {sxy / sxx, true};
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Bootstrap over (x, y) pairs; returns the 2.5% / 97.5% slope percentiles.
std::pair<double, double> pairs_bootstrap(const std::vector<double>& x, const std::vector<double>& y,
                                          unsigned reps, std::uint64_t seed, double fallback) {
  if (reps == 0) return {fallback, fallback};
  std::vector<double> slopes;
  slopes.reserve(reps);
  RandomStream rng(seed, 0);
  std::vector<std::size_t> idx(x.size());
  for (unsigned r = 0; r < reps; ++r) {
    for (auto& i : idx) i = rng.below(x.size());
    const LineFit f = least_squares(x, y, idx);
    if (f.ok) slopes.push_back(f.slope);
  }
  if (slopes.empty()) return {fallback, fallback};
  return {percentile(slopes, 0.025), percentile(slopes, 0.975)};
}

double norm_of(std::span<const double> z) {
  double s = 0.0;
  for (double v : z) s += std::abs(v);
  return s;
}

// |A^T t|_1 > delta |t|_1, with an absolute zero test at delta = 0.
bool survives(const NonNegMatrix& a, std::span<const double> t, double delta, double tnorm) {
  const double v = norm1(a.apply_transpose(t));
  return v > delta * tnorm + 1e-12 * a.norm() * tnorm;
}

using Basis = Eigen::MatrixXd;  // columns span a subspace of R^d

Eigen::MatrixXd stacked_transposes(const std::vector<NonNegMatrix>& mats, std::size_t skip) {
  const auto d = static_cast<Eigen::Index>(mats.front().dim());
  const Eigen::Index rows = d * static_cast<Eigen::Index>(mats.size() - (skip < mats.size() ? 1 : 0));
  Eigen::MatrixXd m(rows, d);
  Eigen::Index r = 0;
  for (std::size_t k = 0; k < mats.size(); ++k) {
    if (k == skip) continue;
    const double scale = std::max(mats[k].norm(), 1e-300);
    for (Eigen::Index i = 0; i < d; ++i, ++r)
      for (Eigen::Index j = 0; j < d; ++j)
        m(r, j) = mats[k](static_cast<std::size_t>(j), static_cast<std::size_t>(i)) / scale;
  }
  return m;
}

// Orthonormal basis of {Q y : M Q y = 0}.
Basis restrict_kernel(const Eigen::MatrixXd& m, const Basis& q) {
  if (q.cols() == 0) return q;
  const Eigen::MatrixXd mq = m * q;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(mq, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10) ++rank;
  const Eigen::Index k = q.cols() - rank;
  if (k <= 0) return Basis(q.rows(), 0);
  const Eigen::MatrixXd ker = svd.matrixV().rightCols(k);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(q * ker);
  return qr.householderQ() * Eigen::MatrixXd::Identity(q.rows(), k);
}

}  // namespace

ComplexEstimate ecf_estimate(const SamplePool& pool, std::span<const double> t) {
  require_nonempty(pool);
  require_dim(pool, t);
  const std::size_t k = pool.size();
  std::vector<double> c(k), s(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double x = dot(t, pool.sample(i));
    c[i] = std::cos(x);
    s[i] = std::sin(x);
  }
  const double inv = 1.0 / static_cast<double>(k);
  return {{pairwise_sum(c) * inv, pairwise_sum(s) * inv}, std::sqrt(inv)};
}

LaplaceEstimate laplace_estimate(const SamplePool& pool, std::span<const double> t) {
  require_nonempty(pool);
  require_dim(pool, t);
  const std::size_t k = pool.size();
  std::vector<double> v(k), v2(k);
  for (std::size_t i = 0; i < k; ++i) {
    v[i] = std::exp(-dot(t, pool.sample(i)));
    v2[i] = v[i] * v[i];
  }
  const double n = static_cast<double>(k);
  const double mean = pairwise_sum(v) / n;
  const double var = std::max(0.0, pairwise_sum(v2) / n - mean * mean);
  return {mean, std::sqrt(var / n)};
}

std::vector<Vector> probe_directions(std::size_t dim, std::size_t count) {
  if (dim == 0) fail(ErrorCode::InvalidArgument, "dimension must be positive");
  if (count == 0) count = dim == 2 ? 32 : dim == 3 ? 128 : 64 * dim;
  std::vector<Vector> out;
  out.reserve(count);
  if (dim == 1) {
    out.push_back({1.0});
    if (count > 1) out.push_back({-1.0});
    return out;
  }
  if (dim == 2) {
    for (std::size_t j = 0; j < count; ++j) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(count);
      Vector v{std::cos(a), std::sin(a)};
      const double n = norm_of(v);
      for (auto& x : v) x /= n;
      out.push_back(std::move(v));
    }
    return out;
  }
  RandomStream rng(0x9B0BE5ULL, dim);
  while (out.size() < count) {
    Vector v(dim);
    for (auto& x : v) x = gaussian(rng);
    const double n = norm_of(v);
    if (n < 1e-12) continue;
    for (auto& x : v) x /= n;
    out.push_back(std::move(v));
  }
  return out;
}

DecayFit decay_fit(std::span<const double> radii, std::span<const double> modulus, double noise_floor,
                   unsigned bootstrap, std::uint64_t seed) {
  if (radii.size() != modulus.size()) fail(ErrorCode::InvalidArgument, "radii and modulus differ in length");
  std::size_t below = 0;
  for (double m : modulus) below += m < 0.9 ? 1 : 0;
  if (below < 5) fail(ErrorCode::InsufficientDecay, "fewer than 5 radii with modulus below 0.9");

  std::vector<double> x, y;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (i > 0 && radii[i] <= radii[i - 1]) fail(ErrorCode::InvalidArgument, "radii must increase");
    if (modulus[i] < 0.9 && modulus[i] > noise_floor && radii[i] > 0.0) {
      x.push_back(std::log(radii[i]));
      y.push_back(std::log(modulus[i]));
    }
  }
  if (x.size() < 3) fail(ErrorCode::InsufficientDecay, "fewer than 3 radii above the noise floor");
  std::vector<std::size_t> all(x.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const LineFit f = least_squares(x, y, all);
  if (!f.ok) fail(ErrorCode::InsufficientDecay, "degenerate fit");
  const auto [lo, hi] = pairs_bootstrap(x, y, bootstrap, seed, f.slope);
  DecayFit out;
  out.a_hat = -f.slope;
  out.ci_lo = std::min(-hi, out.a_hat);
  out.ci_hi = std::max(-lo, out.a_hat);
  out.points = x.size();
  return out;
}

TransformCurve transform_curve(const SamplePool& pool, std::size_t probes, unsigned j_max, std::uint64_t seed) {
  require_nonempty(pool);
  TransformCurve curve;
  curve.probes = probe_directions(pool.dim, probes);
  for (unsigned j = 0; j <= j_max; ++j) curve.radii.push_back(std::ldexp(1.0, static_cast<int>(j)));
  const std::size_t np = curve.probes.size();
  std::vector<double> mod(curve.radii.size() * np);
  parallel_for(mod.size(), [&](std::size_t idx) {
    const double r = curve.radii[idx / np];
    Vector t = curve.probes[idx % np];
    for (auto& v : t) v *= r;
    mod[idx] = std::abs(ecf_estimate(pool, t).value);
  });
  for (std::size_t j = 0; j < curve.radii.size(); ++j)
    curve.modulus.push_back(*std::max_element(mod.begin() + static_cast<std::ptrdiff_t>(j * np),
                                              mod.begin() + static_cast<std::ptrdiff_t>((j + 1) * np)));
  curve.se = 1.0 / std::sqrt(static_cast<double>(pool.size()));
  try {
    curve.fit = decay_fit(curve.radii, curve.modulus, 3.0 * curve.se, 2000, seed);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientDecay) throw;
  }
  return curve;
}

KillCountStats kill_counts(const ModelSpec& spec, const std::vector<Vector>& t_grid,
                           const std::vector<double>& delta_grid, std::size_t trials, std::uint64_t seed,
                           double margin, std::size_t exact_budget) {
  if (t_grid.empty() || delta_grid.empty()) fail(ErrorCode::InvalidArgument, "empty grid");
  for (const auto& t : t_grid) {
    if (t.size() != spec.dim()) fail(ErrorCode::InvalidArgument, "t has the wrong dimension");
    if (norm_of(t) == 0.0) fail(ErrorCode::InvalidArgument, "t must be nonzero");
  }
  for (double d : delta_grid)
    if (!(d >= 0.0)) fail(ErrorCode::InvalidArgument, "delta must be nonnegative");

  KillCountStats out;
  out.t_grid = t_grid;
  out.delta_grid = delta_grid;
  const std::size_t nmax = spec.max_n();
  const std::size_t nt = t_grid.size(), nd = delta_grid.size();
  out.law.assign(nt, std::vector<std::vector<double>>(nd, std::vector<double>(nmax + 1, 0.0)));

  std::vector<BranchAtom> atoms;
  try {
    atoms = spec.expand(exact_budget);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BudgetExceeded) throw;
    out.exact = false;
  }

  parallel_for(nt, [&](std::size_t ti) {
    const auto& t = t_grid[ti];
    const double tn = norm_of(t);
    auto& law = out.law[ti];
    if (out.exact) {
      for (const auto& atom : atoms)
        for (std::size_t di = 0; di < nd; ++di) {
          std::size_t n = 0;
          for (const auto& a : atom.branch) n += survives(a, t, delta_grid[di], tn) ? 1 : 0;
          law[di][n] += atom.probability;
        }
    } else {
      std::vector<const NonNegMatrix*> branch;
      const double w = 1.0 / static_cast<double>(trials);
      for (std::size_t k = 0; k < trials; ++k) {
        // same branch sequence for every t: homogeneity holds on identical seeds
        RandomStream rng(seed, k);
        spec.sample_branch(rng, branch);
        for (std::size_t di = 0; di < nd; ++di) {
          std::size_t n = 0;
          for (const auto* a : branch) n += survives(*a, t, delta_grid[di], tn) ? 1 : 0;
          law[di][n] += w;
        }
      }
    }
  });

  out.means.assign(nt, std::vector<double>(nd, 0.0));
  out.min_mean.assign(nd, std::numeric_limits<double>::infinity());
  for (std::size_t ti = 0; ti < nt; ++ti)
    for (std::size_t di = 0; di < nd; ++di) {
      double m = 0.0;
      for (std::size_t n = 0; n <= nmax; ++n) m += static_cast<double>(n) * out.law[ti][di][n];
      out.means[ti][di] = m;
      out.min_mean[di] = std::min(out.min_mean[di], m);
    }
  for (std::size_t di = 0; di < nd; ++di)
    if (out.min_mean[di] > 1.0 + margin && (!out.largest_delta || delta_grid[di] > *out.largest_delta))
      out.largest_delta = delta_grid[di];
  return out;
}

HarmonicMoment harmonic_moment(const SamplePool& pool, double b, double floor) {
  require_nonempty(pool);
  if (!(b > 0.0)) fail(ErrorCode::InvalidArgument, "b must be positive");
  if (!(floor >= 0.0)) fail(ErrorCode::InvalidArgument, "floor must be nonnegative");
  const std::size_t k = pool.size();
  std::vector<double> norms(k);
  for (std::size_t i = 0; i < k; ++i) norms[i] = norm_of(pool.sample(i));
  auto at = [&](double fl) {
    std::vector<double> v(k);
    for (std::size_t i = 0; i < k; ++i) v[i] = std::pow(std::max(norms[i], fl), -b);
    return pairwise_sum(v) / static_cast<double>(k);
  };
  HarmonicMoment out;
  out.value = at(floor);
  out.stable = true;
  for (double fl : out.floors) {
    out.ladder.push_back(at(fl));
    const std::size_t n = out.ladder.size();
    if (n >= 2) {
      const double prev = out.ladder[n - 2], cur = out.ladder[n - 1];
      if (!(std::abs(cur - prev) < 0.05 * std::abs(prev))) out.stable = false;
    }
  }
  return out;
}

SmallBall small_ball_exponent(const SamplePool& pool, std::vector<double> eps_grid, unsigned bootstrap,
                              std::uint64_t seed) {
  require_nonempty(pool);
  const std::size_t k = pool.size();
  std::vector<double> norms(k);
  for (std::size_t i = 0; i < k; ++i) norms[i] = norm_of(pool.sample(i));
  std::sort(norms.begin(), norms.end());
  const double kd = static_cast<double>(k);

  if (eps_grid.empty()) {
    const double q_lo = std::max(100.0 / kd, 1e-4), q_hi = 1e-2;
    if (q_lo >= q_hi) fail(ErrorCode::EmptyTail, "pool too small for the default grid");
    for (int j = 0; j < 10; ++j) {
      const double q = std::exp(std::log(q_lo) + (std::log(q_hi) - std::log(q_lo)) * j / 9.0);
      const auto idx = std::min(k - 1, static_cast<std::size_t>(std::ceil(q * kd)) - 1);
      eps_grid.push_back(norms[idx]);
    }
  }
  std::sort(eps_grid.begin(), eps_grid.end());
  eps_grid.erase(std::unique(eps_grid.begin(), eps_grid.end()), eps_grid.end());

  // counts in the bins (-inf, e0], (e0, e1], ..., (e_last, inf)
  std::vector<std::uint64_t> bins(eps_grid.size() + 1, 0);
  {
    std::size_t pos = 0;
    for (std::size_t j = 0; j < eps_grid.size(); ++j) {
      const std::size_t end = static_cast<std::size_t>(
          std::upper_bound(norms.begin(), norms.end(), eps_grid[j]) - norms.begin());
      bins[j] = end - pos;
      pos = end;
    }
    bins.back() = k - pos;
  }
  if (bins.back() == k) fail(ErrorCode::EmptyTail, "no samples below the largest epsilon");

  auto fit_from = [&](const std::vector<std::uint64_t>& c, double& slope) {
    std::vector<double> x, y;
    std::uint64_t cum = 0;
    for (std::size_t j = 0; j < eps_grid.size(); ++j) {
      cum += c[j];
      if (cum == 0 || eps_grid[j] <= 0.0) continue;
      x.push_back(std::log(eps_grid[j]));
      y.push_back(std::log(static_cast<double>(cum) / kd));
    }
    if (x.size() < 2) return false;
    std::vector<std::size_t> all(x.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const LineFit f = least_squares(x, y, all);
    slope = f.slope;
    return f.ok;
  };

  SmallBall out;
  out.eps_grid = eps_grid;
  {
    std::uint64_t cum = 0;
    for (std::size_t j = 0; j < eps_grid.size(); ++j) {
      cum += bins[j];
      out.prob.push_back(static_cast<double>(cum) / kd);
    }
  }
  if (!fit_from(bins, out.slope)) fail(ErrorCode::EmptyTail, "fewer than two nonempty small balls");

  std::vector<double> slopes;
  RandomStream rng(seed, 0);
  std::vector<std::uint64_t> c(bins.size());
  for (unsigned r = 0; r < bootstrap; ++r) {
    // multinomial(K, bin frequencies) by sequential binomials
    std::uint64_t left = k;
    double mass = 1.0;
    for (std::size_t j = 0; j + 1 < bins.size(); ++j) {
      const double p = mass > 0.0 ? std::min(1.0, static_cast<double>(bins[j]) / kd / mass) : 0.0;
      std::binomial_distribution<std::uint64_t> bin(left, p);
      c[j] = bin(rng);
      left -= c[j];
      mass -= static_cast<double>(bins[j]) / kd;
    }
    c.back() = left;
    double s = 0.0;
    if (fit_from(c, s)) slopes.push_back(s);
  }
  out.ci_lo = out.ci_hi = out.slope;
  if (!slopes.empty()) {
    out.ci_lo = std::min(out.slope, percentile(slopes, 0.025));
    out.ci_hi = std::max(out.slope, percentile(slopes, 0.975));
  }
  return out;
}

Condition9 check_condition9(const ModelSpec& spec, std::size_t t_grid_size) {
  const auto atoms = spec.expand();
  const auto d = static_cast<Eigen::Index>(spec.dim());
  Condition9 out;

  out.survivor_always = true;
  for (const auto& atom : atoms) {
    if (atom.branch.empty()) {
      out.survivor_always = false;
      break;
    }
    const Basis ker = restrict_kernel(stacked_transposes(atom.branch, atom.branch.size()),
                                      Eigen::MatrixXd::Identity(d, d));
    if (ker.cols() > 0) {
      out.survivor_always = false;
      break;
    }
  }

  // A t with N(t) <= 1 on every branch lies, for each branch with n >= 2, in
  // the kernel of all but one of its matrices. Depth-first over those choices.
  std::vector<const BranchAtom*> multi;
  for (const auto& atom : atoms)
    if (atom.branch.size() >= 2) multi.push_back(&atom);
  std::size_t nodes = 0;
  const std::size_t node_cap = 1'000'000;
  auto search = [&](auto&& self, std::size_t level, const Basis& s) -> bool {
    if (s.cols() == 0) return false;
    if (level == multi.size()) return true;
    if (++nodes > node_cap) fail(ErrorCode::BudgetExceeded, "single-survivor search exceeded its budget");
    const auto& branch = multi[level]->branch;
    for (std::size_t j = 0; j < branch.size(); ++j)
      if (self(self, level + 1, restrict_kernel(stacked_transposes(branch, j), s))) return true;
    return false;
  };
  out.not_single_survivor = !search(search, 0, Eigen::MatrixXd::Identity(d, d));

  out.min_survivor_norm = std::numeric_limits<double>::infinity();
  out.min_count_on_grid = std::numeric_limits<std::size_t>::max();
  for (const auto& t : probe_directions(spec.dim(), t_grid_size)) {
    for (const auto& atom : atoms) {
      double best = 0.0;
      std::size_t n = 0;
      for (const auto& a : atom.branch) {
        best = std::max(best, norm1(a.apply_transpose(t)));
        n += survives(a, t, 0.0, 1.0) ? 1 : 0;
      }
      out.min_survivor_norm = std::min(out.min_survivor_norm, best);
      out.min_count_on_grid = std::min(out.min_count_on_grid, n);
    }
  }
  // With finitely many atoms the negative moment of the best survivor is
  // bounded exactly when N(t) >= 1 everywhere (compactness of the sphere).
  out.holds = out.survivor_always && out.not_single_survivor;
  return out;
}

ConditionReport check_conditions(const ModelSpec& spec, unsigned semigroup_depth, unsigned witness_depth,
                                 std::size_t cap) {
  ConditionReport r;
  r.c1 = spec.expected_n() > 1.0 && std::isfinite(spec.expected_n());
  const auto sg = enumerate_semigroup(spec, semigroup_depth, cap);
  r.c2_allowable = check_allowability(sg);
  r.c2_positive = check_positivity(sg);
  const auto w = search_l1_l2(spec, witness_depth, cap);
  r.c3 = w.l1.has_value() && w.l2.has_value();
  r.c5 = check_conditional_iid(spec);
  const auto fk = check_furstenberg_kesten(spec);
  r.c7 = fk.holds;
  r.c7_c = fk.c;
  r.c9 = check_condition9(spec);
  return r;
}

}  // namespace smoothlab
