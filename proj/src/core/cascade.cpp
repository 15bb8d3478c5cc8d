#include "smoothlab/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "smoothlab/error.hpp"
#include "smoothlab/parallel.hpp"
#include "smoothlab/rng.hpp"

namespace smoothlab {

SamplePool constant_pool(std::size_t k, std::span<const double> init) {
  if (k == 0) fail(ErrorCode::InvalidArgument, "pool size must be >= 1");
  if (init.empty()) fail(ErrorCode::InvalidArgument, "init vector is empty");
  for (double v : init)
    if (!(v >= 0.0)) fail(ErrorCode::NegativeInput, "init vector must be nonnegative");
  SamplePool pool;
  pool.dim = init.size();
  pool.values.resize(k * pool.dim);
  for (std::size_t i = 0; i < k; ++i) std::copy(init.begin(), init.end(), pool.sample(i).begin());
  return pool;
}

SamplePool iterate_pool(const ModelSpec& spec, const SamplePool& pool, std::uint64_t seed) {
  const std::size_t k = pool.size();
  const std::size_t d = pool.dim;
  if (k == 0) fail(ErrorCode::InvalidArgument, "pool is empty");
  if (d != spec.dim()) fail(ErrorCode::InvalidArgument, "pool dimension does not match the model");

  SamplePool next;
  next.dim = d;
  next.generation = pool.generation + 1;
  next.values.assign(k * d, 0.0);
  parallel_for(k, [&](std::size_t idx) {
    RandomStream rng(seed, idx);
    std::vector<const NonNegMatrix*> branch;
    spec.sample_branch(rng, branch);
    auto out = next.sample(idx);
    for (const NonNegMatrix* a : branch) {
      const auto z = pool.sample(rng.below(k));
      for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += (*a)(i, j) * z[j];
        out[i] += s;
      }
    }
  });
  return next;
}

Vector default_init(const ModelSpec& spec) {
  const NonNegMatrix mean = mean_sum_matrix(spec);
  if (is_primitive(mean)) return pf_decompose(mean).right;
  return Vector(spec.dim(), 1.0 / static_cast<double>(spec.dim()));
}

std::vector<double> sample_norms(const SamplePool& pool) {
  std::vector<double> out(pool.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = norm1(pool.sample(k));
  return out;
}

namespace {

double mean_norm(const SamplePool& pool) {
  const auto norms = sample_norms(pool);
  return pairwise_sum(norms) / static_cast<double>(norms.size());
}

}  // namespace

FixedPointRun run_fixed_point(const ModelSpec& spec, std::size_t k, unsigned rounds,
                              std::optional<Vector> init, std::uint64_t seed) {
  const Vector start = init ? *init : default_init(spec);
  if (start.size() != spec.dim()) fail(ErrorCode::InvalidArgument, "init dimension does not match the model");
  FixedPointRun run;
  run.pool = constant_pool(k, start);
  run.mean_norm.push_back(mean_norm(run.pool));
  for (unsigned r = 0; r < rounds; ++r) {
    run.pool = iterate_pool(spec, run.pool, derive_stream(seed, r));
    run.mean_norm.push_back(mean_norm(run.pool));
  }
  return run;
}

// ---------------------------------------------------------------------------
// Trees. Node randomness is keyed by the Ulam-Harris address, so the same seed
// gives the same tree whatever is computed on it.

namespace {

struct TreeWalk {
  const ModelSpec& spec;
  std::size_t budget;
  std::size_t nodes = 0;

  void visit() {
    if (++nodes > budget) {
      fail(ErrorCode::SupercriticalBlowup,
           "tree simulation exceeded the node budget of " + std::to_string(budget));
    }
  }

  void branch(std::uint64_t key, std::vector<const NonNegMatrix*>& out) const {
    RandomStream rng(key, 0);
    spec.sample_branch(rng, out);
  }

  Vector martingale(std::uint64_t key, unsigned remaining, const Vector& v) {
    visit();
    if (remaining == 0) return v;
    std::vector<const NonNegMatrix*> children;
    branch(key, children);
    Vector out(v.size(), 0.0);
    for (std::size_t i = 0; i < children.size(); ++i) {
      const Vector w = martingale(derive_stream(key, i + 1), remaining - 1, v);
      const Vector aw = children[i]->apply(w);
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += aw[j];
    }
    return out;
  }

  std::size_t survivors(std::uint64_t key, unsigned remaining, const Vector& y, double scale, double tnorm) {
    visit();
    if (norm1(y) <= 1e-12 * scale * tnorm) return 0;
    if (remaining == 0) return 1;
    std::vector<const NonNegMatrix*> children;
    branch(key, children);
    std::size_t count = 0;
    for (std::size_t i = 0; i < children.size(); ++i) {
      count += survivors(derive_stream(key, i + 1), remaining - 1, children[i]->apply_transpose(y),
                         scale * children[i]->norm(), tnorm);
    }
    return count;
  }
};

}  // namespace

Vector martingale_sample(const ModelSpec& spec, unsigned depth, std::uint64_t seed, std::size_t node_budget) {
  const NonNegMatrix mean = mean_sum_matrix(spec);
  const double r = spectral_radius(mean);
  if (std::abs(r - 1.0) > 1e-9) {
    fail(ErrorCode::InvalidArgument, "martingale_sample requires r(E[sum A_i]) = 1, got " + std::to_string(r));
  }
  TreeWalk walk{spec, node_budget};
  return walk.martingale(mix64(seed), depth, default_init(spec));
}

std::size_t count_surviving_directions(const ModelSpec& spec, std::span<const double> t, unsigned depth,
                                       std::uint64_t seed, std::size_t node_budget) {
  if (t.size() != spec.dim()) fail(ErrorCode::InvalidArgument, "t dimension does not match the model");
  const double tnorm = norm1(t);
  if (!(tnorm > 0.0)) fail(ErrorCode::InvalidArgument, "t must be nonzero");
  TreeWalk walk{spec, node_budget};
  return walk.survivors(mix64(seed), depth, Vector(t.begin(), t.end()), 1.0, tnorm);
}

// ---------------------------------------------------------------------------
// Scalar reduction and the alpha < 1 sampler.

double ScalarReduction::m(double s) const {
  double total = 0.0;
  for (std::size_t b = 0; b < branch_c.size(); ++b) {
    double inner = 0.0;
    for (double c : branch_c[b]) inner += std::pow(c, s);
    total += branch_p[b] * inner;
  }
  return total;
}

std::optional<ScalarReduction> scalar_reduction(const ModelSpec& spec) {
  const NonNegMatrix mean = mean_sum_matrix(spec);
  if (!is_primitive(mean)) return std::nullopt;
  Vector u = pf_decompose(mean).left;
  const double su = norm1(u);
  for (double& e : u) e /= su;

  const auto factor = [&](const NonNegMatrix& a) -> std::optional<double> {
    const Vector au = a.apply_transpose(u);
    const double c = norm1(au);
    for (std::size_t i = 0; i < u.size(); ++i)
      if (std::abs(au[i] - c * u[i]) > 1e-10 * c) return std::nullopt;
    return c;
  };
  for (const auto& atom : spec.mu_atoms())
    if (!factor(atom.matrix)) return std::nullopt;

  ScalarReduction red;
  red.left = u;
  for (const auto& atom : spec.expand()) {
    std::vector<double> cs;
    for (const auto& a : atom.branch) cs.push_back(*factor(a));
    red.branch_c.push_back(std::move(cs));
    red.branch_p.push_back(atom.probability);
  }
  return red;
}

namespace {

// Positive alpha-stable variable with Laplace transform exp(-s^alpha) (Kanter).
double positive_stable(double alpha, RandomStream& rng) {
  if (alpha >= 1.0) return 1.0;
  const double u = std::numbers::pi * rng.uniform_open();
  const double e = rng.exponential();
  return std::sin(alpha * u) / std::pow(std::sin(u), 1.0 / alpha) *
         std::pow(std::sin((1.0 - alpha) * u) / e, (1.0 - alpha) / alpha);
}

}  // namespace

NormLawPool sample_norm_law(const ModelSpec& spec, std::size_t k, unsigned rounds, std::uint64_t seed) {
  if (k == 0) fail(ErrorCode::InvalidArgument, "pool size must be >= 1");
  const auto red = scalar_reduction(spec);
  if (!red) {
    fail(ErrorCode::NotScalarReducible, "the atoms of mu share no common left eigenvector");
  }
  double alpha = 1.0;
  if (std::abs(red->m(1.0) - 1.0) > 1e-12) {
    if (red->m(1.0) > 1.0) fail(ErrorCode::NotFound, "m(1) > 1: no alpha in (0, 1]");
    double lo = 1e-3, hi = 1.0;
    if (red->m(lo) < 1.0) fail(ErrorCode::NotFound, "m(s) < 1 on the whole search range");
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (red->m(mid) > 1.0 ? lo : hi) = mid;
    }
    alpha = 0.5 * (lo + hi);
  }

  std::vector<std::vector<double>> weights = red->branch_c;
  for (auto& cs : weights)
    for (double& c : cs) c = std::pow(c, alpha);
  std::vector<double> cdf;
  double acc = 0.0;
  for (double p : red->branch_p) cdf.push_back(acc += p);

  std::vector<double> w(k, 1.0), next(k);
  for (unsigned r = 0; r < rounds; ++r) {
    const std::uint64_t round_seed = derive_stream(seed, r);
    parallel_for(k, [&](std::size_t idx) {
      RandomStream rng(round_seed, idx);
      const double u = rng.uniform();
      const std::size_t b = std::min<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(),
                                                  cdf.size() - 1);
      double s = 0.0;
      for (double c : weights[b]) s += c * w[rng.below(k)];
      next[idx] = s;
    });
    w.swap(next);
  }

  NormLawPool out;
  out.alpha = alpha;
  out.pool.dim = 1;
  out.pool.generation = rounds;
  out.pool.values.resize(k);
  const std::uint64_t stable_seed = derive_stream(seed, 0xA17A57AB1EULL);
  parallel_for(k, [&](std::size_t idx) {
    RandomStream rng(stable_seed, idx);
    out.pool.values[idx] = std::pow(w[idx], 1.0 / alpha) * positive_stable(alpha, rng);
  });
  std::vector<double> sorted = out.pool.values;
  auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(k / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  if (*mid > 0.0)
    for (double& v : out.pool.values) v /= *mid;
  return out;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::InvalidArgument, "ks_distance needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

}  // namespace smoothlab
