#include "smoothlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "smoothlab/error.hpp"
#include "smoothlab/parallel.hpp"
#include "smoothlab/rng.hpp"

namespace smoothlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// out = a * b for d x d row-major buffers.
void mul_into(std::span<const double> a, const double* b, double* out, std::size_t d) {
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += a[i * d + k] * b[k * d + j];
      out[i * d + j] = s;
    }
  }
}

double col_sum_norm(const double* p, std::size_t d) {
  double best = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += p[i * d + j];
    best = std::max(best, s);
  }
  return best;
}

// log ||M_n ... M_1|| for `trials` independent chains, renormalized every 32
// steps. Trial t uses stream (seed, t).
std::vector<double> chain_log_norms(const std::vector<MatrixAtom>& atoms, unsigned n, std::size_t trials,
                                    std::uint64_t seed) {
  if (atoms.empty()) fail(ErrorCode::InvalidArgument, "empty matrix law");
  if (n == 0) fail(ErrorCode::InvalidArgument, "chain length must be >= 1");
  if (trials == 0) fail(ErrorCode::InvalidArgument, "trials must be >= 1");
  const std::size_t d = atoms.front().matrix.dim();
  std::vector<double> cdf;
  double acc = 0.0;
  for (const auto& a : atoms) cdf.push_back(acc += a.probability);

  std::vector<double> out(trials);
  parallel_for(trials, [&](std::size_t t) {
    RandomStream rng(seed, t);
    std::vector<double> p(d * d, 0.0), q(d * d);
    for (std::size_t i = 0; i < d; ++i) p[i * d + i] = 1.0;
    double log_scale = 0.0;
    for (unsigned k = 1; k <= n; ++k) {
      const double u = rng.uniform() * acc;
      const std::size_t idx =
          std::min<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(), atoms.size() - 1);
      mul_into(atoms[idx].matrix.data(), p.data(), q.data(), d);
      p.swap(q);
      if (k % 32 == 0 || k == n) {
        const double s = col_sum_norm(p.data(), d);
        if (s == 0.0) {
          out[t] = kNegInf;
          return;
        }
        log_scale += std::log(s);
        for (double& e : p) e /= s;
      }
    }
    out[t] = log_scale;
  });
  return out;
}

// kappa from stored log norms: (mean exp(s x))^{1/n}, delta-method error.
Estimate kappa_from_logs(const std::vector<double>& logs, double s, unsigned n) {
  if (s == 0.0) return {1.0, 0.0};
  double top = kNegInf;
  for (double x : logs)
    if (x != kNegInf) top = std::max(top, s * x);
  if (top == kNegInf) return {0.0, 0.0};
  std::vector<double> w(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) w[i] = logs[i] == kNegInf ? 0.0 : std::exp(s * logs[i] - top);
  const double T = static_cast<double>(w.size());
  const double mean = pairwise_sum(w) / T;
  std::vector<double> dev(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) dev[i] = (w[i] - mean) * (w[i] - mean);
  const double var = w.size() > 1 ? pairwise_sum(dev) / (T - 1.0) : 0.0;
  const double kappa = std::exp((top + std::log(mean)) / n);
  const double rel = std::sqrt(var / T) / mean;
  return {kappa, kappa * rel / n};
}

std::vector<MatrixAtom> checked_singleton_law(const ModelSpec& spec) {
  auto atoms = conditioned_a1_atoms(spec);
  for (const auto& a : atoms) {
    if (!a.matrix.strictly_positive()) {
      fail(ErrorCode::FurstenbergKestenViolated,
           "the singleton-branch law has a matrix with a zero entry; P_s is not defined");
    }
  }
  return atoms;
}

}  // namespace

Estimate kappa_chain(const std::vector<MatrixAtom>& atoms, double s, unsigned n, std::size_t trials,
                     std::uint64_t seed) {
  if (s == 0.0) return {1.0, 0.0};
  return kappa_from_logs(chain_log_norms(atoms, n, trials, seed), s, n);
}

Estimate kappa_estimate(const ModelSpec& spec, double s, unsigned n, std::size_t trials, std::uint64_t seed) {
  return kappa_chain(spec.mu_atoms(), s, n, trials, seed);
}

double kappa_one_exact(const ModelSpec& spec) { return spectral_radius(mu_mean(spec)); }

Estimate m_of_s(const ModelSpec& spec, double s, unsigned n, std::size_t trials, std::uint64_t seed) {
  const double en = spec.expected_n();
  if (s == 0.0) return {en, 0.0};
  if (s == 1.0) return {en * kappa_one_exact(spec), 0.0};
  const Estimate k = kappa_estimate(spec, s, n, trials, seed);
  return {en * k.value, en * k.se};
}

Estimate lyapunov_estimate(const ModelSpec& spec, unsigned n, std::size_t trials, std::uint64_t seed) {
  const auto logs = chain_log_norms(spec.mu_atoms(), n, trials, seed);
  std::vector<double> x(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) {
    if (logs[i] == kNegInf) return {kNegInf, 0.0};
    x[i] = logs[i] / n;
  }
  const double T = static_cast<double>(x.size());
  const double mean = pairwise_sum(x) / T;
  std::vector<double> dev(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) dev[i] = (x[i] - mean) * (x[i] - mean);
  const double var = x.size() > 1 ? pairwise_sum(dev) / (T - 1.0) : 0.0;
  return {mean, std::sqrt(var / T)};
}

AlphaResult find_alpha(const ModelSpec& spec, const AlphaOptions& opts) {
  const double en = spec.expected_n();
  // Common random numbers: one set of chains serves every s.
  const auto logs = chain_log_norms(spec.mu_atoms(), opts.n, opts.trials, opts.seed);
  const auto m_hat = [&](double s) { return en * kappa_from_logs(logs, s, opts.n).value; };
  const double m1 = en * kappa_one_exact(spec);
  constexpr double h = 0.05;

  AlphaResult out;
  if (std::abs(m1 - 1.0) <= opts.tol) {
    out.alpha = 1.0;
  } else {
    constexpr int steps = 100;
    constexpr double lo_s = 1e-3;
    std::vector<double> grid(steps + 1), values(steps + 1);
    for (int j = 0; j <= steps; ++j) {
      grid[j] = lo_s + (1.0 - lo_s) * j / steps;
      values[j] = j == steps ? m1 : m_hat(grid[j]);
    }
    int bracket = -1;
    for (int j = 0; j < steps; ++j) {
      if (values[j] > 1.0 && values[j + 1] <= 1.0) {
        bracket = j;
        break;
      }
    }
    if (bracket < 0) {
      fail(ErrorCode::NotFound, values.back() > 1.0 ? "m(s) > 1 on the whole grid (0, 1]"
                                                    : "m(s) < 1 on the whole grid (0, 1]");
    }
    double lo = grid[bracket], hi = grid[bracket + 1];
    for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      (m_hat(mid) > 1.0 ? lo : hi) = mid;
    }
    out.alpha = 0.5 * (lo + hi);
    if (std::abs(m_hat(out.alpha) - 1.0) > std::max(opts.tol, 1e-9) && hi < 1.0) {
      fail(ErrorCode::NotFound, "bisection did not reach |m(alpha) - 1| <= tol");
    }
  }
  out.slope = (m_hat(out.alpha + h) - m_hat(out.alpha - h)) / (2 * h);
  if (!(out.slope < 0.0)) {
    fail(ErrorCode::NotFound, "m'(alpha) >= 0 at the root (slope " + std::to_string(out.slope) + ")");
  }
  return out;
}

// ---------------------------------------------------------------------------
// SimplexGrid

namespace {

std::size_t lattice_count(std::size_t dim, std::size_t n) {
  // C(n + dim - 1, dim - 1), saturating
  double c = 1.0;
  for (std::size_t k = 1; k < dim; ++k) c = c * static_cast<double>(n + k) / static_cast<double>(k);
  return c > 1e12 ? static_cast<std::size_t>(1e12) : static_cast<std::size_t>(std::llround(c));
}

}  // namespace

SimplexGrid::SimplexGrid(std::size_t dim, std::size_t min_points) : dim_(dim) {
  if (dim == 0) fail(ErrorCode::InvalidArgument, "grid dimension must be >= 1");
  if (dim == 1) {
    n_ = 1;
    points_.push_back({1.0});
    cumulative_.push_back({});
    keys_.push_back({0, 0});
    return;
  }
  if (min_points < 2) fail(ErrorCode::InvalidArgument, "grid needs at least 2 points");
  n_ = 1;
  while (lattice_count(dim, n_) < min_points) ++n_;
  if (lattice_count(dim, n_) > 5'000'000) fail(ErrorCode::BudgetExceeded, "simplex grid too large");
  const std::size_t m = dim - 1;
  double key_range = 1.0;
  for (std::size_t j = 0; j < m; ++j) key_range *= static_cast<double>(n_ + 1);
  if (key_range > 9e18) fail(ErrorCode::BudgetExceeded, "simplex grid key space overflow");

  std::vector<std::size_t> c(m, 0);
  while (true) {
    Vector x(dim);
    std::size_t prev = 0;
    for (std::size_t j = 0; j < m; ++j) {
      x[j] = static_cast<double>(c[j] - prev) / static_cast<double>(n_);
      prev = c[j];
    }
    x[m] = static_cast<double>(n_ - prev) / static_cast<double>(n_);
    std::uint64_t key = 0;
    for (std::size_t j = m; j-- > 0;) key = key * (n_ + 1) + c[j];
    keys_.push_back({key, points_.size()});
    points_.push_back(std::move(x));
    cumulative_.push_back(c);
    // next nondecreasing sequence, last coordinate fastest
    std::size_t pos = m;
    while (pos > 0 && c[pos - 1] == n_) --pos;
    if (pos == 0) break;
    ++c[pos - 1];
    for (std::size_t j = pos; j < m; ++j) c[j] = c[pos - 1];
  }
  std::sort(keys_.begin(), keys_.end());
}

std::size_t SimplexGrid::index_of(const std::vector<std::size_t>& cumulative) const {
  std::uint64_t key = 0;
  for (std::size_t j = cumulative.size(); j-- > 0;) {
    if (cumulative[j] > n_) return points_.size();
    key = key * (n_ + 1) + cumulative[j];
  }
  const auto it = std::lower_bound(keys_.begin(), keys_.end(), std::pair<std::uint64_t, std::size_t>{key, 0});
  if (it == keys_.end() || it->first != key) return points_.size();
  return it->second;
}

std::vector<std::pair<std::size_t, double>> SimplexGrid::interpolation(std::span<const double> x) const {
  if (x.size() != dim_) fail(ErrorCode::InvalidArgument, "point dimension does not match the grid");
  if (dim_ == 1) return {{0, 1.0}};
  const std::size_t m = dim_ - 1;
  const double total = norm1(x);
  const double n = static_cast<double>(n_);
  std::vector<double> c(m);
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    acc += std::max(0.0, x[j]);
    c[j] = std::clamp(n * acc / total, j == 0 ? 0.0 : c[j - 1], n);
  }
  std::vector<std::size_t> base(m), order(m);
  std::vector<double> frac(m);
  for (std::size_t j = 0; j < m; ++j) {
    base[j] = std::min(static_cast<std::size_t>(std::floor(c[j])), n_);
    frac[j] = c[j] - static_cast<double>(base[j]);
    order[j] = j;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return frac[a] != frac[b] ? frac[a] > frac[b] : a > b;
  });
  std::vector<std::pair<std::size_t, double>> out;
  std::vector<std::size_t> vertex = base;
  for (std::size_t k = 0; k <= m; ++k) {
    if (k > 0) ++vertex[order[k - 1]];
    const double hi = k == 0 ? 1.0 : frac[order[k - 1]];
    const double lo = k == m ? 0.0 : frac[order[k]];
    const double w = hi - lo;
    if (w <= 0.0) continue;
    const std::size_t idx = index_of(vertex);
    if (idx == points_.size()) {
      if (w < 1e-12) continue;
      fail(ErrorCode::InvalidArgument, "interpolation vertex outside the simplex grid");
    }
    out.push_back({idx, w});
  }
  return out;
}

double SimplexGrid::interpolate(std::span<const double> f, std::span<const double> x) const {
  double s = 0.0;
  for (const auto& [i, w] : interpolation(x)) s += w * f[i];
  return s;
}

// ---------------------------------------------------------------------------
// Transfer operator

Vector TransferDiscretization::apply(std::span<const double> f) const {
  Vector out(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) s += weight[k] * f[col[k]];
    out[i] = s;
  }
  return out;
}

Vector TransferDiscretization::apply_adjoint(std::span<const double> mu) const {
  Vector out(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) out[col[k]] += weight[k] * mu[i];
  return out;
}

std::vector<double> TransferDiscretization::dense() const {
  const std::size_t g = grid.size();
  std::vector<double> out(g * g, 0.0);
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) out[i * g + col[k]] += weight[k];
  return out;
}

namespace {

TransferDiscretization discretize(const std::vector<MatrixAtom>& atoms, double s, SimplexGrid grid) {
  TransferDiscretization disc{s, std::move(grid), {}, {}, {}};
  const auto& g = disc.grid;
  disc.row_start.push_back(0);
  std::map<std::size_t, double> row;
  for (std::size_t i = 0; i < g.size(); ++i) {
    row.clear();
    for (const auto& atom : atoms) {
      Vector y = atom.matrix.apply(g.point(i));
      const double norm = norm1(y);
      for (double& e : y) e /= norm;
      const double w = atom.probability * std::pow(norm, s);
      for (const auto& [j, lam] : g.interpolation(y)) row[j] += w * lam;
    }
    for (const auto& [j, w] : row) {
      disc.col.push_back(j);
      disc.weight.push_back(w);
    }
    disc.row_start.push_back(disc.col.size());
  }
  return disc;
}

struct EigenSolve {
  double value = 1.0;
  Vector right, left;
  double residual = 0.0;
  std::size_t iterations = 0;
};

EigenSolve solve(const TransferDiscretization& disc, double tol, std::size_t max_iterations) {
  const std::size_t g = disc.grid.size();
  EigenSolve out;
  Vector f(g, 1.0);
  bool converged = false;
  double lo = 0.0, hi = 0.0;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    Vector next = disc.apply(f);
    lo = std::numeric_limits<double>::infinity();
    hi = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
      const double r = next[i] / f[i];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    const double top = *std::max_element(next.begin(), next.end());
    for (double& e : next) e /= top;
    f = std::move(next);
    out.iterations = it + 1;
    if (hi - lo <= tol * hi) {
      converged = true;
      break;
    }
  }
  if (!converged) fail(ErrorCode::NoConvergence, "power iteration on P_s did not converge");
  out.value = disc.s == 0.0 ? 1.0 : 0.5 * (lo + hi);

  Vector mu(g, 1.0 / static_cast<double>(g));
  converged = false;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    Vector next = disc.apply_adjoint(mu);
    const double total = norm1(next);
    double change = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
      next[i] /= total;
      change += std::abs(next[i] - mu[i]);
    }
    mu = std::move(next);
    if (change <= std::max(tol, 1e-13) * 10.0) {
      converged = true;
      break;
    }
  }
  if (!converged) fail(ErrorCode::NoConvergence, "power iteration on the adjoint of P_s did not converge");

  const Vector pf = disc.apply(f);
  for (std::size_t i = 0; i < g; ++i) out.residual = std::max(out.residual, std::abs(pf[i] - out.value * f[i]));
  out.right = std::move(f);
  out.left = std::move(mu);
  return out;
}

}  // namespace

TransferDiscretization transfer_discretize(const ModelSpec& spec, double s, std::size_t grid_size) {
  const auto atoms = checked_singleton_law(spec);
  return discretize(atoms, s, SimplexGrid(spec.dim(), grid_size));
}

Vector transfer_apply(const ModelSpec& spec, double s, const SimplexGrid& grid, std::span<const double> f) {
  if (grid.dim() != spec.dim()) fail(ErrorCode::InvalidArgument, "grid dimension does not match the model");
  if (f.size() != grid.size()) fail(ErrorCode::InvalidArgument, "grid function has the wrong length");
  const auto atoms = checked_singleton_law(spec);
  return discretize(atoms, s, grid).apply(f);
}

KappaTilde kappa_tilde(const ModelSpec& spec, double s, const KappaTildeOptions& opts) {
  const auto atoms = checked_singleton_law(spec);
  const auto disc = discretize(atoms, s, SimplexGrid(spec.dim(), opts.grid_size));
  const EigenSolve main = solve(disc, opts.tol, opts.max_iterations);

  KappaTilde out;
  out.value = main.value;
  out.eigenfunction = main.right;
  out.eigenmeasure = main.left;
  out.residual = main.residual;
  out.iterations = main.iterations;
  if (opts.estimate_discretization && spec.dim() > 1 && opts.grid_size >= 8) {
    const auto coarse = discretize(atoms, s, SimplexGrid(spec.dim(), opts.grid_size / 2));
    out.discretization_error = std::abs(solve(coarse, opts.tol, opts.max_iterations).value - main.value);
  }
  if (opts.cross_check) out.chain = kappa_chain(atoms, s, opts.chain_n, opts.chain_trials, opts.seed);
  return out;
}

std::optional<double> critical_exponent(const ModelSpec& spec, double tol, std::size_t grid_size) {
  const double p1 = prob_n_equals(spec, 1);
  if (p1 == 0.0) return std::nullopt;
  const auto atoms = checked_singleton_law(spec);
  const SimplexGrid grid(spec.dim(), grid_size);
  const auto g = [&](double a) {
    const auto disc = discretize(atoms, -a, grid);
    const double k = solve(disc, 1e-13, 100000).value;
    if (!std::isfinite(k)) fail(ErrorCode::MomentRangeExceeded, "E|A~ v|^{-a} diverges");
    return k * p1 - 1.0;
  };
  double lo = 1e-3, hi = 10.0;
  if (g(lo) >= 0.0) fail(ErrorCode::NotFound, "kappa~(-a) P[N=1] >= 1 already at a = 1e-3");
  if (g(hi) < 0.0) fail(ErrorCode::NotFound, "no critical exponent below a_max = 10");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double v = g(mid);
    if (v == 0.0) return mid;
    (v < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SpectralProfile spectral_profile(const ModelSpec& spec, std::vector<double> s_grid, const ProfileOptions& opts) {
  SpectralProfile out;
  const double en = spec.expected_n();
  const auto logs = chain_log_norms(spec.mu_atoms(), opts.chain_n, opts.trials, opts.seed);
  const bool singleton = prob_n_equals(spec, 1) > 0.0;
  for (double s : s_grid) {
    const Estimate k = kappa_from_logs(logs, s, opts.chain_n);
    out.kappa.push_back(k);
    out.m.push_back({en * k.value, en * k.se});
    std::optional<double> kt;
    if (singleton && s <= 0.0) {
      try {
        KappaTildeOptions ko;
        ko.grid_size = opts.grid_size;
        ko.cross_check = false;
        ko.estimate_discretization = false;
        kt = kappa_tilde(spec, s, ko).value;
      } catch (const Error&) {
        kt.reset();
      }
    }
    out.kappa_tilde.push_back(kt);
  }
  out.s_grid = std::move(s_grid);
  out.gamma = lyapunov_estimate(spec, opts.lyapunov_n, opts.lyapunov_trials, derive_stream(opts.seed, 1));
  try {
    AlphaOptions ao;
    ao.n = opts.chain_n;
    ao.trials = opts.trials;
    ao.seed = derive_stream(opts.seed, 2);
    out.alpha = find_alpha(spec, ao).alpha;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotFound) throw;
  }
  try {
    out.a0 = critical_exponent(spec, 1e-10, opts.grid_size);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotFound && e.code() != ErrorCode::FurstenbergKestenViolated) throw;
  }
  return out;
}

}  // namespace smoothlab
