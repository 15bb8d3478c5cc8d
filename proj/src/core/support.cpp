#include "smoothlab/support.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "smoothlab/error.hpp"

namespace smoothlab {

// ---------------------------------------------------------------------------
// Semigroup

namespace {

// Buckets matrices by a coarse key so near-duplicates land in adjacent buckets.
class MatrixIndex {
 public:
  explicit MatrixIndex(double tol) : tol_(tol) {}

  std::optional<std::size_t> find(const NonNegMatrix& m) const {
    const long long key = key_of(m);
    for (long long k = key - 1; k <= key + 1; ++k) {
      const auto [lo, hi] = buckets_.equal_range(k);
      for (auto it = lo; it != hi; ++it)
        if (items_[it->second].matrix().max_abs_diff(m.matrix()) < tol_) return it->second;
    }
    return std::nullopt;
  }

  std::size_t insert(const NonNegMatrix& m) {
    buckets_.emplace(key_of(m), items_.size());
    items_.push_back(m);
    return items_.size() - 1;
  }

 private:
  static long long key_of(const NonNegMatrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v;
    return static_cast<long long>(std::floor(s * 1e9));
  }

  double tol_;
  std::vector<NonNegMatrix> items_;
  std::multimap<long long, std::size_t> buckets_;
};

}  // namespace

SemigroupEnumeration enumerate_semigroup(std::vector<NonNegMatrix> generators, unsigned max_length,
                                         std::size_t cap) {
  if (generators.empty()) fail(ErrorCode::InvalidArgument, "no generators");
  const std::size_t d = generators.front().dim();
  SemigroupEnumeration out;
  out.generators = std::move(generators);
  out.max_length = max_length;
  out.elements.push_back({{}, NonNegMatrix::identity(d)});
  MatrixIndex index(1e-12);
  index.insert(out.elements.front().matrix);

  std::vector<std::size_t> frontier{0};
  for (unsigned len = 1; len <= max_length && !frontier.empty(); ++len) {
    std::vector<std::size_t> next;
    for (std::size_t e : frontier) {
      for (std::size_t g = 0; g < out.generators.size(); ++g) {
        NonNegMatrix m = out.elements[e].matrix * out.generators[g];
        if (index.find(m)) continue;
        if (out.elements.size() >= cap) {
          fail(ErrorCode::BudgetExceeded, "semigroup enumeration exceeded " + std::to_string(cap) + " elements");
        }
        Word w = out.elements[e].word;
        w.push_back(g);
        index.insert(m);
        next.push_back(out.elements.size());
        out.elements.push_back({std::move(w), std::move(m)});
      }
    }
    frontier = std::move(next);
  }
  return out;
}

SemigroupEnumeration enumerate_semigroup(const ModelSpec& spec, unsigned max_length, std::size_t cap) {
  std::vector<NonNegMatrix> gens;
  for (const auto& atom : spec.mu_atoms()) gens.push_back(atom.matrix);
  return enumerate_semigroup(std::move(gens), max_length, cap);
}

bool check_allowability(const SemigroupEnumeration& e) {
  return std::all_of(e.elements.begin(), e.elements.end(), [](const auto& x) { return x.matrix.allowable(); });
}

bool check_positivity(const SemigroupEnumeration& e) {
  return std::any_of(e.elements.begin(), e.elements.end(),
                     [](const auto& x) { return x.matrix.strictly_positive(); });
}

std::vector<LambdaDirection> lambda_set(const SemigroupEnumeration& e) {
  std::vector<LambdaDirection> out;
  for (const auto& el : e.elements) {
    if (!el.matrix.strictly_positive()) continue;
    Vector v = pf_decompose(el.matrix).right;
    const bool seen = std::any_of(out.begin(), out.end(), [&](const LambdaDirection& l) {
      for (std::size_t i = 0; i < v.size(); ++i)
        if (std::abs(l.direction[i] - v[i]) >= 1e-10) return false;
      return true;
    });
    if (!seen) out.push_back({std::move(v), el.word});
  }
  return out;
}

bool lambda_stable(const ModelSpec& spec, unsigned max_length, std::size_t cap) {
  const auto a = lambda_set(enumerate_semigroup(spec, max_length, cap));
  const auto b = lambda_set(enumerate_semigroup(spec, max_length + 1, cap));
  if (a.size() != b.size()) return false;
  for (const auto& y : b) {
    const bool found = std::any_of(a.begin(), a.end(), [&](const LambdaDirection& x) {
      for (std::size_t i = 0; i < x.direction.size(); ++i)
        if (std::abs(x.direction[i] - y.direction[i]) >= 1e-10) return false;
      return true;
    });
    if (!found) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Hulls

namespace {

// Lawson-Hanson: min |A x - b| subject to x >= 0. Returns the residual norm.
double nnls_residual(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const Eigen::Index n = A.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double eps = 1e-14;
  for (int outer = 0; outer < 3 * n + 10; ++outer) {
    const Eigen::VectorXd w = A.transpose() * (b - A * x);
    Eigen::Index best = -1;
    double wmax = eps;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[j] && w[j] > wmax) {
        wmax = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[best] = true;
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j]) idx.push_back(j);
      Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
      const Eigen::VectorXd z = Ap.colPivHouseholderQr().solve(b);
      bool feasible = true;
      for (Eigen::Index k = 0; k < z.size(); ++k) feasible = feasible && z[k] > eps;
      if (feasible) {
        x.setZero();
        for (std::size_t k = 0; k < idx.size(); ++k) x[idx[k]] = z[static_cast<Eigen::Index>(k)];
        break;
      }
      double alpha = 1.0;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const double zk = z[static_cast<Eigen::Index>(k)];
        if (zk <= eps) alpha = std::min(alpha, x[idx[k]] / (x[idx[k]] - zk));
      }
      for (std::size_t k = 0; k < idx.size(); ++k)
        x[idx[k]] += alpha * (z[static_cast<Eigen::Index>(k)] - x[idx[k]]);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (x[idx[k]] <= eps) {
          x[idx[k]] = 0.0;
          passive[idx[k]] = false;
        }
      }
    }
  }
  return (A * x - b).norm();
}

bool in_cone_of(const std::vector<const Vector*>& cols, std::span<const double> x, double tol) {
  if (cols.empty()) return false;
  const std::size_t d = x.size();
  Eigen::MatrixXd A(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < d; ++i) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*cols[j])[i];
  Eigen::VectorXd b(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) b[static_cast<Eigen::Index>(i)] = x[i];
  return nnls_residual(A, b) <= tol;
}

double cross(const Vector& o, const Vector& a, const Vector& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

std::vector<Vector> extremes_of(const std::vector<Vector>& dirs) {
  const std::size_t d = dirs.front().size();
  if (dirs.size() == 1 || d == 1) return {dirs.front()};
  if (d == 2) {
    const auto [lo, hi] = std::minmax_element(dirs.begin(), dirs.end(),
                                              [](const Vector& a, const Vector& b) { return a[0] < b[0]; });
    if (std::abs((*lo)[0] - (*hi)[0]) < 1e-12) return {*lo};
    return {*lo, *hi};
  }
  if (d == 3) {
    // Andrew's monotone chain on the first two coordinates, collinear points dropped
    std::vector<Vector> pts = dirs;
    std::sort(pts.begin(), pts.end(), [](const Vector& a, const Vector& b) {
      return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
    });
    std::vector<Vector> hull;
    for (int pass = 0; pass < 2; ++pass) {
      const std::size_t start = hull.size();
      for (const auto& p : pts) {
        while (hull.size() >= start + 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 1e-14) hull.pop_back();
        hull.push_back(p);
      }
      hull.pop_back();
      std::reverse(pts.begin(), pts.end());
    }
    if (hull.empty()) hull.push_back(pts.front());
    return hull;  // counter-clockwise
  }
  std::vector<Vector> out;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    std::vector<const Vector*> others;
    for (std::size_t j = 0; j < dirs.size(); ++j)
      if (j != i) others.push_back(&dirs[j]);
    if (!in_cone_of(others, dirs[i], 1e-10)) out.push_back(dirs[i]);
  }
  return out;
}

bool in_hull(const ConeHull& hull, const Vector& x, double tol) {
  const auto& ex = hull.extremes;
  const std::size_t d = hull.dim;
  if (d == 1) return true;
  if (d == 2) {
    const double lo = ex.front()[0], hi = ex.back()[0];
    return x[0] >= std::min(lo, hi) - tol && x[0] <= std::max(lo, hi) + tol;
  }
  if (d == 3) {
    if (ex.size() == 1) return std::abs(x[0] - ex[0][0]) + std::abs(x[1] - ex[0][1]) <= tol;
    if (ex.size() == 2) {
      const double len = std::hypot(ex[1][0] - ex[0][0], ex[1][1] - ex[0][1]);
      if (std::abs(cross(ex[0], ex[1], x)) > tol * len) return false;
      const double t = ((x[0] - ex[0][0]) * (ex[1][0] - ex[0][0]) + (x[1] - ex[0][1]) * (ex[1][1] - ex[0][1])) /
                       (len * len);
      return t >= -tol / len && t <= 1.0 + tol / len;
    }
    for (std::size_t i = 0; i < ex.size(); ++i) {
      const Vector& a = ex[i];
      const Vector& b = ex[(i + 1) % ex.size()];
      const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
      if (cross(a, b, x) < -tol * len) return false;
    }
    return true;
  }
  std::vector<const Vector*> cols;
  for (const auto& e : ex) cols.push_back(&e);
  return in_cone_of(cols, x, tol);
}

}  // namespace

ConeHull cone_hull(const std::vector<Vector>& directions, std::size_t max_terms) {
  if (directions.empty()) fail(ErrorCode::InvalidArgument, "cone_hull needs at least one direction");
  if (max_terms == 0) fail(ErrorCode::InvalidArgument, "max_terms must be >= 1");
  ConeHull hull;
  hull.dim = directions.front().size();
  hull.max_terms = max_terms;
  for (const auto& v : directions) {
    if (v.size() != hull.dim) fail(ErrorCode::InvalidArgument, "directions of mixed dimension");
    Vector x = Direction::normalize(v).coords();
    const bool seen = std::any_of(hull.directions.begin(), hull.directions.end(), [&](const Vector& y) {
      for (std::size_t i = 0; i < x.size(); ++i)
        if (std::abs(x[i] - y[i]) >= 1e-10) return false;
      return true;
    });
    if (!seen) hull.directions.push_back(std::move(x));
  }
  hull.extremes = extremes_of(hull.directions);
  return hull;
}

bool membership(const ConeHull& hull, std::span<const double> x, double tol) {
  if (x.size() != hull.dim) fail(ErrorCode::InvalidArgument, "point dimension does not match the hull");
  double s = 0.0;
  for (double v : x) {
    if (v < 0.0) fail(ErrorCode::NegativeInput, "membership is defined for nonnegative vectors");
    s += v;
  }
  if (s == 0.0) return true;
  Vector y(x.begin(), x.end());
  for (double& v : y) v /= s;
  // Caratheodory: with d terms the capped cone is the whole hull.
  if (hull.max_terms >= hull.dim || hull.max_terms >= hull.extremes.size()) return in_hull(hull, y, tol);

  const std::size_t n = hull.directions.size();
  const std::size_t k = std::min(hull.max_terms, n);
  std::vector<std::size_t> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    std::vector<Vector> sub;
    for (std::size_t i : pick) sub.push_back(hull.directions[i]);
    ConeHull part;
    part.dim = hull.dim;
    part.max_terms = hull.dim;
    part.directions = sub;
    part.extremes = extremes_of(sub);
    if (in_hull(part, y, tol)) return true;
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == n - k + i - 1) --i;
    if (i == 0) return false;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
}

// ---------------------------------------------------------------------------
// Condition 3 witnesses

L1L2Search search_l1_l2(const ModelSpec& spec, unsigned depth_budget, std::size_t cap) {
  L1L2Search out;
  const auto atoms = spec.expand(cap);
  {
    MatrixIndex index(1e-12);
    for (std::size_t b = 0; b < atoms.size(); ++b) {
      NonNegMatrix y = NonNegMatrix::zero(spec.dim());
      for (const auto& m : atoms[b].branch) y = y + m;
      if (index.find(y)) continue;
      index.insert(y);
      out.realizations.push_back({std::move(y), b});
    }
  }
  const std::size_t m = out.realizations.size();
  for (unsigned depth = 1; depth <= depth_budget && !(out.l1 && out.l2); ++depth) {
    double count = std::pow(static_cast<double>(m), depth);
    if (count > static_cast<double>(cap)) {
      fail(ErrorCode::BudgetExceeded, "witness search exceeds " + std::to_string(cap) + " products");
    }
    std::optional<Witness> best1, best2;
    Word word(depth, 0);
    while (true) {
      NonNegMatrix prod = out.realizations[word[0]].matrix;
      for (unsigned k = 1; k < depth; ++k) prod = prod * out.realizations[word[k]].matrix;
      if (prod.strictly_positive()) {
        const double r = spectral_radius(prod);
        if (!out.l1 && r <= 1.0 - 1e-9 && (!best1 || r < best1->radius)) best1 = Witness{prod, r, word};
        if (!out.l2 && r >= 1.0 + 1e-9 && (!best2 || r > best2->radius)) best2 = Witness{prod, r, word};
      }
      std::size_t pos = depth;
      while (pos > 0 && ++word[pos - 1] == m) word[--pos] = 0;
      if (pos == 0) break;
    }
    if (best1) out.l1 = std::move(best1);
    if (best2) out.l2 = std::move(best2);
  }
  return out;
}

L1L2Search find_l1_l2(const ModelSpec& spec, unsigned depth_budget, std::size_t cap) {
  auto out = search_l1_l2(spec, depth_budget, cap);
  if (!out.l1 || !out.l2) {
    fail(ErrorCode::NotFound, std::string("no ") + (!out.l1 ? "l1 (r < 1)" : "l2 (r > 1)") +
                                  " witness within depth " + std::to_string(depth_budget));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<int> dyadic_expand(double x, double theta, unsigned n_terms) {
  if (!(theta >= 0.5 && theta < 1.0)) fail(ErrorCode::InvalidArgument, "theta must lie in [1/2, 1)");
  const double top = theta / (1.0 - theta);
  if (!(x >= 0.0)) fail(ErrorCode::OutOfRange, "x must be >= 0");
  if (x > top * (1.0 + 1e-12)) fail(ErrorCode::OutOfRange, "x exceeds theta / (1 - theta)");
  std::vector<int> eta;
  eta.reserve(n_terms);
  double partial = 0.0, power = 1.0;
  for (unsigned n = 1; n <= n_terms; ++n) {
    power *= theta;
    if (partial + power <= x) {
      partial += power;
      eta.push_back(1);
    } else {
      eta.push_back(0);
    }
  }
  return eta;
}

SupportCheck empirical_support_check(const SamplePool& pool, const ConeHull& hull, double tol) {
  if (pool.dim != hull.dim) fail(ErrorCode::InvalidArgument, "pool and hull dimensions differ");
  SupportCheck out;
  out.gaps.assign(hull.extremes.size(), std::numeric_limits<double>::infinity());
  std::size_t inside = 0;
  Vector x(pool.dim);
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const auto z = pool.sample(k);
    const double s = norm1(z);
    if (s == 0.0) continue;
    ++out.nonzero;
    for (std::size_t i = 0; i < pool.dim; ++i) x[i] = z[i] / s;
    if (membership(hull, x, tol)) ++inside;
    for (std::size_t e = 0; e < hull.extremes.size(); ++e) {
      double dist = 0.0;
      for (std::size_t i = 0; i < pool.dim; ++i) dist += std::abs(x[i] - hull.extremes[e][i]);
      out.gaps[e] = std::min(out.gaps[e], dist);
    }
  }
  if (out.nonzero == 0) fail(ErrorCode::InvalidArgument, "pool has no nonzero samples");
  out.inside_fraction = static_cast<double>(inside) / static_cast<double>(out.nonzero);
  return out;
}

}  // namespace smoothlab
