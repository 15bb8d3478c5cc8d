#include "smoothlab/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "smoothlab/error.hpp"
#include "smoothlab/rng.hpp"

namespace smoothlab {

double norm1(std::span<const double> x) noexcept {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

double dot(std::span<const double> x, std::span<const double> y) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t dim, double fill) : dim_(dim), a_(dim * dim, fill) {}

Matrix::Matrix(std::size_t dim, std::vector<double> row_major) : dim_(dim), a_(std::move(row_major)) {
  if (a_.size() != dim * dim) {
    fail(ErrorCode::InvalidArgument, "matrix entries must be dim x dim, got " +
                                         std::to_string(a_.size()) + " for dim " + std::to_string(dim));
  }
}

Matrix Matrix::identity(std::size_t dim) {
  Matrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n = rows.size();
  std::vector<double> entries;
  entries.reserve(n * n);
  for (const auto& row : rows) {
    if (row.size() != n) fail(ErrorCode::InvalidArgument, "matrix rows must form a square array");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return Matrix(n, std::move(entries));
}

Matrix Matrix::outer(std::span<const double> col, std::span<const double> row) {
  const std::size_t n = col.size();
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = col[i] * row[j];
  return m;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
  const std::size_t n = dim_;
  Matrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = (*this)(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += aik * rhs(k, j);
    }
  }
  return out;
}

Matrix Matrix::operator+(const Matrix& rhs) const {
  Matrix out(*this);
  for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] += rhs.a_[i];
  return out;
}

Matrix Matrix::operator-(const Matrix& rhs) const {
  Matrix out(*this);
  for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] -= rhs.a_[i];
  return out;
}

Matrix Matrix::operator*(double c) const {
  Matrix out(*this);
  for (double& v : out.a_) v *= c;
  return out;
}

Matrix Matrix::transpose() const {
  Matrix out(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

Vector Matrix::apply(std::span<const double> x) const {
  Vector y(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Vector Matrix::apply_transpose(std::span<const double> x) const {
  Vector y(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) y[j] += (*this)(i, j) * x[i];
  return y;
}

double Matrix::operator_norm() const noexcept {
  double best = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) s += std::abs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

double Matrix::max_abs_diff(const Matrix& rhs) const {
  if (rhs.dim_ != dim_) fail(ErrorCode::InvalidArgument, "dimension mismatch");
  double best = 0.0;
  for (std::size_t i = 0; i < a_.size(); ++i) best = std::max(best, std::abs(a_[i] - rhs.a_[i]));
  return best;
}

// ---------------------------------------------------------------------------
// NonNegMatrix

NonNegMatrix::NonNegMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.dim() == 0) fail(ErrorCode::InvalidArgument, "matrix dimension must be >= 1");
  for (double v : m_.data()) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      fail(ErrorCode::InvalidArgument, "matrix entries must be finite and nonnegative");
    }
  }
}

NonNegMatrix NonNegMatrix::identity(std::size_t dim) { return NonNegMatrix(Matrix::identity(dim)); }
NonNegMatrix NonNegMatrix::zero(std::size_t dim) { return NonNegMatrix(Matrix(dim)); }

NonNegMatrix NonNegMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  return NonNegMatrix(Matrix::from_rows(rows));
}

NonNegMatrix NonNegMatrix::from_row_major(std::size_t dim, std::vector<double> entries) {
  return NonNegMatrix(Matrix(dim, std::move(entries)));
}

NonNegMatrix NonNegMatrix::operator*(const NonNegMatrix& rhs) const {
  return NonNegMatrix(m_ * rhs.m_, Unchecked{});
}

NonNegMatrix NonNegMatrix::operator+(const NonNegMatrix& rhs) const {
  return NonNegMatrix(m_ + rhs.m_, Unchecked{});
}

NonNegMatrix NonNegMatrix::scaled(double c) const {
  if (!(c >= 0.0)) fail(ErrorCode::InvalidArgument, "nonnegative matrix scaled by negative factor");
  return NonNegMatrix(m_ * c, Unchecked{});
}

NonNegMatrix NonNegMatrix::transpose() const { return NonNegMatrix(m_.transpose(), Unchecked{}); }

double NonNegMatrix::min_entry() const noexcept {
  return *std::min_element(m_.data().begin(), m_.data().end());
}

double NonNegMatrix::max_entry() const noexcept {
  return *std::max_element(m_.data().begin(), m_.data().end());
}

bool NonNegMatrix::is_zero() const noexcept { return max_entry() == 0.0; }
bool NonNegMatrix::strictly_positive() const noexcept { return min_entry() > 0.0; }

bool NonNegMatrix::has_zero_column() const noexcept {
  const std::size_t n = dim();
  for (std::size_t j = 0; j < n; ++j) {
    bool any = false;
    for (std::size_t i = 0; i < n && !any; ++i) any = m_(i, j) > 0.0;
    if (!any) return true;
  }
  return false;
}

bool NonNegMatrix::allowable() const noexcept {
  if (has_zero_column()) return false;
  const std::size_t n = dim();
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < n && !any; ++j) any = m_(i, j) > 0.0;
    if (!any) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Direction

Direction::Direction(Vector coords) : x_(std::move(coords)) {
  if (x_.empty()) fail(ErrorCode::InvalidArgument, "direction must have dimension >= 1");
  double s = 0.0;
  for (double v : x_) {
    if (!(v >= 0.0)) fail(ErrorCode::NegativeInput, "direction coordinates must be nonnegative");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-9) fail(ErrorCode::InvalidArgument, "direction must have unit L1 norm");
}

Direction Direction::normalize(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) {
    if (v < 0.0) fail(ErrorCode::NegativeInput, "cannot normalize a vector with negative entries");
    s += v;
  }
  if (!(s > 0.0)) fail(ErrorCode::SingularDirection, "cannot normalize the zero vector");
  Vector out(x.begin(), x.end());
  for (double& v : out) v /= s;
  return Direction(std::move(out));
}

Direction act(const NonNegMatrix& g, const Direction& x) {
  return Direction::normalize(g.apply(x.coords()));
}

// ---------------------------------------------------------------------------
// Spectral radius and Perron-Frobenius

namespace {

// Repeated squaring of a / ||a||, renormalized each step. Returns the final
// normalized power and writes log ||a^(2^k)|| / 2^k into *log_radius.
Matrix normalized_power_limit(const Matrix& a, double* log_radius, bool* vanished) {
  *vanished = false;
  const double n0 = a.operator_norm();
  if (n0 == 0.0) {
    *vanished = true;
    *log_radius = -std::numeric_limits<double>::infinity();
    return a;
  }
  Matrix b = a * (1.0 / n0);
  double est = std::log(n0);
  double weight = 1.0;
  for (int k = 1; k <= 80; ++k) {
    Matrix sq = b * b;
    const double s = sq.operator_norm();
    if (s == 0.0 || !std::isfinite(s)) {
      *vanished = true;
      *log_radius = -std::numeric_limits<double>::infinity();
      return sq;
    }
    weight *= 0.5;
    const double inc = std::log(s) * weight;
    est += inc;
    b = sq * (1.0 / s);
    if (k >= 12 && std::abs(inc) <= 1e-17 * std::max(1.0, std::abs(est))) break;
  }
  *log_radius = est;
  return b;
}

}  // namespace

double spectral_radius(const Matrix& a) {
  if (a.dim() == 0) fail(ErrorCode::InvalidArgument, "empty matrix");
  double log_r = 0.0;
  bool vanished = false;
  normalized_power_limit(a, &log_r, &vanished);
  if (vanished) return 0.0;
  return std::exp(log_r);
}

bool is_primitive(const NonNegMatrix& a) {
  const std::size_t n = a.dim();
  std::vector<char> pattern(n * n), power(n * n), next(n * n);
  for (std::size_t i = 0; i < n * n; ++i) pattern[i] = a.data()[i] > 0.0;
  power = pattern;
  for (std::size_t k = 1; k <= n * n; ++k) {
    if (std::all_of(power.begin(), power.end(), [](char c) { return c != 0; })) return true;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        char any = 0;
        for (std::size_t m = 0; m < n && !any; ++m) any = power[i * n + m] && pattern[m * n + j];
        next[i * n + j] = any;
      }
    }
    power.swap(next);
  }
  return false;
}

PFDecomposition pf_decompose(const NonNegMatrix& a, double tol) {
  if (a.is_zero()) fail(ErrorCode::NotPrimitive, "zero matrix has no Perron-Frobenius decomposition");
  if (!is_primitive(a)) fail(ErrorCode::NotPrimitive, "matrix is not primitive");
  const std::size_t n = a.dim();

  double log_r = 0.0;
  bool vanished = false;
  const Matrix limit = normalized_power_limit(a.matrix(), &log_r, &vanished);
  const Vector ones(n, 1.0);
  Vector v = limit.apply(ones);
  Vector u = limit.apply_transpose(ones);

  const auto polish = [&](Vector x, bool transpose) {
    double s = norm1(x);
    for (double& e : x) e /= s;
    for (int it = 0; it < 100000; ++it) {
      Vector y = transpose ? a.apply_transpose(x) : a.apply(x);
      s = norm1(y);
      for (double& e : y) e /= s;
      double change = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        change = std::max(change, std::abs(y[i] - x[i]));
        scale = std::max(scale, y[i]);
      }
      x = std::move(y);
      if (change <= tol * scale) return x;
    }
    fail(ErrorCode::NoConvergence, "Perron-Frobenius power iteration did not converge");
  };
  v = polish(std::move(v), false);
  u = polish(std::move(u), true);

  const double uv = dot(u, v);
  for (double& e : u) e /= uv;
  const Vector av = a.apply(v);
  const double r = dot(u, av);

  PFDecomposition out;
  out.radius = r;
  out.right = std::move(v);
  out.left = std::move(u);
  out.remainder = a.matrix() - Matrix::outer(out.right, out.left) * r;
  return out;
}

// ---------------------------------------------------------------------------
// Projective metrics

namespace {

double min_ratio(std::span<const double> x, std::span<const double> y) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] > 0.0) best = std::min(best, x[i] / y[i]);
  return best;
}

}  // namespace

double hennion_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::InvalidArgument, "direction dimensions differ");
  const double mxy = min_ratio(x, y);
  const double myx = min_ratio(y, x);
  if (!std::isfinite(mxy) || !std::isfinite(myx)) {
    fail(ErrorCode::InvalidArgument, "hennion_distance requires nonzero vectors");
  }
  const double p = mxy * myx;
  return (1.0 - p) / (1.0 + p);
}

double hilbert_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::InvalidArgument, "direction dimensions differ");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if ((x[i] > 0.0) != (y[i] > 0.0)) return std::numeric_limits<double>::infinity();
    if (y[i] > 0.0) {
      const double r = x[i] / y[i];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  if (!std::isfinite(lo)) fail(ErrorCode::InvalidArgument, "hilbert_distance requires nonzero vectors");
  return std::log(hi) - std::log(lo);
}

double hilbert_diameter(const NonNegMatrix& g) {
  if (!g.strictly_positive()) return std::numeric_limits<double>::infinity();
  const std::size_t n = g.dim();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l)
          best = std::max(best, std::log(g(i, k) * g(j, l) / (g(j, k) * g(i, l))));
  return best;
}

double birkhoff_coefficient(const NonNegMatrix& g) {
  const double diam = hilbert_diameter(g);
  return std::isfinite(diam) ? std::tanh(diam / 4.0) : 1.0;
}

double hennion_coefficient(const NonNegMatrix& g) {
  if (g.has_zero_column()) fail(ErrorCode::ZeroColumn, "matrix has a zero column");
  const std::size_t n = g.dim();
  std::vector<Vector> cols(n, Vector(n));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) cols[j][i] = g(i, j);
  double best = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = k + 1; l < n; ++l) best = std::max(best, hennion_distance(cols[k], cols[l]));
  return best;
}

ContractionEstimate contraction_coefficient(const NonNegMatrix& g, unsigned pairs, std::uint64_t seed) {
  if (g.has_zero_column()) fail(ErrorCode::ZeroColumn, "matrix has a zero column");
  const std::size_t n = g.dim();
  ContractionEstimate out;
  out.hennion = hennion_coefficient(g);
  out.birkhoff = birkhoff_coefficient(g);

  const auto ratio = [&](const Vector& x, const Vector& y) {
    const double dxy = hennion_distance(x, y);
    if (dxy < 1e-6) return 0.0;
    return hennion_distance(g.apply(x), g.apply(y)) / dxy;
  };

  unsigned used = 0;
  for (std::size_t i = 0; i < n && used < pairs; ++i) {
    for (std::size_t j = i + 1; j < n && used < pairs; ++j, ++used) {
      Vector x(n, 0.0), y(n, 0.0);
      x[i] = 1.0;
      y[j] = 1.0;
      out.empirical = std::max(out.empirical, ratio(x, y));
    }
  }
  RandomStream rng(seed, 0);
  const auto draw = [&](bool face) {
    Vector x(n);
    for (double& e : x) e = rng.exponential();
    if (face && n > 1) x[rng.below(n)] = 0.0;
    const double s = norm1(x);
    for (double& e : x) e /= s;
    return x;
  };
  for (; used < pairs; ++used) {
    const Vector x = draw(used % 4 == 1);
    const Vector y = draw(used % 4 == 2);
    out.empirical = std::max(out.empirical, ratio(x, y));
  }
  return out;
}

double iota(const NonNegMatrix& a) noexcept {
  const std::size_t n = a.dim();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a(i, j);
    best = std::min(best, s);
  }
  return best;
}

double size_n(const NonNegMatrix& a) {
  const double lo = iota(a);
  if (!(lo > 0.0)) fail(ErrorCode::SingularDirection, "iota(a) = 0: some direction is annihilated");
  return std::max(a.norm(), 1.0 / lo);
}

}  // namespace smoothlab
