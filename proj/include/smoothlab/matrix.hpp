#pragma once

// Dense d x d matrices with an entrywise-nonnegative strong type, plus the
// Perron-Frobenius and projective-metric machinery built on top of them.
//
// Norm convention throughout: |x| is the L1 vector norm and ||a|| the induced
// operator norm (maximum absolute column sum).

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace smoothlab {

using Vector = std::vector<double>;

double norm1(std::span<const double> x) noexcept;
double dot(std::span<const double> x, std::span<const double> y) noexcept;

/// General (signed) square matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t dim, double fill = 0.0);
  Matrix(std::size_t dim, std::vector<double> row_major);

  static Matrix identity(std::size_t dim);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix outer(std::span<const double> col, std::span<const double> row);

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * dim_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return a_[i * dim_ + j]; }
  std::span<const double> data() const noexcept { return a_; }

  Matrix operator*(const Matrix& rhs) const;
  Matrix operator+(const Matrix& rhs) const;
  Matrix operator-(const Matrix& rhs) const;
  Matrix operator*(double c) const;
  Matrix transpose() const;

  Vector apply(std::span<const double> x) const;
  Vector apply_transpose(std::span<const double> x) const;

  double operator_norm() const noexcept;
  double max_abs_diff(const Matrix& rhs) const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> a_;
};

/// Entrywise-nonnegative d x d matrix. Construction validates the invariant;
/// arithmetic that preserves nonnegativity stays in this type.
class NonNegMatrix {
 public:
  NonNegMatrix() = default;
  explicit NonNegMatrix(Matrix m);

  static NonNegMatrix identity(std::size_t dim);
  static NonNegMatrix zero(std::size_t dim);
  static NonNegMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static NonNegMatrix from_row_major(std::size_t dim, std::vector<double> entries);

  const Matrix& matrix() const noexcept { return m_; }
  std::size_t dim() const noexcept { return m_.dim(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }
  std::span<const double> data() const noexcept { return m_.data(); }

  NonNegMatrix operator*(const NonNegMatrix& rhs) const;
  NonNegMatrix operator+(const NonNegMatrix& rhs) const;
  NonNegMatrix scaled(double c) const;
  NonNegMatrix transpose() const;
  Vector apply(std::span<const double> x) const { return m_.apply(x); }
  Vector apply_transpose(std::span<const double> x) const { return m_.apply_transpose(x); }

  double norm() const noexcept { return m_.operator_norm(); }
  double min_entry() const noexcept;
  double max_entry() const noexcept;
  bool is_zero() const noexcept;
  bool strictly_positive() const noexcept;
  bool has_zero_column() const noexcept;
  /// Every row and every column has a strictly positive entry.
  bool allowable() const noexcept;

  bool operator==(const NonNegMatrix&) const = default;

 private:
  struct Unchecked {};
  NonNegMatrix(Matrix m, Unchecked) : m_(std::move(m)) {}

  Matrix m_;
};

/// Point of the nonnegative part of the L1 unit sphere.
class Direction {
 public:
  explicit Direction(Vector coords);
  /// x / |x|; throws SingularDirection when x is zero, NegativeInput if x has a
  /// negative entry.
  static Direction normalize(std::span<const double> x);

  std::size_t dim() const noexcept { return x_.size(); }
  const Vector& coords() const noexcept { return x_; }
  double operator[](std::size_t i) const noexcept { return x_[i]; }

 private:
  Vector x_;
};

/// Projective action g.x = gx/|gx|.
Direction act(const NonNegMatrix& g, const Direction& x);

/// r(a) = lim ||a^k||^{1/k}; valid for signed matrices as well.
double spectral_radius(const Matrix& a);
inline double spectral_radius(const NonNegMatrix& a) { return spectral_radius(a.matrix()); }

/// Some power a^k with k <= d^2 is strictly positive.
bool is_primitive(const NonNegMatrix& a);

struct PFDecomposition {
  double radius = 0.0;
  Vector right;      // |right|_1 = 1, positive
  Vector left;       // <left, right> = 1, positive
  Matrix remainder;  // a - radius * right (x) left
};

PFDecomposition pf_decompose(const NonNegMatrix& a, double tol = 1e-12);

/// Hennion's bounded projective distance:
///   d(x,y) = (1 - m(x,y) m(y,x)) / (1 + m(x,y) m(y,x)),
///   m(x,y) = min_{i : y_i > 0} x_i / y_i.
double hennion_distance(std::span<const double> x, std::span<const double> y);
inline double hennion_distance(const Direction& x, const Direction& y) {
  return hennion_distance(x.coords(), y.coords());
}

/// Hilbert projective metric log(max_i x_i/y_i / min_i x_i/y_i); +inf when the
/// supports differ. Satisfies hennion_distance = tanh(hilbert_distance / 2).
double hilbert_distance(std::span<const double> x, std::span<const double> y);

/// Hilbert diameter of the column cone of g; +inf unless g > 0.
double hilbert_diameter(const NonNegMatrix& g);

/// Birkhoff's constant tanh(diameter/4): contraction ratio for hilbert_distance.
double birkhoff_coefficient(const NonNegMatrix& g);

/// Exact Hennion coefficient c(g): the d-diameter of the image of the simplex,
/// attained on pairs of columns. Equals tanh(diameter/2) for g > 0.
double hennion_coefficient(const NonNegMatrix& g);

struct ContractionEstimate {
  double empirical = 0.0;  // max over sampled pairs of d(gx,gy)/d(x,y)
  double hennion = 1.0;    // exact c(g)
  double birkhoff = 1.0;   // tanh(diameter/4), the bound for the Hilbert metric
};

ContractionEstimate contraction_coefficient(const NonNegMatrix& g, unsigned pairs,
                                            std::uint64_t seed = 0x5eedULL);

/// iota(a) = min over the simplex of |ax|, i.e. the minimum column sum.
double iota(const NonNegMatrix& a) noexcept;

/// N(a) = max(||a||, 1/iota(a)).
double size_n(const NonNegMatrix& a);

}  // namespace smoothlab
