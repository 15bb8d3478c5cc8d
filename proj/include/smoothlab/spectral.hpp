#pragma once

// kappa(s), m(s), the Lyapunov exponent, alpha, and the transfer operators
// P_s of the singleton-branch law with kappa~(s) and the critical exponent.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "smoothlab/matrix.hpp"
#include "smoothlab/model.hpp"

namespace smoothlab {

struct Estimate {
  double value = 0.0;
  double se = 0.0;  // standard error
};

/// (mean over trials of ||M_n...M_1||^s)^{1/n} for i.i.d. M_k drawn from `atoms`.
Estimate kappa_chain(const std::vector<MatrixAtom>& atoms, double s, unsigned n, std::size_t trials,
                     std::uint64_t seed);

/// kappa_chain on mu; s = 0 returns exactly 1.
Estimate kappa_estimate(const ModelSpec& spec, double s, unsigned n, std::size_t trials, std::uint64_t seed);

/// kappa(1) = r(int a dmu(a)).
double kappa_one_exact(const ModelSpec& spec);

/// E[N] * kappa(s); exact at s = 0 and s = 1.
Estimate m_of_s(const ModelSpec& spec, double s, unsigned n, std::size_t trials, std::uint64_t seed);

/// Mean of (1/n) log ||M_n...M_1|| with its standard error.
Estimate lyapunov_estimate(const ModelSpec& spec, unsigned n, std::size_t trials, std::uint64_t seed);

struct AlphaOptions {
  double tol = 1e-6;
  unsigned n = 20;
  std::size_t trials = 20000;
  std::uint64_t seed = 0xA1FAULL;
};

struct AlphaResult {
  double alpha = 1.0;
  double slope = 0.0;  // central difference of m at alpha, step 0.05
};

/// Root of m(s) = 1 on (1e-3, 1] with m'(alpha) < 0; throws NotFound.
AlphaResult find_alpha(const ModelSpec& spec, const AlphaOptions& opts = {});

// ---------------------------------------------------------------------------
// Grid on the simplex: lattice points k/n with k integer, sum k = n. Values
// between lattice points are interpolated piecewise linearly on the
// Freudenthal triangulation of cumulative coordinates.

class SimplexGrid {
 public:
  /// Smallest lattice with at least `min_points` points (d = 2: exactly).
  SimplexGrid(std::size_t dim, std::size_t min_points);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t resolution() const noexcept { return n_; }
  std::size_t size() const noexcept { return points_.size(); }
  const Vector& point(std::size_t i) const { return points_[i]; }

  /// Barycentric weights of x (on the simplex) over at most d grid points.
  std::vector<std::pair<std::size_t, double>> interpolation(std::span<const double> x) const;
  double interpolate(std::span<const double> f, std::span<const double> x) const;

 private:
  std::size_t index_of(const std::vector<std::size_t>& cumulative) const;

  std::size_t dim_ = 0;
  std::size_t n_ = 0;
  std::vector<Vector> points_;
  std::vector<std::vector<std::size_t>> cumulative_;
  std::vector<std::pair<std::uint64_t, std::size_t>> keys_;  // sorted
};

/// Discretized P_s f(v) = E[|A~ v|^s f(A~ . v)] as a sparse G x G kernel.
struct TransferDiscretization {
  double s = 0.0;
  SimplexGrid grid;
  std::vector<std::size_t> row_start;
  std::vector<std::size_t> col;
  std::vector<double> weight;

  Vector apply(std::span<const double> f) const;
  Vector apply_adjoint(std::span<const double> mu) const;
  std::vector<double> dense() const;
};

/// Builds the kernel; throws NoSingletonBranch or FurstenbergKestenViolated.
TransferDiscretization transfer_discretize(const ModelSpec& spec, double s, std::size_t grid_size);

/// P_s f on the grid.
Vector transfer_apply(const ModelSpec& spec, double s, const SimplexGrid& grid, std::span<const double> f);

struct KappaTilde {
  double value = 1.0;
  Vector eigenfunction;  // r_s on the grid, max 1
  Vector eigenmeasure;   // nu_s weights, sum 1
  double residual = 0.0;              // max |P r - kappa r|
  double discretization_error = 0.0;  // |kappa(G) - kappa(G/2)|
  std::optional<Estimate> chain;      // chain definition on A~
  std::size_t iterations = 0;
};

struct KappaTildeOptions {
  std::size_t grid_size = 512;
  double tol = 1e-13;
  std::size_t max_iterations = 100000;
  bool cross_check = true;
  bool estimate_discretization = true;
  unsigned chain_n = 20;
  std::size_t chain_trials = 10000;
  std::uint64_t seed = 0x7117DEULL;
};

KappaTilde kappa_tilde(const ModelSpec& spec, double s, const KappaTildeOptions& opts = {});

/// Root a0 of kappa~(-a) P[N=1] = 1 on [1e-3, 10]; nullopt when P[N = 1] = 0.
std::optional<double> critical_exponent(const ModelSpec& spec, double tol = 1e-10, std::size_t grid_size = 512);

struct SpectralProfile {
  std::vector<double> s_grid;
  std::vector<Estimate> kappa;
  std::vector<Estimate> m;
  std::vector<std::optional<double>> kappa_tilde;  // s <= 0 when P[N=1] > 0
  Estimate gamma;
  std::optional<double> alpha;
  std::optional<double> a0;
};

struct ProfileOptions {
  unsigned chain_n = 20;
  std::size_t trials = 20000;
  unsigned lyapunov_n = 1000;
  std::size_t lyapunov_trials = 10000;
  std::size_t grid_size = 512;
  std::uint64_t seed = 1;
};

SpectralProfile spectral_profile(const ModelSpec& spec, std::vector<double> s_grid, const ProfileOptions& opts);

}  // namespace smoothlab
