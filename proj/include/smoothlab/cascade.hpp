#pragma once

// Samplers for the fixed-point law: population dynamics over a pool, the
// weighted branching tree (martingale W_n), and survivor counts N(t, n).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "smoothlab/matrix.hpp"
#include "smoothlab/model.hpp"

namespace smoothlab {

/// K vectors in R_+^d, stored row-major.
struct SamplePool {
  std::size_t dim = 0;
  std::vector<double> values;
  unsigned generation = 0;

  std::size_t size() const noexcept { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const double> sample(std::size_t k) const noexcept { return {values.data() + k * dim, dim}; }
  std::span<double> sample(std::size_t k) noexcept { return {values.data() + k * dim, dim}; }
};

SamplePool constant_pool(std::size_t k, std::span<const double> init);

/// One application of the smoothing map: sample k is sum_i a_i z_{j_i} with a
/// fresh branch and j_i uniform over the old pool, drawn from stream (seed, k).
SamplePool iterate_pool(const ModelSpec& spec, const SamplePool& pool, std::uint64_t seed);

/// PF right eigenvector of E[sum A_i] when it is primitive, else the uniform direction.
Vector default_init(const ModelSpec& spec);

struct FixedPointRun {
  SamplePool pool;
  std::vector<double> mean_norm;  // mean |Z| for rounds 0..rounds
};

FixedPointRun run_fixed_point(const ModelSpec& spec, std::size_t k, unsigned rounds,
                              std::optional<Vector> init, std::uint64_t seed);

constexpr std::size_t kDefaultNodeBudget = 10'000'000;

/// W_n = sum_{|u| = n} G_u v for one simulated tree, v the PF vector of
/// E[sum A_i]. Requires r(E[sum A_i]) = 1.
Vector martingale_sample(const ModelSpec& spec, unsigned depth, std::uint64_t seed,
                         std::size_t node_budget = kDefaultNodeBudget);

/// N(t, n) = #{u in T_n : G_u^T t != 0} for the tree identified by `seed`
/// (same tree as martingale_sample with that seed).
std::size_t count_surviving_directions(const ModelSpec& spec, std::span<const double> t, unsigned depth,
                                       std::uint64_t seed, std::size_t node_budget = kDefaultNodeBudget);

/// Common left eigenvector u with u^T a = c(a) u^T for every atom of mu, if any.
struct ScalarReduction {
  Vector left;                                  // positive, |u|_1 = 1
  std::vector<std::vector<double>> branch_c;    // c(A_i) per explicit branch atom
  std::vector<double> branch_p;
  /// sum over branches of p * sum_i c_i^s, exact.
  double m(double s) const;
};
std::optional<ScalarReduction> scalar_reduction(const ModelSpec& spec);

struct NormLawPool {
  SamplePool pool;  // dim 1: samples of <u, Z>, median-normalized
  double alpha = 1.0;
};

/// Samples <u, Z> for the alpha-fixed point of a scalar-reducible model, alpha
/// in (0, 1] solving m(alpha) = 1: Z = W^{1/alpha} S_alpha with W the
/// martingale limit (pool iteration on the scalar weights c^alpha) and
/// S_alpha positive alpha-stable. Throws NotScalarReducible or NotFound.
NormLawPool sample_norm_law(const ModelSpec& spec, std::size_t k, unsigned rounds, std::uint64_t seed);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance(std::vector<double> a, std::vector<double> b);

/// |z|_1 of every sample.
std::vector<double> sample_norms(const SamplePool& pool);

}  // namespace smoothlab
