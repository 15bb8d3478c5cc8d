#pragma once

// Characteristic / Laplace transforms of a pool, decay fits, survivor counts
// N_delta(t), harmonic moments and the small-ball exponent.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "smoothlab/cascade.hpp"
#include "smoothlab/model.hpp"

namespace smoothlab {

struct ComplexEstimate {
  std::complex<double> value;
  double se = 0.0;  // K^{-1/2}
};

ComplexEstimate ecf_estimate(const SamplePool& pool, std::span<const double> t);

/// Empirical E[exp(-<t, Z>)] with its standard error.
struct LaplaceEstimate {
  double value = 0.0;
  double se = 0.0;
};
LaplaceEstimate laplace_estimate(const SamplePool& pool, std::span<const double> t);

/// Deterministic probe directions on the full L1 unit sphere (signed entries).
/// count = 0 picks 32 for d = 2, 128 for d = 3, 64 d otherwise.
std::vector<Vector> probe_directions(std::size_t dim, std::size_t count = 0);

struct DecayFit {
  double a_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t points = 0;  // radii inside the fit window
};

struct TransformCurve {
  std::vector<double> radii;
  std::vector<Vector> probes;
  std::vector<double> modulus;  // sup over probes of |phi(r theta)|
  double se = 0.0;
  std::optional<DecayFit> fit;
};

/// Radii 2^0 .. 2^j_max; fits the decay when possible.
TransformCurve transform_curve(const SamplePool& pool, std::size_t probes = 0, unsigned j_max = 14,
                               std::uint64_t seed = 0xDECAFULL);

/// -slope of log modulus on log radius over the window floor < modulus < 0.9,
/// with a pairs-bootstrap 95% interval. Throws InsufficientDecay.
DecayFit decay_fit(std::span<const double> radii, std::span<const double> modulus, double noise_floor = 0.0,
                   unsigned bootstrap = 2000, std::uint64_t seed = 0xDECAFULL);

struct KillCountStats {
  std::vector<double> delta_grid;
  std::vector<Vector> t_grid;
  // law[t][delta][n] = P[N_delta(t) = n]
  std::vector<std::vector<std::vector<double>>> law;
  std::vector<std::vector<double>> means;  // E[N_delta(t)]
  std::vector<double> min_mean;            // min over t, per delta
  std::optional<double> largest_delta;     // largest delta with min_mean > 1 + margin
  bool exact = true;
};

/// N_delta(t) = #{i : |A_i^T t| > delta |t|}. Exact over the expanded law when
/// it fits the budget, Monte Carlo otherwise.
KillCountStats kill_counts(const ModelSpec& spec, const std::vector<Vector>& t_grid,
                           const std::vector<double>& delta_grid, std::size_t trials, std::uint64_t seed,
                           double margin = 0.0, std::size_t exact_budget = 100000);

struct HarmonicMoment {
  double value = 0.0;                           // at the caller's floor
  std::vector<double> floors{1e-6, 1e-8, 1e-10};
  std::vector<double> ladder;                   // estimates at `floors`
  bool stable = false;                          // successive moves < 5%
};

HarmonicMoment harmonic_moment(const SamplePool& pool, double b, double floor);

struct SmallBall {
  double slope = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::vector<double> eps_grid;
  std::vector<double> prob;
};

/// Log-log slope of P[|Z| <= eps]. Empty grid: 10 log-spaced points between
/// the empirical quantiles max(100/K, 1e-4) and 1e-2. Throws EmptyTail.
SmallBall small_ball_exponent(const SamplePool& pool, std::vector<double> eps_grid = {}, unsigned bootstrap = 400,
                              std::uint64_t seed = 0xBA11ULL);

/// Exact finite-atom check of the absolute-continuity condition.
struct Condition9 {
  bool survivor_always = false;       // every branch: N(t) >= 1 for all t != 0
  bool not_single_survivor = false;   // no t != 0 with N(t) = 1 a.s.
  bool holds = false;
  double min_survivor_norm = 0.0;     // min over t-grid, branches of max_i |A_i^T t| / |t|
  std::size_t min_count_on_grid = 0;  // min over t-grid, branches of N(t)
};

Condition9 check_condition9(const ModelSpec& spec, std::size_t t_grid_size = 128);

struct ConditionReport {
  bool c1 = true;  // validated on construction
  bool c2_allowable = false;
  bool c2_positive = false;
  bool c3 = false;
  bool c5 = false;
  bool c7 = false;
  double c7_c = 0.0;
  Condition9 c9;
};

ConditionReport check_conditions(const ModelSpec& spec, unsigned semigroup_depth = 3, unsigned witness_depth = 3,
                                 std::size_t cap = 1'000'000);

}  // namespace smoothlab
