#pragma once

// Finite-atom laws of the point process (N, A_1, ..., A_N) and the quantities
// derived from it: the single-matrix law mu, mean matrices, and the checkers
// for the conditions that only depend on the law.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "smoothlab/matrix.hpp"
#include "smoothlab/rng.hpp"

namespace smoothlab {

enum class ModelKind { ExplicitAtoms, IIDCoefficients, ScalarRandomized };

const char* to_string(ModelKind kind) noexcept;

struct BranchAtom {
  double probability = 0.0;
  std::vector<NonNegMatrix> branch;
};

struct MatrixAtom {
  double probability = 0.0;
  NonNegMatrix matrix;
};

struct CountAtom {
  unsigned n = 0;
  double probability = 0.0;
};

struct ScalarAtom {
  double value = 0.0;
  double probability = 0.0;
};

/// One realization of (N, A_1, ..., A_N).
struct BranchSample {
  std::vector<NonNegMatrix> matrices;
  std::size_t n() const noexcept { return matrices.size(); }
};

/// Immutable, validated description of the law of (N, A_1, A_2, ...).
class ModelSpec {
 public:
  static ModelSpec explicit_atoms(std::size_t dim, std::vector<BranchAtom> atoms);
  static ModelSpec iid_coefficients(std::size_t dim, std::vector<CountAtom> n_law,
                                    std::vector<MatrixAtom> mu_atoms);
  static ModelSpec scalar_randomized(std::size_t dim, std::vector<NonNegMatrix> base_branch,
                                     std::vector<ScalarAtom> scalar_law);

  ModelKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }

  const std::vector<BranchAtom>& atoms() const noexcept { return atoms_; }
  const std::vector<CountAtom>& n_law() const noexcept { return n_law_; }
  const std::vector<MatrixAtom>& declared_mu_atoms() const noexcept { return declared_mu_; }
  const std::vector<NonNegMatrix>& base_branch() const noexcept { return base_branch_; }
  const std::vector<ScalarAtom>& scalar_law() const noexcept { return scalar_law_; }

  double expected_n() const noexcept { return expected_n_; }
  /// esssup N.
  unsigned max_n() const noexcept;

  /// The law mu, with identical matrices merged.
  const std::vector<MatrixAtom>& mu_atoms() const noexcept { return mu_; }

  /// Full finite-atom law of the branch; IID laws are expanded over all
  /// coefficient tuples. Throws BudgetExceeded past `budget` atoms.
  std::vector<BranchAtom> expand(std::size_t budget = 1'000'000) const;

  /// Sampling: fills `out` with pointers into matrices owned by this spec.
  void sample_branch(RandomStream& rng, std::vector<const NonNegMatrix*>& out) const;
  BranchSample sample_branch(RandomStream& rng) const;

 private:
  ModelSpec() = default;
  void finalize();

  ModelKind kind_ = ModelKind::ExplicitAtoms;
  std::size_t dim_ = 0;
  std::vector<BranchAtom> atoms_;          // ExplicitAtoms (also the scalar expansion)
  std::vector<CountAtom> n_law_;           // IIDCoefficients
  std::vector<MatrixAtom> declared_mu_;    // IIDCoefficients
  std::vector<NonNegMatrix> base_branch_;  // ScalarRandomized
  std::vector<ScalarAtom> scalar_law_;     // ScalarRandomized

  std::vector<double> atom_cdf_;
  std::vector<double> n_cdf_;
  std::vector<double> mu_cdf_;
  std::vector<MatrixAtom> mu_;
  double expected_n_ = 0.0;
};

/// Draw one branch from the spec with a stream keyed by (seed, 0).
BranchSample sample_branch(const ModelSpec& spec, std::uint64_t seed);

/// E[sum_i A_i].
NonNegMatrix mean_sum_matrix(const ModelSpec& spec);

/// Integral of a d mu(a) = E[sum_i A_i] / E[N].
NonNegMatrix mu_mean(const ModelSpec& spec);

double prob_n_equals(const ModelSpec& spec, unsigned k);

struct FurstenbergKesten {
  bool holds = false;
  double c = std::numeric_limits<double>::infinity();
};

/// Condition 7 on the marginal law of A_1.
FurstenbergKesten check_furstenberg_kesten(const ModelSpec& spec);

/// Law of A_1 conditioned on {N = 1}; throws NoSingletonBranch if P[N=1] = 0.
std::vector<MatrixAtom> conditioned_a1_atoms(const ModelSpec& spec);

/// Condition 5: given N, the A_i are conditionally i.i.d. with law mu.
bool check_conditional_iid(const ModelSpec& spec);

/// Law of the first matrix A_1 (all branches have N >= 1).
std::vector<MatrixAtom> first_matrix_atoms(const ModelSpec& spec);

/// Merge atoms whose matrices agree within `tol` (max abs entry difference).
std::vector<MatrixAtom> merge_atoms(std::vector<MatrixAtom> atoms, double tol = 1e-12);

}  // namespace smoothlab
