#pragma once

// Finite-depth semigroup, eigen-direction set, cone hulls and membership,
// the l1/l2 witness search, and the greedy theta-expansion.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "smoothlab/cascade.hpp"
#include "smoothlab/matrix.hpp"
#include "smoothlab/model.hpp"

namespace smoothlab {

using Word = std::vector<std::size_t>;

struct SemigroupElement {
  Word word;  // generator indices, leftmost factor first
  NonNegMatrix matrix;
};

struct SemigroupEnumeration {
  std::vector<NonNegMatrix> generators;
  unsigned max_length = 0;
  std::vector<SemigroupElement> elements;  // elements[0] is the identity
};

constexpr std::size_t kDefaultElementCap = 1'000'000;

/// Products of supp(mu) of length <= L, breadth first, deduplicated at 1e-12.
SemigroupEnumeration enumerate_semigroup(const ModelSpec& spec, unsigned max_length,
                                         std::size_t cap = kDefaultElementCap);
SemigroupEnumeration enumerate_semigroup(std::vector<NonNegMatrix> generators, unsigned max_length,
                                         std::size_t cap = kDefaultElementCap);

bool check_allowability(const SemigroupEnumeration& e);
bool check_positivity(const SemigroupEnumeration& e);

struct LambdaDirection {
  Vector direction;
  Word word;
};

/// PF directions of the strictly positive elements, deduplicated at 1e-10.
std::vector<LambdaDirection> lambda_set(const SemigroupEnumeration& e);

/// True when Lambda(L) and Lambda(L+1) coincide up to 1e-10.
bool lambda_stable(const ModelSpec& spec, unsigned max_length, std::size_t cap = kDefaultElementCap);

struct ConeHull {
  std::size_t dim = 0;
  std::size_t max_terms = 0;
  std::vector<Vector> directions;  // deduplicated, on the simplex
  std::vector<Vector> extremes;    // vertices of the convex hull on the simplex
};

ConeHull cone_hull(const std::vector<Vector>& directions, std::size_t max_terms);

/// x in {sum s_i v_i : s_i >= 0, at most max_terms terms}; x = 0 is inside.
bool membership(const ConeHull& hull, std::span<const double> x, double tol = 1e-9);

struct YRealization {
  NonNegMatrix matrix;     // sum of the branch
  std::size_t branch = 0;  // index into spec.expand()
};

struct Witness {
  NonNegMatrix matrix;
  double radius = 0.0;
  Word word;  // indices into realizations; the product is taken left to right
};

struct L1L2Search {
  std::vector<YRealization> realizations;
  std::optional<Witness> l1;  // r < 1
  std::optional<Witness> l2;  // r > 1
};

/// Search over products of at most depth_budget single-branch sums; reports
/// what it found.
L1L2Search search_l1_l2(const ModelSpec& spec, unsigned depth_budget, std::size_t cap = kDefaultElementCap);

/// As search_l1_l2, but throws NotFound unless both witnesses exist.
L1L2Search find_l1_l2(const ModelSpec& spec, unsigned depth_budget, std::size_t cap = kDefaultElementCap);

/// Greedy expansion x ~ sum eta_i theta^i; throws OutOfRange.
std::vector<int> dyadic_expand(double x, double theta, unsigned n_terms);

struct SupportCheck {
  double inside_fraction = 0.0;
  std::vector<double> gaps;  // per hull extreme: min L1 distance to a sample direction
  std::size_t nonzero = 0;
};

SupportCheck empirical_support_check(const SamplePool& pool, const ConeHull& hull, double tol = 1e-9);

}  // namespace smoothlab
