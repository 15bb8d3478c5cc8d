#include "smoothlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "smoothlab/error.hpp"

namespace smoothlab {

const char* to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::ExplicitAtoms: return "ExplicitAtoms";
    case ModelKind::IIDCoefficients: return "IIDCoefficients";
    case ModelKind::ScalarRandomized: return "ScalarRandomized";
  }
  return "Unknown";
}

namespace {

constexpr double kProbabilityTolerance = 1e-12;

template <class Atoms, class Prob>
std::vector<double> validated_cdf(const Atoms& atoms, Prob prob, const char* what) {
  if (atoms.empty()) fail(ErrorCode::InvalidModel, std::string(what) + " must be nonempty");
  std::vector<double> cdf;
  cdf.reserve(atoms.size());
  double total = 0.0;
  for (const auto& atom : atoms) {
    const double p = prob(atom);
    if (!(p > 0.0 && p <= 1.0)) {
      fail(ErrorCode::InvalidModel, std::string(what) + ": probabilities must lie in (0, 1]");
    }
    total += p;
    cdf.push_back(total);
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    fail(ErrorCode::InvalidModel, std::string(what) + ": probabilities sum to " +
                                      std::to_string(total) + ", expected 1");
  }
  return cdf;
}

void check_matrix(const NonNegMatrix& m, std::size_t dim) {
  if (m.dim() != dim) {
    fail(ErrorCode::InvalidModel, "matrix of dimension " + std::to_string(m.dim()) +
                                      " in a model of dimension " + std::to_string(dim));
  }
  if (m.is_zero()) fail(ErrorCode::InvalidModel, "branch matrices must be nonzero (A_i != 0 for i <= N)");
}

std::size_t pick(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

}  // namespace

std::vector<MatrixAtom> merge_atoms(std::vector<MatrixAtom> atoms, double tol) {
  std::vector<MatrixAtom> out;
  for (auto& atom : atoms) {
    auto it = std::find_if(out.begin(), out.end(), [&](const MatrixAtom& m) {
      return m.matrix.matrix().max_abs_diff(atom.matrix.matrix()) < tol;
    });
    if (it == out.end()) {
      out.push_back(std::move(atom));
    } else {
      it->probability += atom.probability;
    }
  }
  return out;
}

ModelSpec ModelSpec::explicit_atoms(std::size_t dim, std::vector<BranchAtom> atoms) {
  if (dim == 0) fail(ErrorCode::InvalidModel, "dim must be >= 1");
  ModelSpec spec;
  spec.kind_ = ModelKind::ExplicitAtoms;
  spec.dim_ = dim;
  for (const auto& atom : atoms) {
    if (atom.branch.empty()) fail(ErrorCode::InvalidModel, "every branch must be nonempty (N >= 1 a.s.)");
    for (const auto& m : atom.branch) check_matrix(m, dim);
  }
  spec.atoms_ = std::move(atoms);
  spec.finalize();
  return spec;
}

ModelSpec ModelSpec::iid_coefficients(std::size_t dim, std::vector<CountAtom> n_law,
                                      std::vector<MatrixAtom> mu_atoms) {
  if (dim == 0) fail(ErrorCode::InvalidModel, "dim must be >= 1");
  ModelSpec spec;
  spec.kind_ = ModelKind::IIDCoefficients;
  spec.dim_ = dim;
  for (const auto& c : n_law) {
    if (c.n == 0) fail(ErrorCode::InvalidModel, "P[N = 0] > 0 is not allowed (N >= 1 a.s.)");
  }
  for (const auto& m : mu_atoms) check_matrix(m.matrix, dim);
  spec.n_law_ = std::move(n_law);
  spec.declared_mu_ = std::move(mu_atoms);
  spec.finalize();
  return spec;
}

ModelSpec ModelSpec::scalar_randomized(std::size_t dim, std::vector<NonNegMatrix> base_branch,
                                       std::vector<ScalarAtom> scalar_law) {
  if (dim == 0) fail(ErrorCode::InvalidModel, "dim must be >= 1");
  if (base_branch.empty()) fail(ErrorCode::InvalidModel, "base_branch must be nonempty (N >= 1 a.s.)");
  ModelSpec spec;
  spec.kind_ = ModelKind::ScalarRandomized;
  spec.dim_ = dim;
  for (const auto& m : base_branch) check_matrix(m, dim);
  for (const auto& s : scalar_law) {
    if (!(s.value > 0.0) || !std::isfinite(s.value)) {
      fail(ErrorCode::InvalidModel, "scalar_law values must be positive");
    }
    BranchAtom atom;
    atom.probability = s.probability;
    for (const auto& m : base_branch) atom.branch.push_back(m.scaled(s.value));
    spec.atoms_.push_back(std::move(atom));
  }
  spec.base_branch_ = std::move(base_branch);
  spec.scalar_law_ = std::move(scalar_law);
  spec.finalize();
  return spec;
}

void ModelSpec::finalize() {
  std::vector<MatrixAtom> mu;
  if (kind_ == ModelKind::IIDCoefficients) {
    n_cdf_ = validated_cdf(n_law_, [](const CountAtom& c) { return c.probability; }, "n_law");
    mu_cdf_ = validated_cdf(declared_mu_, [](const MatrixAtom& m) { return m.probability; }, "mu_atoms");
    expected_n_ = 0.0;
    for (const auto& c : n_law_) expected_n_ += c.probability * c.n;
    mu = declared_mu_;
  } else {
    const char* what = kind_ == ModelKind::ScalarRandomized ? "scalar_law" : "atoms";
    atom_cdf_ = validated_cdf(atoms_, [](const BranchAtom& a) { return a.probability; }, what);
    expected_n_ = 0.0;
    for (const auto& a : atoms_) expected_n_ += a.probability * static_cast<double>(a.branch.size());
    for (const auto& a : atoms_)
      for (const auto& m : a.branch) mu.push_back({a.probability / expected_n_, m});
  }
  if (!(expected_n_ > 1.0)) {
    fail(ErrorCode::InvalidModel, "E[N] = " + std::to_string(expected_n_) + " must exceed 1");
  }
  mu_ = merge_atoms(std::move(mu));
}

unsigned ModelSpec::max_n() const noexcept {
  unsigned best = 0;
  if (kind_ == ModelKind::IIDCoefficients) {
    for (const auto& c : n_law_) best = std::max(best, c.n);
  } else {
    for (const auto& a : atoms_) best = std::max<unsigned>(best, static_cast<unsigned>(a.branch.size()));
  }
  return best;
}

std::vector<BranchAtom> ModelSpec::expand(std::size_t budget) const {
  if (kind_ != ModelKind::IIDCoefficients) {
    if (atoms_.size() > budget) fail(ErrorCode::BudgetExceeded, "branch law exceeds the atom budget");
    return atoms_;
  }
  std::vector<BranchAtom> out;
  const std::size_t m = declared_mu_.size();
  for (const auto& c : n_law_) {
    double count = 1.0;
    for (unsigned i = 0; i < c.n; ++i) count *= static_cast<double>(m);
    if (static_cast<double>(out.size()) + count > static_cast<double>(budget)) {
      fail(ErrorCode::BudgetExceeded, "expanding the i.i.d. branch law exceeds the atom budget");
    }
    std::vector<std::size_t> digits(c.n, 0);
    while (true) {
      BranchAtom atom;
      atom.probability = c.probability;
      for (std::size_t d : digits) {
        atom.probability *= declared_mu_[d].probability;
        atom.branch.push_back(declared_mu_[d].matrix);
      }
      out.push_back(std::move(atom));
      std::size_t pos = 0;
      while (pos < digits.size() && ++digits[pos] == m) digits[pos++] = 0;
      if (pos == digits.size()) break;
    }
  }
  return out;
}

void ModelSpec::sample_branch(RandomStream& rng, std::vector<const NonNegMatrix*>& out) const {
  out.clear();
  if (kind_ == ModelKind::IIDCoefficients) {
    const unsigned n = n_law_[pick(n_cdf_, rng.uniform())].n;
    for (unsigned i = 0; i < n; ++i) out.push_back(&declared_mu_[pick(mu_cdf_, rng.uniform())].matrix);
    return;
  }
  const BranchAtom& atom = atoms_[pick(atom_cdf_, rng.uniform())];
  for (const auto& m : atom.branch) out.push_back(&m);
}

BranchSample ModelSpec::sample_branch(RandomStream& rng) const {
  std::vector<const NonNegMatrix*> view;
  sample_branch(rng, view);
  BranchSample out;
  out.matrices.reserve(view.size());
  for (const auto* m : view) out.matrices.push_back(*m);
  return out;
}

BranchSample sample_branch(const ModelSpec& spec, std::uint64_t seed) {
  RandomStream rng(seed, 0);
  return spec.sample_branch(rng);
}

NonNegMatrix mean_sum_matrix(const ModelSpec& spec) {
  NonNegMatrix total = NonNegMatrix::zero(spec.dim());
  if (spec.kind() == ModelKind::IIDCoefficients) {
    NonNegMatrix mean = NonNegMatrix::zero(spec.dim());
    for (const auto& m : spec.declared_mu_atoms()) mean = mean + m.matrix.scaled(m.probability);
    double en = 0.0;
    for (const auto& c : spec.n_law()) en += c.probability * c.n;
    return mean.scaled(en);
  }
  for (const auto& atom : spec.atoms())
    for (const auto& m : atom.branch) total = total + m.scaled(atom.probability);
  return total;
}

NonNegMatrix mu_mean(const ModelSpec& spec) {
  return mean_sum_matrix(spec).scaled(1.0 / spec.expected_n());
}

double prob_n_equals(const ModelSpec& spec, unsigned k) {
  double p = 0.0;
  if (spec.kind() == ModelKind::IIDCoefficients) {
    for (const auto& c : spec.n_law())
      if (c.n == k) p += c.probability;
    return p;
  }
  for (const auto& atom : spec.atoms())
    if (atom.branch.size() == k) p += atom.probability;
  return p;
}

std::vector<MatrixAtom> first_matrix_atoms(const ModelSpec& spec) {
  if (spec.kind() == ModelKind::IIDCoefficients) return merge_atoms(spec.declared_mu_atoms());
  std::vector<MatrixAtom> out;
  for (const auto& atom : spec.atoms()) out.push_back({atom.probability, atom.branch.front()});
  return merge_atoms(std::move(out));
}

FurstenbergKesten check_furstenberg_kesten(const ModelSpec& spec) {
  FurstenbergKesten out;
  double worst = 1.0;
  for (const auto& atom : first_matrix_atoms(spec)) {
    const double lo = atom.matrix.min_entry();
    if (!(lo > 0.0)) return out;
    worst = std::max(worst, atom.matrix.max_entry() / lo);
  }
  out.holds = true;
  out.c = worst;
  return out;
}

std::vector<MatrixAtom> conditioned_a1_atoms(const ModelSpec& spec) {
  const double p1 = prob_n_equals(spec, 1);
  if (!(p1 > 0.0)) fail(ErrorCode::NoSingletonBranch, "P[N = 1] = 0: the conditioned law of A_1 is undefined");
  if (spec.kind() == ModelKind::IIDCoefficients) return merge_atoms(spec.declared_mu_atoms());
  std::vector<MatrixAtom> out;
  for (const auto& atom : spec.atoms())
    if (atom.branch.size() == 1) out.push_back({atom.probability / p1, atom.branch.front()});
  return merge_atoms(std::move(out));
}

bool check_conditional_iid(const ModelSpec& spec) {
  if (spec.kind() == ModelKind::IIDCoefficients) return true;
  const auto& mu = spec.mu_atoms();
  const auto id_of = [&](const NonNegMatrix& m) {
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (mu[i].matrix.matrix().max_abs_diff(m.matrix()) < 1e-12) return i;
    return mu.size();
  };
  constexpr double tol = 1e-9;
  std::map<std::size_t, std::map<std::vector<std::size_t>, double>> joint;
  std::map<std::size_t, double> mass;
  for (const auto& atom : spec.atoms()) {
    std::vector<std::size_t> ids;
    for (const auto& m : atom.branch) ids.push_back(id_of(m));
    joint[ids.size()][ids] += atom.probability;
    mass[ids.size()] += atom.probability;
  }
  for (auto& [n, table] : joint) {
    std::vector<std::vector<double>> marginal(n, std::vector<double>(mu.size(), 0.0));
    for (auto& [ids, p] : table) {
      p /= mass[n];
      for (std::size_t i = 0; i < n; ++i) marginal[i][ids[i]] += p;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < mu.size(); ++k)
        if (std::abs(marginal[i][k] - mu[k].probability) > tol) return false;
    double product_mass = 0.0;
    for (const auto& [ids, p] : table) {
      double prod = 1.0;
      for (std::size_t i = 0; i < n; ++i) prod *= marginal[i][ids[i]];
      if (std::abs(prod - p) > tol) return false;
      product_mass += prod;
    }
    if (std::abs(product_mass - 1.0) > tol) return false;
  }
  return true;
}

}  // namespace smoothlab
