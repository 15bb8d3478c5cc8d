#pragma once

// The three example models, built directly in code (the JSON files under
// models/ are checked against these).

#include "smoothlab/model.hpp"

namespace fixtures {

using smoothlab::NonNegMatrix;

inline NonNegMatrix a1() { return NonNegMatrix::from_rows({{0.2, 0.2}, {0.2, 0.2}}); }
inline NonNegMatrix a2() { return NonNegMatrix::from_rows({{0.2, 0.2}, {0.4, 0.4}}); }

inline smoothlab::ModelSpec ex1() {
  return smoothlab::ModelSpec::iid_coefficients(2, {{2, 1.0}}, {{0.5, a1()}, {0.5, a2()}});
}

inline smoothlab::ModelSpec ex2() {
  return smoothlab::ModelSpec::scalar_randomized(2, {a1(), a2(), a1() + a2()},
                                                 {{0.25, 0.5}, {0.75, 0.5}});
}

inline smoothlab::ModelSpec ex3() {
  return smoothlab::ModelSpec::explicit_atoms(2, {{0.25, {a1()}}, {0.25, {a2()}}, {0.5, {a1(), a2()}}});
}

}  // namespace fixtures
