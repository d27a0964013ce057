#pragma once

#include <cmath>

#include "colliderbias/structures.hpp"

namespace cbtest {

using namespace colliderbias;

inline StructureParams make_v(double px, double py, ColliderTable q) {
  StructureParams p;
  p.kind = StructureKind::V;
  p.p_left = px;
  p.p_right = py;
  p.p_c_given = q;
  return p;
}

// p_{C=1|00} = .15, p_{C=1|11} = .75, p_{C=1|10} = p_{C=1|01} = .25.
inline ColliderTable anchor_table() { return {0.15, 0.25, 0.25, 0.75}; }

inline StructureParams anchor_point() { return make_v(0.5, 0.5, anchor_table()); }

inline StructureParams uniform_params(StructureKind kind) {
  StructureParams p;
  p.kind = kind;
  p.p_left = 0.5;
  if (kind != StructureKind::Nabla) p.p_right = 0.5;
  p.p_c_given = {0.5, 0.5, 0.5, 0.5};
  if (has_left_a(kind)) p.p_x_given_a = BinaryConditional{0.5, 0.5};
  if (has_right_b(kind) || kind == StructureKind::Nabla) {
    p.p_y_given_b = BinaryConditional{0.5, 0.5};
  }
  if (has_child_d(kind)) p.p_d_given_c = BinaryConditional{0.5, 0.5};
  return p;
}

inline bool close(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

}  // namespace cbtest
