#ifndef TEMPLE_BP_TYPES_HPP_
#define TEMPLE_BP_TYPES_HPP_

#include <algorithm>

namespace temple {

/// Per-cell (or global) bounds on the Riemann invariants.
struct InvariantBox {
  double v_min = 0.0;
  double v_max = 0.0;
  double k_min = 0.0;
  double k_max = 0.0;
};

inline InvariantBox box_hull(const InvariantBox& a, const InvariantBox& b) {
  return InvariantBox{std::min(a.v_min, b.v_min), std::max(a.v_max, b.v_max),
                      std::min(a.k_min, b.k_min), std::max(a.k_max, b.k_max)};
}

struct BpConfig {
  double eps_pad = 1e-12;      // box enlargement of the interpolated extrema
  double eps_J = 1e-10;        // floor on the mesh Jacobian
  double eps1 = 1e-13;         // denominator guard in the Step-1 decoupling
  double v_lower_clamp = 0.0;  // floor applied to v_min (0 for nonnegative-velocity data)
  /// Intersect local boxes with the grown global hull (I^L within I^G),
  /// padded by cap_slack. Off by default: the shape-gated stencil extrema
  /// already block the box-estimate ratchets seen at under-resolved fronts,
  /// and a binding cap can pinch a box below the neighbor velocity, which
  /// collapses the certified time step to noise scale.
  bool hull_cap = false;
  double cap_slack = 0.0;
};

enum class DomainModeKind { Local, Global };

struct DomainMode {
  DomainModeKind kind = DomainModeKind::Local;
  InvariantBox global_box{};  // only grows; meaningful when kind == Global
};

}  // namespace temple

#endif  // TEMPLE_BP_TYPES_HPP_
