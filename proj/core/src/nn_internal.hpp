#pragma once

#include <cmath>

#include "dsheaf/nn.hpp"

namespace dsheaf::detail {

inline double sheaf_act(SheafAct act, double x) {
  switch (act) {
    case SheafAct::Elu: return x > 0.0 ? x : std::expm1(x);
    case SheafAct::Tanh: return std::tanh(x);
    case SheafAct::Relu: return x > 0.0 ? x : 0.0;
  }
  return x;
}

/// Derivative given the pre-activation x and the activation y.
inline double sheaf_act_grad(SheafAct act, double x, double y) {
  switch (act) {
    case SheafAct::Elu: return x > 0.0 ? 1.0 : y + 1.0;
    case SheafAct::Tanh: return 1.0 - y * y;
    case SheafAct::Relu: return x > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

/// Rows [begin, end) of a.
RealMatrix row_slice(const RealMatrix& a, std::size_t begin, std::size_t end);

/// Real degree block Σ F⁰ᵀF⁰ per node. |T| = 1, so this equals the complex
/// degree block of the directed sheaf.
std::vector<RealMatrix> real_degrees(const DirectedGraph& graph, const std::vector<EdgeMaps>& maps, std::size_t d);

/// (I + S)^{-1} for the skew matrix built from Cayley parameters.
RealMatrix cayley_resolvent(std::span<const double> params, std::size_t d);

}  // namespace dsheaf::detail
