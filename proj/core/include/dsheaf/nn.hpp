#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dsheaf/graph.hpp"
#include "dsheaf/linalg.hpp"
#include "dsheaf/random.hpp"
#include "dsheaf/sheaf.hpp"

namespace dsheaf {

enum class SheafAct { Elu, Tanh, Relu };
enum class RecomputeMaps { PerLayer, Once };
/// Nonlinearity σ of the layer update. Identity exists for tests.
enum class Activation { ComplexRelu, Identity };

struct ModelConfig {
  std::size_t num_layers = 2;  // τ
  std::size_t d = 2;           // stalk dimension
  double q = 0.25;
  std::size_t hidden = 8;  // f, channels per stalk dimension
  MapClass map_class = MapClass::Diagonal;
  SheafAct sheaf_act = SheafAct::Tanh;
  double dropout = 0.0;
  std::size_t input_dim = 1;    // f₀
  std::size_t num_classes = 2;  // K
  RecomputeMaps recompute_maps = RecomputeMaps::PerLayer;
  std::size_t phi_hidden = 16;
  Activation activation = Activation::ComplexRelu;
  /// Stop-gradient on the restriction maps: Φ receives no gradient.
  bool detach_maps = false;
  /// Initializes W_out to zero so the first logits are uniform.
  bool zero_output_init = false;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
  /// Number of Φ outputs per map: d, d(d−1)/2 or d².
  [[nodiscard]] std::size_t map_outputs() const;
};

struct LayerParams {
  RealMatrix phi_w1;  // 2df × phi_hidden
  RealMatrix phi_b1;  // 1 × phi_hidden
  RealMatrix phi_w2;  // phi_hidden × map_outputs
  RealMatrix phi_b2;  // 1 × map_outputs
  RealMatrix w1;      // d × d
  RealMatrix w2;      // f × f
  RealMatrix eps;     // 1 × d, raw; ε = tanh(eps)
};

struct ModelParams {
  RealMatrix w_in;  // f₀ × df
  std::vector<LayerParams> layers;
  RealMatrix w_out;  // 2df × K
};

/// Calls f(name, matrix) for every parameter in a fixed order. Works on const
/// and mutable ModelParams.
template <typename Params, typename F>
void for_each_param(Params& params, F&& f) {
  f(std::string("w_in"), params.w_in);
  for (std::size_t t = 0; t < params.layers.size(); ++t) {
    auto& l = params.layers[t];
    const std::string p = "layer" + std::to_string(t) + ".";
    f(p + "phi_w1", l.phi_w1);
    f(p + "phi_b1", l.phi_b1);
    f(p + "phi_w2", l.phi_w2);
    f(p + "phi_b2", l.phi_b2);
    f(p + "w1", l.w1);
    f(p + "w2", l.w2);
    f(p + "eps", l.eps);
  }
  f(std::string("w_out"), params.w_out);
}

/// Same shapes as `params`, all zero.
ModelParams zeros_like(const ModelParams& params);

/// Glorot-uniform weights, zero biases and zero raw ε.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

/// Throws std::invalid_argument when a parameter shape disagrees with config.
void check_params(const ModelParams& params, const ModelConfig& config);

// ---------------------------------------------------------------------------
// Building blocks

/// features · W_in (n × df) reshaped row-major to nd × f.
ComplexMatrix encode(const RealMatrix& features, const RealMatrix& w_in, std::size_t d);

/// [Re X | Im X].
RealMatrix unwind(const ComplexMatrix& x);

/// Reshape nd × f → n × df, unwind, multiply by W_out.
RealMatrix decode(const ComplexMatrix& x, const RealMatrix& w_out, std::size_t d);

cplx complex_relu(cplx z);
ComplexMatrix complex_relu(const ComplexMatrix& z);

/// Training mode zeroes each entry with probability p and scales the rest by
/// 1/(1−p). The applied factors are written to `mask` (all ones otherwise).
template <typename T>
Matrix<T> dropout_apply(const Matrix<T>& x, double p, Rng& rng, bool training, RealMatrix* mask = nullptr);

struct LossResult {
  double loss = 0.0;
  RealMatrix grad;  // ∂loss/∂logits
};

/// Mean cross-entropy over masked rows. Throws std::invalid_argument on an
/// empty mask or a label outside [0, K).
LossResult softmax_cross_entropy(const RealMatrix& logits, const std::vector<int>& labels,
                                 const std::vector<bool>& mask);

/// Intermediates of the restriction-map perceptron. Row 2e evaluates Φ on
/// (first ∥ second) of edge e and row 2e+1 on (second ∥ first).
struct MapCache {
  RealMatrix nodes;   // n × df real parts of the source stalks
  RealMatrix hidden;  // tanh of the first affine layer
  RealMatrix pre_out;
  RealMatrix out;  // after sheaf_act
  std::vector<EdgeMaps> maps;
};

/// Base restriction maps from the real parts of the stalks of x (nd × f).
MapCache learn_maps(const ComplexMatrix& x, const DirectedGraph& graph, const LayerParams& layer,
                    const ModelConfig& config);

/// Map for one Φ output row under the configured map class.
RealMatrix materialize_map(std::span<const double> outputs, std::size_t d, MapClass map_class);

struct LayerCache {
  ComplexMatrix x;  // layer input
  MapCache maps;
  BlockMatrix laplacian;               // L with the learned maps
  std::vector<InvSqrtResult> roots;    // D_u^{-1/2} per node
  BlockMatrix normalized;              // L_N
  ComplexMatrix v;                     // (I ⊗ W1) X
  ComplexMatrix u;                     // V · W2
  ComplexMatrix z;                     // L_N · U
};

/// One layer update X' = diag(1+ε̄)X − σ(L_N (I ⊗ W1) X W2). `map_source` is
/// the matrix fed to Φ (X itself or the encoded input).
ComplexMatrix layer_forward(const ComplexMatrix& x, const ComplexMatrix& map_source, const LayerParams& layer,
                            const DirectedGraph& graph, const ModelConfig& config, LayerCache* cache = nullptr);

struct ForwardOptions {
  bool training = false;
  std::uint64_t dropout_seed = 0;
};

struct ForwardCache {
  RealMatrix input_mask;  // nd × f dropout factors on X⁰
  ComplexMatrix x0;       // encoded input after dropout
  std::vector<LayerCache> layers;
  ComplexMatrix x_final;
  RealMatrix output_mask;  // n × 2df dropout factors before W_out
  RealMatrix unwound;      // after dropout
  RealMatrix logits;
};

ForwardCache forward(const ModelParams& params, const ModelConfig& config, const DirectedGraph& graph,
                     const RealMatrix& features, const ForwardOptions& options = {});

/// Reverse-mode gradients of a scalar loss given ∂loss/∂logits.
ModelParams backward(const ModelParams& params, const ModelConfig& config, const DirectedGraph& graph,
                     const RealMatrix& features, const ForwardCache& cache, const RealMatrix& grad_logits);

struct GradCheckReport {
  double worst_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

/// Central finite differences over every parameter entry of the masked
/// cross-entropy loss (dropout off). Relative error is
/// |a − n| / max(|a|, |n|, 1e-6).
GradCheckReport grad_check(const ModelParams& params, const ModelConfig& config, const DirectedGraph& graph,
                           const RealMatrix& features, const std::vector<int>& labels, const std::vector<bool>& mask,
                           double step = 1e-5);

/// Text checkpoint: one "name rows cols v…" line per parameter, values in
/// %.17g so reading reproduces them exactly.
void save_checkpoint(std::ostream& out, const ModelParams& params);
/// Reads into `params`, whose shapes must already match. Throws FormatError.
void load_checkpoint(std::istream& in, ModelParams& params);

}  // namespace dsheaf
