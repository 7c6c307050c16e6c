#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dsheaf/nn.hpp"
#include "nn_internal.hpp"

namespace dsheaf {

namespace {

/// Gradient with respect to D of S = g(D), g(λ) = λ^{-1/2} on unclamped
/// eigenvalues and 0 otherwise, given the gradient with respect to S.
RealMatrix inv_sqrt_backward(const InvSqrtResult& root, const RealMatrix& grad_root) {
  const auto& lam = root.eigen.values;
  const RealMatrix& q = root.eigen.vectors;
  const std::size_t n = lam.size();
  auto active = [&](std::size_t k) { return lam[k] > root.threshold && lam[k] > 0.0; };
  auto g = [&](std::size_t k) { return active(k) ? 1.0 / std::sqrt(lam[k]) : 0.0; };
  auto dg = [](double x) { return -0.5 / (x * std::sqrt(x)); };

  const RealMatrix h = matmul(matmul(transpose(q), grad_root), q);
  RealMatrix inner(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double gamma = 0.0;
      const bool ai = active(i);
      const bool aj = active(j);
      if (!ai && !aj) {
        gamma = 0.0;
      } else if (i == j) {
        gamma = dg(lam[i]);
      } else {
        const double gap = lam[i] - lam[j];
        const double scale = std::max(std::abs(lam[i]), std::abs(lam[j]));
        if (ai && aj && std::abs(gap) <= 1e-10 * scale) {
          gamma = dg(0.5 * (lam[i] + lam[j]));
        } else if (gap != 0.0) {
          gamma = (g(i) - g(j)) / gap;
        }
      }
      inner(i, j) = gamma * h(i, j);
    }
  }
  return matmul(matmul(q, inner), transpose(q));
}

RealMatrix re(const ComplexMatrix& m) { return real_part(m); }

/// Gradient of a base map's Φ outputs given the gradient of the map.
void map_backward(std::span<const double> outputs, const RealMatrix& map, const RealMatrix& grad_map,
                  MapClass map_class, std::span<double> grad_out) {
  const std::size_t d = map.rows();
  switch (map_class) {
    case MapClass::Diagonal:
      for (std::size_t i = 0; i < d; ++i) grad_out[i] += grad_map(i, i);
      break;
    case MapClass::General:
      for (std::size_t k = 0; k < d * d; ++k) grad_out[k] += grad_map.data()[k];
      break;
    case MapClass::Orthogonal: {
      // Q = (I − S)(I + S)^{-1}: dQ = −(I + Q) dS (I + S)^{-1}.
      const RealMatrix resolvent = detail::cayley_resolvent(outputs, d);
      const RealMatrix gs =
          matmul(matmul(transpose(RealMatrix::identity(d) + map), grad_map), transpose(resolvent)) * -1.0;
      std::size_t k = 0;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) grad_out[k++] += gs(i, j) - gs(j, i);
      break;
    }
  }
}

RealMatrix column_sums(const RealMatrix& m) {
  RealMatrix s(1, m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) s(0, c) += m(r, c);
  return s;
}

/// Back-propagates through Φ and the sheaf normalization of one layer. Adds
/// the gradient with respect to the real part of Φ's source into g_source.
void maps_backward(const LayerCache& lc, const LayerParams& layer, const DirectedGraph& graph,
                   const ModelConfig& config, const ComplexMatrix& grad_z, LayerParams& grads, RealMatrix& g_source) {
  const std::size_t n = graph.num_nodes();
  const std::size_t d = config.d;
  const std::size_t f = lc.u.cols();
  const std::size_t m = graph.num_edges();

  // Gradients of the unnormalized blocks L and of the roots S_u.
  BlockMatrix grad_lap(n, n, d);
  std::vector<RealMatrix> grad_root(n, RealMatrix(d, d));
  for (const auto& [key, blk] : lc.normalized.blocks()) {
    const auto [a, b] = key;
    ComplexMatrix gm(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        cplx s = 0.0;
        for (std::size_t c = 0; c < f; ++c) s += grad_z(a * d + i, c) * std::conj(lc.u(b * d + j, c));
        gm(i, j) = s;
      }
    const ComplexMatrix sa = to_complex(lc.roots[a].root);
    const ComplexMatrix sb = to_complex(lc.roots[b].root);
    const ComplexMatrix& l = *lc.laplacian.find(a, b);
    const ComplexMatrix lh = conj_transpose(l);
    grad_lap.add(a, b, matmul(matmul(sa, gm), sb));
    grad_root[a] += re(matmul(matmul(gm, sb), lh));
    grad_root[b] += re(matmul(matmul(lh, sa), gm));
  }

  // D_u enters through the diagonal blocks and through S_u = D_u^{-1/2}.
  std::vector<RealMatrix> grad_deg(n, RealMatrix(d, d));
  for (std::size_t a = 0; a < n; ++a) {
    if (const ComplexMatrix* gl = grad_lap.find(a, a)) grad_deg[a] += re(*gl);
    grad_deg[a] += inv_sqrt_backward(lc.roots[a], grad_root[a]);
  }

  const auto& maps = lc.maps.maps;
  RealMatrix grad_out(2 * m, config.map_outputs());
  for (std::size_t e = 0; e < m; ++e) {
    const Edge& edge = graph.edge(e);
    const auto [fst, snd] = oriented(edge);
    const cplx t = edge.kind == EdgeKind::Directed ? phase(config.q, 1, 0) : cplx(1.0, 0.0);
    const RealMatrix& ff = maps[e].first;
    const RealMatrix& fs = maps[e].second;

    // L_fs = −T·FfᵀFs and L_sf = −conj(T)·FsᵀFf.
    RealMatrix gk(d, d);
    if (const ComplexMatrix* g = grad_lap.find(fst, snd)) gk += re(*g * (-std::conj(t)));
    if (const ComplexMatrix* g = grad_lap.find(snd, fst)) gk += transpose(re(*g * (-t)));

    RealMatrix gff = matmul(fs, transpose(gk));
    RealMatrix gfs = matmul(ff, gk);
    gff += matmul(ff, grad_deg[fst] + transpose(grad_deg[fst]));
    gfs += matmul(fs, grad_deg[snd] + transpose(grad_deg[snd]));

    map_backward(lc.maps.out.row(2 * e), ff, gff, config.map_class, grad_out.row(2 * e));
    map_backward(lc.maps.out.row(2 * e + 1), fs, gfs, config.map_class, grad_out.row(2 * e + 1));
  }

  // Φ: out = act(tanh(in·W1 + b1)·W2 + b2).
  RealMatrix grad_pre = grad_out;
  for (std::size_t i = 0; i < grad_pre.size(); ++i) {
    grad_pre.data()[i] *=
        detail::sheaf_act_grad(config.sheaf_act, lc.maps.pre_out.data()[i], lc.maps.out.data()[i]);
  }
  grads.phi_w2 += matmul(transpose(lc.maps.hidden), grad_pre);
  grads.phi_b2 += column_sums(grad_pre);
  RealMatrix grad_hidden = matmul(grad_pre, transpose(layer.phi_w2));
  for (std::size_t i = 0; i < grad_hidden.size(); ++i) {
    const double h = lc.maps.hidden.data()[i];
    grad_hidden.data()[i] *= 1.0 - h * h;
  }
  // Sum row gradients per node and endpoint role, mirroring learn_maps.
  const std::size_t block = d * f;
  RealMatrix g_top(n, grad_hidden.cols());
  RealMatrix g_bottom(n, grad_hidden.cols());
  for (std::size_t e = 0; e < m; ++e) {
    const auto [fst, snd] = oriented(graph.edge(e));
    for (std::size_t j = 0; j < grad_hidden.cols(); ++j) {
      g_top(fst, j) += grad_hidden(2 * e, j);
      g_bottom(snd, j) += grad_hidden(2 * e, j);
      g_top(snd, j) += grad_hidden(2 * e + 1, j);
      g_bottom(fst, j) += grad_hidden(2 * e + 1, j);
    }
  }
  const RealMatrix nodes_t = transpose(lc.maps.nodes);
  const RealMatrix gw_top = matmul(nodes_t, g_top);
  const RealMatrix gw_bottom = matmul(nodes_t, g_bottom);
  for (std::size_t k = 0; k < block; ++k)
    for (std::size_t j = 0; j < grad_hidden.cols(); ++j) {
      grads.phi_w1(k, j) += gw_top(k, j);
      grads.phi_w1(block + k, j) += gw_bottom(k, j);
    }
  grads.phi_b1 += column_sums(grad_hidden);

  const RealMatrix grad_nodes =
      matmul(g_top, transpose(detail::row_slice(layer.phi_w1, 0, block))) +
      matmul(g_bottom, transpose(detail::row_slice(layer.phi_w1, block, 2 * block)));
  for (std::size_t i = 0; i < grad_nodes.size(); ++i) g_source.data()[i] += grad_nodes.data()[i];
}

/// Returns ∂ℓ/∂X for the layer input; Φ-source gradients go to g_source.
ComplexMatrix layer_backward(const LayerCache& lc, const LayerParams& layer, const DirectedGraph& graph,
                             const ModelConfig& config, const ComplexMatrix& grad_out, LayerParams& grads,
                             RealMatrix& g_source) {
  const std::size_t n = graph.num_nodes();
  const std::size_t d = config.d;
  const std::size_t f = lc.x.cols();

  ComplexMatrix grad_x(n * d, f);
  ComplexMatrix grad_z(n * d, f);
  for (std::size_t r = 0; r < n * d; ++r) {
    const std::size_t i = r % d;
    const double th = std::tanh(layer.eps(0, i));
    double acc = 0.0;
    for (std::size_t c = 0; c < f; ++c) {
      const cplx g = grad_out(r, c);
      grad_x(r, c) = (1.0 + th) * g;
      acc += (std::conj(g) * lc.x(r, c)).real();
      const bool pass = config.activation == Activation::Identity || lc.z(r, c).real() >= 0.0;
      grad_z(r, c) = pass ? -g : cplx(0.0, 0.0);
    }
    grads.eps(0, i) += acc * (1.0 - th * th);
  }

  const ComplexMatrix grad_u = block_matmul(block_conj_transpose(lc.normalized), grad_z);
  grads.w2 += re(matmul(conj_transpose(lc.v), grad_u));
  const ComplexMatrix grad_v = matmul(grad_u, to_complex(transpose(layer.w2)));

  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        double gw = 0.0;
        const double w = layer.w1(i, k);
        for (std::size_t c = 0; c < f; ++c) {
          const cplx gv = grad_v(u * d + i, c);
          gw += (gv * std::conj(lc.x(u * d + k, c))).real();
          grad_x(u * d + k, c) += w * gv;
        }
        grads.w1(i, k) += gw;
      }
    }
  }

  if (!config.detach_maps) maps_backward(lc, layer, graph, config, grad_z, grads, g_source);
  return grad_x;
}

}  // namespace

ModelParams backward(const ModelParams& params, const ModelConfig& config, const DirectedGraph& graph,
                     const RealMatrix& features, const ForwardCache& cache, const RealMatrix& grad_logits) {
  check_params(params, config);
  const std::size_t n = graph.num_nodes();
  const std::size_t d = config.d;
  const std::size_t f = config.hidden;
  const std::size_t df = d * f;
  if (cache.layers.size() != config.num_layers || cache.logits.rows() != n || cache.x0.rows() != n * d) {
    throw std::invalid_argument("backward: cache does not match the model");
  }
  if (grad_logits.rows() != n || grad_logits.cols() != config.num_classes) {
    throw std::invalid_argument("backward: gradient must be n × K");
  }

  ModelParams grads = zeros_like(params);
  grads.w_out = matmul(transpose(cache.unwound), grad_logits);
  RealMatrix grad_unwound = matmul(grad_logits, transpose(params.w_out));
  for (std::size_t i = 0; i < grad_unwound.size(); ++i) grad_unwound.data()[i] *= cache.output_mask.data()[i];

  // n × 2df [Re | Im] back to the nd × f complex layout.
  ComplexMatrix grad_x(n * d, f);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < df; ++j) grad_x.data()[r * df + j] = {grad_unwound(r, j), grad_unwound(r, df + j)};

  RealMatrix grad_x0_maps(n * d, f);
  for (std::size_t t = config.num_layers; t-- > 0;) {
    RealMatrix g_source(n * d, f);
    grad_x = layer_backward(cache.layers[t], params.layers[t], graph, config, grad_x, grads.layers[t], g_source);
    if (config.recompute_maps == RecomputeMaps::PerLayer) {
      for (std::size_t i = 0; i < g_source.size(); ++i) grad_x.data()[i] += g_source.data()[i];
    } else {
      grad_x0_maps += g_source;
    }
  }

  // X⁰ is real before dropout, so only the real part reaches W_in.
  RealMatrix grad_y(n, df);
  for (std::size_t i = 0; i < grad_y.size(); ++i) {
    grad_y.data()[i] = (grad_x.data()[i].real() + grad_x0_maps.data()[i]) * cache.input_mask.data()[i];
  }
  grads.w_in = matmul(transpose(features), grad_y);
  return grads;
}

GradCheckReport grad_check(const ModelParams& params, const ModelConfig& config, const DirectedGraph& graph,
                           const RealMatrix& features, const std::vector<int>& labels, const std::vector<bool>& mask,
                           double step) {
  auto loss_of = [&](const ModelParams& p) {
    return softmax_cross_entropy(forward(p, config, graph, features).logits, labels, mask).loss;
  };
  const ForwardCache cache = forward(params, config, graph, features);
  const LossResult loss = softmax_cross_entropy(cache.logits, labels, mask);
  const ModelParams analytic = backward(params, config, graph, features, cache, loss.grad);

  std::vector<const RealMatrix*> grad_list;
  for_each_param(analytic, [&](const std::string&, const RealMatrix& m) { grad_list.push_back(&m); });

  GradCheckReport report;
  ModelParams probe = params;
  std::size_t idx = 0;
  for_each_param(probe, [&](const std::string& name, RealMatrix& m) {
    const RealMatrix& g = *grad_list[idx++];
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double orig = m.data()[k];
      m.data()[k] = orig + step;
      const double up = loss_of(probe);
      m.data()[k] = orig - step;
      const double down = loss_of(probe);
      m.data()[k] = orig;
      const double numeric = (up - down) / (2.0 * step);
      const double a = g.data()[k];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
      ++report.checked;
      if (err > report.worst_error || report.worst_param.empty()) {
        report.worst_error = err;
        report.worst_param = name;
        report.worst_index = k;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  });
  return report;
}

}  // namespace dsheaf
