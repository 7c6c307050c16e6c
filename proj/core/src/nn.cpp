#include "dsheaf/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "nn_internal.hpp"

namespace dsheaf {

void ModelConfig::validate() const {
  if (num_layers == 0) throw std::invalid_argument("model: num_layers must be at least 1");
  if (d == 0) throw std::invalid_argument("model: d must be at least 1");
  if (hidden == 0) throw std::invalid_argument("model: hidden must be at least 1");
  if (phi_hidden == 0) throw std::invalid_argument("model: phi_hidden must be at least 1");
  if (input_dim == 0) throw std::invalid_argument("model: input_dim must be at least 1");
  if (num_classes < 2) throw std::invalid_argument("model: num_classes must be at least 2");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("model: dropout must lie in [0, 1)");
  if (!std::isfinite(q)) throw std::invalid_argument("model: q must be finite");
  if (map_class == MapClass::Orthogonal && d < 2) {
    throw std::invalid_argument("model: orthogonal maps need d >= 2");
  }
}

std::size_t ModelConfig::map_outputs() const {
  switch (map_class) {
    case MapClass::Diagonal: return d;
    case MapClass::Orthogonal: return d * (d - 1) / 2;
    case MapClass::General: return d * d;
  }
  return d;
}

namespace {

RealMatrix glorot(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  RealMatrix m(fan_in, fan_out);
  for (auto& v : m.data()) v = rng.uniform(-limit, limit);
  return m;
}

void require_shape(const RealMatrix& m, std::size_t rows, std::size_t cols, const std::string& name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw std::invalid_argument("parameter " + name + " has shape " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
}

}  // namespace

ModelParams zeros_like(const ModelParams& params) {
  ModelParams z = params;
  for_each_param(z, [](const std::string&, RealMatrix& m) { m.fill(0.0); });
  return z;
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(derive_seed(seed, "init"));
  const std::size_t df = config.d * config.hidden;
  ModelParams p;
  p.w_in = glorot(rng, config.input_dim, df);
  for (std::size_t t = 0; t < config.num_layers; ++t) {
    LayerParams l;
    l.phi_w1 = glorot(rng, 2 * df, config.phi_hidden);
    l.phi_b1 = RealMatrix(1, config.phi_hidden);
    l.phi_w2 = glorot(rng, config.phi_hidden, config.map_outputs());
    l.phi_b2 = RealMatrix(1, config.map_outputs());
    l.w1 = glorot(rng, config.d, config.d);
    l.w2 = glorot(rng, config.hidden, config.hidden);
    l.eps = RealMatrix(1, config.d);
    p.layers.push_back(std::move(l));
  }
  p.w_out = config.zero_output_init ? RealMatrix(2 * df, config.num_classes) : glorot(rng, 2 * df, config.num_classes);
  return p;
}

void check_params(const ModelParams& params, const ModelConfig& config) {
  config.validate();
  const std::size_t df = config.d * config.hidden;
  require_shape(params.w_in, config.input_dim, df, "w_in");
  if (params.layers.size() != config.num_layers) {
    throw std::invalid_argument("parameters have " + std::to_string(params.layers.size()) + " layers, config has " +
                                std::to_string(config.num_layers));
  }
  for (std::size_t t = 0; t < params.layers.size(); ++t) {
    const auto& l = params.layers[t];
    const std::string p = "layer" + std::to_string(t) + ".";
    require_shape(l.phi_w1, 2 * df, config.phi_hidden, p + "phi_w1");
    require_shape(l.phi_b1, 1, config.phi_hidden, p + "phi_b1");
    require_shape(l.phi_w2, config.phi_hidden, config.map_outputs(), p + "phi_w2");
    require_shape(l.phi_b2, 1, config.map_outputs(), p + "phi_b2");
    require_shape(l.w1, config.d, config.d, p + "w1");
    require_shape(l.w2, config.hidden, config.hidden, p + "w2");
    require_shape(l.eps, 1, config.d, p + "eps");
  }
  require_shape(params.w_out, 2 * df, config.num_classes, "w_out");
}

// ---------------------------------------------------------------------------

ComplexMatrix encode(const RealMatrix& features, const RealMatrix& w_in, std::size_t d) {
  if (d == 0 || w_in.cols() % d != 0) throw std::invalid_argument("encode: W_in width is not a multiple of d");
  const RealMatrix y = matmul(features, w_in);
  const std::size_t f = w_in.cols() / d;
  // Row-major n × df and nd × f share the same element order.
  ComplexMatrix x(features.rows() * d, f);
  for (std::size_t i = 0; i < y.size(); ++i) x.data()[i] = y.data()[i];
  return x;
}

RealMatrix unwind(const ComplexMatrix& x) {
  const std::size_t c = x.cols();
  RealMatrix out(x.rows(), 2 * c);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t j = 0; j < c; ++j) {
      out(r, j) = x(r, j).real();
      out(r, c + j) = x(r, j).imag();
    }
  }
  return out;
}

namespace {

ComplexMatrix stalks_to_rows(const ComplexMatrix& x, std::size_t d) {
  if (d == 0 || x.rows() % d != 0) throw std::invalid_argument("decode: row count is not a multiple of d");
  ComplexMatrix r(x.rows() / d, x.cols() * d);
  std::copy(x.data().begin(), x.data().end(), r.data().begin());
  return r;
}

}  // namespace

RealMatrix decode(const ComplexMatrix& x, const RealMatrix& w_out, std::size_t d) {
  return matmul(unwind(stalks_to_rows(x, d)), w_out);
}

cplx complex_relu(cplx z) { return z.real() >= 0.0 ? z : cplx(0.0, 0.0); }

ComplexMatrix complex_relu(const ComplexMatrix& z) {
  ComplexMatrix out = z;
  for (auto& v : out.data()) v = complex_relu(v);
  return out;
}

template <typename T>
Matrix<T> dropout_apply(const Matrix<T>& x, double p, Rng& rng, bool training, RealMatrix* mask) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout: probability must lie in [0, 1)");
  Matrix<T> out = x;
  RealMatrix factors(x.rows(), x.cols());
  factors.fill(1.0);
  if (training && p > 0.0) {
    const double scale = 1.0 / (1.0 - p);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double f = rng.uniform() < p ? 0.0 : scale;
      factors.data()[i] = f;
      out.data()[i] *= f;
    }
  }
  if (mask != nullptr) *mask = std::move(factors);
  return out;
}

template RealMatrix dropout_apply(const RealMatrix&, double, Rng&, bool, RealMatrix*);
template ComplexMatrix dropout_apply(const ComplexMatrix&, double, Rng&, bool, RealMatrix*);

LossResult softmax_cross_entropy(const RealMatrix& logits, const std::vector<int>& labels,
                                 const std::vector<bool>& mask) {
  if (labels.size() != logits.rows() || mask.size() != logits.rows()) {
    throw std::invalid_argument("softmax_cross_entropy: labels/mask length differs from logits rows");
  }
  const auto count = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
  if (count == 0) throw std::invalid_argument("softmax_cross_entropy: empty mask");
  const std::size_t k = logits.cols();
  LossResult out;
  out.grad = RealMatrix(logits.rows(), k);
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    if (!mask[r]) continue;
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= k) {
      throw std::invalid_argument("softmax_cross_entropy: label out of range at row " + std::to_string(r));
    }
    const auto row = logits.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - mx);
    const double lse = mx + std::log(sum);
    out.loss += (lse - row[static_cast<std::size_t>(labels[r])]) * inv;
    for (std::size_t c = 0; c < k; ++c) {
      const double p = std::exp(row[c] - lse);
      out.grad(r, c) = (p - (c == static_cast<std::size_t>(labels[r]) ? 1.0 : 0.0)) * inv;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

RealMatrix materialize_map(std::span<const double> outputs, std::size_t d, MapClass map_class) {
  switch (map_class) {
    case MapClass::Diagonal: {
      if (outputs.size() != d) throw std::invalid_argument("materialize_map: expected d outputs");
      RealMatrix m(d, d);
      for (std::size_t i = 0; i < d; ++i) m(i, i) = outputs[i];
      return m;
    }
    case MapClass::Orthogonal: return cayley_orthogonal(outputs, d);
    case MapClass::General: {
      if (outputs.size() != d * d) throw std::invalid_argument("materialize_map: expected d² outputs");
      return RealMatrix(d, d, std::vector<double>(outputs.begin(), outputs.end()));
    }
  }
  throw std::invalid_argument("materialize_map: unknown map class");
}

MapCache learn_maps(const ComplexMatrix& x, const DirectedGraph& graph, const LayerParams& layer,
                    const ModelConfig& config) {
  const std::size_t d = config.d;
  const std::size_t f = x.cols();
  const std::size_t block = d * f;
  if (x.rows() != graph.num_nodes() * d) throw std::invalid_argument("learn_maps: X has the wrong number of rows");
  const std::size_t m = graph.num_edges();

  const std::size_t n = graph.num_nodes();
  const std::size_t h = layer.phi_w1.cols();
  MapCache c;
  c.nodes = RealMatrix(n, block);
  for (std::size_t i = 0; i < c.nodes.size(); ++i) c.nodes.data()[i] = x.data()[i].real();

  // Φ's first layer splits into a first-endpoint and a second-endpoint half,
  // so it is applied once per node instead of once per edge row.
  const RealMatrix top = matmul(c.nodes, detail::row_slice(layer.phi_w1, 0, block));
  const RealMatrix bottom = matmul(c.nodes, detail::row_slice(layer.phi_w1, block, 2 * block));
  c.hidden = RealMatrix(2 * m, h);
  auto fill = [&](std::size_t row, std::size_t a, std::size_t b) {
    for (std::size_t j = 0; j < h; ++j) c.hidden(row, j) = std::tanh(top(a, j) + bottom(b, j) + layer.phi_b1(0, j));
  };
  for (std::size_t e = 0; e < m; ++e) {
    const auto [first, second] = oriented(graph.edge(e));
    fill(2 * e, first, second);
    fill(2 * e + 1, second, first);
  }

  c.pre_out = matmul(c.hidden, layer.phi_w2);
  c.out = RealMatrix(c.pre_out.rows(), c.pre_out.cols());
  for (std::size_t r = 0; r < c.pre_out.rows(); ++r) {
    for (std::size_t j = 0; j < c.pre_out.cols(); ++j) {
      c.pre_out(r, j) += layer.phi_b2(0, j);
      c.out(r, j) = detail::sheaf_act(config.sheaf_act, c.pre_out(r, j));
    }
  }

  c.maps.reserve(m);
  for (std::size_t e = 0; e < m; ++e) {
    c.maps.push_back({materialize_map(c.out.row(2 * e), d, config.map_class),
                      materialize_map(c.out.row(2 * e + 1), d, config.map_class)});
  }
  return c;
}

namespace detail {

RealMatrix row_slice(const RealMatrix& a, std::size_t begin, std::size_t end) {
  RealMatrix r(end - begin, a.cols());
  std::copy(a.data().begin() + static_cast<std::ptrdiff_t>(begin * a.cols()),
            a.data().begin() + static_cast<std::ptrdiff_t>(end * a.cols()), r.data().begin());
  return r;
}

std::vector<RealMatrix> real_degrees(const DirectedGraph& graph, const std::vector<EdgeMaps>& maps, std::size_t d) {
  std::vector<RealMatrix> deg(graph.num_nodes(), RealMatrix(d, d));
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const auto [first, second] = oriented(graph.edge(e));
    deg[first] += matmul(transpose(maps[e].first), maps[e].first);
    deg[second] += matmul(transpose(maps[e].second), maps[e].second);
  }
  return deg;
}

RealMatrix cayley_resolvent(std::span<const double> params, std::size_t d) {
  RealMatrix a = RealMatrix::identity(d);
  std::size_t k = 0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      a(i, j) += params[k];
      a(j, i) -= params[k];
      ++k;
    }
  }
  return inverse(a);
}

}  // namespace detail

namespace {

void require_finite(const ComplexMatrix& m, const char* what) {
  if (!m.is_finite()) throw std::runtime_error(std::string("layer_forward: non-finite ") + what);
}

}  // namespace

ComplexMatrix layer_forward(const ComplexMatrix& x, const ComplexMatrix& map_source, const LayerParams& layer,
                            const DirectedGraph& graph, const ModelConfig& config, LayerCache* cache) {
  const std::size_t n = graph.num_nodes();
  const std::size_t d = config.d;
  const std::size_t f = x.cols();
  if (x.rows() != n * d) throw std::invalid_argument("layer_forward: X has the wrong number of rows");
  require_finite(x, "input");

  MapCache maps = learn_maps(map_source, graph, layer, config);
  const DirectedCellularSheaf sheaf(graph, SheafConfig{d, config.q, config.map_class}, maps.maps);
  BlockMatrix lap = laplacian_blocks(sheaf);

  const std::vector<RealMatrix> degrees = detail::real_degrees(graph, maps.maps, d);
  std::vector<InvSqrtResult> roots;
  std::vector<ComplexMatrix> croots;
  roots.reserve(n);
  croots.reserve(n);
  for (const auto& dg : degrees) {
    roots.push_back(inv_sqrt_psd_sym(dg));
    croots.push_back(to_complex(roots.back().root));
  }
  BlockMatrix normalized(n, n, d);
  for (const auto& [key, blk] : lap.blocks()) {
    normalized.set(key.first, key.second, matmul(matmul(croots[key.first], blk), croots[key.second]));
  }

  // (I ⊗ W1) X: left-multiply every node stalk by W1.
  ComplexMatrix v(n * d, f);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k) {
        const double w = layer.w1(i, k);
        if (w == 0.0) continue;
        for (std::size_t c = 0; c < f; ++c) v(u * d + i, c) += w * x(u * d + k, c);
      }
  ComplexMatrix u = matmul(v, to_complex(layer.w2));
  ComplexMatrix z = block_matmul(normalized, u);
  require_finite(z, "diffusion term");

  ComplexMatrix out = x;
  for (std::size_t r = 0; r < n * d; ++r) {
    const double scale = 1.0 + std::tanh(layer.eps(0, r % d));
    for (std::size_t c = 0; c < f; ++c) {
      const cplx s = config.activation == Activation::ComplexRelu ? complex_relu(z(r, c)) : z(r, c);
      out(r, c) = scale * x(r, c) - s;
    }
  }
  require_finite(out, "output");

  if (cache != nullptr) {
    cache->x = x;
    cache->maps = std::move(maps);
    cache->laplacian = std::move(lap);
    cache->roots = std::move(roots);
    cache->normalized = std::move(normalized);
    cache->v = std::move(v);
    cache->u = std::move(u);
    cache->z = std::move(z);
  }
  return out;
}

ForwardCache forward(const ModelParams& params, const ModelConfig& config, const DirectedGraph& graph,
                     const RealMatrix& features, const ForwardOptions& options) {
  check_params(params, config);
  if (features.rows() != graph.num_nodes() || features.cols() != config.input_dim) {
    throw std::invalid_argument("forward: features must be n × input_dim");
  }
  ForwardCache cache;
  Rng input_rng(derive_seed(options.dropout_seed, "dropout", 0));
  cache.x0 = dropout_apply(encode(features, params.w_in, config.d), config.dropout, input_rng, options.training,
                           &cache.input_mask);

  ComplexMatrix x = cache.x0;
  cache.layers.resize(config.num_layers);
  for (std::size_t t = 0; t < config.num_layers; ++t) {
    const ComplexMatrix& source = config.recompute_maps == RecomputeMaps::PerLayer ? x : cache.x0;
    x = layer_forward(x, source, params.layers[t], graph, config, &cache.layers[t]);
  }
  cache.x_final = x;

  Rng output_rng(derive_seed(options.dropout_seed, "dropout", 1));
  cache.unwound = dropout_apply(unwind(stalks_to_rows(x, config.d)), config.dropout, output_rng, options.training,
                                &cache.output_mask);
  cache.logits = matmul(cache.unwound, params.w_out);
  return cache;
}

}  // namespace dsheaf
