#include "dsheaf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "dsheaf/random.hpp"

namespace dsheaf {

DirectedGraph::DirectedGraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& [u, v, kind] = edges_[e];
    if (u >= n_ || v >= n_) {
      throw std::invalid_argument("DirectedGraph: edge " + std::to_string(e) + " has an endpoint out of range");
    }
    if (u == v) throw std::invalid_argument("DirectedGraph: self-loop at node " + std::to_string(u));
    if (!seen.insert({std::min(u, v), std::max(u, v)}).second) {
      throw std::invalid_argument("DirectedGraph: more than one edge between " + std::to_string(u) + " and " +
                                  std::to_string(v));
    }
  }
}

std::vector<std::size_t> DirectedGraph::incident(std::size_t u) const {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < edges_.size(); ++e)
    if (edges_[e].u == u || edges_[e].v == u) out.push_back(e);
  return out;
}

bool DirectedGraph::is_directed() const {
  return std::all_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.kind == EdgeKind::Directed; });
}

bool DirectedGraph::is_undirected() const {
  return std::all_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.kind == EdgeKind::Undirected; });
}

DirectedGraph DirectedGraph::undirected_version() const {
  auto edges = edges_;
  for (auto& e : edges) e.kind = EdgeKind::Undirected;
  return {n_, std::move(edges)};
}

DirectedGraph DirectedGraph::relabeled(const std::vector<std::size_t>& perm) const {
  if (perm.size() != n_) throw std::invalid_argument("relabeled: permutation has wrong length");
  auto edges = edges_;
  for (auto& e : edges) {
    e.u = perm.at(e.u);
    e.v = perm.at(e.v);
  }
  return {n_, std::move(edges)};
}

RealMatrix AdjacencyMatrix::to_real() const {
  RealMatrix a(n_, n_);
  for (std::size_t i = 0; i < entries_.size(); ++i) a.data()[i] = entries_[i];
  return a;
}

AdjacencyMatrix adjacency(const DirectedGraph& graph) {
  AdjacencyMatrix a(graph.num_nodes());
  for (const auto& e : graph.edges()) {
    a.set(e.u, e.v);
    if (e.kind == EdgeKind::Undirected) a.set(e.v, e.u);
  }
  return a;
}

RealMatrix degree_features(const DirectedGraph& graph) {
  RealMatrix x(graph.num_nodes(), 1);
  for (const auto& e : graph.edges()) {
    const double w = e.kind == EdgeKind::Undirected ? 2.0 : 1.0;
    x(e.u, 0) += w;
    x(e.v, 0) += w;
  }
  return x;
}

// ---------------------------------------------------------------------------

DsbmParams DsbmParams::uniform(std::size_t n, std::size_t communities, double alpha_intra, double alpha_inter,
                               double beta, std::uint64_t seed) {
  DsbmParams p;
  p.n = n;
  p.communities = communities;
  p.seed = seed;
  p.alpha = RealMatrix(communities, communities);
  p.beta = RealMatrix(communities, communities);
  for (std::size_t i = 0; i < communities; ++i) {
    for (std::size_t j = 0; j < communities; ++j) {
      p.alpha(i, j) = i == j ? alpha_intra : alpha_inter;
      p.beta(i, j) = i == j ? 0.5 : (i < j ? beta : 1.0 - beta);
    }
  }
  return p;
}

void DsbmParams::validate() const {
  if (communities == 0) throw std::invalid_argument("DSBM: community count must be positive");
  if (n == 0 || n % communities != 0) throw std::invalid_argument("DSBM: n must be a positive multiple of C");
  if (alpha.rows() != communities || alpha.cols() != communities || beta.rows() != communities ||
      beta.cols() != communities) {
    throw std::invalid_argument("DSBM: alpha and beta must be C×C");
  }
  for (std::size_t i = 0; i < communities; ++i) {
    for (std::size_t j = 0; j < communities; ++j) {
      if (alpha(i, j) < 0.0 || alpha(i, j) > 1.0 || beta(i, j) < 0.0 || beta(i, j) > 1.0) {
        throw std::invalid_argument("DSBM: probabilities must lie in [0, 1]");
      }
      if (std::abs(alpha(i, j) - alpha(j, i)) > 1e-12) throw std::invalid_argument("DSBM: alpha is not symmetric");
      if (std::abs(beta(i, j) + beta(j, i) - 1.0) > 1e-12) {
        throw std::invalid_argument("DSBM: beta_ij + beta_ji must equal 1");
      }
    }
  }
}

DirectedGraph dsbm_generate(const DsbmParams& params) {
  params.validate();
  Rng rng(params.seed);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < params.n; ++u) {
    const std::size_t cu = params.community_of(u);
    for (std::size_t v = u + 1; v < params.n; ++v) {
      const std::size_t cv = params.community_of(v);
      if (!rng.bernoulli(params.alpha(cu, cv))) continue;
      if (rng.bernoulli(params.beta(cu, cv))) {
        edges.push_back({u, v, EdgeKind::Directed});
      } else {
        edges.push_back({v, u, EdgeKind::Directed});
      }
    }
  }
  return {params.n, std::move(edges)};
}

std::vector<int> dsbm_labels(const DsbmParams& params) {
  params.validate();
  std::vector<int> labels(params.n);
  for (std::size_t u = 0; u < params.n; ++u) labels[u] = static_cast<int>(params.community_of(u));
  return labels;
}

// ---------------------------------------------------------------------------

SplitMasks make_splits(const std::vector<int>& labels, SplitFractions fr, bool per_class, std::uint64_t seed) {
  if (fr.train < 0.0 || fr.val < 0.0 || fr.test < 0.0 || std::abs(fr.train + fr.val + fr.test - 1.0) > 1e-9) {
    throw std::invalid_argument("make_splits: fractions must be non-negative and sum to 1");
  }
  const std::size_t n = labels.size();
  std::vector<std::vector<std::size_t>> groups;
  if (per_class) {
    for (std::size_t u = 0; u < n; ++u) {
      if (labels[u] < 0) throw std::invalid_argument("make_splits: negative label");
      const auto c = static_cast<std::size_t>(labels[u]);
      if (c >= groups.size()) groups.resize(c + 1);
      groups[c].push_back(u);
    }
    for (std::size_t c = 0; c < groups.size(); ++c) {
      if (!groups[c].empty() && groups[c].size() < 3) {
        throw std::invalid_argument("make_splits: class " + std::to_string(c) + " has fewer than 3 members");
      }
    }
  } else {
    groups.emplace_back(n);
    std::iota(groups[0].begin(), groups[0].end(), std::size_t{0});
  }

  SplitMasks m{std::vector<bool>(n), std::vector<bool>(n), std::vector<bool>(n)};
  Rng rng(seed);
  // Small slack keeps products such as 0.48·25 from flooring to 11.
  auto count = [](double f, std::size_t size) {
    return static_cast<std::size_t>(std::floor(f * static_cast<double>(size) + 1e-9));
  };
  for (auto& g : groups) {
    if (g.empty()) continue;
    rng.shuffle(std::span<std::size_t>(g));
    std::size_t n_train = count(fr.train, g.size());
    std::size_t n_val = count(fr.val, g.size());
    const std::size_t n_test = count(fr.test, g.size());
    std::size_t rest = g.size() - std::min(g.size(), n_train + n_val + n_test);
    if (rest > 0) {
      ++n_train;
      --rest;
    }
    if (rest > 0) {
      ++n_val;
      --rest;
    }
    n_train += rest;  // only reachable through rounding slack
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (k < n_train) {
        m.train[g[k]] = true;
      } else if (k < n_train + n_val) {
        m.val[g[k]] = true;
      } else {
        m.test[g[k]] = true;
      }
    }
  }
  return m;
}

std::size_t Dataset::num_classes() const {
  int k = -1;
  for (int l : labels) k = std::max(k, l);
  return static_cast<std::size_t>(k + 1);
}

void Dataset::validate() const {
  const std::size_t n = graph.num_nodes();
  if (features.rows() != n) throw std::invalid_argument("Dataset: feature rows differ from node count");
  if (labels.size() != n) throw std::invalid_argument("Dataset: label count differs from node count");
  if (masks.train.size() != n || masks.val.size() != n || masks.test.size() != n) {
    throw std::invalid_argument("Dataset: mask length differs from node count");
  }
  const std::size_t k = num_classes();
  std::vector<bool> in_train(k);
  for (std::size_t u = 0; u < n; ++u) {
    if (labels[u] < 0) throw std::invalid_argument("Dataset: negative label");
    const int hits = int(masks.train[u]) + int(masks.val[u]) + int(masks.test[u]);
    if (hits > 1) throw std::invalid_argument("Dataset: masks overlap at node " + std::to_string(u));
    if (masks.train[u]) in_train[static_cast<std::size_t>(labels[u])] = true;
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (!in_train[c]) throw std::invalid_argument("Dataset: class " + std::to_string(c) + " missing from train mask");
  }
}

}  // namespace dsheaf
