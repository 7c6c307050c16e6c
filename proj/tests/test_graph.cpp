#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dsheaf/graph.hpp"
#include "dsheaf/random.hpp"
#include "dsheaf/verify.hpp"

using namespace dsheaf;

TEST(Graph, RejectsSelfLoopsDuplicatesAndRange) {
  EXPECT_THROW(DirectedGraph(2, {{0, 0, EdgeKind::Directed}}), std::invalid_argument);
  EXPECT_THROW(DirectedGraph(2, {{0, 2, EdgeKind::Directed}}), std::invalid_argument);
  EXPECT_THROW(DirectedGraph(2, {{0, 1, EdgeKind::Directed}, {1, 0, EdgeKind::Directed}}), std::invalid_argument);
  EXPECT_NO_THROW(DirectedGraph(3, {{0, 1, EdgeKind::Directed}, {2, 1, EdgeKind::Undirected}}));
}

TEST(Graph, AdjacencyAndDegreeFeatures) {
  const DirectedGraph g(3, {{0, 1, EdgeKind::Directed}, {1, 2, EdgeKind::Undirected}});
  const AdjacencyMatrix a = adjacency(g);
  EXPECT_EQ(a(0, 1), 1);
  EXPECT_EQ(a(1, 0), 0);
  EXPECT_EQ(a(1, 2), 1);
  EXPECT_EQ(a(2, 1), 1);
  const RealMatrix deg = degree_features(g);
  // in + out degree; the undirected edge contributes an arc each way.
  EXPECT_EQ(deg, (RealMatrix{{1}, {3}, {2}}));
  EXPECT_EQ(g.incident(1), (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(g.undirected_version().is_undirected());
}

TEST(Graph, RelabelPreservesEdgeOrder) {
  const DirectedGraph g(3, {{0, 1, EdgeKind::Directed}, {1, 2, EdgeKind::Undirected}});
  const DirectedGraph h = g.relabeled({2, 0, 1});
  EXPECT_EQ(h.edge(0), (Edge{2, 0, EdgeKind::Directed}));
  EXPECT_EQ(h.edge(1), (Edge{0, 1, EdgeKind::Undirected}));
}

TEST(Dsbm, ZeroDensityGivesNoEdges) {
  const auto p = DsbmParams::uniform(20, 4, 0.0, 0.0, 0.2, 1);
  EXPECT_EQ(dsbm_generate(p).num_edges(), 0u);
  std::ostringstream out;
  write_edge_list(out, dsbm_generate(p));
  EXPECT_EQ(out.str(), "20\n");
}

TEST(Dsbm, ValidatesParameters) {
  auto p = DsbmParams::uniform(20, 4, 0.1, 0.1, 0.2, 1);
  p.beta(0, 1) = 0.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_THROW(DsbmParams::uniform(21, 4, 0.1, 0.1, 0.2, 1).validate(), std::invalid_argument);
  EXPECT_THROW(DsbmParams::uniform(20, 4, 1.5, 0.1, 0.2, 1).validate(), std::invalid_argument);
}

TEST(Dsbm, DeterministicAndOrientedByBeta) {
  const auto p = DsbmParams::uniform(400, 4, 0.2, 0.2, 0.2, 11);
  const DirectedGraph g = dsbm_generate(p);
  EXPECT_EQ(g, dsbm_generate(p));
  EXPECT_TRUE(g.is_directed());

  const auto labels = dsbm_labels(p);
  EXPECT_EQ(labels.front(), 0);
  EXPECT_EQ(labels.back(), 3);
  std::size_t forward = 0;
  std::size_t inter = 0;
  for (const auto& e : g.edges()) {
    if (labels[e.u] == labels[e.v]) continue;
    ++inter;
    if (labels[e.u] < labels[e.v]) ++forward;
  }
  // Lower → higher community happens with probability β = 0.2; 5σ binomial band.
  const double frac = static_cast<double>(forward) / static_cast<double>(inter);
  const double sigma = std::sqrt(0.2 * 0.8 / static_cast<double>(inter));
  EXPECT_NEAR(frac, 0.2, 5 * sigma);
}

TEST(Splits, PerClassCountsAndDisjointness) {
  std::vector<int> labels;
  for (int c = 0; c < 5; ++c) labels.insert(labels.end(), 60, c);
  const SplitMasks m = make_splits(labels, {0.8, 0.05, 0.15}, true, 3);
  for (int c = 0; c < 5; ++c) {
    std::size_t tr = 0, va = 0, te = 0;
    for (std::size_t u = 0; u < labels.size(); ++u) {
      if (labels[u] != c) continue;
      EXPECT_EQ(int(m.train[u]) + int(m.val[u]) + int(m.test[u]), 1);
      tr += m.train[u];
      va += m.val[u];
      te += m.test[u];
    }
    EXPECT_EQ(tr, 48u);
    EXPECT_EQ(va, 3u);
    EXPECT_EQ(te, 9u);
  }
  EXPECT_EQ(m.train, make_splits(labels, {0.8, 0.05, 0.15}, true, 3).train);
  EXPECT_NE(m.train, make_splits(labels, {0.8, 0.05, 0.15}, true, 4).train);
}

TEST(Splits, LeftoversGoToTrainThenValidation) {
  const std::vector<int> labels(7, 0);
  const SplitMasks m = make_splits(labels, {0.5, 0.25, 0.25}, false, 1);
  // floor gives 3/1/1; the two leftovers go to train and then validation.
  EXPECT_EQ(std::count(m.train.begin(), m.train.end(), true), 4);
  EXPECT_EQ(std::count(m.val.begin(), m.val.end(), true), 2);
  EXPECT_EQ(std::count(m.test.begin(), m.test.end(), true), 1);
}

TEST(Splits, RejectsBadInput) {
  EXPECT_THROW(make_splits({0, 0, 0}, {0.5, 0.5, 0.5}, false, 1), std::invalid_argument);
  EXPECT_THROW(make_splits({0, 0, 1}, {0.8, 0.1, 0.1}, true, 1), std::invalid_argument);
}

TEST(EdgeListIo, RoundTripIsByteExact) {
  Rng rng(5);
  const DirectedGraph g = random_graph(rng, 30, 0.2, GraphShape::Mixed);
  std::ostringstream first;
  write_edge_list(first, g);
  std::istringstream in(first.str());
  const auto read = read_edge_list(in);
  EXPECT_EQ(read.graph, g);
  EXPECT_EQ(read.merged_digons, 0u);
  std::ostringstream second;
  write_edge_list(second, read.graph);
  EXPECT_EQ(first.str(), second.str());
}

TEST(EdgeListIo, MergesDigonsAndReportsLineNumbers) {
  std::istringstream digon("# comment\n3\n0 1 1\n1 2 1\n1 0 1\n");
  const auto read = read_edge_list(digon);
  EXPECT_EQ(read.merged_digons, 1u);
  ASSERT_EQ(read.graph.num_edges(), 2u);
  EXPECT_EQ(read.graph.edge(0), (Edge{0, 1, EdgeKind::Undirected}));

  std::istringstream dup("3\n0 1 0\n1 0 0\n");
  try {
    read_edge_list(dup);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  std::istringstream bad_kind("3\n0 1 2\n");
  EXPECT_THROW(read_edge_list(bad_kind), FormatError);
  std::istringstream range("3\n0 3 1\n");
  EXPECT_THROW(read_edge_list(range), FormatError);
  std::istringstream empty("# nothing\n");
  EXPECT_THROW(read_edge_list(empty), FormatError);
}

TEST(FeatureIo, RoundTripIsExact) {
  Rng rng(8);
  RealMatrix f(5, 3);
  for (auto& v : f.data()) v = rng.normal() * 1e3;
  f(0, 0) = 0.1;
  std::ostringstream out;
  write_features(out, f);
  std::istringstream in(out.str());
  EXPECT_EQ(read_features(in, 5), f);
  std::ostringstream again;
  write_features(again, f);
  EXPECT_EQ(out.str(), again.str());
}

TEST(FeatureIo, RejectsMalformedRows) {
  std::istringstream ragged("1,2\n3\n");
  EXPECT_THROW(read_features(ragged), FormatError);
  std::istringstream junk("1,abc\n");
  EXPECT_THROW(read_features(junk), FormatError);
  std::istringstream rows("1\n2\n");
  EXPECT_THROW(read_features(rows, 3), FormatError);
}

TEST(LabelIo, RoundTrip) {
  const std::vector<int> labels{0, 4, 2, 2, 1};
  std::ostringstream out;
  write_labels(out, labels);
  std::istringstream in(out.str());
  EXPECT_EQ(read_labels(in, 5), labels);
  std::istringstream neg("-1\n");
  EXPECT_THROW(read_labels(neg), FormatError);
}

TEST(Dataset, ValidateCatchesOverlapAndMissingClass) {
  Dataset d;
  d.graph = DirectedGraph(3, {});
  d.features = RealMatrix(3, 1);
  d.labels = {0, 1, 1};
  d.masks = {{true, true, false}, {false, false, true}, {false, false, false}};
  EXPECT_NO_THROW(d.validate());
  EXPECT_EQ(d.num_classes(), 2u);
  d.masks.val[0] = true;
  EXPECT_THROW(d.validate(), std::invalid_argument);
  d.masks.val[0] = false;
  d.masks.train[1] = false;
  EXPECT_THROW(d.validate(), std::invalid_argument);
}
