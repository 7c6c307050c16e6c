#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "dsheaf/graph.hpp"

namespace dsheaf {

namespace {

bool is_blank_or_comment(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

template <typename T>
bool parse_number(std::string_view tok, T& out) {
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_double(const std::string& tok, double& out) {
  // from_chars for double is unavailable on some toolchains; strtod is exact too.
  char* end = nullptr;
  out = std::strtod(tok.c_str(), &end);
  return !tok.empty() && end == tok.c_str() + tok.size();
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> toks;
  for (std::string t; ss >> t;) toks.push_back(t);
  return toks;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw FormatError("line " + std::to_string(line_no) + ": " + what);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

EdgeListRead read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t n = 0;
  bool have_n = false;
  std::vector<Edge> edges;
  // unordered pair -> edge index
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pairs;
  std::size_t merged = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    const auto toks = split_ws(line);
    if (!have_n) {
      if (toks.size() != 1 || !parse_number(toks[0], n) || n == 0) fail(line_no, "expected a positive node count");
      have_n = true;
      continue;
    }
    std::size_t u = 0, v = 0;
    int k = -1;
    if (toks.size() != 3 || !parse_number(toks[0], u) || !parse_number(toks[1], v) || !parse_number(toks[2], k) ||
        (k != 0 && k != 1)) {
      fail(line_no, "expected \"u v k\" with k in {0, 1}");
    }
    if (u >= n || v >= n) fail(line_no, "node index out of range");
    if (u == v) fail(line_no, "self-loop");

    const auto key = std::make_pair(std::min(u, v), std::max(u, v));
    const auto kind = k == 1 ? EdgeKind::Directed : EdgeKind::Undirected;
    if (auto it = pairs.find(key); it != pairs.end()) {
      Edge& prev = edges[it->second];
      const bool digon =
          prev.kind == EdgeKind::Directed && kind == EdgeKind::Directed && prev.u == v && prev.v == u;
      if (!digon) fail(line_no, "duplicate edge between " + std::to_string(u) + " and " + std::to_string(v));
      prev.kind = EdgeKind::Undirected;
      ++merged;
      continue;
    }
    pairs.emplace(key, edges.size());
    edges.push_back({u, v, kind});
  }
  if (!have_n) throw FormatError("edge list is missing the node count");
  if (merged > 0) {
    std::clog << "warning: merged " << merged << " reciprocal directed pair(s) into undirected edges\n";
  }
  return {DirectedGraph(n, std::move(edges)), merged};
}

void write_edge_list(std::ostream& out, const DirectedGraph& graph) {
  out << graph.num_nodes() << '\n';
  for (const auto& e : graph.edges()) {
    out << e.u << ' ' << e.v << ' ' << (e.kind == EdgeKind::Directed ? 1 : 0) << '\n';
  }
}

DirectedGraph load_edge_list(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_edge_list(in).graph;
}

void save_edge_list(const std::filesystem::path& path, const DirectedGraph& graph) {
  auto out = open_out(path);
  write_edge_list(out, graph);
}

RealMatrix read_features(std::istream& in, std::size_t expected_rows) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    std::size_t count = 0;
    std::stringstream ss(line);
    for (std::string tok; std::getline(ss, tok, ',');) {
      const auto b = tok.find_first_not_of(" \t\r");
      const auto e = tok.find_last_not_of(" \t\r");
      tok = b == std::string::npos ? std::string() : tok.substr(b, e - b + 1);
      double v = 0.0;
      if (!parse_double(tok, v) || !std::isfinite(v)) fail(line_no, "malformed numeric value '" + tok + "'");
      values.push_back(v);
      ++count;
    }
    if (rows == 0) cols = count;
    if (count != cols || cols == 0) fail(line_no, "inconsistent column count");
    ++rows;
  }
  if (expected_rows != 0 && rows != expected_rows) {
    throw FormatError("feature file has " + std::to_string(rows) + " rows, expected " + std::to_string(expected_rows));
  }
  return {rows, cols, std::move(values)};
}

void write_features(std::ostream& out, const RealMatrix& features) {
  for (std::size_t i = 0; i < features.rows(); ++i) {
    for (std::size_t j = 0; j < features.cols(); ++j) {
      if (j) out << ',';
      out << format_double(features(i, j));
    }
    out << '\n';
  }
}

RealMatrix load_features(const std::filesystem::path& path, std::size_t expected_rows) {
  auto in = open_in(path);
  return read_features(in, expected_rows);
}

void save_features(const std::filesystem::path& path, const RealMatrix& features) {
  auto out = open_out(path);
  write_features(out, features);
}

std::vector<int> read_labels(std::istream& in, std::size_t expected_rows) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    const auto toks = split_ws(line);
    int v = 0;
    if (toks.size() != 1 || !parse_number(toks[0], v) || v < 0) fail(line_no, "expected one non-negative integer");
    labels.push_back(v);
  }
  if (expected_rows != 0 && labels.size() != expected_rows) {
    throw FormatError("label file has " + std::to_string(labels.size()) + " rows, expected " +
                      std::to_string(expected_rows));
  }
  return labels;
}

void write_labels(std::ostream& out, const std::vector<int>& labels) {
  for (int l : labels) out << l << '\n';
}

std::vector<int> load_labels(const std::filesystem::path& path, std::size_t expected_rows) {
  auto in = open_in(path);
  return read_labels(in, expected_rows);
}

void save_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  auto out = open_out(path);
  write_labels(out, labels);
}

}  // namespace dsheaf
