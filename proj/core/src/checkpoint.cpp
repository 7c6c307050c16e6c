#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "dsheaf/nn.hpp"

namespace dsheaf {

void save_checkpoint(std::ostream& out, const ModelParams& params) {
  char buf[32];
  for_each_param(params, [&](const std::string& name, const RealMatrix& m) {
    out << name << ' ' << m.rows() << ' ' << m.cols();
    for (double v : m.data()) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ' ' << buf;
    }
    out << '\n';
  });
  if (!out) throw std::runtime_error("save_checkpoint: write failed");
}

void load_checkpoint(std::istream& in, ModelParams& params) {
  std::size_t line_no = 0;
  for_each_param(params, [&](const std::string& name, RealMatrix& m) {
    std::string line;
    do {
      if (!std::getline(in, line)) throw FormatError("checkpoint: missing parameter " + name);
      ++line_no;
    } while (line.empty());
    std::istringstream ls(line);
    std::string got;
    std::size_t rows = 0;
    std::size_t cols = 0;
    if (!(ls >> got >> rows >> cols)) throw FormatError("checkpoint line " + std::to_string(line_no) + ": bad header");
    if (got != name) throw FormatError("checkpoint line " + std::to_string(line_no) + ": expected " + name + ", got " + got);
    if (rows != m.rows() || cols != m.cols()) {
      throw FormatError("checkpoint line " + std::to_string(line_no) + ": shape mismatch for " + name);
    }
    std::vector<double> values(rows * cols);
    for (auto& v : values) {
      std::string tok;
      if (!(ls >> tok)) throw FormatError("checkpoint line " + std::to_string(line_no) + ": too few values");
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        throw FormatError("checkpoint line " + std::to_string(line_no) + ": bad number '" + tok + "'");
      }
    }
    std::string extra;
    if (ls >> extra) throw FormatError("checkpoint line " + std::to_string(line_no) + ": too many values");
    try {
      m = RealMatrix(rows, cols, std::move(values));
    } catch (const std::invalid_argument& e) {
      throw FormatError("checkpoint line " + std::to_string(line_no) + ": " + e.what());
    }
  });
}

}  // namespace dsheaf
