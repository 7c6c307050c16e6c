#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "dsheaf/random.hpp"
#include "dsheaf/verify.hpp"

namespace dsheaf::cli {

namespace fs = std::filesystem;

namespace {

std::string printf_string(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

fs::path prepare_out(const RunConfig& config) {
  const fs::path dir = config.text("out");
  if (dir.empty()) throw ConfigError("out must not be empty");
  fs::create_directories(dir);
  config.save(dir / "config.txt");
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

Dataset file_dataset(const RunConfig& config) {
  if (config.text("labels").empty()) throw ConfigError("labels is required when edges is set");
  for (const char* key : {"edges", "features", "labels"}) {
    const std::string& path = config.text(key);
    if (!path.empty() && !fs::is_regular_file(path)) throw ConfigError(std::string(key) + ": no such file " + path);
  }
  Dataset data;
  data.graph = load_edge_list(config.text("edges"));
  const std::size_t n = data.graph.num_nodes();
  data.features = config.text("features").empty() ? degree_features(data.graph)
                                                  : load_features(config.text("features"), n);
  data.labels = load_labels(config.text("labels"), n);
  return data;
}

}  // namespace

int cmd_verify(const RunConfig& config, std::ostream& out, bool flip_phase_sign) {
  VerifyOptions opts;
  opts.seed = config.integer("seed");
  opts.trials = config.integer("trials");
  opts.max_nodes = config.integer("max_nodes");
  opts.flip_phase_sign = flip_phase_sign;
  if (opts.max_nodes < 2) throw ConfigError("max_nodes must be at least 2");

  std::size_t failed = 0;
  out << printf_string("%-16s %9s %12s %10s\n", "suite", "passed", "worst", "tolerance");
  for (const SuiteResult& r : run_sheaf_suites(opts)) {
    failed += !r.ok();
    out << printf_string("%-16s %4zu/%-4zu %12.3e %10.0e %s\n", r.name.c_str(), r.passed, r.total, r.worst,
                         r.tolerance, r.ok() ? "PASS" : "FAIL");
  }
  out << (failed == 0 ? "all suites pass\n" : std::to_string(failed) + " suite(s) failed\n");
  return failed == 0 ? kOk : kCheckFailed;
}

int cmd_dsbm(const RunConfig& config, std::ostream& out) {
  DsbmParams p = config.dsbm();
  p.seed = derive_seed(config.integer("seed"), "graph");
  const fs::path dir = prepare_out(config);
  const DirectedGraph g = dsbm_generate(p);
  save_edge_list(dir / "edges.txt", g);
  save_features(dir / "features.csv", degree_features(g));
  save_labels(dir / "labels.txt", dsbm_labels(p));
  out << "dsbm: " << g.num_nodes() << " nodes, " << g.num_edges() << " edges -> " << dir.string() << "\n";
  return kOk;
}

int cmd_train(const RunConfig& config, std::ostream& out) {
  ExperimentConfig ec;
  if (config.text("edges").empty()) {
    ec.dsbm = config.dsbm();
  } else {
    ec.dataset = file_dataset(config);
  }
  ec.split = config.split();
  ec.per_class = config.flag("per_class_split");
  ec.model = config.model();
  ec.train = config.train();
  const std::vector<std::uint64_t> seeds = config.run_seeds();
  // Surface split and data problems as configuration errors before training.
  try {
    (void)experiment_dataset(ec, seeds.front());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  const fs::path dir = prepare_out(config);
  const ExperimentSummary s = run_experiment(ec, seeds);
  std::ofstream summary = open_out(dir / "summary.txt");
  summary << "# run seed test_acc val_acc best_epoch epochs\n";
  for (std::size_t i = 0; i < s.runs.size(); ++i) {
    const SeedResult& r = s.runs[i];
    std::ofstream csv = open_out(dir / ("seed_" + std::to_string(i) + ".csv"));
    r.history.write_csv(csv);
    const std::string line = printf_string("%zu %llu %.17g %.17g %zu %zu", i, static_cast<unsigned long long>(r.seed),
                                           r.test_acc, r.val_acc, r.best_epoch, r.history.epochs.size());
    summary << line << "\n";
    out << printf_string("run %zu: test %.4f val %.4f best epoch %zu\n", i, r.test_acc, r.val_acc, r.best_epoch);
  }
  const std::string total = printf_string("%.4f±%.4f", s.mean, s.std);
  summary << total << "\n";
  out << "test accuracy " << total << "\n";
  return kOk;
}

int cmd_grad_check(const RunConfig& config, std::ostream& out) {
  ModelConfig mc = config.model();
  mc.hidden = config.integer("grad_hidden");
  mc.dropout = 0.0;
  mc.input_dim = 2;
  mc.num_classes = 3;
  const std::size_t n = config.integer("grad_nodes");
  const double step = config.real("grad_step");
  const double tolerance = config.real("grad_tolerance");
  if (n < 2) throw ConfigError("grad_nodes must be at least 2");
  if (mc.hidden == 0) throw ConfigError("grad_hidden must be at least 1");
  if (!(step > 0.0)) throw ConfigError("grad_step must be positive");

  Rng rng(derive_seed(config.integer("seed"), "grad-check"));
  const DirectedGraph g = random_graph(rng, n, 0.4, GraphShape::Mixed);
  RealMatrix x(n, mc.input_dim);
  for (auto& v : x.data()) v = rng.normal();
  std::vector<int> labels(n);
  for (std::size_t u = 0; u < n; ++u) labels[u] = static_cast<int>(u % mc.num_classes);
  const ModelParams params = init_params(mc, derive_seed(config.integer("seed"), "init"));

  const GradCheckReport r = grad_check(params, mc, g, x, labels, std::vector<bool>(n, true), step);
  const bool ok = r.worst_error <= tolerance;
  out << printf_string("grad-check: %zu entries, worst relative error %.3e at %s[%zu] (analytic %.6e, numeric %.6e) %s\n",
                       r.checked, r.worst_error, r.worst_param.c_str(), r.worst_index, r.analytic, r.numeric,
                       ok ? "PASS" : "FAIL");
  return ok ? kOk : kCheckFailed;
}

int cmd_report(const std::vector<fs::path>& runs, std::ostream& out) {
  if (runs.empty()) throw ConfigError("report needs at least one run directory");
  out << printf_string("%-24s %8s %-11s %3s %5s  %s\n", "run", "q", "map_class", "d", "seeds", "test_acc");
  for (const fs::path& dir : runs) {
    const RunConfig c = RunConfig::load(dir / "config.txt");
    std::ifstream in(dir / "summary.txt");
    if (!in) throw ConfigError("missing " + (dir / "summary.txt").string());
    std::string line, last;
    std::size_t seeds = 0;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (!last.empty()) ++seeds;
      last = line;
    }
    if (last.empty()) throw ConfigError("empty summary in " + dir.string());
    out << printf_string("%-24s %8s %-11s %3s %5zu  %s\n", dir.string().c_str(), c.text("q").c_str(),
                         c.text("map_class").c_str(), c.text("stalk_dim").c_str(), seeds, last.c_str());
  }
  return kOk;
}

}  // namespace dsheaf::cli
