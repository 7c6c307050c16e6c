#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

#include "dsheaf/random.hpp"

namespace dsheaf::cli {

const std::vector<KeySpec>& known_keys() {
  static const std::vector<KeySpec> keys{
      {"seed", "0", "top-level seed; every random stream derives from it"},
      {"out", "dsnn-out", "output directory"},
      {"trials", "100", "verify: random instances per suite"},
      {"max_nodes", "50", "verify: largest random graph"},
      {"nodes", "300", "dsbm: node count (a multiple of communities)"},
      {"communities", "5", "dsbm: number of equal-sized communities"},
      {"alpha_intra", "0.1", "dsbm: edge probability inside a community"},
      {"alpha_inter", "0.08", "dsbm: edge probability across communities"},
      {"beta", "0.2", "dsbm: probability of orienting C_i -> C_j for i < j"},
      {"edges", "", "train: edge-list file; empty means a fresh DSBM per seed"},
      {"features", "", "train: feature CSV; empty means degree features"},
      {"labels", "", "train: label file (required with edges)"},
      {"train_fraction", "0.8", "split fraction for training"},
      {"val_fraction", "0.05", "split fraction for validation"},
      {"test_fraction", "0.15", "split fraction for testing"},
      {"per_class_split", "true", "split each class separately"},
      {"layers", "2", "diffusion layers"},
      {"stalk_dim", "2", "stalk dimension d"},
      {"q", "0.25", "phase parameter"},
      {"hidden", "8", "feature channels per stalk dimension"},
      {"map_class", "diagonal", "diagonal | orthogonal | general"},
      {"sheaf_act", "tanh", "Φ output activation: tanh | elu | relu"},
      {"activation", "complex_relu", "diffusion nonlinearity: complex_relu | identity"},
      {"recompute_maps", "per_layer", "per_layer | once"},
      {"phi_hidden", "16", "hidden width of Φ"},
      {"dropout", "0", "dropout on the input and output features"},
      {"lr", "0.01", "Adam learning rate"},
      {"max_epochs", "1000", "epoch budget"},
      {"patience", "200", "epochs without validation improvement before stopping"},
      {"num_seeds", "5", "train: independent runs"},
      {"grad_nodes", "8", "grad-check: graph size"},
      {"grad_hidden", "3", "grad-check: channels per stalk dimension"},
      {"grad_step", "1e-5", "grad-check: central difference step"},
      {"grad_tolerance", "1e-4", "grad-check: largest accepted relative error"},
  };
  return keys;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <class T>
T choose(const std::string& key, const std::string& value, std::initializer_list<std::pair<const char*, T>> options) {
  for (const auto& [name, v] : options)
    if (value == name) return v;
  std::string names;
  for (const auto& [name, v] : options) names += std::string(names.empty() ? "" : ", ") + name;
  throw ConfigError(key + ": expected one of " + names + ", got '" + value + "'");
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, r.ptr);
}

RunConfig::RunConfig() {
  for (const auto& k : known_keys()) values_[k.key] = k.fallback;
}

RunConfig RunConfig::parse(std::istream& in) {
  RunConfig c;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    try {
      c.set(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(number) + ": " + e.what());
    }
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  return parse(in);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
  it->second = value;
}

const std::string& RunConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
  return it->second;
}

double RunConfig::real(const std::string& key) const {
  const std::string& v = raw(key);
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(key + ": not a number: '" + v + "'");
  return out;
}

std::uint64_t RunConfig::integer(const std::string& key) const {
  const std::string& v = raw(key);
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ConfigError(key + ": not a non-negative integer: '" + v + "'");
  }
  return out;
}

bool RunConfig::flag(const std::string& key) const {
  return choose<bool>(key, raw(key), {{"true", true}, {"false", false}});
}

void RunConfig::write(std::ostream& out) const {
  for (const auto& k : known_keys()) out << "# " << k.doc << "\n" << k.key << " = " << raw(k.key) << "\n";
}

void RunConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write(out);
}

DsbmParams RunConfig::dsbm() const {
  DsbmParams p = DsbmParams::uniform(integer("nodes"), integer("communities"), real("alpha_intra"),
                                     real("alpha_inter"), real("beta"), integer("seed"));
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

SplitFractions RunConfig::split() const {
  return {real("train_fraction"), real("val_fraction"), real("test_fraction")};
}

ModelConfig RunConfig::model() const {
  ModelConfig m;
  m.num_layers = integer("layers");
  m.d = integer("stalk_dim");
  m.q = real("q");
  m.hidden = integer("hidden");
  m.map_class = choose<MapClass>("map_class", raw("map_class"),
                                 {{"diagonal", MapClass::Diagonal},
                                  {"orthogonal", MapClass::Orthogonal},
                                  {"general", MapClass::General}});
  m.sheaf_act = choose<SheafAct>("sheaf_act", raw("sheaf_act"),
                                 {{"tanh", SheafAct::Tanh}, {"elu", SheafAct::Elu}, {"relu", SheafAct::Relu}});
  m.activation = choose<Activation>("activation", raw("activation"),
                                    {{"complex_relu", Activation::ComplexRelu}, {"identity", Activation::Identity}});
  m.recompute_maps = choose<RecomputeMaps>("recompute_maps", raw("recompute_maps"),
                                           {{"per_layer", RecomputeMaps::PerLayer}, {"once", RecomputeMaps::Once}});
  m.phi_hidden = integer("phi_hidden");
  m.dropout = real("dropout");
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return m;
}

TrainOptions RunConfig::train() const {
  TrainOptions t;
  t.lr = real("lr");
  t.max_epochs = integer("max_epochs");
  t.patience = integer("patience");
  t.seed = integer("seed");
  if (!(t.lr > 0.0)) throw ConfigError("lr must be positive");
  if (t.patience == 0) throw ConfigError("patience must be at least 1");
  return t;
}

std::vector<std::uint64_t> RunConfig::run_seeds() const {
  const std::uint64_t count = integer("num_seeds");
  if (count == 0) throw ConfigError("num_seeds must be at least 1");
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < count; ++i) seeds.push_back(derive_seed(integer("seed"), "run", i));
  return seeds;
}

}  // namespace dsheaf::cli
