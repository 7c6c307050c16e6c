#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli/commands.hpp"

using namespace dsheaf;
using namespace dsheaf::cli;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value settings file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "top-level seed (overrides the config)");
  app->add_option("--out", c.out, "output directory (overrides the config)");
  app->add_option("--set", c.overrides, "extra key=value override, repeatable");
}

RunConfig resolve(const Common& c) {
  RunConfig config = c.config.empty() ? RunConfig() : RunConfig::load(c.config);
  for (const std::string& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) config.set("seed", std::to_string(*c.seed));
  if (!c.out.empty()) config.set("out", c.out);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directed sheaf Laplacians and directed sheaf neural networks"};
  app.require_subcommand(1);

  Common common;
  std::optional<std::uint64_t> trials;
  bool flip_phase_sign = false;
  std::vector<std::filesystem::path> runs;

  auto* verify = app.add_subcommand("verify", "check the Laplacian invariants on random instances");
  add_common(verify, common);
  verify->add_option("--trials", trials, "random instances per suite");
  verify->add_flag("--flip-phase-sign", flip_phase_sign, "mutation check: build sheaves with -q")->group("");

  auto* dsbm = app.add_subcommand("dsbm", "generate a directed stochastic block model dataset");
  add_common(dsbm, common);
  auto* train = app.add_subcommand("train", "multi-seed training with early stopping");
  add_common(train, common);
  auto* grad = app.add_subcommand("grad-check", "compare analytic and finite-difference gradients");
  add_common(grad, common);
  auto* report = app.add_subcommand("report", "tabulate train run directories");
  report->add_option("runs", runs, "run directories")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*report) return cmd_report(runs, std::cout);
    RunConfig config = resolve(common);
    if (*verify) {
      if (trials) config.set("trials", std::to_string(*trials));
      return cmd_verify(config, std::cout, flip_phase_sign);
    }
    if (*dsbm) return cmd_dsbm(config, std::cout);
    if (*train) return cmd_train(config, std::cout);
    return cmd_grad_check(config, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "dsnn: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    std::cerr << "dsnn: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "dsnn: " << e.what() << "\n";
    return kCheckFailed;
  }
}
