#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsheaf/train.hpp"

namespace dsheaf::cli {

/// Bad key, bad value or unreadable config file. Maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct KeySpec {
  const char* key;
  const char* fallback;
  const char* doc;
};

/// Every recognised key with its default, in echo order.
const std::vector<KeySpec>& known_keys();

/// Line-based `key = value` settings with '#' comments. Unknown keys are
/// rejected; every key always has a value.
class RunConfig {
public:
  RunConfig();

  static RunConfig parse(std::istream& in);
  static RunConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  [[nodiscard]] const std::string& raw(const std::string& key) const;

  [[nodiscard]] std::string text(const std::string& key) const { return raw(key); }
  [[nodiscard]] double real(const std::string& key) const;
  [[nodiscard]] std::uint64_t integer(const std::string& key) const;
  [[nodiscard]] bool flag(const std::string& key) const;

  /// Echo of all keys with their documentation, parseable by `parse`.
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

  // Typed views over groups of keys.
  [[nodiscard]] DsbmParams dsbm() const;
  [[nodiscard]] SplitFractions split() const;
  [[nodiscard]] ModelConfig model() const;
  [[nodiscard]] TrainOptions train() const;
  /// num_seeds run seeds derived from the top-level seed.
  [[nodiscard]] std::vector<std::uint64_t> run_seeds() const;

private:
  std::map<std::string, std::string> values_;
};

/// Shortest round-trip text for a double.
std::string format_double(double value);

}  // namespace dsheaf::cli
