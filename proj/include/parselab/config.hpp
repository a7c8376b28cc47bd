#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

namespace parselab::config {

// Flat key = value experiment configuration. Unknown keys are rejected; the
// PARSELAB_SEED environment variable overrides the seed.
class ExperimentConfig {
 public:
  ExperimentConfig();

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_stream(std::istream& in, const std::string& origin = "<stream>");

  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::uint64_t seed() const;

  void apply_env_overrides();

  // Every known key with its effective value, one per line.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace parselab::config
