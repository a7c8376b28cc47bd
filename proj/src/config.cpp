#include "parselab/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "parselab/errors.hpp"

namespace parselab::config {

namespace {

const std::map<std::string, std::string>& default_values() {
  static const std::map<std::string, std::string> defaults = {
      {"seed", "1"},
      {"jobs", "1"},
      {"feature.hash_bits", "22"},
      {"feature.use_morph", "true"},
      {"feature.free_word_order", "true"},
      {"graph.epochs", "10"},
      {"graph.decoder", "cle"},
      {"graph.loss", "margin"},
      {"graph.single_root", "false"},
      {"transition.epochs", "10"},
      {"transition.beam_width", "8"},
      {"transition.max_restarts", "3"},
      {"transition.nonprojective", "projectivize"},
      {"l2s.passes", "10"},
      {"l2s.beta_decay", "0.5"},
      {"l2s.deviation_fraction", "1.0"},
      {"l2s.rollout", "reference"},
      {"l2s.labeled_loss", "false"},
      {"biaff.word_dim", "100"},
      {"biaff.morph_dim", "25"},
      {"biaff.hidden", "100"},
      {"biaff.layers", "2"},
      {"biaff.use_morph", "true"},
      {"biaff.arc_dim", "100"},
      {"biaff.label_dim", "32"},
      {"biaff.lr", "0.002"},
      {"biaff.batch_size", "8"},
      {"biaff.epochs", "30"},
      {"biaff.mode", "test"},
      {"biaff.dropout", "0.33"},
      {"biaff.unk_prob", "0.25"},
      {"biaff.single_root", "false"},
      {"dcst.tagger_epochs", "30"},
      {"dcst.tagger_patience", "5"},
      {"dcst.dev_fraction", "0.1"},
      {"dcst.freeze_aux", "true"},
      {"eval.deplen_max", "9"},
      {"eval.nonproj_max", "3"},
      {"eval.rootdist_max", "6"},
  };
  return defaults;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

ExperimentConfig::ExperimentConfig() : values_(default_values()) {}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  return from_stream(in, path);
}

ExperimentConfig ExperimentConfig::from_stream(std::istream& in, const std::string& origin) {
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  cfg.apply_env_overrides();
  return cfg;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (!default_values().count(key)) throw UsageError("unknown config key '" + key + "'");
  values_[key] = value;
}

const std::string& ExperimentConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
  return it->second;
}

int ExperimentConfig::get_int(const std::string& key) const {
  try {
    return std::stoi(get(key));
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "' is not an integer: " + get(key));
  }
}

double ExperimentConfig::get_double(const std::string& key) const {
  try {
    return std::stod(get(key));
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "' is not a number: " + get(key));
  }
}

bool ExperimentConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("config key '" + key + "' is not a boolean: " + v);
}

std::uint64_t ExperimentConfig::seed() const {
  try {
    return std::stoull(get("seed"));
  } catch (const std::exception&) {
    throw UsageError("config key 'seed' is not an integer: " + get("seed"));
  }
}

void ExperimentConfig::apply_env_overrides() {
  if (const char* env = std::getenv("PARSELAB_SEED")) {
    values_["seed"] = env;
  }
}

std::string ExperimentConfig::dump() const {
  std::ostringstream ss;
  for (const auto& [k, v] : values_) ss << k << " = " << v << "\n";
  return ss.str();
}

}  // namespace parselab::config
