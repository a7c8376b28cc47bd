#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "parselab/treebank.hpp"

namespace parselab::transition {
struct ParserConfiguration;
}

namespace parselab::features {

struct FeatureConfig {
  int hash_bits = 22;
  bool use_morph = true;
  bool free_word_order = true;

  std::uint64_t space_size() const { return std::uint64_t{1} << hash_bits; }
};

// Hashed sparse vector; duplicate indices are summed on finalize.
struct FeatureVector {
  std::vector<std::pair<std::uint64_t, double>> entries;

  void add(std::uint64_t index, double value = 1.0) { entries.emplace_back(index, value); }
  void finalize();

  bool operator==(const FeatureVector&) const = default;
};

// Template inventory documented in docs/feature_templates.md.

// Edge-factored features for a candidate arc head -> dep (head may be 0).
FeatureVector edge_features(const treebank::Sentence& sentence, int head, int dep,
                            const FeatureConfig& cfg);

// Label-conjoined edge features used by the arc labeler.
FeatureVector edge_label_features(const treebank::Sentence& sentence, int head, int dep,
                                  const std::string& label, const FeatureConfig& cfg);

// Configuration features for the transition parsers. Reads only surface
// fields and the already-built arc set, never gold annotations.
FeatureVector config_features(const transition::ParserConfiguration& config,
                              const treebank::Sentence& sentence, const FeatureConfig& cfg);

// The same features conjoined with an action id, for action-scoring models.
FeatureVector config_action_features(const transition::ParserConfiguration& config,
                                     const treebank::Sentence& sentence,
                                     const std::string& action_id, const FeatureConfig& cfg);

}  // namespace parselab::features
