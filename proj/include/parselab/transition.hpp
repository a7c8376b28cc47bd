#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "parselab/features.hpp"
#include "parselab/linear_model.hpp"
#include "parselab/treebank.hpp"

namespace parselab::transition {

enum class SystemId : std::uint8_t { ArcStandard = 1, ArcEager = 2, ArcHybrid = 3 };

std::string system_name(SystemId id);
SystemId system_from_name(const std::string& name);

enum class ActionKind : std::uint8_t { Shift = 0, LeftArc = 1, RightArc = 2, Reduce = 3 };

struct Action {
  ActionKind kind = ActionKind::Shift;
  std::string label;  // set iff arc-creating

  bool operator==(const Action&) const = default;
};

std::string action_id(const Action& a);        // stable string key, e.g. "LA:karta"
std::string action_kind_name(ActionKind k);

// Fixed tie order: Shift > LeftArc > RightArc > Reduce, then lexicographic label.
bool action_precedes(const Action& a, const Action& b);

// Stack/buffer state shared by the three systems. The buffer is always a
// suffix of the sentence, so it is stored as a start position.
struct ParserConfiguration {
  int n = 0;                       // sentence length
  std::vector<int> stack;          // bottom..top; stack[0] == 0
  int buffer_begin = 1;            // first unconsumed token; > n when empty
  std::vector<int> heads;          // per token 1..n, -1 when unattached
  std::vector<std::string> labels; // aligned with heads
  std::vector<std::vector<std::string>> child_labels;  // per node 0..n, attach order
  std::vector<int> left_valency;   // per node 0..n
  std::vector<int> right_valency;
  std::vector<Action> history;

  static ParserConfiguration initial(int n);

  bool buffer_empty() const { return buffer_begin > n; }
  int buffer_size() const { return n - buffer_begin + 1; }
  // k-th buffer item (0 = front) or -1.
  int buffer_at(int k) const {
    int v = buffer_begin + k;
    return v <= n ? v : -1;
  }
  // k-th stack item from the top (0 = top) or -1.
  int stack_at(int k) const {
    int i = static_cast<int>(stack.size()) - 1 - k;
    return i >= 0 ? stack[static_cast<std::size_t>(i)] : -1;
  }
  bool attached(int node) const { return heads[static_cast<std::size_t>(node - 1)] >= 0; }

  bool same_state(const ParserConfiguration& other) const {
    return stack == other.stack && buffer_begin == other.buffer_begin && heads == other.heads;
  }
};

bool is_terminal(SystemId sys, const ParserConfiguration& c);

// Action kinds whose preconditions hold; empty for terminal configurations.
std::vector<ActionKind> legal_actions(SystemId sys, const ParserConfiguration& c);
bool is_legal(SystemId sys, const ParserConfiguration& c, ActionKind kind);

ParserConfiguration apply_action(SystemId sys, const ParserConfiguration& c, const Action& a);

// Arc set of a (possibly terminal) configuration plus root fallback for
// anything left unattached.
treebank::DependencyTree finish_tree(const ParserConfiguration& c,
                                     const std::string& fallback_label = "root");

// Canonical next action of the gold derivation. Throws ValidationError when
// the gold tree is not derivable from this configuration (e.g. non-projective
// gold under a projective-only system).
Action static_oracle(SystemId sys, const ParserConfiguration& c,
                     const treebank::DependencyTree& gold);

// Full gold action sequence from the initial configuration.
std::vector<Action> oracle_actions(SystemId sys, const treebank::DependencyTree& gold);

// Number of gold arcs rendered unreachable by taking `kind` (arc-hybrid only;
// labels do not affect the unlabeled cost).
int dynamic_oracle_cost(const ParserConfiguration& c, const std::vector<int>& gold_heads,
                        ActionKind kind);

// Gold arcs still obtainable from c (built arcs that match gold plus
// reachable ones); n - this is the minimal completion loss.
int reachable_gold_arcs(const ParserConfiguration& c, const std::vector<int>& gold_heads);

// --- inference ---------------------------------------------------------------

struct ParseOptions {
  std::string fallback_label = "root";
  bool averaged = true;  // use averaged weights (finalized models)
};

// Candidate actions with labels filled in from the model inventory.
std::vector<Action> expand_actions(SystemId sys, const ParserConfiguration& c,
                                   const std::vector<std::string>& labels);

double score_action(const linear::LinearModel& model, const ParserConfiguration& c,
                    const treebank::Sentence& sentence, const Action& a,
                    const features::FeatureConfig& fcfg, bool averaged);

treebank::DependencyTree greedy_parse(const linear::LinearModel& model, SystemId sys,
                                      const treebank::Sentence& sentence,
                                      const ParseOptions& opts = {});

treebank::DependencyTree beam_parse(const linear::LinearModel& model, SystemId sys,
                                    const treebank::Sentence& sentence, int width,
                                    const ParseOptions& opts = {}, double* out_score = nullptr);

// --- training ----------------------------------------------------------------

enum class NonProjectivePolicy { Projectivize, Skip };

struct EarlyUpdateOptions {
  int epochs = 10;
  int beam_width = 8;
  int max_restarts = 3;
  std::uint64_t seed = 1;
  NonProjectivePolicy nonprojective = NonProjectivePolicy::Projectivize;
  features::FeatureConfig feature_config;
  const treebank::Corpus* dev = nullptr;  // per-epoch scores when provided
  std::ostream* log = nullptr;
};

// Generalized perceptron with beam search and early update.
linear::LinearModel train_early_update(const treebank::Corpus& corpus, SystemId sys,
                                       const EarlyUpdateOptions& opts);

}  // namespace parselab::transition
