#pragma once

#include <cstdint>
#include <vector>

#include "parselab/linear_model.hpp"
#include "parselab/transition.hpp"
#include "parselab/treebank.hpp"

namespace parselab::l2s {

enum class RolloutPolicy { Reference, Learned, Mixture };

// Arc-hybrid policy: a linear model over configuration features conjoined
// with actions, plus the reference-mixing parameter used during roll-in.
struct Policy {
  linear::LinearModel model;
  double beta = 1.0;  // probability of taking the reference action
};

struct Step {
  transition::ParserConfiguration config;  // state before the action
  transition::Action action;
};

struct Trajectory {
  std::vector<Step> steps;
  treebank::DependencyTree tree;
};

// Unlabeled attachment errors; the labeled variant also counts label
// mismatches on correct heads.
int structured_loss(const treebank::DependencyTree& predicted,
                    const treebank::DependencyTree& gold, bool labeled = false);

// A zero-cost action per the dynamic oracle, ties by the fixed action order.
// Arc actions take the gold label when the created arc is a gold arc.
transition::Action reference_action(const transition::ParserConfiguration& config,
                                    const treebank::DependencyTree& gold,
                                    const std::vector<std::string>& labels);

// One trajectory under the beta-mixture of reference and learned policies.
Trajectory rollin(const Policy& policy, const treebank::Sentence& sentence,
                  const treebank::DependencyTree& gold, std::uint64_t seed);

struct ActionCost {
  transition::Action action;
  int cost = 0;
};

// For each candidate action at `prefix`: apply it, complete under the
// roll-out policy, and report the trajectory-level structured loss.
std::vector<ActionCost> deviation_costs(const transition::ParserConfiguration& prefix,
                                        const Policy& policy, RolloutPolicy rollout,
                                        const treebank::Sentence& sentence,
                                        const treebank::DependencyTree& gold,
                                        bool labeled_loss, std::uint64_t seed);

struct L2sOptions {
  int passes = 10;
  double beta_decay = 0.5;          // beta(pass) = beta_decay^pass
  double deviation_fraction = 1.0;  // fraction of time steps to deviate at
  RolloutPolicy rollout = RolloutPolicy::Reference;
  bool labeled_loss = false;
  std::uint64_t seed = 1;
  transition::NonProjectivePolicy nonprojective =
      transition::NonProjectivePolicy::Projectivize;
  features::FeatureConfig feature_config;
  const treebank::Corpus* dev = nullptr;  // per-epoch scores when provided
  std::ostream* log = nullptr;
};

double beta_schedule(const L2sOptions& opts, int pass);

Policy train_l2s(const treebank::Corpus& corpus, const L2sOptions& opts);

}  // namespace parselab::l2s
