#include "parselab/l2s.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "parselab/rng.hpp"

namespace parselab::l2s {

using transition::Action;
using transition::ActionKind;
using transition::ParserConfiguration;
using transition::SystemId;

namespace {
constexpr SystemId kSystem = SystemId::ArcHybrid;
}

int structured_loss(const treebank::DependencyTree& predicted,
                    const treebank::DependencyTree& gold, bool labeled) {
  if (predicted.size() != gold.size()) {
    throw ValidationError("structured_loss: length mismatch");
  }
  int loss = 0;
  for (int i = 1; i <= gold.size(); ++i) {
    if (predicted.head_of(i) != gold.head_of(i)) {
      ++loss;
    } else if (labeled && predicted.label_of(i) != gold.label_of(i)) {
      ++loss;
    }
  }
  return loss;
}

namespace {

// Label for an arc action from this configuration: the gold label when the
// created arc is a gold arc, otherwise the inventory front (deterministic
// fallback; the unlabeled loss does not depend on it).
std::string arc_label(const ParserConfiguration& c, ActionKind kind,
                      const treebank::DependencyTree& gold,
                      const std::vector<std::string>& labels) {
  int dep = c.stack_at(0);
  int head = kind == ActionKind::LeftArc ? c.buffer_at(0) : c.stack_at(1);
  if (dep >= 1 && gold.head_of(dep) == head) return gold.label_of(dep);
  return labels.empty() ? std::string("dep") : labels.front();
}

}  // namespace

Action reference_action(const ParserConfiguration& config, const treebank::DependencyTree& gold,
                        const std::vector<std::string>& labels) {
  auto kinds = transition::legal_actions(kSystem, config);
  int best_cost = 0;
  ActionKind best = ActionKind::Shift;
  bool first = true;
  for (ActionKind k : kinds) {  // legal_actions returns kinds in tie order
    int cost = transition::dynamic_oracle_cost(config, gold.heads, k);
    if (first || cost < best_cost) {
      best = k;
      best_cost = cost;
      first = false;
    }
  }
  if (first) throw ValidationError("reference_action on terminal configuration");
  if (best == ActionKind::Shift) return {ActionKind::Shift, ""};
  return {best, arc_label(config, best, gold, labels)};
}

namespace {

Action learned_action(const Policy& policy, const ParserConfiguration& c,
                      const treebank::Sentence& sentence) {
  auto actions = transition::expand_actions(kSystem, c, policy.model.labels());
  const Action* best = nullptr;
  double best_score = 0.0;
  for (const auto& a : actions) {
    double s = transition::score_action(policy.model, c, sentence, a,
                                        policy.model.feature_config(), /*averaged=*/false);
    if (best == nullptr || s > best_score) {
      best = &a;
      best_score = s;
    }
  }
  return *best;
}

treebank::DependencyTree complete_rollout(const Policy& policy, RolloutPolicy rollout,
                                          ParserConfiguration c,
                                          const treebank::Sentence& sentence,
                                          const treebank::DependencyTree& gold, Rng& rng) {
  while (!transition::is_terminal(kSystem, c)) {
    Action a;
    switch (rollout) {
      case RolloutPolicy::Reference:
        a = reference_action(c, gold, policy.model.labels());
        break;
      case RolloutPolicy::Learned:
        a = learned_action(policy, c, sentence);
        break;
      case RolloutPolicy::Mixture:
        a = rng.uniform_real() < policy.beta ? reference_action(c, gold, policy.model.labels())
                                             : learned_action(policy, c, sentence);
        break;
    }
    c = transition::apply_action(kSystem, c, a);
  }
  return transition::finish_tree(c);
}

}  // namespace

Trajectory rollin(const Policy& policy, const treebank::Sentence& sentence,
                  const treebank::DependencyTree& gold, std::uint64_t seed) {
  Rng rng(seed);
  Trajectory traj;
  ParserConfiguration c = ParserConfiguration::initial(sentence.size());
  while (!transition::is_terminal(kSystem, c)) {
    Action a = rng.uniform_real() < policy.beta
                   ? reference_action(c, gold, policy.model.labels())
                   : learned_action(policy, c, sentence);
    traj.steps.push_back({c, a});
    c = transition::apply_action(kSystem, c, a);
  }
  traj.tree = transition::finish_tree(c);
  return traj;
}

std::vector<ActionCost> deviation_costs(const ParserConfiguration& prefix, const Policy& policy,
                                        RolloutPolicy rollout, const treebank::Sentence& sentence,
                                        const treebank::DependencyTree& gold, bool labeled_loss,
                                        std::uint64_t seed) {
  std::vector<ActionCost> out;
  auto kinds = transition::legal_actions(kSystem, prefix);
  for (ActionKind k : kinds) {
    // Arc actions enumerate the gold-adjacent label plus one aggregate
    // alternative (the currently best-scoring other label); remaining labels
    // would all behave like the alternative, so branching stays bounded.
    std::vector<std::pair<Action, int>> candidates;  // action, extra label cost
    if (k == ActionKind::Shift) {
      candidates.emplace_back(Action{k, ""}, 0);
    } else {
      std::string gold_label = arc_label(prefix, k, gold, policy.model.labels());
      candidates.emplace_back(Action{k, gold_label}, 0);
      bool have_alt = false;
      Action alt;
      double alt_score = 0.0;
      for (const auto& l : policy.model.labels()) {
        if (l == gold_label) continue;
        Action cand{k, l};
        double s = transition::score_action(policy.model, prefix, sentence, cand,
                                            policy.model.feature_config(), false);
        if (!have_alt || s > alt_score) {
          alt = cand;
          alt_score = s;
          have_alt = true;
        }
      }
      if (have_alt) {
        // Wrong label on the deviation arc counts once; in labeled mode the
        // trajectory loss already charges it.
        candidates.emplace_back(alt, labeled_loss ? 0 : 1);
      }
    }
    for (const auto& [a, extra] : candidates) {
      Rng rng(seed);
      auto next = transition::apply_action(kSystem, prefix, a);
      auto tree = complete_rollout(policy, rollout, std::move(next), sentence, gold, rng);
      out.push_back({a, structured_loss(tree, gold, labeled_loss) + extra});
    }
  }
  return out;
}

double beta_schedule(const L2sOptions& opts, int pass) {
  return std::pow(opts.beta_decay, pass);
}

Policy train_l2s(const treebank::Corpus& corpus, const L2sOptions& opts) {
  std::vector<std::string> labels;
  for (const auto& s : corpus.sentences) {
    for (const auto& t : s.tokens) {
      if (!t.gold_label.empty() &&
          std::find(labels.begin(), labels.end(), t.gold_label) == labels.end()) {
        labels.push_back(t.gold_label);
      }
    }
  }
  std::sort(labels.begin(), labels.end());
  if (labels.empty()) labels.push_back("dep");

  Policy policy{linear::LinearModel(opts.feature_config, labels,
                                    static_cast<std::uint8_t>(kSystem)),
                1.0};

  // Gold trees, projectivized where necessary.
  std::vector<treebank::DependencyTree> gold(corpus.size());
  std::vector<bool> usable(corpus.size(), false);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    gold[i] = treebank::DependencyTree(corpus.sentences[i].gold_heads(),
                                       corpus.sentences[i].gold_labels());
    if (!treebank::is_projective(gold[i].heads)) {
      if (opts.nonprojective == transition::NonProjectivePolicy::Skip) continue;
      gold[i].heads = treebank::projectivize(gold[i].heads);
    }
    usable[i] = true;
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (usable[i]) order.push_back(i);
  }

  Rng rng(opts.seed);
  for (int pass = 0; pass < opts.passes; ++pass) {
    policy.beta = beta_schedule(opts, pass);
    rng.shuffle(order);
    for (std::size_t idx : order) {
      const auto& sentence = corpus.sentences[idx];
      if (sentence.size() == 0) continue;
      auto traj = rollin(policy, sentence, gold[idx], rng.next_u64());
      for (const auto& step : traj.steps) {
        if (opts.deviation_fraction < 1.0 && rng.uniform_real() >= opts.deviation_fraction) {
          continue;
        }
        auto costs = deviation_costs(step.config, policy, opts.rollout, sentence, gold[idx],
                                     opts.labeled_loss, rng.next_u64());
        if (costs.empty()) continue;
        // Best action: minimal cost, ties by the fixed action order.
        std::size_t best = 0;
        for (std::size_t j = 1; j < costs.size(); ++j) {
          if (costs[j].cost < costs[best].cost ||
              (costs[j].cost == costs[best].cost &&
               transition::action_precedes(costs[j].action, costs[best].action))) {
            best = j;
          }
        }
        // Cost-weighted one-against-best update: any costlier action that
        // scores at least as high as the best gets pushed below it.
        const auto& fcfg = policy.model.feature_config();
        auto best_fv = features::config_action_features(step.config, sentence,
                                                        action_id(costs[best].action), fcfg);
        double best_score = policy.model.score(best_fv, false);
        for (std::size_t j = 0; j < costs.size(); ++j) {
          if (j == best) continue;
          int delta = costs[j].cost - costs[best].cost;
          if (delta <= 0) continue;
          auto fv = features::config_action_features(step.config, sentence,
                                                     action_id(costs[j].action), fcfg);
          double s = policy.model.score(fv, false);
          if (s >= best_score) {
            policy.model.update(best_fv, static_cast<double>(delta));
            policy.model.update(fv, -static_cast<double>(delta));
          }
        }
        policy.model.tick();
      }
    }
    if (opts.dev != nullptr && opts.log != nullptr) {
      transition::ParseOptions popts;
      popts.averaged = false;
      long correct = 0, correct_lab = 0, total = 0;
      for (const auto& s : opts.dev->sentences) {
        auto tree = transition::greedy_parse(policy.model, kSystem, s, popts);
        for (int i = 1; i <= s.size(); ++i) {
          ++total;
          if (tree.head_of(i) == s.tok(i).gold_head) {
            ++correct;
            if (tree.label_of(i) == s.tok(i).gold_label) ++correct_lab;
          }
        }
      }
      *opts.log << "pass " << pass + 1 << " dev_uas "
                << (total > 0 ? static_cast<double>(correct) / total : 0.0) << " dev_las "
                << (total > 0 ? static_cast<double>(correct_lab) / total : 0.0) << "\n";
    }
  }
  policy.model.finalize_average();
  policy.model.extras()["l2s.beta_decay"] = std::to_string(opts.beta_decay);
  policy.model.extras()["l2s.passes"] = std::to_string(opts.passes);
  policy.beta = 0.0;
  return policy;
}

}  // namespace parselab::l2s
