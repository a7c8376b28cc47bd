#include "parselab/transition.hpp"

#include <algorithm>
#include <ostream>

#include "parselab/rng.hpp"

namespace parselab::transition {

std::string system_name(SystemId id) {
  switch (id) {
    case SystemId::ArcStandard: return "arcstandard";
    case SystemId::ArcEager: return "arceager";
    case SystemId::ArcHybrid: return "archybrid";
  }
  return "?";
}

SystemId system_from_name(const std::string& name) {
  if (name == "arcstandard" || name == "arc-standard") return SystemId::ArcStandard;
  if (name == "arceager" || name == "arc-eager") return SystemId::ArcEager;
  if (name == "archybrid" || name == "arc-hybrid") return SystemId::ArcHybrid;
  throw UsageError("unknown transition system '" + name + "'");
}

std::string action_kind_name(ActionKind k) {
  switch (k) {
    case ActionKind::Shift: return "SH";
    case ActionKind::LeftArc: return "LA";
    case ActionKind::RightArc: return "RA";
    case ActionKind::Reduce: return "RE";
  }
  return "?";
}

std::string action_id(const Action& a) {
  std::string id = action_kind_name(a.kind);
  if (!a.label.empty()) {
    id += ':';
    id += a.label;
  }
  return id;
}

bool action_precedes(const Action& a, const Action& b) {
  if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  return a.label < b.label;
}

ParserConfiguration ParserConfiguration::initial(int n) {
  ParserConfiguration c;
  c.n = n;
  c.stack = {0};
  c.buffer_begin = 1;
  c.heads.assign(static_cast<std::size_t>(n), -1);
  c.labels.assign(static_cast<std::size_t>(n), "");
  c.child_labels.assign(static_cast<std::size_t>(n) + 1, {});
  c.left_valency.assign(static_cast<std::size_t>(n) + 1, 0);
  c.right_valency.assign(static_cast<std::size_t>(n) + 1, 0);
  return c;
}

bool is_terminal(SystemId sys, const ParserConfiguration& c) {
  if (!c.buffer_empty()) return false;
  if (sys == SystemId::ArcEager) return true;
  return c.stack.size() == 1;
}

bool is_legal(SystemId sys, const ParserConfiguration& c, ActionKind kind) {
  const int s0 = c.stack_at(0);
  switch (sys) {
    case SystemId::ArcStandard:
      switch (kind) {
        case ActionKind::Shift:
          return !c.buffer_empty();
        case ActionKind::LeftArc:
          // head s0, dependent s1; the root never takes a head.
          return c.stack.size() >= 2 && c.stack_at(1) != 0;
        case ActionKind::RightArc:
          return c.stack.size() >= 2;
        case ActionKind::Reduce:
          return false;
      }
      break;
    case SystemId::ArcEager:
      switch (kind) {
        case ActionKind::Shift:
          return !c.buffer_empty();
        case ActionKind::LeftArc:
          return !c.buffer_empty() && s0 > 0 && !c.attached(s0);
        case ActionKind::RightArc:
          return !c.buffer_empty();
        case ActionKind::Reduce:
          return s0 > 0 && c.attached(s0);
      }
      break;
    case SystemId::ArcHybrid:
      switch (kind) {
        case ActionKind::Shift:
          return !c.buffer_empty();
        case ActionKind::LeftArc:
          return !c.buffer_empty() && s0 > 0;
        case ActionKind::RightArc:
          return c.stack.size() >= 2 && s0 > 0;
        case ActionKind::Reduce:
          return false;
      }
      break;
  }
  return false;
}

std::vector<ActionKind> legal_actions(SystemId sys, const ParserConfiguration& c) {
  std::vector<ActionKind> kinds;
  if (is_terminal(sys, c)) return kinds;
  for (ActionKind k : {ActionKind::Shift, ActionKind::LeftArc, ActionKind::RightArc,
                       ActionKind::Reduce}) {
    if (is_legal(sys, c, k)) kinds.push_back(k);
  }
  return kinds;
}

namespace {

void add_arc(ParserConfiguration& c, int head, int dep, const std::string& label) {
  c.heads[static_cast<std::size_t>(dep - 1)] = head;
  c.labels[static_cast<std::size_t>(dep - 1)] = label;
  c.child_labels[static_cast<std::size_t>(head)].push_back(label);
  if (dep < head) {
    ++c.left_valency[static_cast<std::size_t>(head)];
  } else {
    ++c.right_valency[static_cast<std::size_t>(head)];
  }
}

}  // namespace

ParserConfiguration apply_action(SystemId sys, const ParserConfiguration& c, const Action& a) {
  if (!is_legal(sys, c, a.kind)) {
    throw ValidationError("illegal action " + action_id(a) + " in " + system_name(sys) +
                          " configuration");
  }
  ParserConfiguration next = c;
  next.history.push_back(a);
  const int s0 = c.stack_at(0), s1 = c.stack_at(1), b0 = c.buffer_at(0);
  switch (a.kind) {
    case ActionKind::Shift:
      next.stack.push_back(b0);
      ++next.buffer_begin;
      break;
    case ActionKind::LeftArc:
      if (sys == SystemId::ArcStandard) {
        // s0 -> s1, remove s1.
        add_arc(next, s0, s1, a.label);
        next.stack.erase(next.stack.end() - 2);
      } else {
        // b0 -> s0, pop s0 (arc-eager and arc-hybrid share this form).
        add_arc(next, b0, s0, a.label);
        next.stack.pop_back();
      }
      break;
    case ActionKind::RightArc:
      if (sys == SystemId::ArcEager) {
        // s0 -> b0, push b0.
        add_arc(next, s0, b0, a.label);
        next.stack.push_back(b0);
        ++next.buffer_begin;
      } else {
        // s1 -> s0, pop s0.
        add_arc(next, s1, s0, a.label);
        next.stack.pop_back();
      }
      break;
    case ActionKind::Reduce:
      next.stack.pop_back();
      break;
  }
  return next;
}

treebank::DependencyTree finish_tree(const ParserConfiguration& c,
                                     const std::string& fallback_label) {
  treebank::DependencyTree tree;
  tree.heads = c.heads;
  tree.labels = c.labels;
  for (int i = 1; i <= c.n; ++i) {
    if (tree.heads[static_cast<std::size_t>(i - 1)] < 0) {
      tree.heads[static_cast<std::size_t>(i - 1)] = 0;
      tree.labels[static_cast<std::size_t>(i - 1)] = fallback_label;
    }
  }
  return tree;
}

namespace {

// True when every gold dependent of `node` is already attached in c.
bool gold_deps_done(const ParserConfiguration& c, const treebank::DependencyTree& gold,
                    int node) {
  for (int d = 1; d <= c.n; ++d) {
    if (gold.head_of(d) == node && c.heads[static_cast<std::size_t>(d - 1)] < 0) return false;
  }
  return true;
}

}  // namespace

Action static_oracle(SystemId sys, const ParserConfiguration& c,
                     const treebank::DependencyTree& gold) {
  const int s0 = c.stack_at(0), s1 = c.stack_at(1), b0 = c.buffer_at(0);
  auto label_of = [&](int dep) { return gold.label_of(dep); };
  switch (sys) {
    case SystemId::ArcStandard:
      if (s1 > 0 && gold.head_of(s1) == s0 && gold_deps_done(c, gold, s1)) {
        return {ActionKind::LeftArc, label_of(s1)};
      }
      if (s1 >= 0 && s0 > 0 && gold.head_of(s0) == s1 && gold_deps_done(c, gold, s0)) {
        return {ActionKind::RightArc, label_of(s0)};
      }
      if (!c.buffer_empty()) return {ActionKind::Shift, ""};
      break;
    case SystemId::ArcEager:
      if (b0 >= 1 && s0 > 0 && !c.attached(s0) && gold.head_of(s0) == b0) {
        return {ActionKind::LeftArc, label_of(s0)};
      }
      if (b0 >= 1 && s0 >= 0 && gold.head_of(b0) == s0) {
        return {ActionKind::RightArc, label_of(b0)};
      }
      if (b0 >= 1 && s0 > 0 && c.attached(s0)) {
        // Reduce only when b0 still needs something below s0.
        for (std::size_t i = 0; i + 1 < c.stack.size(); ++i) {
          int k = c.stack[i];
          if (gold.head_of(b0) == k || (k > 0 && gold.head_of(k) == b0)) {
            return {ActionKind::Reduce, ""};
          }
        }
      }
      if (!c.buffer_empty()) return {ActionKind::Shift, ""};
      break;
    case SystemId::ArcHybrid:
      // Arc-hybrid has an exact cost function, so the canonical derivation
      // is the first zero-cost action in the fixed tie order; this keeps the
      // static oracle and the dynamic-oracle reference policy identical on
      // the gold path.
      for (ActionKind kind : legal_actions(sys, c)) {
        if (dynamic_oracle_cost(c, gold.heads, kind) == 0) {
          if (kind == ActionKind::Shift) return {ActionKind::Shift, ""};
          return {kind, label_of(s0)};
        }
      }
      break;
  }
  throw ValidationError("gold tree not derivable from configuration (non-projective input?)");
}

std::vector<Action> oracle_actions(SystemId sys, const treebank::DependencyTree& gold) {
  std::vector<Action> actions;
  ParserConfiguration c = ParserConfiguration::initial(gold.size());
  while (!is_terminal(sys, c)) {
    Action a = static_oracle(sys, c, gold);
    actions.push_back(a);
    c = apply_action(sys, c, a);
  }
  // A correct derivation leaves nothing unattached except under arc-eager
  // root fallback; verify the result matches gold.
  auto tree = finish_tree(c);
  for (int i = 1; i <= gold.size(); ++i) {
    if (tree.head_of(i) != gold.head_of(i)) {
      throw ValidationError("gold tree not derivable (non-projective input?)");
    }
  }
  return actions;
}

int reachable_gold_arcs(const ParserConfiguration& c, const std::vector<int>& gold_heads) {
  // Arc-hybrid reachability: for unattached d, the head can still be
  //   - any buffer item (via LeftArc once it reaches the front), or
  //   - the element directly below d when d is on the stack, or
  //   - any stack item when d is in the buffer (d will sit directly above it
  //     after enough pops/pushes).
  int count = 0;
  const int n = c.n;
  std::vector<int> pos(static_cast<std::size_t>(n) + 1, 0);  // 0 unknown, 1 stack, 2 buffer
  std::vector<int> below(static_cast<std::size_t>(n) + 1, -1);
  for (std::size_t i = 0; i < c.stack.size(); ++i) {
    pos[static_cast<std::size_t>(c.stack[i])] = 1;
    below[static_cast<std::size_t>(c.stack[i])] = i > 0 ? c.stack[i - 1] : -1;
  }
  for (int b = c.buffer_begin; b <= n; ++b) pos[static_cast<std::size_t>(b)] = 2;
  for (int d = 1; d <= n; ++d) {
    int gh = gold_heads[static_cast<std::size_t>(d - 1)];
    if (c.heads[static_cast<std::size_t>(d - 1)] >= 0) {
      if (c.heads[static_cast<std::size_t>(d - 1)] == gh) ++count;
      continue;
    }
    if (pos[static_cast<std::size_t>(d)] == 2) {
      // d in buffer: head may be anything in the buffer or on the stack.
      if (gh == 0 || pos[static_cast<std::size_t>(gh)] != 0) ++count;
    } else {
      // d on stack: head must be a buffer item or the element directly below.
      if (gh >= 1 && pos[static_cast<std::size_t>(gh)] == 2) {
        ++count;
      } else if (below[static_cast<std::size_t>(d)] == gh) {
        ++count;
      }
    }
  }
  return count;
}

int dynamic_oracle_cost(const ParserConfiguration& c, const std::vector<int>& gold_heads,
                        ActionKind kind) {
  const int s0 = c.stack_at(0), s1 = c.stack_at(1), b0 = c.buffer_at(0);
  auto gold_head = [&](int d) { return gold_heads[static_cast<std::size_t>(d - 1)]; };
  int cost = 0;
  switch (kind) {
    case ActionKind::Shift: {
      // b0 leaves the buffer: loses deps of b0 on the stack and a head of b0
      // on the stack other than s0 (the root counts as a stack item).
      for (int k : c.stack) {
        if (k > 0 && gold_head(k) == b0) ++cost;
      }
      int gh = gold_head(b0);
      if (gh != s0 &&
          std::find(c.stack.begin(), c.stack.end(), gh) != c.stack.end()) {
        ++cost;
      }
      break;
    }
    case ActionKind::LeftArc: {
      // s0 is attached to b0 and removed: loses a head of s0 in {s1} or the
      // buffer behind b0, and any deps of s0 still in the buffer.
      int gh = gold_head(s0);
      if (gh == s1 && s1 >= 0) {
        ++cost;
      } else if (gh >= 1 && gh > b0 && gh >= c.buffer_begin) {
        ++cost;
      }
      for (int d = c.buffer_begin; d <= c.n; ++d) {
        if (gold_head(d) == s0) ++cost;
      }
      break;
    }
    case ActionKind::RightArc: {
      // s0 is attached to s1 and removed: loses a head of s0 in the buffer
      // and any deps of s0 still in the buffer.
      int gh = gold_head(s0);
      if (gh >= c.buffer_begin && gh <= c.n) ++cost;
      for (int d = c.buffer_begin; d <= c.n; ++d) {
        if (gold_head(d) == s0) ++cost;
      }
      break;
    }
    case ActionKind::Reduce:
      throw ValidationError("dynamic oracle is defined for arc-hybrid only");
  }
  return cost;
}

// --- inference ---------------------------------------------------------------

std::vector<Action> expand_actions(SystemId sys, const ParserConfiguration& c,
                                   const std::vector<std::string>& labels) {
  std::vector<Action> out;
  for (ActionKind kind : legal_actions(sys, c)) {
    if (kind == ActionKind::Shift || kind == ActionKind::Reduce) {
      out.push_back({kind, ""});
    } else {
      for (const auto& l : labels) out.push_back({kind, l});
    }
  }
  std::sort(out.begin(), out.end(), action_precedes);
  return out;
}

double score_action(const linear::LinearModel& model, const ParserConfiguration& c,
                    const treebank::Sentence& sentence, const Action& a,
                    const features::FeatureConfig& fcfg, bool averaged) {
  auto fv = features::config_action_features(c, sentence, action_id(a), fcfg);
  return model.score(fv, averaged);
}

treebank::DependencyTree greedy_parse(const linear::LinearModel& model, SystemId sys,
                                      const treebank::Sentence& sentence,
                                      const ParseOptions& opts) {
  ParserConfiguration c = ParserConfiguration::initial(sentence.size());
  const auto& fcfg = model.feature_config();
  while (!is_terminal(sys, c)) {
    auto actions = expand_actions(sys, c, model.labels());
    // expand_actions returns them in tie order, so strict > keeps the first
    // best.
    const Action* best = nullptr;
    double best_score = 0.0;
    for (const auto& a : actions) {
      double s = score_action(model, c, sentence, a, fcfg, opts.averaged);
      if (best == nullptr || s > best_score) {
        best = &a;
        best_score = s;
      }
    }
    c = apply_action(sys, c, *best);
  }
  return finish_tree(c, opts.fallback_label);
}

namespace {

struct BeamItem {
  ParserConfiguration config;
  double score = 0.0;
  features::FeatureVector accum;  // sum of action features along the prefix
  bool is_gold = true;
};

void append_features(features::FeatureVector& accum, const features::FeatureVector& fv) {
  for (const auto& e : fv.entries) accum.entries.push_back(e);
}

struct BeamStepResult {
  std::vector<BeamItem> beam;
};

// One beam step; keeps at most `width` successors ordered by score with
// deterministic ties (insertion order follows the parent order and the fixed
// action order).
std::vector<BeamItem> beam_step(const linear::LinearModel& model, SystemId sys,
                                const treebank::Sentence& sentence,
                                const std::vector<BeamItem>& beam, int width,
                                const std::vector<Action>* gold_actions, std::size_t step,
                                bool averaged) {
  const auto& fcfg = model.feature_config();
  std::vector<BeamItem> candidates;
  for (const auto& item : beam) {
    if (is_terminal(sys, item.config)) {
      candidates.push_back(item);
      continue;
    }
    for (const auto& a : expand_actions(sys, item.config, model.labels())) {
      auto fv = features::config_action_features(item.config, sentence, action_id(a), fcfg);
      BeamItem next;
      next.config = apply_action(sys, item.config, a);
      next.score = item.score + model.score(fv, averaged);
      next.accum = item.accum;
      append_features(next.accum, fv);
      next.is_gold = item.is_gold && gold_actions != nullptr && step < gold_actions->size() &&
                     (*gold_actions)[step] == a;
      candidates.push_back(std::move(next));
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const BeamItem& a, const BeamItem& b) { return a.score > b.score; });
  if (static_cast<int>(candidates.size()) > width) candidates.resize(static_cast<std::size_t>(width));
  return candidates;
}

bool all_terminal(SystemId sys, const std::vector<BeamItem>& beam) {
  return std::all_of(beam.begin(), beam.end(),
                     [&](const BeamItem& it) { return is_terminal(sys, it.config); });
}

}  // namespace

treebank::DependencyTree beam_parse(const linear::LinearModel& model, SystemId sys,
                                    const treebank::Sentence& sentence, int width,
                                    const ParseOptions& opts, double* out_score) {
  if (width < 1) throw UsageError("beam width must be >= 1");
  std::vector<BeamItem> beam;
  BeamItem init;
  init.config = ParserConfiguration::initial(sentence.size());
  beam.push_back(std::move(init));
  std::size_t step = 0;
  while (!all_terminal(sys, beam)) {
    beam = beam_step(model, sys, sentence, beam, width, nullptr, step++, opts.averaged);
  }
  if (out_score != nullptr) *out_score = beam.front().score;
  return finish_tree(beam.front().config, opts.fallback_label);
}

linear::LinearModel train_early_update(const treebank::Corpus& corpus, SystemId sys,
                                       const EarlyUpdateOptions& opts) {
  // Label inventory from the training corpus.
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

  linear::LinearModel model(opts.feature_config, labels, static_cast<std::uint8_t>(sys));

  // Precompute gold action sequences (projectivizing or skipping).
  std::vector<std::vector<Action>> gold_seqs(corpus.size());
  std::vector<bool> usable(corpus.size(), false);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    treebank::DependencyTree gold(corpus.sentences[i].gold_heads(),
                                  corpus.sentences[i].gold_labels());
    if (!treebank::is_projective(gold.heads)) {
      if (opts.nonprojective == NonProjectivePolicy::Skip) continue;
      gold.heads = treebank::projectivize(gold.heads);
    }
    gold_seqs[i] = oracle_actions(sys, gold);
    usable[i] = true;
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (usable[i]) order.push_back(i);
  }

  Rng rng(opts.seed);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      const auto& sentence = corpus.sentences[idx];
      const auto& gold_actions = gold_seqs[idx];
      for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
        std::vector<BeamItem> beam;
        BeamItem init;
        init.config = ParserConfiguration::initial(sentence.size());
        beam.push_back(std::move(init));
        features::FeatureVector gold_accum;
        ParserConfiguration gold_config = ParserConfiguration::initial(sentence.size());
        bool early = false;
        std::size_t step = 0;
        while (!all_terminal(sys, beam)) {
          beam = beam_step(model, sys, sentence, beam, opts.beam_width, &gold_actions, step,
                           /*averaged=*/false);
          if (step < gold_actions.size()) {
            const Action& ga = gold_actions[step];
            auto gfv = features::config_action_features(gold_config, sentence, action_id(ga),
                                                        model.feature_config());
            append_features(gold_accum, gfv);
            gold_config = apply_action(sys, gold_config, ga);
          }
          ++step;
          bool gold_alive = std::any_of(beam.begin(), beam.end(),
                                        [](const BeamItem& it) { return it.is_gold; });
          if (!gold_alive) {
            // Early update against the current best prefix, then restart.
            features::FeatureVector pos = gold_accum;
            pos.finalize();
            features::FeatureVector neg = beam.front().accum;
            neg.finalize();
            model.update(pos, 1.0);
            model.update(neg, -1.0);
            model.tick();
            early = true;
            break;
          }
        }
        if (!early) {
          // Full trajectory survived; update unless the best item is gold.
          if (!beam.front().is_gold) {
            features::FeatureVector pos = gold_accum;
            pos.finalize();
            features::FeatureVector neg = beam.front().accum;
            neg.finalize();
            model.update(pos, 1.0);
            model.update(neg, -1.0);
            model.tick();
          } else {
            model.tick();
          }
          break;
        }
      }
    }
    if (opts.dev != nullptr && opts.log != nullptr) {
      ParseOptions popts;
      popts.averaged = false;
      long correct = 0, correct_lab = 0, total = 0;
      for (const auto& s : opts.dev->sentences) {
        auto tree = beam_parse(model, sys, s, opts.beam_width, popts);
        for (int i = 1; i <= s.size(); ++i) {
          ++total;
          if (tree.head_of(i) == s.tok(i).gold_head) {
            ++correct;
            if (tree.label_of(i) == s.tok(i).gold_label) ++correct_lab;
          }
        }
      }
      *opts.log << "epoch " << epoch + 1 << " dev_uas "
                << (total > 0 ? static_cast<double>(correct) / total : 0.0) << " dev_las "
                << (total > 0 ? static_cast<double>(correct_lab) / total : 0.0) << "\n";
    }
  }
  model.finalize_average();
  return model;
}

}  // namespace parselab::transition
