#include "parselab/features.hpp"

#include <algorithm>
#include <string_view>

#include "parselab/hashing.hpp"
#include "parselab/transition.hpp"

namespace parselab::features {

namespace {

constexpr std::string_view kNull = "<NULL>";
constexpr std::string_view kRoot = "<ROOT>";
constexpr char kSep = '\x1e';

// Surface accessors with boundary rules: index 0 is the artificial root,
// anything outside [0, n] yields the NULL key.
std::string_view form_at(const treebank::Sentence& s, int idx) {
  if (idx == 0) return kRoot;
  if (idx < 0 || idx > s.size()) return kNull;
  return s.tok(idx).form;
}

std::string_view morph_at(const treebank::Sentence& s, int idx) {
  if (idx == 0) return kRoot;
  if (idx < 0 || idx > s.size()) return kNull;
  const std::string& m = s.tok(idx).morph;
  return m.empty() ? kNull : std::string_view(m);
}

std::string distance_key(int from, int to, bool coarse) {
  int k = to - from;
  std::string key = k < 0 ? "L" : "R";
  int mag = std::abs(k);
  if (coarse && mag >= 5) {
    key += "5+";
  } else {
    key += std::to_string(mag);
  }
  return key;
}

class KeyBuilder {
 public:
  KeyBuilder(FeatureVector& out, const FeatureConfig& cfg) : out_(out), cfg_(cfg) {}

  template <typename... Parts>
  void emit(std::string_view tid, Parts&&... parts) {
    key_.clear();
    (append(parts), ...);
    out_.add(hash_index(tid, key_, cfg_.hash_bits));
  }

 private:
  void append(std::string_view part) {
    if (!key_.empty()) key_ += kSep;
    key_ += part;
  }

  FeatureVector& out_;
  const FeatureConfig& cfg_;
  std::string key_;
};

void add_edge_templates(KeyBuilder& kb, const treebank::Sentence& s, int head, int dep,
                        const FeatureConfig& cfg) {
  auto hf = form_at(s, head), df = form_at(s, dep);
  const std::string dist = distance_key(head, dep, cfg.free_word_order);

  kb.emit("E01", hf);
  kb.emit("E04", df);
  kb.emit("E07", hf, df);
  kb.emit("E16", dist);
  if (!cfg.use_morph) return;

  auto hm = morph_at(s, head), dm = morph_at(s, dep);
  kb.emit("E02", hm);
  kb.emit("E03", hf, hm);
  kb.emit("E05", dm);
  kb.emit("E06", df, dm);
  kb.emit("E08", hm, dm);
  kb.emit("E09", hf, dm);
  kb.emit("E10", hm, df);
  kb.emit("E11", hf, hm, df, dm);
  kb.emit("E12", hm, morph_at(s, head + 1), morph_at(s, dep - 1), dm);
  kb.emit("E13", morph_at(s, head - 1), hm, morph_at(s, dep - 1), dm);
  kb.emit("E14", hm, morph_at(s, head + 1), dm, morph_at(s, dep + 1));
  kb.emit("E15", morph_at(s, head - 1), hm, dm, morph_at(s, dep + 1));
  kb.emit("E17", hm, dm, dist);
  int lo = std::min(head, dep), hi = std::max(head, dep);
  for (int b = lo + 1; b < hi; ++b) {
    kb.emit("E18", hm, morph_at(s, b), dm);
  }
}

}  // namespace

void FeatureVector::finalize() {
  std::sort(entries.begin(), entries.end());
  std::size_t out = 0;
  for (std::size_t i = 0; i < entries.size();) {
    std::uint64_t idx = entries[i].first;
    double v = 0.0;
    while (i < entries.size() && entries[i].first == idx) v += entries[i++].second;
    entries[out++] = {idx, v};
  }
  entries.resize(out);
}

FeatureVector edge_features(const treebank::Sentence& sentence, int head, int dep,
                            const FeatureConfig& cfg) {
  FeatureVector fv;
  KeyBuilder kb(fv, cfg);
  add_edge_templates(kb, sentence, head, dep, cfg);
  fv.finalize();
  return fv;
}

FeatureVector edge_label_features(const treebank::Sentence& sentence, int head, int dep,
                                  const std::string& label, const FeatureConfig& cfg) {
  FeatureVector fv;
  KeyBuilder kb(fv, cfg);
  auto hf = form_at(sentence, head), df = form_at(sentence, dep);
  const std::string dist = distance_key(head, dep, cfg.free_word_order);
  kb.emit("L01", label, hf, df);
  kb.emit("L05", label, dist);
  if (cfg.use_morph) {
    auto hm = morph_at(sentence, head), dm = morph_at(sentence, dep);
    kb.emit("L02", label, hm);
    kb.emit("L03", label, dm);
    kb.emit("L04", label, hm, dm);
    kb.emit("L06", label, hm, dm, dist);
  }
  fv.finalize();
  return fv;
}

namespace {

std::string labelset_key(const transition::ParserConfiguration& c, int node) {
  if (node < 0) return std::string(kNull);
  auto labels = c.child_labels[static_cast<std::size_t>(node)];
  if (labels.empty()) return "<NONE>";
  std::sort(labels.begin(), labels.end());
  std::string key;
  for (const auto& l : labels) {
    if (!key.empty()) key += '+';
    key += l;
  }
  return key;
}

void add_config_templates(KeyBuilder& kb, const transition::ParserConfiguration& c,
                          const treebank::Sentence& s, const FeatureConfig& cfg) {
  const int s0 = c.stack_at(0), s1 = c.stack_at(1), s2 = c.stack_at(2);
  const int b0 = c.buffer_at(0), b1 = c.buffer_at(1), b2 = c.buffer_at(2);
  auto s0f = form_at(s, s0), s1f = form_at(s, s1), s2f = form_at(s, s2);
  auto b0f = form_at(s, b0), b1f = form_at(s, b1), b2f = form_at(s, b2);

  kb.emit("C01", s0f);
  kb.emit("C04", b0f);
  kb.emit("C07", s1f);
  kb.emit("C10", s2f);
  kb.emit("C11", b1f);
  kb.emit("C13", b2f);
  kb.emit("C15", s0f, b0f);
  kb.emit("C21", s1f, s0f);

  std::string dist = (s0 >= 0 && b0 >= 0) ? distance_key(s0, b0, cfg.free_word_order)
                                          : std::string(kNull);
  kb.emit("C29", dist);
  kb.emit("C31", s0f, b0f, dist);

  const std::string vl = s0 >= 0 ? std::to_string(c.left_valency[static_cast<std::size_t>(s0)])
                                 : std::string(kNull);
  const std::string vr = s0 >= 0 ? std::to_string(c.right_valency[static_cast<std::size_t>(s0)])
                                 : std::string(kNull);
  kb.emit("C32", vl, vr);
  kb.emit("C34", s0f, vl, vr);

  const std::string ls0 = labelset_key(c, s0);
  const std::string lb0 = labelset_key(c, b0);
  kb.emit("C35", ls0);
  kb.emit("C37", lb0);
  // Label of the arc already attaching s0, when any (arc-eager).
  std::string s0head = "<NOHEAD>";
  if (s0 >= 1 && c.attached(s0)) s0head = c.labels[static_cast<std::size_t>(s0 - 1)];
  kb.emit("C39", s0head);

  if (!cfg.use_morph) return;

  auto s0m = morph_at(s, s0), s1m = morph_at(s, s1), s2m = morph_at(s, s2);
  auto b0m = morph_at(s, b0), b1m = morph_at(s, b1), b2m = morph_at(s, b2);
  kb.emit("C02", s0m);
  kb.emit("C03", s0f, s0m);
  kb.emit("C05", b0m);
  kb.emit("C06", b0f, b0m);
  kb.emit("C08", s1m);
  kb.emit("C09", s2m);
  kb.emit("C12", b1m);
  kb.emit("C14", b2m);
  kb.emit("C16", s0m, b0m);
  kb.emit("C17", s0f, b0m);
  kb.emit("C18", s0m, b0f);
  kb.emit("C19", s0f, s0m, b0f, b0m);
  kb.emit("C20", s1m, s0m);
  kb.emit("C22", b0m, b1m);
  kb.emit("C23", b1m, b2m);
  kb.emit("C24", s0m, b0m, b1m);
  kb.emit("C25", s1m, s0m, b0m);
  kb.emit("C26", s2m, s1m, s0m);
  kb.emit("C27", b0m, b1m, b2m);
  kb.emit("C28", s1m, s0m, b0m, b1m);
  kb.emit("C30", s0m, b0m, dist);
  kb.emit("C33", s0m, vl, vr);
  kb.emit("C36", s0m, ls0);
  kb.emit("C38", b0m, lb0);
  kb.emit("C40", s0m, b0m, ls0);
}

}  // namespace

FeatureVector config_features(const transition::ParserConfiguration& config,
                              const treebank::Sentence& sentence, const FeatureConfig& cfg) {
  FeatureVector fv;
  KeyBuilder kb(fv, cfg);
  add_config_templates(kb, config, sentence, cfg);
  fv.finalize();
  return fv;
}

FeatureVector config_action_features(const transition::ParserConfiguration& config,
                                     const treebank::Sentence& sentence,
                                     const std::string& action_id, const FeatureConfig& cfg) {
  // Conjoin by suffixing every template id with the action, so the same
  // template keys land in action-specific buckets.
  FeatureVector base;
  KeyBuilder kb(base, cfg);
  add_config_templates(kb, config, sentence, cfg);
  // Re-hash each raw entry with the action id mixed in. add_config_templates
  // already hashed; instead rebuild with action-tagged ids.
  FeatureVector fv;
  for (const auto& [idx, val] : base.entries) {
    fv.add(hash_index(action_id, std::to_string(idx), cfg.hash_bits), val);
  }
  fv.finalize();
  return fv;
}

}  // namespace parselab::features
