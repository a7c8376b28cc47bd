#include "parselab/treebank.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "parselab/rng.hpp"

namespace parselab::treebank {

bool Sentence::has_gold() const {
  return !tokens.empty() &&
         std::all_of(tokens.begin(), tokens.end(), [](const Token& t) { return t.gold_head >= 0; });
}

std::vector<int> Sentence::gold_heads() const {
  std::vector<int> h;
  h.reserve(tokens.size());
  for (const auto& t : tokens) h.push_back(t.gold_head);
  return h;
}

std::vector<std::string> Sentence::gold_labels() const {
  std::vector<std::string> l;
  l.reserve(tokens.size());
  for (const auto& t : tokens) l.push_back(t.gold_label);
  return l;
}

std::vector<DependencyTree> Corpus::gold_trees() const {
  std::vector<DependencyTree> trees;
  trees.reserve(sentences.size());
  for (const auto& s : sentences) trees.emplace_back(s.gold_heads(), s.gold_labels());
  return trees;
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.tokens.size();
  return n;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

void finish_sentence(Corpus& corpus, Sentence& sent, bool has_pred, DependencyTree& pred,
                     int line_no) {
  if (sent.tokens.empty()) return;
  const int n = sent.size();
  for (const auto& t : sent.tokens) {
    if (t.gold_head > n) {
      throw ValidationError("head index " + std::to_string(t.gold_head) + " out of range for " +
                            std::to_string(n) + "-token sentence ending at line " +
                            std::to_string(line_no));
    }
  }
  corpus.sentences.push_back(std::move(sent));
  if (has_pred) corpus.predicted.push_back(std::move(pred));
  sent = Sentence{};
  pred = DependencyTree{};
}

}  // namespace

Corpus read_conll(std::istream& in, const ConllOptions& opts) {
  Corpus corpus;
  Sentence sent;
  DependencyTree pred;
  bool any_pred = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish_sentence(corpus, sent, any_pred, pred, line_no);
      continue;
    }
    if (line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 10) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 10 tab-separated fields, got " +
                       std::to_string(fields.size()));
    }
    Token t;
    try {
      t.id = std::stoi(fields[0]);
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(line_no) + ": bad token id '" + fields[0] + "'");
    }
    if (t.id != sent.size() + 1) {
      throw ParseError("line " + std::to_string(line_no) + ": token ids must be 1..n contiguous");
    }
    t.form = fields[1];
    t.lemma = fields[2] == "_" ? "" : fields[2];
    t.morph = fields[4] == "_" ? "" : fields[4];
    if (t.morph.empty() && opts.morph_fallback_feats && fields[5] != "_") t.morph = fields[5];
    if (fields[6] == "_") {
      t.gold_head = -1;
    } else {
      try {
        t.gold_head = std::stoi(fields[6]);
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad head '" + fields[6] + "'");
      }
      if (t.gold_head < 0) {
        throw ValidationError("line " + std::to_string(line_no) + ": negative head index");
      }
      if (t.gold_head == t.id) {
        throw ValidationError("line " + std::to_string(line_no) + ": token is its own head");
      }
    }
    t.gold_label = fields[7] == "_" ? "" : fields[7];
    sent.tokens.push_back(std::move(t));
    // PHEAD/PDEPREL carry a predicted tree when present.
    if (fields[8] != "_") {
      any_pred = true;
      int ph;
      try {
        ph = std::stoi(fields[8]);
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad PHEAD '" + fields[8] + "'");
      }
      pred.heads.push_back(ph);
      pred.labels.push_back(fields[9] == "_" ? "" : fields[9]);
    }
  }
  finish_sentence(corpus, sent, any_pred, pred, line_no);
  if (any_pred && corpus.predicted.size() != corpus.sentences.size()) {
    throw ValidationError("predicted trees present for some sentences but not all");
  }
  if (!any_pred) corpus.predicted.clear();
  return corpus;
}

Corpus read_conll_file(const std::string& path, const ConllOptions& opts) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_conll(in, opts);
}

void write_conll(std::ostream& out, const Corpus& corpus, TreeChannel which) {
  if (which == TreeChannel::Predicted && !corpus.has_predictions() && !corpus.sentences.empty()) {
    throw ValidationError("predicted trees requested but corpus has none");
  }
  auto field = [](const std::string& s) { return s.empty() ? std::string("_") : s; };
  for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
    const Sentence& sent = corpus.sentences[si];
    for (const Token& t : sent.tokens) {
      int head = t.gold_head;
      std::string label = t.gold_label;
      if (which == TreeChannel::Predicted) {
        head = corpus.predicted[si].head_of(t.id);
        label = corpus.predicted[si].label_of(t.id);
      }
      out << t.id << '\t' << field(t.form) << '\t' << field(t.lemma) << "\t_\t"
          << field(t.morph) << "\t_\t";
      if (head < 0) {
        out << '_';
      } else {
        out << head;
      }
      out << '\t' << field(label) << "\t_\t_\n";
    }
    out << '\n';
  }
}

void write_conll_file(const std::string& path, const Corpus& corpus, TreeChannel which) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  write_conll(out, corpus, which);
}

std::vector<Violation> validate_tree(const std::vector<int>& heads) {
  std::vector<Violation> violations;
  const int n = static_cast<int>(heads.size());
  for (int i = 1; i <= n; ++i) {
    int h = heads[static_cast<std::size_t>(i - 1)];
    if (h < 0 || h > n) {
      violations.push_back({Violation::Kind::OutOfRange, i});
    } else if (h == i) {
      violations.push_back({Violation::Kind::SelfLoop, i});
    }
  }
  if (!violations.empty()) return violations;
  // Every node has exactly one head by construction, so the only remaining
  // failure mode is a cycle (equivalently, unreachability from the root).
  // Walk up from each node; 0=unseen, 1=on current path, 2=done.
  std::vector<int> state(static_cast<std::size_t>(n) + 1, 0);
  state[0] = 2;
  for (int i = 1; i <= n; ++i) {
    if (state[static_cast<std::size_t>(i)] != 0) continue;
    std::vector<int> path;
    int v = i;
    while (state[static_cast<std::size_t>(v)] == 0) {
      state[static_cast<std::size_t>(v)] = 1;
      path.push_back(v);
      v = heads[static_cast<std::size_t>(v - 1)];
    }
    if (state[static_cast<std::size_t>(v)] == 1) {
      // Found a cycle; report every node on it.
      auto it = std::find(path.begin(), path.end(), v);
      for (; it != path.end(); ++it) violations.push_back({Violation::Kind::Cycle, *it});
    }
    for (int u : path) state[static_cast<std::size_t>(u)] = 2;
  }
  return violations;
}

bool is_valid_tree(const std::vector<int>& heads) { return validate_tree(heads).empty(); }

std::vector<std::vector<int>> children_of(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size());
  std::vector<std::vector<int>> children(static_cast<std::size_t>(n) + 1);
  for (int d = 1; d <= n; ++d) children[static_cast<std::size_t>(heads[d - 1])].push_back(d);
  return children;
}

bool is_descendant(const std::vector<int>& heads, int node, int ancestor) {
  if (node == 0) return false;
  int v = heads[static_cast<std::size_t>(node - 1)];
  // Head chains in a valid tree reach the root, but guard against cycles so
  // the check is total on arbitrary arrays.
  for (int steps = 0; steps <= static_cast<int>(heads.size()); ++steps) {
    if (v == ancestor) return true;
    if (v == 0) return false;
    v = heads[static_cast<std::size_t>(v - 1)];
  }
  return false;
}

bool is_projective(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size());
  for (int d = 1; d <= n; ++d) {
    int h = heads[static_cast<std::size_t>(d - 1)];
    int lo = std::min(h, d), hi = std::max(h, d);
    for (int v = lo + 1; v < hi; ++v) {
      if (!is_descendant(heads, v, h)) return false;
    }
  }
  return true;
}

int nonprojectivity_degree(const DependencyTree& tree, const Arc& arc) {
  const int n = tree.size();
  if (arc.dependent < 1 || arc.dependent > n || tree.head_of(arc.dependent) != arc.head) {
    throw ValidationError("arc not present in tree");
  }
  int lo = std::min(arc.head, arc.dependent), hi = std::max(arc.head, arc.dependent);
  int degree = 0;
  for (int v = lo + 1; v < hi; ++v) {
    if (is_descendant(tree.heads, v, arc.head)) continue;
    int vh = tree.head_of(v);
    if (vh <= lo || vh >= hi) ++degree;
  }
  return degree;
}

int dependency_length(const Arc& arc) {
  if (arc.head <= 0) throw ValidationError("dependency_length is undefined for root arcs");
  return std::abs(arc.head - arc.dependent);
}

int root_distance(const std::vector<int>& heads, int node) {
  int dist = 0;
  int v = node;
  while (v != 0) {
    v = heads[static_cast<std::size_t>(v - 1)];
    ++dist;
  }
  return dist;
}

int root_distance(const DependencyTree& tree, int node) { return root_distance(tree.heads, node); }

Sentence permute_words(const Sentence& sentence, PermuteMode mode, std::uint64_t seed) {
  if (mode == PermuteMode::Identity) return sentence;
  const int n = sentence.size();
  // new_pos[i-1] is where old token i lands (1-based).
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i + 1;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<int> new_pos(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) new_pos[static_cast<std::size_t>(order[j] - 1)] = j + 1;

  Sentence out;
  out.tokens.resize(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    Token t = sentence.tok(i);
    t.id = new_pos[static_cast<std::size_t>(i - 1)];
    if (t.gold_head > 0) t.gold_head = new_pos[static_cast<std::size_t>(t.gold_head - 1)];
    out.tokens[static_cast<std::size_t>(t.id - 1)] = std::move(t);
  }
  return out;
}

std::vector<int> projectivize(const std::vector<int>& heads) {
  std::vector<int> h = heads;
  const int n = static_cast<int>(h.size());
  while (!is_projective(h)) {
    int best_dep = -1, best_len = n + 1;
    for (int d = 1; d <= n; ++d) {
      int hd = h[static_cast<std::size_t>(d - 1)];
      int lo = std::min(hd, d), hi = std::max(hd, d);
      bool nonproj = false;
      for (int v = lo + 1; v < hi && !nonproj; ++v) {
        if (!is_descendant(h, v, hd)) nonproj = true;
      }
      if (!nonproj) continue;
      int len = std::abs(hd - d);
      if (len < best_len || (len == best_len && d < best_dep)) {
        best_len = len;
        best_dep = d;
      }
    }
    // Lift: reattach to the grandparent (root arcs are already projective
    // over a connected tree, so the head here is never 0).
    int old_head = h[static_cast<std::size_t>(best_dep - 1)];
    h[static_cast<std::size_t>(best_dep - 1)] = old_head == 0 ? 0 : h[static_cast<std::size_t>(old_head - 1)];
  }
  return h;
}

}  // namespace parselab::treebank
