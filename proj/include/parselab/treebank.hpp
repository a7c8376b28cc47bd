#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "parselab/errors.hpp"

namespace parselab::treebank {

// One token of a sentence. `id` is the 1-based surface position; head 0 is
// the artificial root. `morph` carries the morphological tag as an opaque
// string (POSTAG column). gold_head == -1 means the annotation is absent
// (raw text, or a gold-stripped corpus).
struct Token {
  int id = 0;
  std::string form;
  std::string lemma;
  std::string morph;
  int gold_head = -1;
  std::string gold_label;
};

struct Sentence {
  std::vector<Token> tokens;

  int size() const { return static_cast<int>(tokens.size()); }
  const Token& tok(int id) const { return tokens[static_cast<std::size_t>(id - 1)]; }
  Token& tok(int id) { return tokens[static_cast<std::size_t>(id - 1)]; }
  bool has_gold() const;
  std::vector<int> gold_heads() const;
  std::vector<std::string> gold_labels() const;
};

// Head/label arrays for tokens 1..n. heads[i-1] is the head of token i.
struct DependencyTree {
  std::vector<int> heads;
  std::vector<std::string> labels;

  DependencyTree() = default;
  explicit DependencyTree(std::vector<int> h, std::vector<std::string> l = {})
      : heads(std::move(h)), labels(std::move(l)) {
    if (labels.empty()) labels.assign(heads.size(), "");
  }
  int size() const { return static_cast<int>(heads.size()); }
  int head_of(int id) const { return heads[static_cast<std::size_t>(id - 1)]; }
  const std::string& label_of(int id) const { return labels[static_cast<std::size_t>(id - 1)]; }
};

struct Arc {
  int head = 0;
  int dependent = 0;
  std::string label;
};

struct Corpus {
  std::vector<Sentence> sentences;
  std::vector<DependencyTree> predicted;  // empty, or aligned 1:1 with sentences

  std::size_t size() const { return sentences.size(); }
  bool has_predictions() const { return !predicted.empty(); }
  std::vector<DependencyTree> gold_trees() const;
  std::size_t token_count() const;
};

struct ConllOptions {
  // When POSTAG (column 5) is "_", fall back to FEATS (column 6).
  bool morph_fallback_feats = true;
};

Corpus read_conll(std::istream& in, const ConllOptions& opts = {});
Corpus read_conll_file(const std::string& path, const ConllOptions& opts = {});

enum class TreeChannel { Gold, Predicted };
void write_conll(std::ostream& out, const Corpus& corpus, TreeChannel which = TreeChannel::Gold);
void write_conll_file(const std::string& path, const Corpus& corpus,
                      TreeChannel which = TreeChannel::Gold);

// --- tree structure ---------------------------------------------------------

struct Violation {
  enum class Kind { OutOfRange, SelfLoop, Cycle };
  Kind kind;
  int node;  // 1-based offending token
};

// Empty result iff `heads` is a spanning arborescence rooted at node 0.
std::vector<Violation> validate_tree(const std::vector<int>& heads);
bool is_valid_tree(const std::vector<int>& heads);

// Children lists indexed 0..n, built from a head array.
std::vector<std::vector<int>> children_of(const std::vector<int>& heads);

// True iff `node` is a descendant of `ancestor` (proper; a node is not its
// own descendant). Indices 0..n.
bool is_descendant(const std::vector<int>& heads, int node, int ancestor);

bool is_projective(const std::vector<int>& heads);
inline bool is_projective(const DependencyTree& tree) { return is_projective(tree.heads); }

// Count of words strictly between head and dependent that are not descendants
// of the head and whose own head lies outside the open interval.
int nonprojectivity_degree(const DependencyTree& tree, const Arc& arc);

// |head - dependent|; root arcs are excluded (dedicated bucket downstream).
int dependency_length(const Arc& arc);

// Number of arcs on the path from the root to `node`.
int root_distance(const DependencyTree& tree, int node);
int root_distance(const std::vector<int>& heads, int node);

enum class PermuteMode { Identity, SeededShuffle };

// Reorders tokens and remaps ids/heads so the tree is isomorphic.
Sentence permute_words(const Sentence& sentence, PermuteMode mode, std::uint64_t seed);

// Lift non-projective arcs to the nearest ancestor until the tree is
// projective (shortest arc first, then leftmost dependent).
std::vector<int> projectivize(const std::vector<int>& heads);

}  // namespace parselab::treebank
