#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "parselab/features.hpp"
#include "parselab/linear_model.hpp"
#include "parselab/treebank.hpp"

namespace parselab::graph {

// Arc-factored scores. scores(h, d) is the score of arc h -> d over nodes
// 0..n; the diagonal and column 0 are never read. label_scores[d][h*L + l]
// would be wasteful, so labels are stored as (n+1) x (n+1) x L flattened.
struct ArcScores {
  Eigen::MatrixXd scores;                 // (n+1) x (n+1)
  std::vector<std::string> labels;        // inventory, lexicographically sorted
  std::vector<double> label_scores;       // flattened [h][d][l]

  int n() const { return static_cast<int>(scores.rows()) - 1; }
  double label_score(int h, int d, int l) const {
    std::size_t L = labels.size();
    return label_scores[(static_cast<std::size_t>(h) * (static_cast<std::size_t>(n()) + 1) +
                         static_cast<std::size_t>(d)) * L + static_cast<std::size_t>(l)];
  }
};

ArcScores score_arcs(const linear::LinearModel& model, const treebank::Sentence& sentence,
                     bool averaged = true);

// Maximum spanning arborescence rooted at node 0 (Chu-Liu-Edmonds). Ties
// prefer the lower head index. When single_root is set, exactly one token
// attaches to the root.
std::vector<int> cle_decode(const Eigen::MatrixXd& scores, bool single_root = false);
treebank::DependencyTree cle_decode(const ArcScores& scores, bool single_root = false);

// Maximum projective tree by span dynamic programming (first order).
std::vector<int> eisner_decode(const Eigen::MatrixXd& scores);
treebank::DependencyTree eisner_decode(const ArcScores& scores);

double tree_score(const Eigen::MatrixXd& scores, const std::vector<int>& heads);

// Per-arc argmax over the label inventory; ties by lexicographic order
// (the inventory is sorted, so the first maximum wins).
std::vector<std::string> assign_labels(const ArcScores& scores, const std::vector<int>& heads);

enum class Decoder { Cle, Eisner };
enum class LossKind { Margin, Perceptron };

struct MarginTrainOptions {
  int epochs = 10;
  std::uint64_t seed = 1;
  Decoder decoder = Decoder::Cle;
  LossKind loss = LossKind::Margin;
  bool single_root = false;
  features::FeatureConfig feature_config;
  const treebank::Corpus* dev = nullptr;  // per-epoch scores when provided
  std::ostream* log = nullptr;
};

// Online structured training with cost-augmented decoding and weight
// averaging.
linear::LinearModel train_margin(const treebank::Corpus& corpus, const MarginTrainOptions& opts);

treebank::DependencyTree parse_graph(const linear::LinearModel& model,
                                     const treebank::Sentence& sentence,
                                     Decoder decoder = Decoder::Cle, bool single_root = false);

}  // namespace parselab::graph
