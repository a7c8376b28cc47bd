#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "parselab/nn.hpp"
#include "parselab/treebank.hpp"

namespace parselab::neural {

struct BiaffConfig {
  EncoderDims dims;
  int arc_dim = 100;
  int label_dim = 32;
  double learning_rate = 2e-3;
  int batch_size = 8;
  int epochs = 30;
  std::uint64_t seed = 1;
  bool fast_mode = false;  // dropout on, finiteness checks off
  double dropout = 0.33;
  double unk_prob = 0.25;  // singleton UNK-ing during training
  bool single_root = false;
};

// BiAFF parser; when aux_tasks > 0 the per-token representation is the gated
// fusion of the base encoder with the averaged auxiliary encoders (DCST).
struct BiaffModel {
  BiaffConfig config;
  Vocab words;
  Vocab morphs;
  std::vector<std::string> labels;  // sorted
  int aux_tasks = 0;
  std::vector<Vocab> aux_words;   // one per auxiliary channel
  std::vector<Vocab> aux_morphs;
  ParamStore params;

  void save(std::ostream& os) const;
  void save_file(const std::string& path) const;
  static BiaffModel load(std::istream& is);
  static BiaffModel load_file(const std::string& path);
};

// Fresh model with initialized parameters (vocabularies from the corpus).
BiaffModel init_biaff(const treebank::Corpus& corpus, const BiaffConfig& cfg);

struct SentenceLoss {
  double head_loss = 0.0;   // summed over tokens
  double label_loss = 0.0;
  int tokens = 0;
};

// Loss of one sentence under the current parameters (no update).
SentenceLoss biaff_loss(const BiaffModel& model, const treebank::Sentence& sentence);

struct TrainStats {
  std::vector<double> epoch_loss;      // mean loss per token
  std::vector<double> dev_uas, dev_las;
};

// Minibatch Adam training; throws ValidationError on divergence.
TrainStats train_biaff(BiaffModel& model, const treebank::Corpus& corpus,
                       const treebank::Corpus* dev = nullptr, std::ostream* log = nullptr);

Eigen::MatrixXd biaff_arc_scores(const BiaffModel& model, const treebank::Sentence& sentence);
treebank::DependencyTree parse_biaff(const BiaffModel& model, const treebank::Sentence& sentence);

}  // namespace parselab::neural
