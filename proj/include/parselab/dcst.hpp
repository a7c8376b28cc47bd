#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "parselab/biaff.hpp"
#include "parselab/treebank.hpp"

namespace parselab::dcst {

enum class AuxTaskKind { ChildrenCount, RootDistance, RelativePosHead };

std::string aux_task_name(AuxTaskKind k);
AuxTaskKind aux_task_from_name(const std::string& name);

struct AuxTaskCaps {
  int children_cap = 6;   // counts >= cap tagged "<cap>+"
  int rootdist_cap = 9;
};

// Per-token tag sequence derived from a tree. The relative-pos scheme tags a
// token with "<dir>:<k>:<morph>": its head is the k-th token with that morph
// tag scanning from the dependent in direction L or R; root-attached tokens
// get a dedicated tag.
std::vector<std::string> extract_aux_tags(const treebank::DependencyTree& tree,
                                          const treebank::Sentence& sentence, AuxTaskKind task,
                                          const AuxTaskCaps& caps = {});

// Head array recovered from relative-pos tags; -1 where the reference does
// not resolve.
std::vector<int> decode_relative_pos(const std::vector<std::string>& tags,
                                     const treebank::Sentence& sentence);

// g = sigmoid(W_g [h_base; h_aux] + b_g); output g .* h_base + (1-g) .* h_aux.
Eigen::VectorXd gate_fuse(const Eigen::VectorXd& h_base, const Eigen::VectorXd& h_aux,
                          const Eigen::MatrixXd& W_g, const Eigen::VectorXd& b_g);

// --- auxiliary taggers -------------------------------------------------------

struct TaggerOptions {
  neural::EncoderDims dims;
  double learning_rate = 2e-3;
  int batch_size = 8;
  int max_epochs = 30;
  int patience = 5;            // epochs without dev-loss improvement
  double dev_fraction = 0.1;   // 0 disables early stopping
  std::uint64_t seed = 1;
  AuxTaskCaps caps;
};

struct TaggerModel {
  neural::EncoderDims dims;
  neural::Vocab words;
  neural::Vocab morphs;
  std::vector<std::string> tags;  // tags[0] is the unknown-tag bucket
  neural::ParamStore params;      // "enc.*" + "out.W"/"out.b"
};

TaggerModel train_aux_tagger(const std::vector<treebank::Sentence>& sentences,
                             const std::vector<treebank::DependencyTree>& trees,
                             AuxTaskKind task, const TaggerOptions& opts,
                             std::ostream* log = nullptr);

std::vector<std::string> tag_sentence(const TaggerModel& model,
                                      const treebank::Sentence& sentence);

// --- self-training pipeline --------------------------------------------------

struct SelfTrainOptions {
  neural::BiaffConfig biaff;
  std::vector<AuxTaskKind> tasks = {AuxTaskKind::ChildrenCount, AuxTaskKind::RootDistance,
                                    AuxTaskKind::RelativePosHead};
  bool freeze_aux = true;
  TaggerOptions tagger;
  std::string autolabel_path;  // when set, predicted unlabeled trees go here
};

// Train base BiAFF on `labeled`, auto-label `unlabeled`, train one tagger per
// task, then train the final gated parser on `labeled`. Gold annotations on
// the unlabeled side are erased up front and never read.
neural::BiaffModel self_train(const treebank::Corpus& labeled,
                              const treebank::Corpus& unlabeled, const SelfTrainOptions& opts,
                              std::ostream* log = nullptr);

}  // namespace parselab::dcst
