#include "parselab/dcst.hpp"

#include <algorithm>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "parselab/hashing.hpp"

namespace parselab::dcst {

using neural::Graph;
using neural::Mat;
using neural::ParamStore;
using neural::Var;
using neural::Vocab;

std::string aux_task_name(AuxTaskKind k) {
  switch (k) {
    case AuxTaskKind::ChildrenCount: return "children";
    case AuxTaskKind::RootDistance: return "rootdist";
    case AuxTaskKind::RelativePosHead: return "relpos";
  }
  return "?";
}

AuxTaskKind aux_task_from_name(const std::string& name) {
  if (name == "children") return AuxTaskKind::ChildrenCount;
  if (name == "rootdist") return AuxTaskKind::RootDistance;
  if (name == "relpos") return AuxTaskKind::RelativePosHead;
  throw UsageError("unknown auxiliary task '" + name + "'");
}

namespace {

constexpr const char* kRootAttached = "ROOT-ATTACHED";

std::string capped_tag(int value, int cap) {
  return value >= cap ? std::to_string(cap) + "+" : std::to_string(value);
}

std::string morph_key(const treebank::Token& t) {
  return t.morph.empty() ? "<NULL>" : t.morph;
}

}  // namespace

std::vector<std::string> extract_aux_tags(const treebank::DependencyTree& tree,
                                          const treebank::Sentence& sentence, AuxTaskKind task,
                                          const AuxTaskCaps& caps) {
  const int n = tree.size();
  std::vector<std::string> tags(static_cast<std::size_t>(n));
  switch (task) {
    case AuxTaskKind::ChildrenCount: {
      std::vector<int> counts(static_cast<std::size_t>(n) + 1, 0);
      for (int d = 1; d <= n; ++d) ++counts[static_cast<std::size_t>(tree.head_of(d))];
      for (int d = 1; d <= n; ++d) {
        tags[static_cast<std::size_t>(d - 1)] =
            capped_tag(counts[static_cast<std::size_t>(d)], caps.children_cap);
      }
      break;
    }
    case AuxTaskKind::RootDistance:
      for (int d = 1; d <= n; ++d) {
        tags[static_cast<std::size_t>(d - 1)] =
            capped_tag(treebank::root_distance(tree, d), caps.rootdist_cap);
      }
      break;
    case AuxTaskKind::RelativePosHead:
      for (int d = 1; d <= n; ++d) {
        int h = tree.head_of(d);
        if (h == 0) {
          tags[static_cast<std::size_t>(d - 1)] = kRootAttached;
          continue;
        }
        const std::string hm = morph_key(sentence.tok(h));
        int lo = std::min(h, d), hi = std::max(h, d);
        int k = 1;
        for (int v = lo + 1; v < hi; ++v) {
          if (morph_key(sentence.tok(v)) == hm) ++k;
        }
        tags[static_cast<std::size_t>(d - 1)] =
            std::string(h < d ? "L" : "R") + ":" + std::to_string(k) + ":" + hm;
      }
      break;
  }
  return tags;
}

std::vector<int> decode_relative_pos(const std::vector<std::string>& tags,
                                     const treebank::Sentence& sentence) {
  const int n = static_cast<int>(tags.size());
  std::vector<int> heads(static_cast<std::size_t>(n), -1);
  for (int d = 1; d <= n; ++d) {
    const std::string& tag = tags[static_cast<std::size_t>(d - 1)];
    if (tag == kRootAttached) {
      heads[static_cast<std::size_t>(d - 1)] = 0;
      continue;
    }
    // "<dir>:<k>:<morph>"; the morph may itself contain ':'.
    if (tag.size() < 5 || (tag[0] != 'L' && tag[0] != 'R') || tag[1] != ':') continue;
    std::size_t second = tag.find(':', 2);
    if (second == std::string::npos) continue;
    int k = 0;
    try {
      k = std::stoi(tag.substr(2, second - 2));
    } catch (const std::exception&) {
      continue;
    }
    if (k <= 0) continue;
    const std::string morph = tag.substr(second + 1);
    const int step = tag[0] == 'L' ? -1 : 1;
    int seen = 0;
    for (int v = d + step; v >= 1 && v <= n; v += step) {
      if (morph_key(sentence.tok(v)) == morph && ++seen == k) {
        heads[static_cast<std::size_t>(d - 1)] = v;
        break;
      }
    }
  }
  return heads;
}

Eigen::VectorXd gate_fuse(const Eigen::VectorXd& h_base, const Eigen::VectorXd& h_aux,
                          const Eigen::MatrixXd& W_g, const Eigen::VectorXd& b_g) {
  if (h_base.size() != h_aux.size() || W_g.cols() != 2 * h_base.size() ||
      W_g.rows() != h_base.size() || b_g.size() != h_base.size()) {
    throw ValidationError("gate_fuse shape mismatch");
  }
  Eigen::VectorXd cat(2 * h_base.size());
  cat << h_base, h_aux;
  Eigen::ArrayXd gate = 1.0 / (1.0 + (-(W_g * cat + b_g).array()).exp());
  return (gate * h_base.array() + (1.0 - gate) * h_aux.array()).matrix();
}

// --- taggers -------------------------------------------------------------

namespace {

std::vector<int> tagger_word_ids(const TaggerModel& model, const treebank::Sentence& s) {
  std::vector<int> ids(static_cast<std::size_t>(s.size()) + 1);
  ids[0] = Vocab::kRoot;
  for (int i = 1; i <= s.size(); ++i) {
    ids[static_cast<std::size_t>(i)] = model.words.get(s.tok(i).form);
  }
  return ids;
}

std::vector<int> tagger_morph_ids(const TaggerModel& model, const treebank::Sentence& s) {
  std::vector<int> ids(static_cast<std::size_t>(s.size()) + 1);
  ids[0] = Vocab::kRoot;
  for (int i = 1; i <= s.size(); ++i) {
    ids[static_cast<std::size_t>(i)] = model.morphs.get(s.tok(i).morph);
  }
  return ids;
}

int tag_id(const TaggerModel& model, const std::string& tag) {
  auto it = std::find(model.tags.begin(), model.tags.end(), tag);
  return it == model.tags.end() ? 0 : static_cast<int>(it - model.tags.begin());
}

double tagger_batch_loss(Graph& g, TaggerModel& model, const treebank::Sentence& sentence,
                         const std::vector<std::string>& tags, std::vector<Var>& losses) {
  auto states = neural::encode_states(g, model.params, "enc.", model.dims,
                                      tagger_word_ids(model, sentence),
                                      tagger_morph_ids(model, sentence));
  Var W = g.param(model.params.require("out.W"));
  Var b = g.param(model.params.require("out.b"));
  for (int i = 1; i <= sentence.size(); ++i) {
    Var logits = g.add(g.matmul(W, states[static_cast<std::size_t>(i)]), b);
    losses.push_back(g.softmax_ce(logits, tag_id(model, tags[static_cast<std::size_t>(i - 1)])));
  }
  return 0.0;
}

}  // namespace

TaggerModel train_aux_tagger(const std::vector<treebank::Sentence>& sentences,
                             const std::vector<treebank::DependencyTree>& trees,
                             AuxTaskKind task, const TaggerOptions& opts, std::ostream* log) {
  if (sentences.size() != trees.size()) {
    throw ValidationError("tagger inputs misaligned");
  }
  TaggerModel model;
  model.dims = opts.dims;
  // Tag inventory and vocabularies come from this (auto-labeled) data only.
  std::set<std::string> tagset;
  std::vector<std::vector<std::string>> all_tags(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    for (const auto& t : sentences[i].tokens) {
      model.words.add(t.form);
      model.morphs.add(t.morph);
    }
    all_tags[i] = extract_aux_tags(trees[i], sentences[i], task, opts.caps);
    tagset.insert(all_tags[i].begin(), all_tags[i].end());
  }
  model.tags.push_back("<UNKTAG>");
  model.tags.insert(model.tags.end(), tagset.begin(), tagset.end());

  Rng rng(opts.seed);
  neural::init_encoder_params(model.params, "enc.", model.dims, model.words.size(),
                              model.morphs.size(), rng);
  model.params.add("out.W", neural::glorot(static_cast<int>(model.tags.size()),
                                           model.dims.state_dim(), rng));
  model.params.add("out.b", Mat::Zero(static_cast<int>(model.tags.size()), 1));

  // Held-out split for the patience criterion.
  std::vector<std::size_t> train_idx, dev_idx;
  const std::size_t dev_every =
      opts.dev_fraction > 0.0 ? static_cast<std::size_t>(1.0 / opts.dev_fraction) : 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (dev_every > 0 && i % dev_every == dev_every - 1 && sentences.size() > 3) {
      dev_idx.push_back(i);
    } else {
      train_idx.push_back(i);
    }
  }

  double best_dev = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
    rng.shuffle(train_idx);
    double epoch_loss = 0.0;
    long epoch_tokens = 0;
    for (std::size_t at = 0; at < train_idx.size(); at += static_cast<std::size_t>(opts.batch_size)) {
      std::size_t end = std::min(train_idx.size(), at + static_cast<std::size_t>(opts.batch_size));
      Graph g(&model.params, true);
      std::vector<Var> losses;
      int batch_tokens = 0;
      for (std::size_t bi = at; bi < end; ++bi) {
        const auto& s = sentences[train_idx[bi]];
        if (s.size() == 0) continue;
        tagger_batch_loss(g, model, s, all_tags[train_idx[bi]], losses);
        batch_tokens += s.size();
      }
      if (losses.empty()) continue;
      Var total = g.scale(g.sum(losses), 1.0 / static_cast<double>(batch_tokens));
      epoch_loss += g.scalar(total) * batch_tokens;
      epoch_tokens += batch_tokens;
      model.params.zero_grads();
      g.backward(total);
      model.params.adam_step(opts.learning_rate);
    }
    if (log != nullptr) {
      *log << "tagger[" << aux_task_name(task) << "] epoch " << epoch + 1 << " loss "
           << (epoch_tokens > 0 ? epoch_loss / static_cast<double>(epoch_tokens) : 0.0) << "\n";
    }
    if (!dev_idx.empty()) {
      double dev_loss = 0.0;
      long dev_tokens = 0;
      for (std::size_t i : dev_idx) {
        if (sentences[i].size() == 0) continue;
        Graph g(&model.params, true);
        std::vector<Var> losses;
        tagger_batch_loss(g, model, sentences[i], all_tags[i], losses);
        for (Var v : losses) dev_loss += g.scalar(v);
        dev_tokens += sentences[i].size();
      }
      dev_loss = dev_tokens > 0 ? dev_loss / static_cast<double>(dev_tokens) : 0.0;
      if (dev_loss + 1e-9 < best_dev) {
        best_dev = dev_loss;
        since_best = 0;
      } else if (++since_best >= opts.patience) {
        break;
      }
    }
  }
  return model;
}

std::vector<std::string> tag_sentence(const TaggerModel& model,
                                      const treebank::Sentence& sentence) {
  std::vector<std::string> out(static_cast<std::size_t>(sentence.size()));
  if (sentence.size() == 0) return out;
  auto& params = const_cast<ParamStore&>(model.params);
  Graph g(&params, true);
  auto states = neural::encode_states(g, params, "enc.", model.dims,
                                      tagger_word_ids(model, sentence),
                                      tagger_morph_ids(model, sentence));
  const Mat& W = model.params.value(model.params.require("out.W"));
  const Mat& b = model.params.value(model.params.require("out.b"));
  for (int i = 1; i <= sentence.size(); ++i) {
    Eigen::VectorXd logits = W * g.value(states[static_cast<std::size_t>(i)]).col(0) + b.col(0);
    Eigen::Index best;
    logits.maxCoeff(&best);
    out[static_cast<std::size_t>(i - 1)] = model.tags[static_cast<std::size_t>(best)];
  }
  return out;
}

// --- self-training -------------------------------------------------------

namespace {

std::uint64_t corpus_checksum(const treebank::Corpus& corpus) {
  std::ostringstream ss;
  treebank::write_conll(ss, corpus, treebank::TreeChannel::Gold);
  return hash64(ss.str());
}

treebank::Corpus strip_gold(const treebank::Corpus& corpus) {
  treebank::Corpus out = corpus;
  out.predicted.clear();
  for (auto& s : out.sentences) {
    for (auto& t : s.tokens) {
      t.gold_head = -1;
      t.gold_label.clear();
    }
  }
  return out;
}

}  // namespace

neural::BiaffModel self_train(const treebank::Corpus& labeled, const treebank::Corpus& unlabeled,
                              const SelfTrainOptions& opts, std::ostream* log) {
  // (1) Base parser.
  if (log != nullptr) *log << "selftrain: training base parser on " << labeled.size()
                           << " sentences\n";
  neural::BiaffModel base = neural::init_biaff(labeled, opts.biaff);
  neural::train_biaff(base, labeled, nullptr, log);

  if (unlabeled.size() == 0) {
    if (log != nullptr) {
      *log << "selftrain: warning: empty unlabeled set, returning plain retrained parser\n";
    }
    neural::BiaffModel final_model = neural::init_biaff(labeled, opts.biaff);
    neural::train_biaff(final_model, labeled, nullptr, log);
    return final_model;
  }

  // (2) Auto-label the unlabeled set. Gold annotations are erased before any
  // use; the checksum pins the stripped content so nothing downstream can
  // have touched gold fields.
  treebank::Corpus stripped = strip_gold(unlabeled);
  const std::uint64_t checksum_before = corpus_checksum(stripped);
  stripped.predicted.clear();
  for (const auto& s : stripped.sentences) {
    stripped.predicted.push_back(neural::parse_biaff(base, s));
  }
  if (!opts.autolabel_path.empty()) {
    treebank::write_conll_file(opts.autolabel_path, stripped, treebank::TreeChannel::Predicted);
  }

  // (3) Auxiliary taggers on the predictions.
  const int ntasks = static_cast<int>(opts.tasks.size());
  std::vector<TaggerModel> taggers;
  taggers.reserve(opts.tasks.size());
  TaggerOptions topts = opts.tagger;
  topts.dims = opts.biaff.dims;
  for (AuxTaskKind task : opts.tasks) {
    if (log != nullptr) *log << "selftrain: training " << aux_task_name(task) << " tagger\n";
    taggers.push_back(train_aux_tagger(stripped.sentences, stripped.predicted, task, topts, log));
  }

  // (4) Final parser with gated auxiliary channels; base representation
  // layers are randomly re-initialized, auxiliary encoders start from the
  // tagger weights.
  neural::BiaffConfig final_cfg = opts.biaff;
  final_cfg.seed = opts.biaff.seed + 1;
  neural::BiaffModel final_model = neural::init_biaff(labeled, final_cfg);
  final_model.aux_tasks = ntasks;
  for (int k = 0; k < ntasks; ++k) {
    const auto& tagger = taggers[static_cast<std::size_t>(k)];
    final_model.aux_words.push_back(tagger.words);
    final_model.aux_morphs.push_back(tagger.morphs);
    final_model.params.copy_prefix(tagger.params, "enc.", "aux" + std::to_string(k) + ".",
                                   /*trainable=*/!opts.freeze_aux);
  }
  Rng rng(final_cfg.seed + 99);
  neural::init_gate_params(final_model.params, "gate", final_cfg.dims.state_dim(), rng);

  if (log != nullptr) *log << "selftrain: training final gated parser\n";
  neural::train_biaff(final_model, labeled, nullptr, log);

  if (corpus_checksum(strip_gold(unlabeled)) != checksum_before) {
    throw ValidationError("self-training touched the unlabeled corpus");
  }
  return final_model;
}

}  // namespace parselab::dcst
