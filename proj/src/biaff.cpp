#include "parselab/biaff.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <unordered_map>

#include "parselab/graph_parser.hpp"
#include "parselab/serialize.hpp"

namespace parselab::neural {

namespace {
constexpr std::uint32_t kMagic = 0x504c4e4e;  // "PLNN"
constexpr std::uint32_t kVersion = 1;

std::vector<int> word_ids_of(const BiaffModel& model, const treebank::Sentence& s) {
  std::vector<int> ids(static_cast<std::size_t>(s.size()) + 1);
  ids[0] = Vocab::kRoot;
  for (int i = 1; i <= s.size(); ++i) ids[static_cast<std::size_t>(i)] = model.words.get(s.tok(i).form);
  return ids;
}

std::vector<int> morph_ids_of(const BiaffModel& model, const treebank::Sentence& s) {
  std::vector<int> ids(static_cast<std::size_t>(s.size()) + 1);
  ids[0] = Vocab::kRoot;
  for (int i = 1; i <= s.size(); ++i) ids[static_cast<std::size_t>(i)] = model.morphs.get(s.tok(i).morph);
  return ids;
}

}  // namespace

void BiaffModel::save(std::ostream& os) const {
  io::write_u32(os, kMagic);
  io::write_u32(os, kVersion);
  io::write_u32(os, static_cast<std::uint32_t>(config.dims.word_dim));
  io::write_u32(os, static_cast<std::uint32_t>(config.dims.morph_dim));
  io::write_u32(os, static_cast<std::uint32_t>(config.dims.hidden));
  io::write_u32(os, static_cast<std::uint32_t>(config.dims.layers));
  io::write_u8(os, config.dims.use_morph ? 1 : 0);
  io::write_u32(os, static_cast<std::uint32_t>(config.arc_dim));
  io::write_u32(os, static_cast<std::uint32_t>(config.label_dim));
  io::write_f64(os, config.learning_rate);
  io::write_u8(os, config.single_root ? 1 : 0);
  io::write_u32(os, static_cast<std::uint32_t>(aux_tasks));
  words.save(os);
  morphs.save(os);
  for (int k = 0; k < aux_tasks; ++k) {
    aux_words[static_cast<std::size_t>(k)].save(os);
    aux_morphs[static_cast<std::size_t>(k)].save(os);
  }
  io::write_u32(os, static_cast<std::uint32_t>(labels.size()));
  for (const auto& l : labels) io::write_string(os, l);
  params.save(os);
}

void BiaffModel::save_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParseError("cannot open " + path + " for writing");
  save(os);
}

BiaffModel BiaffModel::load(std::istream& is) {
  if (io::read_u32(is) != kMagic) throw ParseError("not a biaffine model file");
  if (io::read_u32(is) != kVersion) throw ParseError("unsupported biaffine model version");
  BiaffModel m;
  m.config.dims.word_dim = static_cast<int>(io::read_u32(is));
  m.config.dims.morph_dim = static_cast<int>(io::read_u32(is));
  m.config.dims.hidden = static_cast<int>(io::read_u32(is));
  m.config.dims.layers = static_cast<int>(io::read_u32(is));
  m.config.dims.use_morph = io::read_u8(is) != 0;
  m.config.arc_dim = static_cast<int>(io::read_u32(is));
  m.config.label_dim = static_cast<int>(io::read_u32(is));
  m.config.learning_rate = io::read_f64(is);
  m.config.single_root = io::read_u8(is) != 0;
  m.aux_tasks = static_cast<int>(io::read_u32(is));
  m.words = Vocab::load(is);
  m.morphs = Vocab::load(is);
  for (int k = 0; k < m.aux_tasks; ++k) {
    m.aux_words.push_back(Vocab::load(is));
    m.aux_morphs.push_back(Vocab::load(is));
  }
  std::uint32_t nl = io::read_u32(is);
  m.labels.resize(nl);
  for (auto& l : m.labels) l = io::read_string(is);
  m.params = ParamStore::load(is);
  return m;
}

BiaffModel BiaffModel::load_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open " + path);
  return load(is);
}

BiaffModel init_biaff(const treebank::Corpus& corpus, const BiaffConfig& cfg) {
  BiaffModel model;
  model.config = cfg;
  for (const auto& s : corpus.sentences) {
    for (const auto& t : s.tokens) {
      model.words.add(t.form);
      model.morphs.add(t.morph);
      if (!t.gold_label.empty() &&
          std::find(model.labels.begin(), model.labels.end(), t.gold_label) ==
              model.labels.end()) {
        model.labels.push_back(t.gold_label);
      }
    }
  }
  std::sort(model.labels.begin(), model.labels.end());
  if (model.labels.empty()) model.labels.push_back("dep");

  Rng rng(cfg.seed);
  init_encoder_params(model.params, "base.", cfg.dims, model.words.size(), model.morphs.size(),
                      rng);
  const int state = cfg.dims.state_dim();
  init_head_params(model.params, "head.arc", state, cfg.arc_dim, rng);
  init_head_params(model.params, "dep.arc", state, cfg.arc_dim, rng);
  init_head_params(model.params, "head.label", state, cfg.label_dim, rng);
  init_head_params(model.params, "dep.label", state, cfg.label_dim, rng);
  init_biaffine_params(model.params, "arc.bi", cfg.arc_dim);
  for (std::size_t l = 0; l < model.labels.size(); ++l) {
    init_biaffine_params(model.params, "lab" + std::to_string(l) + ".bi", cfg.label_dim);
  }
  return model;
}

namespace {

// Per-position fused representations: the base encoder, gated with the
// averaged auxiliary encoders when present. Auxiliary channels map tokens
// through their own vocabularies.
std::vector<Var> build_reps(Graph& g, const BiaffModel& model, const std::vector<int>& word_ids,
                            const std::vector<int>& morph_ids,
                            const treebank::Sentence& sentence, double dropout, Rng* rng) {
  auto& params = const_cast<ParamStore&>(model.params);
  auto base = encode_states(g, params, "base.", model.config.dims, word_ids, morph_ids, dropout,
                            rng);
  if (model.aux_tasks == 0) return base;
  std::vector<std::vector<Var>> aux(static_cast<std::size_t>(model.aux_tasks));
  for (int k = 0; k < model.aux_tasks; ++k) {
    std::vector<int> aw(word_ids.size()), am(word_ids.size());
    aw[0] = Vocab::kRoot;
    am[0] = Vocab::kRoot;
    for (int i = 1; i <= sentence.size(); ++i) {
      aw[static_cast<std::size_t>(i)] =
          model.aux_words[static_cast<std::size_t>(k)].get(sentence.tok(i).form);
      am[static_cast<std::size_t>(i)] =
          model.aux_morphs[static_cast<std::size_t>(k)].get(sentence.tok(i).morph);
    }
    aux[static_cast<std::size_t>(k)] = encode_states(
        g, params, "aux" + std::to_string(k) + ".", model.config.dims, aw, am);
  }
  std::vector<Var> out(base.size());
  for (std::size_t t = 0; t < base.size(); ++t) {
    Var avg = aux[0][t];
    for (int k = 1; k < model.aux_tasks; ++k) {
      avg = g.add(avg, aux[static_cast<std::size_t>(k)][t]);
    }
    avg = g.scale(avg, 1.0 / static_cast<double>(model.aux_tasks));
    out[t] = gated_fusion(g, params, "gate", base[t], avg);
  }
  return out;
}

struct SentenceGraph {
  Var arc_scores;                 // (n+1) x (n+1)
  std::vector<Var> label_heads;   // specialized label reps per position
  std::vector<Var> label_deps;
};

SentenceGraph build_scores(Graph& g, const BiaffModel& model, const std::vector<int>& word_ids,
                           const std::vector<int>& morph_ids,
                           const treebank::Sentence& sentence, double dropout = 0.0,
                           Rng* rng = nullptr) {
  auto& params = const_cast<ParamStore&>(model.params);
  auto reps = build_reps(g, model, word_ids, morph_ids, sentence, dropout, rng);
  std::vector<Var> arc_heads(reps.size()), arc_deps(reps.size());
  SentenceGraph out;
  out.label_heads.resize(reps.size());
  out.label_deps.resize(reps.size());
  for (std::size_t t = 0; t < reps.size(); ++t) {
    arc_heads[t] = relu_head(g, params, "head.arc", reps[t]);
    arc_deps[t] = relu_head(g, params, "dep.arc", reps[t]);
    out.label_heads[t] = relu_head(g, params, "head.label", reps[t]);
    out.label_deps[t] = relu_head(g, params, "dep.label", reps[t]);
  }
  Var H = g.hconcat(arc_heads);
  Var D = g.hconcat(arc_deps);
  out.arc_scores = biaffine_matrix(g, params, "arc.bi", H, D);
  return out;
}

Var label_logits(Graph& g, const BiaffModel& model, const SentenceGraph& sg, int head, int dep) {
  auto& params = const_cast<ParamStore&>(model.params);
  std::vector<Var> scores(model.labels.size());
  for (std::size_t l = 0; l < model.labels.size(); ++l) {
    scores[l] = biaffine_pair(g, params, "lab" + std::to_string(l) + ".bi",
                              sg.label_heads[static_cast<std::size_t>(head)],
                              sg.label_deps[static_cast<std::size_t>(dep)]);
  }
  return g.vconcat(scores);
}

}  // namespace

SentenceLoss biaff_loss(const BiaffModel& model, const treebank::Sentence& sentence) {
  SentenceLoss out;
  const int n = sentence.size();
  if (n == 0) return out;
  Graph g(&const_cast<ParamStore&>(model.params), true);
  auto sg = build_scores(g, model, word_ids_of(model, sentence), morph_ids_of(model, sentence), sentence);
  auto gold_heads = sentence.gold_heads();
  auto gold_labels = sentence.gold_labels();
  for (int d = 1; d <= n; ++d) {
    Var logits = g.col(sg.arc_scores, d);
    out.head_loss += g.scalar(g.softmax_ce(logits, gold_heads[static_cast<std::size_t>(d - 1)]));
    auto it = std::find(model.labels.begin(), model.labels.end(),
                        gold_labels[static_cast<std::size_t>(d - 1)]);
    if (it != model.labels.end()) {
      int target = static_cast<int>(it - model.labels.begin());
      Var ll = label_logits(g, model, sg, gold_heads[static_cast<std::size_t>(d - 1)], d);
      out.label_loss += g.scalar(g.softmax_ce(ll, target));
    }
  }
  out.tokens = n;
  return out;
}

TrainStats train_biaff(BiaffModel& model, const treebank::Corpus& corpus,
                       const treebank::Corpus* dev, std::ostream* log) {
  TrainStats stats;
  const auto& cfg = model.config;
  // Singleton forms for stochastic UNK-ing.
  std::unordered_map<std::string, int> freq;
  for (const auto& s : corpus.sentences) {
    for (const auto& t : s.tokens) ++freq[t.form];
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.sentences[i].size() > 0) order.push_back(i);
  }

  Rng rng(cfg.seed + 17);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    long epoch_tokens = 0;
    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end = std::min(order.size(), at + static_cast<std::size_t>(cfg.batch_size));
      Graph g(&model.params, !cfg.fast_mode);
      std::vector<Var> losses;
      int batch_tokens = 0;
      for (std::size_t bi = at; bi < end; ++bi) {
        const auto& sentence = corpus.sentences[order[bi]];
        auto word_ids = word_ids_of(model, sentence);
        // Stochastic UNK-ing of singletons (training only).
        for (std::size_t t = 1; t < word_ids.size(); ++t) {
          const auto& form = sentence.tok(static_cast<int>(t)).form;
          auto fit = freq.find(form);
          if (fit != freq.end() && fit->second == 1 && rng.uniform_real() < cfg.unk_prob) {
            word_ids[t] = Vocab::kUnk;
          }
        }
        auto sg = build_scores(g, model, word_ids, morph_ids_of(model, sentence), sentence,
                               cfg.fast_mode ? cfg.dropout : 0.0,
                               cfg.fast_mode ? &rng : nullptr);
        auto gold_heads = sentence.gold_heads();
        auto gold_labels = sentence.gold_labels();
        for (int d = 1; d <= sentence.size(); ++d) {
          losses.push_back(g.softmax_ce(g.col(sg.arc_scores, d),
                                        gold_heads[static_cast<std::size_t>(d - 1)]));
          auto it = std::find(model.labels.begin(), model.labels.end(),
                              gold_labels[static_cast<std::size_t>(d - 1)]);
          if (it != model.labels.end()) {
            Var ll = label_logits(g, model, sg, gold_heads[static_cast<std::size_t>(d - 1)], d);
            losses.push_back(g.softmax_ce(ll, static_cast<int>(it - model.labels.begin())));
          }
        }
        batch_tokens += sentence.size();
      }
      if (losses.empty()) continue;
      Var total = g.scale(g.sum(losses), 1.0 / static_cast<double>(batch_tokens));
      double loss_value = g.scalar(total);
      if (!std::isfinite(loss_value)) {
        throw ValidationError("training diverged: non-finite loss at epoch " +
                              std::to_string(epoch));
      }
      epoch_loss += loss_value * batch_tokens;
      epoch_tokens += batch_tokens;
      model.params.zero_grads();
      g.backward(total);
      model.params.adam_step(cfg.learning_rate);
    }
    stats.epoch_loss.push_back(epoch_tokens > 0 ? epoch_loss / static_cast<double>(epoch_tokens)
                                                : 0.0);
    if (dev != nullptr) {
      long correct = 0, correct_lab = 0, total_tokens = 0;
      for (const auto& s : dev->sentences) {
        auto tree = parse_biaff(model, s);
        for (int i = 1; i <= s.size(); ++i) {
          ++total_tokens;
          if (tree.head_of(i) == s.tok(i).gold_head) {
            ++correct;
            if (tree.label_of(i) == s.tok(i).gold_label) ++correct_lab;
          }
        }
      }
      double uas = total_tokens > 0 ? static_cast<double>(correct) / total_tokens : 0.0;
      double las = total_tokens > 0 ? static_cast<double>(correct_lab) / total_tokens : 0.0;
      stats.dev_uas.push_back(uas);
      stats.dev_las.push_back(las);
      if (log != nullptr) {
        *log << "epoch " << epoch + 1 << " loss " << stats.epoch_loss.back() << " dev_uas " << uas
             << " dev_las " << las << "\n";
      }
    } else if (log != nullptr) {
      *log << "epoch " << epoch + 1 << " loss " << stats.epoch_loss.back() << "\n";
    }
  }
  return stats;
}

Eigen::MatrixXd biaff_arc_scores(const BiaffModel& model, const treebank::Sentence& sentence) {
  Graph g(&const_cast<ParamStore&>(model.params), true);
  auto sg = build_scores(g, model, word_ids_of(model, sentence), morph_ids_of(model, sentence), sentence);
  return g.value(sg.arc_scores);
}

treebank::DependencyTree parse_biaff(const BiaffModel& model, const treebank::Sentence& sentence) {
  const int n = sentence.size();
  treebank::DependencyTree tree;
  if (n == 0) return tree;
  Graph g(&const_cast<ParamStore&>(model.params), true);
  auto sg = build_scores(g, model, word_ids_of(model, sentence), morph_ids_of(model, sentence), sentence);
  tree.heads = graph::cle_decode(g.value(sg.arc_scores), model.config.single_root);
  tree.labels.resize(static_cast<std::size_t>(n));
  // Label argmax on the decoded arcs, straight from the representation
  // values (no gradients needed).
  const auto& params = model.params;
  for (int d = 1; d <= n; ++d) {
    int h = tree.heads[static_cast<std::size_t>(d - 1)];
    const Mat& hl = g.value(sg.label_heads[static_cast<std::size_t>(h)]);
    const Mat& dl = g.value(sg.label_deps[static_cast<std::size_t>(d)]);
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < model.labels.size(); ++l) {
      std::string p = "lab" + std::to_string(l) + ".bi";
      const Mat& U = params.value(params.require(p + ".U"));
      const Mat& uh = params.value(params.require(p + ".u_head"));
      const Mat& ud = params.value(params.require(p + ".u_dep"));
      const Mat& b = params.value(params.require(p + ".b"));
      double s = (hl.col(0).dot((U * dl).col(0))) + uh.col(0).dot(hl.col(0)) +
                 ud.col(0).dot(dl.col(0)) + b(0, 0);
      if (s > best_score) {
        best_score = s;
        best = static_cast<int>(l);
      }
    }
    tree.labels[static_cast<std::size_t>(d - 1)] = model.labels[static_cast<std::size_t>(best)];
  }
  return tree;
}

}  // namespace parselab::neural
