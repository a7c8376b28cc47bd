#include "parselab/graph_parser.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <ostream>

#include "parselab/rng.hpp"

namespace parselab::graph {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

ArcScores score_arcs(const linear::LinearModel& model, const treebank::Sentence& sentence,
                     bool averaged) {
  const int n = sentence.size();
  const auto& fcfg = model.feature_config();
  ArcScores out;
  out.scores = Eigen::MatrixXd::Constant(n + 1, n + 1, kNegInf);
  out.labels = model.labels();
  const std::size_t L = out.labels.size();
  out.label_scores.assign(static_cast<std::size_t>(n + 1) * (n + 1) * L, 0.0);
  for (int h = 0; h <= n; ++h) {
    for (int d = 1; d <= n; ++d) {
      if (h == d) continue;
      out.scores(h, d) = model.score(features::edge_features(sentence, h, d, fcfg), averaged);
      for (std::size_t l = 0; l < L; ++l) {
        auto fv = features::edge_label_features(sentence, h, d, out.labels[l], fcfg);
        out.label_scores[(static_cast<std::size_t>(h) * (n + 1) + d) * L + l] =
            model.score(fv, averaged);
      }
    }
  }
  return out;
}

namespace {

// Chu-Liu-Edmonds by recursive cycle contraction. Each level works on its
// own node ids (contractions introduce fresh ids), picks the best incoming
// arc per node, and if that forms a cycle contracts it and recurses; the
// expansion step maps the contracted solution back before returning.
using ScoreMap = std::map<int, std::map<int, double>>;  // sc[head][dep]

std::map<int, int> cle_recurse(const std::vector<int>& nodes, const ScoreMap& sc, int next_id) {
  // Best incoming arc per node; scanning heads in ascending id order makes
  // ties prefer the lower head.
  std::map<int, int> best_in;
  std::vector<int> heads_order{0};
  heads_order.insert(heads_order.end(), nodes.begin(), nodes.end());
  for (int v : nodes) {
    double best = kNegInf;
    int best_u = -1;
    for (int u : heads_order) {
      if (u == v) continue;
      auto itu = sc.find(u);
      if (itu == sc.end()) continue;
      auto itv = itu->second.find(v);
      if (itv == itu->second.end()) continue;
      if (itv->second > best) {
        best = itv->second;
        best_u = u;
      }
    }
    best_in[v] = best_u;
  }

  // Detect a cycle among the chosen arcs.
  std::map<int, int> color;  // 0/absent unseen, 1 on path, 2 done
  std::vector<int> cycle;
  for (int v0 : nodes) {
    if (color.count(v0)) continue;
    std::vector<int> path;
    int x = v0;
    while (x != 0 && !color.count(x)) {
      color[x] = 1;
      path.push_back(x);
      x = best_in[x];
    }
    if (x != 0 && color[x] == 1) {
      auto it = std::find(path.begin(), path.end(), x);
      cycle.assign(it, path.end());
    }
    for (int u : path) color[u] = 2;
    if (!cycle.empty()) break;
  }
  if (cycle.empty()) return best_in;

  // Contract the cycle into a fresh node.
  const int super = next_id;
  std::map<int, char> in_cycle;
  for (int w : cycle) in_cycle[w] = 1;

  std::vector<int> new_nodes;
  for (int v : nodes) {
    if (!in_cycle.count(v)) new_nodes.push_back(v);
  }
  new_nodes.push_back(super);

  ScoreMap new_sc;
  std::map<int, int> enter_at;  // head u -> cycle node its arc displaces
  std::map<int, int> exit_from; // dependent v -> cycle node heading it
  std::vector<int> outside_heads{0};
  for (int v : nodes) {
    if (!in_cycle.count(v)) outside_heads.push_back(v);
  }
  for (int u : outside_heads) {
    auto itu = sc.find(u);
    if (itu == sc.end()) continue;
    double best = kNegInf;
    int best_w = -1;
    for (int w : cycle) {
      auto itw = itu->second.find(w);
      if (itw == itu->second.end()) continue;
      double gain = itw->second - sc.at(best_in[w]).at(w);
      if (gain > best) {
        best = gain;
        best_w = w;
      }
    }
    if (best_w >= 0) {
      new_sc[u][super] = best;
      enter_at[u] = best_w;
    }
  }
  for (int v : nodes) {
    if (in_cycle.count(v)) continue;
    double best = kNegInf;
    int best_w = -1;
    for (int w : cycle) {
      auto itw = sc.find(w);
      if (itw == sc.end()) continue;
      auto itv = itw->second.find(v);
      if (itv == itw->second.end()) continue;
      if (itv->second > best) {
        best = itv->second;
        best_w = w;
      }
    }
    if (best_w >= 0) new_sc[super][v] = best;
    exit_from[v] = best_w;
  }
  for (int u : outside_heads) {
    auto itu = sc.find(u);
    if (itu == sc.end()) continue;
    for (const auto& [v, s] : itu->second) {
      if (v != 0 && !in_cycle.count(v) && u != v) new_sc[u][v] = s;
    }
  }

  auto sub = cle_recurse(new_nodes, new_sc, next_id + 1);

  // Expand.
  std::map<int, int> result;
  int break_node = -1;
  for (const auto& [v, u] : sub) {
    if (v == super) {
      break_node = enter_at.at(u);
      result[break_node] = u;
    } else if (u == super) {
      result[v] = exit_from.at(v);
    } else {
      result[v] = u;
    }
  }
  for (int w : cycle) {
    if (w != break_node) result[w] = best_in[w];
  }
  return result;
}

std::vector<int> cle_solve(const Eigen::MatrixXd& scores) {
  const int n = static_cast<int>(scores.rows()) - 1;
  std::vector<int> nodes(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) nodes[static_cast<std::size_t>(i - 1)] = i;
  ScoreMap sc;
  for (int u = 0; u <= n; ++u) {
    for (int v = 1; v <= n; ++v) {
      if (u != v) sc[u][v] = scores(u, v);
    }
  }
  auto best = cle_recurse(nodes, sc, n + 1);
  std::vector<int> heads(static_cast<std::size_t>(n), 0);
  for (int v = 1; v <= n; ++v) heads[static_cast<std::size_t>(v - 1)] = best.at(v);
  return heads;
}

}  // namespace

std::vector<int> cle_decode(const Eigen::MatrixXd& scores, bool single_root) {
  const int n = static_cast<int>(scores.rows()) - 1;
  if (n <= 0) return {};
  if (!single_root) return cle_solve(scores);
  // Try each token as the unique root child and keep the best total.
  std::vector<int> best_heads;
  double best = kNegInf;
  for (int r = 1; r <= n; ++r) {
    Eigen::MatrixXd s = scores;
    for (int d = 1; d <= n; ++d) {
      if (d != r) s(0, d) = kNegInf;
    }
    auto heads = s.rows() == 2 ? std::vector<int>{0} : cle_solve(s);
    double total = tree_score(scores, heads);
    if (total > best) {
      best = total;
      best_heads = heads;
    }
  }
  return best_heads;
}

treebank::DependencyTree cle_decode(const ArcScores& scores, bool single_root) {
  treebank::DependencyTree tree;
  tree.heads = cle_decode(scores.scores, single_root);
  tree.labels = assign_labels(scores, tree.heads);
  return tree;
}

std::vector<int> eisner_decode(const Eigen::MatrixXd& scores) {
  const int n = static_cast<int>(scores.rows()) - 1;
  std::vector<int> heads(static_cast<std::size_t>(n), 0);
  if (n <= 0) return heads;
  const int m = n + 1;
  // complete[i][j][dir], incomplete[i][j][dir]; dir 0 = left arrow (head j),
  // dir 1 = right arrow (head i). Backpointers store the split.
  auto idx = [m](int i, int j) { return i * m + j; };
  std::vector<double> comp0(m * m, 0.0), comp1(m * m, 0.0), inc0(m * m, 0.0), inc1(m * m, 0.0);
  std::vector<int> bcomp0(m * m, -1), bcomp1(m * m, -1), binc0(m * m, -1), binc1(m * m, -1);

  for (int len = 1; len <= n; ++len) {
    for (int i = 0; i + len <= n; ++i) {
      int j = i + len;
      // Incomplete spans: arc between i and j, split in [i, j).
      double best0 = kNegInf, best1 = kNegInf;
      int arg0 = -1, arg1 = -1;
      for (int k = i; k < j; ++k) {
        double base = comp1[idx(i, k)] + comp0[idx(k + 1, j)];
        if (i > 0) {
          double cand = base + scores(j, i);
          if (cand > best0) {
            best0 = cand;
            arg0 = k;
          }
        }
        double cand = base + scores(i, j);
        if (cand > best1) {
          best1 = cand;
          arg1 = k;
        }
      }
      inc0[idx(i, j)] = best0;
      binc0[idx(i, j)] = arg0;
      inc1[idx(i, j)] = best1;
      binc1[idx(i, j)] = arg1;
      // Complete spans.
      best0 = kNegInf;
      best1 = kNegInf;
      arg0 = -1;
      arg1 = -1;
      for (int k = i; k < j; ++k) {
        double cand = comp0[idx(i, k)] + inc0[idx(k, j)];
        if (cand > best0) {
          best0 = cand;
          arg0 = k;
        }
      }
      for (int k = i + 1; k <= j; ++k) {
        double cand = inc1[idx(i, k)] + comp1[idx(k, j)];
        if (cand > best1) {
          best1 = cand;
          arg1 = k;
        }
      }
      comp0[idx(i, j)] = best0;
      bcomp0[idx(i, j)] = arg0;
      comp1[idx(i, j)] = best1;
      bcomp1[idx(i, j)] = arg1;
    }
  }

  // Backtrack.
  struct Item {
    int i, j, dir;
    bool complete;
  };
  std::vector<Item> agenda{{0, n, 1, true}};
  while (!agenda.empty()) {
    auto [i, j, dir, complete] = agenda.back();
    agenda.pop_back();
    if (i == j) continue;
    if (complete) {
      if (dir == 1) {
        int k = bcomp1[idx(i, j)];
        agenda.push_back({i, k, 1, false});
        agenda.push_back({k, j, 1, true});
      } else {
        int k = bcomp0[idx(i, j)];
        agenda.push_back({i, k, 0, true});
        agenda.push_back({k, j, 0, false});
      }
    } else {
      int k = dir == 1 ? binc1[idx(i, j)] : binc0[idx(i, j)];
      if (dir == 1) {
        heads[static_cast<std::size_t>(j - 1)] = i;
      } else {
        heads[static_cast<std::size_t>(i - 1)] = j;
      }
      agenda.push_back({i, k, 1, true});
      agenda.push_back({k + 1, j, 0, true});
    }
  }
  return heads;
}

treebank::DependencyTree eisner_decode(const ArcScores& scores) {
  treebank::DependencyTree tree;
  tree.heads = eisner_decode(scores.scores);
  tree.labels = assign_labels(scores, tree.heads);
  return tree;
}

double tree_score(const Eigen::MatrixXd& scores, const std::vector<int>& heads) {
  double total = 0.0;
  for (std::size_t d = 0; d < heads.size(); ++d) {
    total += scores(heads[d], static_cast<int>(d) + 1);
  }
  return total;
}

std::vector<std::string> assign_labels(const ArcScores& scores, const std::vector<int>& heads) {
  const std::size_t L = scores.labels.size();
  std::vector<std::string> labels(heads.size());
  for (std::size_t d = 0; d < heads.size(); ++d) {
    std::size_t best = 0;
    double best_score = kNegInf;
    for (std::size_t l = 0; l < L; ++l) {
      double s = scores.label_score(heads[d], static_cast<int>(d) + 1, static_cast<int>(l));
      if (s > best_score) {
        best_score = s;
        best = l;
      }
    }
    labels[d] = L > 0 ? scores.labels[best] : "";
  }
  return labels;
}

namespace {

features::FeatureVector tree_features(const treebank::Sentence& sentence,
                                      const std::vector<int>& heads,
                                      const std::vector<std::string>& labels,
                                      const features::FeatureConfig& fcfg) {
  features::FeatureVector fv;
  for (std::size_t d = 0; d < heads.size(); ++d) {
    auto ef = features::edge_features(sentence, heads[d], static_cast<int>(d) + 1, fcfg);
    fv.entries.insert(fv.entries.end(), ef.entries.begin(), ef.entries.end());
    auto lf = features::edge_label_features(sentence, heads[d], static_cast<int>(d) + 1,
                                            labels[d], fcfg);
    fv.entries.insert(fv.entries.end(), lf.entries.begin(), lf.entries.end());
  }
  fv.finalize();
  return fv;
}

}  // namespace

linear::LinearModel train_margin(const treebank::Corpus& corpus, const MarginTrainOptions& opts) {
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

  linear::LinearModel model(opts.feature_config, labels, 0);

  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  Rng rng(opts.seed);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      const auto& sentence = corpus.sentences[idx];
      const int n = sentence.size();
      if (n == 0) continue;
      auto gold_heads = sentence.gold_heads();
      auto gold_labels = sentence.gold_labels();
      ArcScores scores = score_arcs(model, sentence, /*averaged=*/false);
      if (opts.loss == LossKind::Margin) {
        // Cost-augmented decoding: +1 for every wrong head.
        for (int h = 0; h <= n; ++h) {
          for (int d = 1; d <= n; ++d) {
            if (h != d && h != gold_heads[static_cast<std::size_t>(d - 1)]) {
              scores.scores(h, d) += 1.0;
            }
          }
        }
      }
      std::vector<int> pred_heads = opts.decoder == Decoder::Cle
                                        ? cle_decode(scores.scores, opts.single_root)
                                        : eisner_decode(scores.scores);
      auto pred_labels = assign_labels(scores, pred_heads);
      if (pred_heads != gold_heads || pred_labels != gold_labels) {
        auto gold_fv = tree_features(sentence, gold_heads, gold_labels, opts.feature_config);
        auto pred_fv = tree_features(sentence, pred_heads, pred_labels, opts.feature_config);
        model.update(gold_fv, 1.0);
        model.update(pred_fv, -1.0);
      }
      model.tick();
    }
    if (opts.dev != nullptr && opts.log != nullptr) {
      long correct = 0, correct_lab = 0, total = 0;
      for (const auto& s : opts.dev->sentences) {
        if (s.size() == 0) continue;
        ArcScores sc = score_arcs(model, s, /*averaged=*/false);
        auto heads = opts.decoder == Decoder::Cle ? cle_decode(sc.scores, opts.single_root)
                                                  : eisner_decode(sc.scores);
        auto labels = assign_labels(sc, heads);
        for (int i = 1; i <= s.size(); ++i) {
          ++total;
          if (heads[static_cast<std::size_t>(i - 1)] == s.tok(i).gold_head) {
            ++correct;
            if (labels[static_cast<std::size_t>(i - 1)] == s.tok(i).gold_label) ++correct_lab;
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

treebank::DependencyTree parse_graph(const linear::LinearModel& model,
                                     const treebank::Sentence& sentence, Decoder decoder,
                                     bool single_root) {
  ArcScores scores = score_arcs(model, sentence, /*averaged=*/true);
  return decoder == Decoder::Cle ? cle_decode(scores, single_root) : eisner_decode(scores);
}

}  // namespace parselab::graph
