#include "parselab/evaluation.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>

namespace parselab::eval {

void check_aligned(const Trees& gold, const Trees& pred) {
  if (gold.size() != pred.size()) {
    throw ValidationError("corpora misaligned: " + std::to_string(gold.size()) + " vs " +
                          std::to_string(pred.size()) + " sentences");
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != pred[i].size()) {
      throw ValidationError("sentence " + std::to_string(i + 1) + " length mismatch");
    }
  }
}

PairScores micro_scores(const Trees& gold, const Trees& pred) {
  check_aligned(gold, pred);
  long tokens = 0, heads_ok = 0, labeled_ok = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (int d = 1; d <= gold[i].size(); ++d) {
      ++tokens;
      if (pred[i].head_of(d) == gold[i].head_of(d)) {
        ++heads_ok;
        if (pred[i].label_of(d) == gold[i].label_of(d)) ++labeled_ok;
      }
    }
  }
  if (tokens == 0) return {0.0, 0.0};
  return {static_cast<double>(heads_ok) / static_cast<double>(tokens),
          static_cast<double>(labeled_ok) / static_cast<double>(tokens)};
}

std::vector<PairScores> sentence_scores(const Trees& gold, const Trees& pred) {
  check_aligned(gold, pred);
  std::vector<PairScores> out(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    out[i] = micro_scores({gold[i]}, {pred[i]});
  }
  return out;
}

PairScores macro_scores(const Trees& gold, const Trees& pred) {
  auto per_sentence = sentence_scores(gold, pred);
  if (per_sentence.empty()) return {0.0, 0.0};
  PairScores sum;
  for (const auto& s : per_sentence) {
    sum.uas += s.uas;
    sum.las += s.las;
  }
  sum.uas /= static_cast<double>(per_sentence.size());
  sum.las /= static_cast<double>(per_sentence.size());
  return sum;
}

Dimension dimension_from_name(const std::string& name) {
  if (name == "sentlen") return Dimension::SentenceLength;
  if (name == "deplen") return Dimension::DependencyLength;
  if (name == "nonproj") return Dimension::NonprojDegree;
  if (name == "rootdist") return Dimension::RootDistance;
  throw UsageError("unknown profile dimension '" + name + "'");
}

std::string dimension_name(Dimension d) {
  switch (d) {
    case Dimension::SentenceLength: return "sentlen";
    case Dimension::DependencyLength: return "deplen";
    case Dimension::NonprojDegree: return "nonproj";
    case Dimension::RootDistance: return "rootdist";
  }
  return "?";
}

namespace {

// Bucket codes: non-negative ints; kRootBucket sorts last.
constexpr int kRootBucket = 1 << 20;

int arc_bucket(const treebank::DependencyTree& tree, int dep, Dimension dim,
               const BucketOptions& opts) {
  const int h = tree.head_of(dep);
  switch (dim) {
    case Dimension::DependencyLength: {
      if (h == 0) return kRootBucket;
      int len = std::abs(h - dep);
      return len > opts.deplen_max ? opts.deplen_max + 1 : len;
    }
    case Dimension::NonprojDegree: {
      int deg = treebank::nonprojectivity_degree(tree, {h, dep, ""});
      return deg > opts.nonproj_max ? opts.nonproj_max + 1 : deg;
    }
    case Dimension::RootDistance: {
      int dist = treebank::root_distance(tree, dep);
      return dist > opts.rootdist_max ? opts.rootdist_max + 1 : dist;
    }
    case Dimension::SentenceLength:
      break;
  }
  throw ValidationError("arc_bucket: bad dimension");
}

std::string bucket_label(int code, Dimension dim, const BucketOptions& opts) {
  if (code == kRootBucket) return "root";
  int max = dim == Dimension::DependencyLength ? opts.deplen_max
            : dim == Dimension::NonprojDegree ? opts.nonproj_max
            : dim == Dimension::RootDistance  ? opts.rootdist_max
                                              : -1;
  if (max >= 0 && code == max + 1) return std::to_string(code) + "+";
  return std::to_string(code);
}

struct Tally {
  long pred_total = 0, pred_unlab = 0, pred_lab = 0;
  long gold_total = 0, gold_unlab = 0, gold_lab = 0;
};

}  // namespace

std::vector<BucketRow> bucket_report(const Trees& gold, const Trees& pred, Dimension dim,
                                     const BucketOptions& opts) {
  check_aligned(gold, pred);
  std::vector<BucketRow> rows;
  if (dim == Dimension::SentenceLength) {
    // Per-length UAS/LAS over the sentences of that length.
    std::map<int, std::vector<std::size_t>> by_len;
    for (std::size_t i = 0; i < gold.size(); ++i) by_len[gold[i].size()].push_back(i);
    for (const auto& [len, idxs] : by_len) {
      if (static_cast<int>(idxs.size()) < opts.min_support) continue;
      Trees g, p;
      for (std::size_t i : idxs) {
        g.push_back(gold[i]);
        p.push_back(pred[i]);
      }
      auto scores = micro_scores(g, p);
      rows.push_back({std::to_string(len), static_cast<long>(idxs.size()), scores.uas, scores.uas,
                      scores.las, scores.las});
    }
    return rows;
  }

  std::map<int, Tally> buckets;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (int d = 1; d <= gold[i].size(); ++d) {
      const bool unlab_ok = pred[i].head_of(d) == gold[i].head_of(d);
      const bool lab_ok = unlab_ok && pred[i].label_of(d) == gold[i].label_of(d);
      int gb = arc_bucket(gold[i], d, dim, opts);
      int pb = arc_bucket(pred[i], d, dim, opts);
      auto& gt = buckets[gb];
      ++gt.gold_total;
      if (unlab_ok) ++gt.gold_unlab;
      if (lab_ok) ++gt.gold_lab;
      auto& pt = buckets[pb];
      ++pt.pred_total;
      if (unlab_ok) ++pt.pred_unlab;
      if (lab_ok) ++pt.pred_lab;
    }
  }
  for (const auto& [code, tally] : buckets) {
    if (tally.gold_total < opts.min_support) continue;
    BucketRow row;
    row.bucket = bucket_label(code, dim, opts);
    row.support = tally.gold_total;
    row.p_unlab = tally.pred_total > 0
                      ? static_cast<double>(tally.pred_unlab) / static_cast<double>(tally.pred_total)
                      : 0.0;
    row.p_lab = tally.pred_total > 0
                    ? static_cast<double>(tally.pred_lab) / static_cast<double>(tally.pred_total)
                    : 0.0;
    row.r_unlab = tally.gold_total > 0
                      ? static_cast<double>(tally.gold_unlab) / static_cast<double>(tally.gold_total)
                      : 0.0;
    row.r_lab = tally.gold_total > 0
                    ? static_cast<double>(tally.gold_lab) / static_cast<double>(tally.gold_total)
                    : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

double mad(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("mad of empty sequence");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double dev = 0.0;
  for (double v : values) dev += std::abs(v - mean);
  return dev / static_cast<double>(values.size());
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ValidationError("paired_t_test: length mismatch");
  if (a.size() < 2) throw ValidationError("paired_t_test: need at least 2 pairs");
  const auto n = static_cast<double>(a.size());
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  double mean = 0.0;
  for (double d : diff) mean += d;
  mean /= n;
  double var = 0.0;
  for (double d : diff) var += (d - mean) * (d - mean);
  var /= (n - 1.0);
  TTestResult out;
  if (var <= 0.0) {
    out.degenerate = true;
    out.t = 0.0;
    out.p = mean == 0.0 ? 1.0 : 0.0;
    return out;
  }
  out.t = mean / std::sqrt(var / n);
  boost::math::students_t dist(n - 1.0);
  out.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t)));
  return out;
}

void write_bucket_csv(std::ostream& os, const std::vector<BucketRow>& rows) {
  os << "bucket,support,p_unlab,r_unlab,p_lab,r_lab\n";
  os << std::fixed << std::setprecision(6);
  for (const auto& row : rows) {
    os << row.bucket << ',' << row.support << ',' << row.p_unlab << ',' << row.r_unlab << ','
       << row.p_lab << ',' << row.r_lab << '\n';
  }
}

}  // namespace parselab::eval
