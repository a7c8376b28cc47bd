#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "parselab/treebank.hpp"

namespace parselab::eval {

using Trees = std::vector<treebank::DependencyTree>;

struct PairScores {
  double uas = 0.0;
  double las = 0.0;
};

void check_aligned(const Trees& gold, const Trees& pred);

// Token-level scores normalized by the corpus token count.
PairScores micro_scores(const Trees& gold, const Trees& pred);

// Unweighted mean of per-sentence scores.
PairScores macro_scores(const Trees& gold, const Trees& pred);

std::vector<PairScores> sentence_scores(const Trees& gold, const Trees& pred);

enum class Dimension { SentenceLength, DependencyLength, NonprojDegree, RootDistance };

Dimension dimension_from_name(const std::string& name);
std::string dimension_name(Dimension d);

struct BucketRow {
  std::string bucket;
  long support = 0;        // gold-side universe size for this bucket
  double p_unlab = 0.0;
  double r_unlab = 0.0;
  double p_lab = 0.0;
  double r_lab = 0.0;
};

struct BucketOptions {
  int min_support = 0;
  int deplen_max = 9;    // exact buckets 1..deplen_max, then "<max+1>+"; root arcs separate
  int nonproj_max = 3;   // exact buckets 0..nonproj_max, then "+"
  int rootdist_max = 6;  // exact buckets 1..rootdist_max, then "+"
};

// Precision buckets by the predicted arc's attribute, recall by the gold
// arc's attribute; the sentence-length dimension reports per-length UAS/LAS
// in the precision and recall columns instead.
std::vector<BucketRow> bucket_report(const Trees& gold, const Trees& pred, Dimension dim,
                                     const BucketOptions& opts = {});

// Mean absolute deviation from the arithmetic mean.
double mad(const std::vector<double>& values);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  bool degenerate = false;  // zero-variance differences
};

// Two-sided paired t-test over aligned score sequences.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

void write_bucket_csv(std::ostream& os, const std::vector<BucketRow>& rows);

}  // namespace parselab::eval
