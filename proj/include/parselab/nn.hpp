#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "parselab/autodiff.hpp"
#include "parselab/treebank.hpp"

namespace parselab::neural {

// String table with reserved UNK/ROOT entries.
struct Vocab {
  static constexpr int kUnk = 0;
  static constexpr int kRoot = 1;

  std::vector<std::string> items{"<UNK>", "<ROOT>"};
  std::unordered_map<std::string, int> index{{"<UNK>", kUnk}, {"<ROOT>", kRoot}};

  int add(const std::string& s);
  int get(const std::string& s) const;
  int size() const { return static_cast<int>(items.size()); }

  void save(std::ostream& os) const;
  static Vocab load(std::istream& is);
};

struct EncoderDims {
  int word_dim = 100;
  int morph_dim = 25;
  int hidden = 100;  // per direction
  int layers = 2;
  bool use_morph = true;

  int input_dim() const { return word_dim + (use_morph ? morph_dim : 0); }
  int state_dim() const { return 2 * hidden; }
};

// Parameter layout under `prefix`:
//   <prefix>emb.word, <prefix>emb.morph
//   <prefix>l<k>.{fwd,bwd}.{W,U,b}   gates stacked [i; f; o; g]
void init_encoder_params(ParamStore& params, const std::string& prefix, const EncoderDims& dims,
                         int word_vocab, int morph_vocab, Rng& rng);

// Token/morph ids for positions 0..n; position 0 must be Vocab::kRoot.
// Returns one (2*hidden x 1) state per position.
std::vector<Var> encode_states(Graph& g, ParamStore& params, const std::string& prefix,
                               const EncoderDims& dims, const std::vector<int>& word_ids,
                               const std::vector<int>& morph_ids, double dropout_rate = 0.0,
                               Rng* dropout_rng = nullptr);

// One LSTM direction over already-built input vectors.
std::vector<Var> lstm_run(Graph& g, ParamStore& params, const std::string& prefix,
                          const std::vector<Var>& inputs, int hidden, bool reverse);

// ReLU(W x + b); parameters <prefix>.W / <prefix>.b.
void init_head_params(ParamStore& params, const std::string& prefix, int in_dim, int out_dim,
                      Rng& rng);
Var relu_head(Graph& g, ParamStore& params, const std::string& prefix, Var x);

// Biaffine block parameters: <prefix>.U (d x d), <prefix>.u_head, <prefix>.u_dep,
// <prefix>.b (1x1). Zero-initialized so untrained scores are uniform.
void init_biaffine_params(ParamStore& params, const std::string& prefix, int dim);

// score(h, d) = head_h' U dep_d + u_head . head_h + u_dep . dep_d + b for all
// pairs; heads/deps are (d x m) matrices of column representations.
Var biaffine_matrix(Graph& g, ParamStore& params, const std::string& prefix, Var heads, Var deps);

// Single-pair biaffine score (1x1).
Var biaffine_pair(Graph& g, ParamStore& params, const std::string& prefix, Var head, Var dep);

// The definitional form W'(Wx + b) + b' on plain matrices.
Mat biaffine_apply(const Mat& x, const Mat& W, const Mat& b, const Mat& Wp, const Mat& bp);

// g = sigmoid(W [base; aux] + b); out = g .* base + (1-g) .* aux.
// Parameters <prefix>.W (d x 2d) and <prefix>.b (d x 1).
void init_gate_params(ParamStore& params, const std::string& prefix, int dim, Rng& rng);
Var gated_fusion(Graph& g, ParamStore& params, const std::string& prefix, Var base, Var aux);

}  // namespace parselab::neural
