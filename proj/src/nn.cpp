#include "parselab/nn.hpp"

#include <iostream>

#include "parselab/serialize.hpp"

namespace parselab::neural {

int Vocab::add(const std::string& s) {
  auto it = index.find(s);
  if (it != index.end()) return it->second;
  int id = static_cast<int>(items.size());
  items.push_back(s);
  index[s] = id;
  return id;
}

int Vocab::get(const std::string& s) const {
  auto it = index.find(s);
  return it == index.end() ? kUnk : it->second;
}

void Vocab::save(std::ostream& os) const {
  io::write_u32(os, static_cast<std::uint32_t>(items.size()));
  for (const auto& s : items) io::write_string(os, s);
}

Vocab Vocab::load(std::istream& is) {
  Vocab v;
  v.items.clear();
  v.index.clear();
  std::uint32_t n = io::read_u32(is);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string s = io::read_string(is);
    v.index[s] = static_cast<int>(v.items.size());
    v.items.push_back(std::move(s));
  }
  return v;
}

void init_encoder_params(ParamStore& params, const std::string& prefix, const EncoderDims& dims,
                         int word_vocab, int morph_vocab, Rng& rng) {
  params.add(prefix + "emb.word", glorot(word_vocab, dims.word_dim, rng));
  if (dims.use_morph) params.add(prefix + "emb.morph", glorot(morph_vocab, dims.morph_dim, rng));
  int in = dims.input_dim();
  for (int l = 0; l < dims.layers; ++l) {
    for (const char* dir : {"fwd", "bwd"}) {
      std::string p = prefix + "l" + std::to_string(l) + "." + dir + ".";
      params.add(p + "W", glorot(4 * dims.hidden, in, rng));
      params.add(p + "U", glorot(4 * dims.hidden, dims.hidden, rng));
      params.add(p + "b", Mat::Zero(4 * dims.hidden, 1));
    }
    in = dims.state_dim();
  }
}

std::vector<Var> lstm_run(Graph& g, ParamStore& params, const std::string& prefix,
                          const std::vector<Var>& inputs, int hidden, bool reverse) {
  const int W = params.require(prefix + "W");
  const int U = params.require(prefix + "U");
  const int b = params.require(prefix + "b");
  Var Wv = g.param(W), Uv = g.param(U), bv = g.param(b);
  Var h = g.input(Mat::Zero(hidden, 1));
  Var c = g.input(Mat::Zero(hidden, 1));
  std::vector<Var> states(inputs.size());
  const int n = static_cast<int>(inputs.size());
  for (int step = 0; step < n; ++step) {
    int t = reverse ? n - 1 - step : step;
    Var gates = g.add(g.add(g.matmul(Wv, inputs[static_cast<std::size_t>(t)]), g.matmul(Uv, h)),
                      bv);
    Var i_g = g.sigmoid(g.rows(gates, 0, hidden));
    Var f_g = g.sigmoid(g.rows(gates, hidden, hidden));
    Var o_g = g.sigmoid(g.rows(gates, 2 * hidden, hidden));
    Var c_t = g.tanh_(g.rows(gates, 3 * hidden, hidden));
    c = g.add(g.mul(f_g, c), g.mul(i_g, c_t));
    h = g.mul(o_g, g.tanh_(c));
    states[static_cast<std::size_t>(t)] = h;
  }
  return states;
}

std::vector<Var> encode_states(Graph& g, ParamStore& params, const std::string& prefix,
                               const EncoderDims& dims, const std::vector<int>& word_ids,
                               const std::vector<int>& morph_ids, double dropout_rate,
                               Rng* dropout_rng) {
  const int word_emb = params.require(prefix + "emb.word");
  const int morph_emb = dims.use_morph ? params.require(prefix + "emb.morph") : -1;
  std::vector<Var> layer_in(word_ids.size());
  for (std::size_t t = 0; t < word_ids.size(); ++t) {
    Var w = g.lookup(word_emb, word_ids[t]);
    if (dims.use_morph) {
      Var m = g.lookup(morph_emb, morph_ids[t]);
      layer_in[t] = g.vconcat({w, m});
    } else {
      layer_in[t] = w;
    }
    if (dropout_rate > 0.0 && dropout_rng != nullptr) {
      layer_in[t] = g.dropout(layer_in[t], dropout_rate, *dropout_rng);
    }
  }
  for (int l = 0; l < dims.layers; ++l) {
    std::string lp = prefix + "l" + std::to_string(l) + ".";
    auto fwd = lstm_run(g, params, lp + "fwd.", layer_in, dims.hidden, false);
    auto bwd = lstm_run(g, params, lp + "bwd.", layer_in, dims.hidden, true);
    for (std::size_t t = 0; t < layer_in.size(); ++t) {
      layer_in[t] = g.vconcat({fwd[t], bwd[t]});
      if (dropout_rate > 0.0 && dropout_rng != nullptr && l + 1 < dims.layers) {
        layer_in[t] = g.dropout(layer_in[t], dropout_rate, *dropout_rng);
      }
    }
  }
  return layer_in;
}

void init_head_params(ParamStore& params, const std::string& prefix, int in_dim, int out_dim,
                      Rng& rng) {
  params.add(prefix + ".W", glorot(out_dim, in_dim, rng));
  params.add(prefix + ".b", Mat::Zero(out_dim, 1));
}

Var relu_head(Graph& g, ParamStore& params, const std::string& prefix, Var x) {
  Var W = g.param(params.require(prefix + ".W"));
  Var b = g.param(params.require(prefix + ".b"));
  return g.relu(g.add(g.matmul(W, x), b));
}

void init_biaffine_params(ParamStore& params, const std::string& prefix, int dim) {
  params.add(prefix + ".U", Mat::Zero(dim, dim));
  params.add(prefix + ".u_head", Mat::Zero(dim, 1));
  params.add(prefix + ".u_dep", Mat::Zero(dim, 1));
  params.add(prefix + ".b", Mat::Zero(1, 1));
}

Var biaffine_matrix(Graph& g, ParamStore& params, const std::string& prefix, Var heads,
                    Var deps) {
  Var U = g.param(params.require(prefix + ".U"));
  Var uh = g.param(params.require(prefix + ".u_head"));
  Var ud = g.param(params.require(prefix + ".u_dep"));
  Var b = g.param(params.require(prefix + ".b"));
  Var bilinear = g.matmul(g.transpose(heads), g.matmul(U, deps));
  Var row_add = g.matmul(g.transpose(deps), ud);   // per-column (dependent) term
  Var col_add = g.matmul(g.transpose(heads), uh);  // per-row (head) term
  return g.affine_rowcol(bilinear, row_add, col_add, b);
}

Var biaffine_pair(Graph& g, ParamStore& params, const std::string& prefix, Var head, Var dep) {
  Var U = g.param(params.require(prefix + ".U"));
  Var uh = g.param(params.require(prefix + ".u_head"));
  Var ud = g.param(params.require(prefix + ".u_dep"));
  Var b = g.param(params.require(prefix + ".b"));
  Var s = g.dot(head, g.matmul(U, dep));
  return g.add(g.add(g.dot(uh, head), g.dot(ud, dep)), g.add(s, b));
}

Mat biaffine_apply(const Mat& x, const Mat& W, const Mat& b, const Mat& Wp, const Mat& bp) {
  if (W.cols() != x.rows() || b.rows() != W.rows() || Wp.cols() != W.rows() ||
      bp.rows() != Wp.rows()) {
    throw ValidationError("biaffine_apply shape mismatch");
  }
  return Wp * (W * x + b) + bp;
}

void init_gate_params(ParamStore& params, const std::string& prefix, int dim, Rng& rng) {
  params.add(prefix + ".W", glorot(dim, 2 * dim, rng));
  params.add(prefix + ".b", Mat::Zero(dim, 1));
}

Var gated_fusion(Graph& g, ParamStore& params, const std::string& prefix, Var base, Var aux) {
  Var W = g.param(params.require(prefix + ".W"));
  Var b = g.param(params.require(prefix + ".b"));
  Var gate = g.sigmoid(g.add(g.matmul(W, g.vconcat({base, aux})), b));
  Var ones = g.input(Mat::Ones(g.value(base).rows(), 1));
  return g.add(g.mul(gate, base), g.mul(g.sub(ones, gate), aux));
}

}  // namespace parselab::neural
