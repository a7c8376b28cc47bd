#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "parselab/errors.hpp"
#include "parselab/rng.hpp"

namespace parselab::neural {

using Mat = Eigen::MatrixXd;

// Named dense parameters with gradients and Adam state.
class ParamStore {
 public:
  int add(const std::string& name, Mat value, bool trainable = true);
  int find(const std::string& name) const;  // -1 when absent
  int require(const std::string& name) const;

  Mat& value(int id) { return values_[static_cast<std::size_t>(id)]; }
  const Mat& value(int id) const { return values_[static_cast<std::size_t>(id)]; }
  Mat& grad(int id) { return grads_[static_cast<std::size_t>(id)]; }
  const std::string& name(int id) const { return names_[static_cast<std::size_t>(id)]; }
  bool trainable(int id) const { return trainable_[static_cast<std::size_t>(id)] != 0; }
  void set_trainable(int id, bool t) { trainable_[static_cast<std::size_t>(id)] = t ? 1 : 0; }
  int size() const { return static_cast<int>(values_.size()); }

  void zero_grads();

  // Adam with bias correction; frozen parameters are skipped.
  void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void sgd_step(double lr);

  // Copy every parameter whose name starts with `src_prefix` from `other`
  // into this store under `dst_prefix` (created when absent).
  void copy_prefix(const ParamStore& other, const std::string& src_prefix,
                   const std::string& dst_prefix, bool trainable);

  void save(std::ostream& os) const;
  static ParamStore load(std::istream& is);

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  std::vector<Mat> values_;
  std::vector<Mat> grads_;
  std::vector<Mat> adam_m_, adam_v_;
  std::vector<char> trainable_;
  std::int64_t step_ = 0;
};

struct Var {
  int id = -1;
};

// Reverse-mode tape over Eigen matrices. Column vectors are (k, 1) matrices.
// One Graph per forward pass; backward() accumulates into the ParamStore.
class Graph {
 public:
  explicit Graph(ParamStore* params, bool check_finite = true)
      : params_(params), check_finite_(check_finite) {}

  Var input(Mat v);
  Var param(int param_id);
  Var lookup(int param_id, int row);  // table row as a column vector

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var scale(Var a, double c);
  Var add_scalar(Var a, double c);
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var sigmoid(Var a);
  Var tanh_(Var a);
  Var relu(Var a);
  Var rows(Var a, int first, int count);
  Var col(Var a, int j);
  Var vconcat(const std::vector<Var>& vs);
  Var hconcat(const std::vector<Var>& vs);
  // out(i,j) = s(i,j) + col_add(i) + row_add(j) + bias(0,0)
  Var affine_rowcol(Var s, Var row_add, Var col_add, Var bias);
  Var dot(Var a, Var b);  // column vectors -> 1x1
  Var sum(const std::vector<Var>& scalars);
  // -log softmax(logits)[target]; logits is a column vector.
  Var softmax_ce(Var logits, int target);
  Var dropout(Var a, double rate, Rng& rng);

  const Mat& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }
  double scalar(Var v) const;
  void backward(Var loss);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::function<void()> back;  // empty for leaves
  };

  Var make(Mat value, std::function<void()> back = {});
  Mat& grad(Var v) { return nodes_[static_cast<std::size_t>(v.id)].grad; }

  ParamStore* params_;
  bool check_finite_;
  std::vector<Node> nodes_;
};

// Central finite differences of `f` with respect to every entry of parameter
// `pid`; used by the gradient-check tests and exposed so other modules can
// self-verify.
Mat finite_difference(ParamStore& params, int pid, const std::function<double()>& f,
                      double step = 1e-5);

// Glorot-style uniform init.
Mat glorot(int rows, int cols, Rng& rng);

}  // namespace parselab::neural
