#include "parselab/autodiff.hpp"

#include <cmath>
#include <iostream>

#include "parselab/serialize.hpp"

namespace parselab::neural {

int ParamStore::add(const std::string& name, Mat value, bool trainable) {
  if (index_.count(name)) throw ValidationError("duplicate parameter name " + name);
  int id = static_cast<int>(values_.size());
  index_[name] = id;
  names_.push_back(name);
  grads_.emplace_back(Mat::Zero(value.rows(), value.cols()));
  adam_m_.emplace_back(Mat::Zero(value.rows(), value.cols()));
  adam_v_.emplace_back(Mat::Zero(value.rows(), value.cols()));
  values_.push_back(std::move(value));
  trainable_.push_back(trainable ? 1 : 0);
  return id;
}

int ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

int ParamStore::require(const std::string& name) const {
  int id = find(name);
  if (id < 0) throw ValidationError("missing parameter " + name);
  return id;
}

void ParamStore::zero_grads() {
  for (auto& g : grads_) g.setZero();
}

void ParamStore::adam_step(double lr, double beta1, double beta2, double eps) {
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!trainable_[i]) continue;
    adam_m_[i] = beta1 * adam_m_[i] + (1.0 - beta1) * grads_[i];
    adam_v_[i] = beta2 * adam_v_[i].array().matrix() +
                 (1.0 - beta2) * grads_[i].array().square().matrix();
    Mat mhat = adam_m_[i] / bc1;
    Mat vhat = adam_v_[i] / bc2;
    values_[i].array() -= lr * mhat.array() / (vhat.array().sqrt() + eps);
  }
}

void ParamStore::sgd_step(double lr) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!trainable_[i]) continue;
    values_[i] -= lr * grads_[i];
  }
}

void ParamStore::copy_prefix(const ParamStore& other, const std::string& src_prefix,
                             const std::string& dst_prefix, bool trainable) {
  for (int i = 0; i < other.size(); ++i) {
    const std::string& n = other.names_[static_cast<std::size_t>(i)];
    if (n.rfind(src_prefix, 0) != 0) continue;
    std::string dst = dst_prefix + n.substr(src_prefix.size());
    int id = find(dst);
    if (id < 0) {
      add(dst, other.values_[static_cast<std::size_t>(i)], trainable);
    } else {
      values_[static_cast<std::size_t>(id)] = other.values_[static_cast<std::size_t>(i)];
      trainable_[static_cast<std::size_t>(id)] = trainable ? 1 : 0;
    }
  }
}

void ParamStore::save(std::ostream& os) const {
  io::write_u32(os, static_cast<std::uint32_t>(values_.size()));
  for (std::size_t i = 0; i < values_.size(); ++i) {
    io::write_string(os, names_[i]);
    io::write_u8(os, trainable_[i]);
    io::write_u32(os, static_cast<std::uint32_t>(values_[i].rows()));
    io::write_u32(os, static_cast<std::uint32_t>(values_[i].cols()));
    for (Eigen::Index c = 0; c < values_[i].cols(); ++c) {
      for (Eigen::Index r = 0; r < values_[i].rows(); ++r) {
        io::write_f64(os, values_[i](r, c));
      }
    }
  }
}

ParamStore ParamStore::load(std::istream& is) {
  ParamStore ps;
  std::uint32_t count = io::read_u32(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = io::read_string(is);
    bool trainable = io::read_u8(is) != 0;
    std::uint32_t rows = io::read_u32(is);
    std::uint32_t cols = io::read_u32(is);
    Mat m(rows, cols);
    for (std::uint32_t c = 0; c < cols; ++c) {
      for (std::uint32_t r = 0; r < rows; ++r) m(r, c) = io::read_f64(is);
    }
    ps.add(name, std::move(m), trainable);
  }
  return ps;
}

// --- Graph -------------------------------------------------------------------

Var Graph::make(Mat value, std::function<void()> back) {
  if (check_finite_ && !value.allFinite()) {
    throw ValidationError("non-finite value in computation graph");
  }
  Node node;
  node.value = std::move(value);
  node.grad = Mat::Zero(node.value.rows(), node.value.cols());
  node.back = std::move(back);
  nodes_.push_back(std::move(node));
  return {static_cast<int>(nodes_.size()) - 1};
}

Var Graph::input(Mat v) { return make(std::move(v)); }

Var Graph::param(int param_id) {
  Var out = make(params_->value(param_id));
  int id = out.id;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, param_id] {
    params_->grad(param_id) += nodes_[static_cast<std::size_t>(id)].grad;
  };
  return out;
}

Var Graph::lookup(int param_id, int row) {
  const Mat& table = params_->value(param_id);
  Var out = make(table.row(row).transpose());
  int id = out.id;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, param_id, row] {
    params_->grad(param_id).row(row) += nodes_[static_cast<std::size_t>(id)].grad.transpose();
  };
  return out;
}

Var Graph::add(Var a, Var b) {
  Var out = make(value(a) + value(b));
  int id = out.id;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, a, b] {
    grad(a) += nodes_[static_cast<std::size_t>(id)].grad;
    grad(b) += nodes_[static_cast<std::size_t>(id)].grad;
  };
  return out;
}

Var Graph::sub(Var a, Var b) {
  Var out = make(value(a) - value(b));
  int id = out.id;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, a, b] {
    grad(a) += nodes_[static_cast<std::size_t>(id)].grad;
    grad(b) -= nodes_[static_cast<std::size_t>(id)].grad;
  };
  return out;
}

Var Graph::mul(Var a, Var b) {
  Var out = make(value(a).cwiseProduct(value(b)));
  int id = out.id;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, a, b] {
    grad(a) += nodes_[static_cast<std::size_t>(id)].grad.cwiseProduct(value(b));
    grad(b) += nodes_[static_cast<std::size_t>(id)].grad.cwiseProduct(value(a));
  };
  return out;
}

Var Graph::scale(Var a, double c) {
  Var out = make(value(a) * c);
  int id = out.id;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, a, c] {
    grad(a) += nodes_[static_cast<std::size_t>(id)].grad * c;
  };
  return out;
}

Var Graph::add_scalar(Var a, double c) {
  Var out = make(value(a).array() + c);
  int id = out.id;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, a] {
    grad(a) += nodes_[static_cast<std::size_t>(id)].grad;
  };
  return out;
}

Var Graph::matmul(Var a, Var b) {
  if (value(a).cols() != value(b).rows()) throw ValidationError("matmul shape mismatch");
  Var out = make(value(a) * value(b));
  int id = out.id;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, a, b] {
    const Mat& g = nodes_[static_cast<std::size_t>(id)].grad;
    grad(a) += g * value(b).transpose();
    grad(b) += value(a).transpose() * g;
  };
  return out;
}

Var Graph::transpose(Var a) {
  Var out = make(value(a).transpose());
  int id = out.id;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, a] {
    grad(a) += nodes_[static_cast<std::size_t>(id)].grad.transpose();
  };
  return out;
}

Var Graph::sigmoid(Var a) {
  Mat v = (1.0 / (1.0 + (-value(a).array()).exp())).matrix();
  Var out = make(std::move(v));
  int id = out.id;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, a] {
    const Mat& y = nodes_[static_cast<std::size_t>(id)].value;
    grad(a).array() += nodes_[static_cast<std::size_t>(id)].grad.array() * y.array() *
                       (1.0 - y.array());
  };
  return out;
}

Var Graph::tanh_(Var a) {
  Var out = make(value(a).array().tanh().matrix());
  int id = out.id;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, a] {
    const Mat& y = nodes_[static_cast<std::size_t>(id)].value;
    grad(a).array() += nodes_[static_cast<std::size_t>(id)].grad.array() *
                       (1.0 - y.array().square());
  };
  return out;
}

Var Graph::relu(Var a) {
  Var out = make(value(a).cwiseMax(0.0));
  int id = out.id;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, a] {
    grad(a).array() += nodes_[static_cast<std::size_t>(id)].grad.array() *
                       (value(a).array() > 0.0).cast<double>();
  };
  return out;
}

Var Graph::rows(Var a, int first, int count) {
  Var out = make(value(a).middleRows(first, count));
  int id = out.id;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, a, first, count] {
    grad(a).middleRows(first, count) += nodes_[static_cast<std::size_t>(id)].grad;
  };
  return out;
}

Var Graph::col(Var a, int j) {
  Var out = make(value(a).col(j));
  int id = out.id;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, a, j] {
    grad(a).col(j) += nodes_[static_cast<std::size_t>(id)].grad;
  };
  return out;
}

Var Graph::vconcat(const std::vector<Var>& vs) {
  Eigen::Index total = 0;
  for (Var v : vs) total += value(v).rows();
  Mat m(total, value(vs.front()).cols());
  Eigen::Index at = 0;
  for (Var v : vs) {
    m.middleRows(at, value(v).rows()) = value(v);
    at += value(v).rows();
  }
  Var out = make(std::move(m));
  int id = out.id;
  std::vector<Var> parents = vs;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, parents] {
    Eigen::Index at2 = 0;
    for (Var v : parents) {
      grad(v) += nodes_[static_cast<std::size_t>(id)].grad.middleRows(at2, value(v).rows());
      at2 += value(v).rows();
    }
  };
  return out;
}

Var Graph::hconcat(const std::vector<Var>& vs) {
  Eigen::Index total = 0;
  for (Var v : vs) total += value(v).cols();
  Mat m(value(vs.front()).rows(), total);
  Eigen::Index at = 0;
  for (Var v : vs) {
    m.middleCols(at, value(v).cols()) = value(v);
    at += value(v).cols();
  }
  Var out = make(std::move(m));
  int id = out.id;
  std::vector<Var> parents = vs;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, parents] {
    Eigen::Index at2 = 0;
    for (Var v : parents) {
      grad(v) += nodes_[static_cast<std::size_t>(id)].grad.middleCols(at2, value(v).cols());
      at2 += value(v).cols();
    }
  };
  return out;
}

Var Graph::affine_rowcol(Var s, Var row_add, Var col_add, Var bias) {
  const Mat& sv = value(s);
  if (value(row_add).rows() != sv.cols() || value(col_add).rows() != sv.rows()) {
    throw ValidationError("affine_rowcol shape mismatch");
  }
  Mat m = sv;
  m.rowwise() += value(row_add).col(0).transpose();
  m.colwise() += value(col_add).col(0);
  m.array() += value(bias)(0, 0);
  Var out = make(std::move(m));
  int id = out.id;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, s, row_add, col_add, bias] {
    const Mat& g = nodes_[static_cast<std::size_t>(id)].grad;
    grad(s) += g;
    grad(row_add).col(0) += g.colwise().sum().transpose();
    grad(col_add).col(0) += g.rowwise().sum();
    grad(bias)(0, 0) += g.sum();
  };
  return out;
}

Var Graph::dot(Var a, Var b) {
  Mat m(1, 1);
  m(0, 0) = value(a).col(0).dot(value(b).col(0));
  Var out = make(std::move(m));
  int id = out.id;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, a, b] {
    double g = nodes_[static_cast<std::size_t>(id)].grad(0, 0);
    grad(a) += g * value(b);
    grad(b) += g * value(a);
  };
  return out;
}

Var Graph::sum(const std::vector<Var>& scalars) {
  Mat m(1, 1);
  m(0, 0) = 0.0;
  for (Var v : scalars) m(0, 0) += value(v)(0, 0);
  Var out = make(std::move(m));
  int id = out.id;
  std::vector<Var> parents = scalars;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, parents] {
    double g = nodes_[static_cast<std::size_t>(id)].grad(0, 0);
    for (Var v : parents) grad(v)(0, 0) += g;
  };
  return out;
}

Var Graph::softmax_ce(Var logits, int target) {
  const Mat& x = value(logits);
  double mx = x.col(0).maxCoeff();
  Eigen::ArrayXd ex = (x.col(0).array() - mx).exp();
  double z = ex.sum();
  Mat m(1, 1);
  m(0, 0) = std::log(z) - (x(target, 0) - mx);
  Var out = make(std::move(m));
  int id = out.id;
  Eigen::VectorXd softmax = (ex / z).matrix();
  nodes_[static_cast<std::size_t>(id)].back = [this, id, logits, target, softmax] {
    double g = nodes_[static_cast<std::size_t>(id)].grad(0, 0);
    grad(logits).col(0) += g * softmax;
    grad(logits)(target, 0) -= g;
  };
  return out;
}

Var Graph::dropout(Var a, double rate, Rng& rng) {
  if (rate <= 0.0) return a;
  Mat mask(value(a).rows(), value(a).cols());
  const double keep = 1.0 - rate;
  for (Eigen::Index c = 0; c < mask.cols(); ++c) {
    for (Eigen::Index r = 0; r < mask.rows(); ++r) {
      mask(r, c) = rng.uniform_real() < keep ? 1.0 / keep : 0.0;
    }
  }
  Var out = make(value(a).cwiseProduct(mask));
  int id = out.id;
  nodes_[static_cast<std::size_t>(id)].back = [this, id, a, mask] {
    grad(a) += nodes_[static_cast<std::size_t>(id)].grad.cwiseProduct(mask);
  };
  return out;
}

double Graph::scalar(Var v) const {
  const Mat& m = value(v);
  if (m.rows() != 1 || m.cols() != 1) throw ValidationError("scalar() on non-scalar node");
  return m(0, 0);
}

void Graph::backward(Var loss) {
  grad(loss).setConstant(1.0);
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    if (nodes_[i].back) nodes_[i].back();
  }
}

Mat finite_difference(ParamStore& params, int pid, const std::function<double()>& f,
                      double step) {
  Mat& p = params.value(pid);
  Mat out(p.rows(), p.cols());
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      double orig = p(r, c);
      p(r, c) = orig + step;
      double fp = f();
      p(r, c) = orig - step;
      double fm = f();
      p(r, c) = orig;
      out(r, c) = (fp - fm) / (2.0 * step);
    }
  }
  return out;
}

Mat glorot(int rows, int cols, Rng& rng) {
  double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Mat m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) m(r, c) = (rng.uniform_real() * 2.0 - 1.0) * s;
  }
  return m;
}

}  // namespace parselab::neural
