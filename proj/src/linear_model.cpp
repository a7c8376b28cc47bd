#include "parselab/linear_model.hpp"

#include <fstream>

#include "parselab/errors.hpp"
#include "parselab/serialize.hpp"

namespace parselab::linear {

namespace {
constexpr std::uint32_t kMagic = 0x504c4c4d;  // "PLLM"
constexpr std::uint32_t kVersion = 1;
}  // namespace

LinearModel::LinearModel(features::FeatureConfig fcfg, std::vector<std::string> labels,
                         std::uint8_t system_id)
    : fcfg_(fcfg),
      labels_(std::move(labels)),
      system_id_(system_id),
      weights_(fcfg.space_size(), 0.0),
      accum_(fcfg.space_size(), 0.0),
      last_touch_(fcfg.space_size(), 0),
      averaged_(fcfg.space_size(), 0.0) {}

double LinearModel::score(const features::FeatureVector& fv, bool averaged) const {
  const auto& w = averaged ? averaged_ : weights_;
  double s = 0.0;
  for (const auto& [idx, val] : fv.entries) s += w[idx] * val;
  return s;
}

void LinearModel::update(const features::FeatureVector& fv, double scale) {
  for (const auto& [idx, val] : fv.entries) {
    accum_[idx] += weights_[idx] * static_cast<double>(update_count_ - last_touch_[idx]);
    last_touch_[idx] = update_count_;
    weights_[idx] += scale * val;
  }
}

void LinearModel::finalize_average() {
  if (update_count_ == 0) {
    averaged_ = weights_;
    return;
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    double total = accum_[i] + weights_[i] * static_cast<double>(update_count_ - last_touch_[i]);
    averaged_[i] = total / static_cast<double>(update_count_);
  }
}

void LinearModel::save(std::ostream& os) const {
  io::write_u32(os, kMagic);
  io::write_u32(os, kVersion);
  io::write_u32(os, static_cast<std::uint32_t>(fcfg_.hash_bits));
  io::write_u8(os, fcfg_.use_morph ? 1 : 0);
  io::write_u8(os, fcfg_.free_word_order ? 1 : 0);
  io::write_u8(os, system_id_);
  io::write_u32(os, static_cast<std::uint32_t>(labels_.size()));
  for (const auto& l : labels_) io::write_string(os, l);
  io::write_u32(os, static_cast<std::uint32_t>(extras_.size()));
  for (const auto& [k, v] : extras_) {
    io::write_string(os, k);
    io::write_string(os, v);
  }
  io::write_u64(os, update_count_);
  io::write_f64_array(os, weights_);
  io::write_f64_array(os, averaged_);
}

void LinearModel::save_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParseError("cannot open " + path + " for writing");
  save(os);
}

LinearModel LinearModel::load(std::istream& is) {
  if (io::read_u32(is) != kMagic) throw ParseError("not a linear model file");
  if (io::read_u32(is) != kVersion) throw ParseError("unsupported linear model version");
  features::FeatureConfig fcfg;
  fcfg.hash_bits = static_cast<int>(io::read_u32(is));
  fcfg.use_morph = io::read_u8(is) != 0;
  fcfg.free_word_order = io::read_u8(is) != 0;
  std::uint8_t system_id = io::read_u8(is);
  std::uint32_t nlabels = io::read_u32(is);
  std::vector<std::string> labels(nlabels);
  for (auto& l : labels) l = io::read_string(is);
  LinearModel m(fcfg, std::move(labels), system_id);
  std::uint32_t nextras = io::read_u32(is);
  for (std::uint32_t i = 0; i < nextras; ++i) {
    std::string k = io::read_string(is);
    m.extras_[k] = io::read_string(is);
  }
  m.update_count_ = io::read_u64(is);
  m.weights_ = io::read_f64_array(is);
  m.averaged_ = io::read_f64_array(is);
  if (m.weights_.size() != fcfg.space_size() || m.averaged_.size() != fcfg.space_size()) {
    throw ParseError("linear model weight array size mismatch");
  }
  m.accum_.assign(fcfg.space_size(), 0.0);
  m.last_touch_.assign(fcfg.space_size(), 0);
  return m;
}

LinearModel LinearModel::load_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open " + path);
  return load(is);
}

}  // namespace parselab::linear
