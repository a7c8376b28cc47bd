#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "parselab/features.hpp"

namespace parselab::linear {

// Dense weights over the feature hash space with lazy weight averaging
// (timestamped accumulators, the standard averaged-perceptron trick).
class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(features::FeatureConfig fcfg, std::vector<std::string> labels,
              std::uint8_t system_id = 0);

  double score(const features::FeatureVector& fv, bool averaged) const;

  // weights += scale * fv, with averaging bookkeeping.
  void update(const features::FeatureVector& fv, double scale);
  void tick() { ++update_count_; }

  // Materialize averaged weights; further updates keep accumulating.
  void finalize_average();

  const std::vector<std::string>& labels() const { return labels_; }
  const features::FeatureConfig& feature_config() const { return fcfg_; }
  std::uint8_t system_id() const { return system_id_; }
  std::uint64_t update_count() const { return update_count_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& averaged_weights() const { return averaged_; }

  // Free-form header entries (e.g. the L2S annealing schedule).
  std::map<std::string, std::string>& extras() { return extras_; }
  const std::map<std::string, std::string>& extras() const { return extras_; }

  void save(std::ostream& os) const;
  void save_file(const std::string& path) const;
  static LinearModel load(std::istream& is);
  static LinearModel load_file(const std::string& path);

 private:
  features::FeatureConfig fcfg_;
  std::vector<std::string> labels_;
  std::map<std::string, std::string> extras_;
  std::uint8_t system_id_ = 0;  // 0 = graph, else transition::SystemId
  std::vector<double> weights_;
  std::vector<double> accum_;      // sum of weight * (t - last_touch), lazily updated
  std::vector<std::uint64_t> last_touch_;
  std::vector<double> averaged_;
  std::uint64_t update_count_ = 0;
};

}  // namespace parselab::linear
