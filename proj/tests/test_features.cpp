#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "parselab/features.hpp"
#include "parselab/hashing.hpp"
#include "parselab/rng.hpp"
#include "parselab/transition.hpp"
#include "support/fixtures.hpp"

using namespace parselab;
using namespace parselab::features;

namespace {

treebank::Sentence fixture_sentence() {
  return fixtures::synthetic_corpus(1, 5).sentences[0];
}

treebank::Sentence three_tokens() {
  treebank::Sentence s;
  for (int i = 1; i <= 3; ++i) {
    treebank::Token t;
    t.id = i;
    t.form = std::string("w") + std::to_string(i);
    t.morph = std::string("M") + std::to_string(i);
    t.gold_head = i == 3 ? 0 : 3;
    t.gold_label = "dep";
    s.tokens.push_back(t);
  }
  return s;
}

}  // namespace

TEST_CASE("edge features deterministic") {
  FeatureConfig cfg;
  auto s = fixture_sentence();
  CHECK(edge_features(s, 0, 1, cfg) == edge_features(s, 0, 1, cfg));
  CHECK(!edge_features(s, 0, 1, cfg).entries.empty());
}

TEST_CASE("edge features direction matters") {
  FeatureConfig cfg;
  auto s = three_tokens();
  CHECK(edge_features(s, 1, 2, cfg) != edge_features(s, 2, 1, cfg));
}

TEST_CASE("edge features never read gold annotations") {
  FeatureConfig cfg;
  auto s = three_tokens();
  auto erased = s;
  for (auto& t : erased.tokens) {
    t.gold_head = -1;
    t.gold_label.clear();
  }
  for (int h = 0; h <= 3; ++h) {
    for (int d = 1; d <= 3; ++d) {
      if (h == d) continue;
      CHECK(edge_features(s, h, d, cfg) == edge_features(erased, h, d, cfg));
    }
  }
}

TEST_CASE("feature vector construction is order independent") {
  FeatureVector a, b;
  a.add(3, 1.0);
  a.add(1, 2.0);
  a.add(3, 0.5);
  b.add(1, 2.0);
  b.add(3, 0.5);
  b.add(3, 1.0);
  a.finalize();
  b.finalize();
  CHECK(a == b);
  REQUIRE(a.entries.size() == 2);
  CHECK(a.entries[1].second == doctest::Approx(1.5));
}

TEST_CASE("config features: initial configuration and determinism") {
  FeatureConfig cfg;
  auto s = fixture_sentence();
  auto c = transition::ParserConfiguration::initial(s.size());
  auto fv1 = config_features(c, s, cfg);
  auto fv2 = config_features(c, s, cfg);
  CHECK(fv1 == fv2);
  CHECK(!fv1.entries.empty());
}

TEST_CASE("config features change with valency") {
  FeatureConfig cfg;
  auto s = three_tokens();
  using namespace parselab::transition;
  auto c = ParserConfiguration::initial(s.size());
  c = apply_action(SystemId::ArcHybrid, c, {ActionKind::Shift, ""});
  c = apply_action(SystemId::ArcHybrid, c, {ActionKind::Shift, ""});
  auto before = config_features(c, s, cfg);
  // LEFT-ARC attaches stack top to buffer front, changing b0's valency and
  // label set.
  auto after_cfg = apply_action(SystemId::ArcHybrid, c, {ActionKind::LeftArc, "dep"});
  auto after = config_features(after_cfg, s, cfg);
  CHECK(before != after);
}

TEST_CASE("config features never read gold annotations") {
  FeatureConfig cfg;
  auto s = three_tokens();
  auto erased = s;
  for (auto& t : erased.tokens) {
    t.gold_head = -1;
    t.gold_label.clear();
  }
  using namespace parselab::transition;
  auto c = ParserConfiguration::initial(s.size());
  c = apply_action(SystemId::ArcHybrid, c, {ActionKind::Shift, ""});
  CHECK(config_features(c, s, cfg) == config_features(c, erased, cfg));
}

TEST_CASE("hash_index stability and range") {
  CHECK(hash_index("E01", "ramah", 22) == hash_index("E01", "ramah", 22));
  CHECK(hash_index("E01", "ramah", 22) != hash_index("E02", "ramah", 22));
  for (int bits : {8, 16, 22}) {
    for (int i = 0; i < 1000; ++i) {
      CHECK(hash_index("T", std::to_string(i), bits) < (std::uint64_t{1} << bits));
    }
  }
  // Keys must not collapse under concatenation ambiguity.
  CHECK(hash_index("ab", "c", 22) != hash_index("a", "bc", 22));
}

TEST_CASE("hash collision rate matches the birthday bound") {
  const int bits = 22;
  const double buckets = static_cast<double>(std::uint64_t{1} << bits);
  const int m = 100000;
  std::set<std::uint64_t> seen;
  int collisions = 0;
  for (int i = 0; i < m; ++i) {
    auto idx = hash_index("K", "key-" + std::to_string(i), bits);
    if (!seen.insert(idx).second) ++collisions;
  }
  // Expected colliding insertions: m - B(1 - (1-1/B)^m).
  double expected = m - buckets * (1.0 - std::pow(1.0 - 1.0 / buckets, m));
  CHECK(collisions > expected * 0.85);
  CHECK(collisions < expected * 1.15);
}

TEST_CASE("free word order switch changes distance keys") {
  auto s = fixture_sentence();
  if (s.size() < 6) return;
  FeatureConfig coarse;
  coarse.free_word_order = true;
  FeatureConfig exact;
  exact.free_word_order = false;
  // A long arc: binned "5+" vs exact distance differ.
  CHECK(edge_features(s, 1, 6, coarse) != edge_features(s, 1, 6, exact));
  // A short arc has the same key either way.
  CHECK(edge_features(s, 1, 2, coarse) == edge_features(s, 1, 2, exact));
}

TEST_CASE("use_morph=false drops morph templates") {
  auto s = three_tokens();
  FeatureConfig with;
  FeatureConfig without;
  without.use_morph = false;
  CHECK(edge_features(s, 1, 2, without).entries.size() <
        edge_features(s, 1, 2, with).entries.size());
}
