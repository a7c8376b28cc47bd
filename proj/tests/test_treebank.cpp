#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <sstream>

#include "parselab/treebank.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace parselab;
using namespace parselab::treebank;

namespace {
const char* kTwoTokens =
    "1\tramah\t_\t_\tN.m.sg.nom\t_\t2\tkarta\t_\t_\n"
    "2\tgacchati\t_\t_\tV.sg.3\t_\t0\troot\t_\t_\n\n";
}

TEST_CASE("read_conll basic") {
  std::istringstream in(kTwoTokens);
  Corpus c = read_conll(in);
  REQUIRE(c.size() == 1);
  CHECK(c.sentences[0].size() == 2);
  CHECK(c.sentences[0].gold_heads() == std::vector<int>{2, 0});
  CHECK(c.sentences[0].tok(1).morph == "N.m.sg.nom");
  CHECK(c.sentences[0].tok(1).gold_label == "karta");
}

TEST_CASE("read_conll empty stream") {
  std::istringstream in("");
  CHECK(read_conll(in).size() == 0);
}

TEST_CASE("read_conll accepts CRLF line endings") {
  std::istringstream in(
      "1\tramah\t_\t_\tN\t_\t0\troot\t_\t_\r\n\r\n");
  Corpus c = read_conll(in);
  REQUIRE(c.size() == 1);
  CHECK(c.sentences[0].tok(1).gold_label == "root");
}

TEST_CASE("read_conll head '_' means unannotated") {
  std::istringstream in("1\tramah\t_\t_\tN\t_\t_\t_\t_\t_\n\n");
  Corpus c = read_conll(in);
  REQUIRE(c.size() == 1);
  CHECK(c.sentences[0].tok(1).gold_head == -1);
  CHECK(!c.sentences[0].has_gold());
}

TEST_CASE("read_conll out-of-range head") {
  std::istringstream in(
      "1\ta\t_\t_\tX\t_\t3\tdep\t_\t_\n"
      "2\tb\t_\t_\tX\t_\t0\troot\t_\t_\n\n");
  CHECK_THROWS_AS(read_conll(in), ValidationError);
}

TEST_CASE("read_conll malformed line carries the line number") {
  std::istringstream in("1\ta\tb\n");
  try {
    read_conll(in);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("write/read round-trip is bit-exact on structural fields") {
  auto corpus = fixtures::synthetic_corpus(30, 7);
  for (auto& extra : fixtures::nonprojective_corpus().sentences) {
    corpus.sentences.push_back(extra);
  }
  std::ostringstream first;
  write_conll(first, corpus);
  std::istringstream back(first.str());
  Corpus reread = read_conll(back);
  std::ostringstream second;
  write_conll(second, reread);
  CHECK(first.str() == second.str());
  REQUIRE(reread.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(reread.sentences[i].gold_heads() == corpus.sentences[i].gold_heads());
    CHECK(reread.sentences[i].gold_labels() == corpus.sentences[i].gold_labels());
  }
}

TEST_CASE("predicted channel round-trips and errors when absent") {
  auto corpus = fixtures::synthetic_corpus(3, 1);
  std::ostringstream out;
  CHECK_THROWS_AS(write_conll(out, corpus, TreeChannel::Predicted), ValidationError);
  corpus.predicted = corpus.gold_trees();
  corpus.predicted[0].heads[0] = 0;  // make predictions differ from gold
  corpus.predicted[0].labels[0] = "root";
  std::ostringstream out2;
  write_conll(out2, corpus, TreeChannel::Predicted);
  std::istringstream in(out2.str());
  Corpus reread = read_conll(in);
  CHECK(reread.sentences[0].gold_heads() == corpus.predicted[0].heads);
}

TEST_CASE("write_conll empty corpus -> empty stream") {
  std::ostringstream out;
  write_conll(out, Corpus{});
  CHECK(out.str().empty());
}

TEST_CASE("validate_tree examples") {
  CHECK(validate_tree({2, 0}).empty());
  auto v = validate_tree({2, 1});
  REQUIRE(!v.empty());
  CHECK(v[0].kind == Violation::Kind::Cycle);
  CHECK(validate_tree({0, 1, 2, 1}).empty());
  CHECK(!validate_tree({3, 0}).empty());   // out of range
  CHECK(!validate_tree({1, 0}).empty());   // self loop
}

TEST_CASE("validate_tree agrees with reachability oracle on all arrays n<=6") {
  for (int n = 1; n <= 6; ++n) {
    std::vector<int> heads(static_cast<std::size_t>(n), 0);
    while (true) {
      CHECK(is_valid_tree(heads) == oracles::tree_valid_by_reachability(heads));
      int pos = 0;
      while (pos < n) {
        if (++heads[static_cast<std::size_t>(pos)] <= n) break;
        heads[static_cast<std::size_t>(pos)] = 0;
        ++pos;
      }
      if (pos == n) break;
    }
  }
}

TEST_CASE("is_projective examples") {
  CHECK(is_projective({2, 0, 2}));
  CHECK(!is_projective({0, 4, 1, 1}));
  CHECK(is_projective({0}));
}

TEST_CASE("projectivity equals all-arcs-degree-zero on random trees") {
  Rng rng(11);
  for (int it = 0; it < 200; ++it) {
    int n = 2 + static_cast<int>(rng.uniform(6));
    auto heads = oracles::random_tree(n, rng);
    DependencyTree tree(heads);
    bool all_zero = true;
    for (int d = 1; d <= n; ++d) {
      if (nonprojectivity_degree(tree, {heads[static_cast<std::size_t>(d - 1)], d, ""}) > 0) {
        all_zero = false;
      }
    }
    CHECK(all_zero == is_projective(heads));
    CHECK(is_projective(heads) == oracles::projective_by_crossing(heads));
  }
}

TEST_CASE("nonprojectivity_degree examples") {
  DependencyTree proj({2, 0, 2});
  for (int d = 1; d <= 3; ++d) {
    CHECK(nonprojectivity_degree(proj, {proj.head_of(d), d, ""}) == 0);
  }
  DependencyTree tree({0, 4, 1, 1});
  CHECK(nonprojectivity_degree(tree, {4, 2, ""}) == 1);
  CHECK(nonprojectivity_degree(tree, {1, 3, ""}) == 0);
  CHECK_THROWS_AS(nonprojectivity_degree(tree, {2, 3, ""}), ValidationError);
}

TEST_CASE("dependency_length") {
  CHECK(dependency_length({2, 1, ""}) == 1);
  CHECK(dependency_length({1, 4, ""}) == 3);
  CHECK_THROWS_AS(dependency_length({0, 3, ""}), ValidationError);
}

TEST_CASE("root_distance examples") {
  CHECK(root_distance(DependencyTree({0}), 1) == 1);
  CHECK(root_distance(DependencyTree({2, 0, 2}), 1) == 2);
  CHECK(root_distance(DependencyTree({0, 1, 2, 3}), 4) == 4);
}

TEST_CASE("permute_words") {
  auto corpus = fixtures::synthetic_corpus(20, 3);
  for (const auto& sent : corpus.sentences) {
    auto same = permute_words(sent, PermuteMode::Identity, 5);
    CHECK(same.gold_heads() == sent.gold_heads());

    auto a = permute_words(sent, PermuteMode::SeededShuffle, 42);
    auto b = permute_words(sent, PermuteMode::SeededShuffle, 42);
    for (int i = 1; i <= sent.size(); ++i) {
      CHECK(a.tok(i).form == b.tok(i).form);
      CHECK(a.tok(i).gold_head == b.tok(i).gold_head);
    }
    CHECK(is_valid_tree(a.gold_heads()));

    // Arc multiset on surface forms is preserved under the id remapping.
    auto arc_multiset = [](const Sentence& s) {
      std::multiset<std::string> arcs;
      for (const auto& t : s.tokens) {
        std::string head_form = t.gold_head == 0 ? "<ROOT>" : s.tok(t.gold_head).form;
        arcs.insert(head_form + "->" + t.form + ":" + t.gold_label);
      }
      return arcs;
    };
    CHECK(arc_multiset(sent) == arc_multiset(a));
  }
}

TEST_CASE("projectivize lifts until projective") {
  for (const auto& sent : fixtures::nonprojective_corpus().sentences) {
    auto lifted = projectivize(sent.gold_heads());
    CHECK(is_valid_tree(lifted));
    CHECK(is_projective(lifted));
  }
  // Already-projective trees are untouched.
  std::vector<int> heads{2, 0, 2};
  CHECK(projectivize(heads) == heads);
}
