#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "parselab/cli.hpp"
#include "parselab/config.hpp"
#include "parselab/treebank.hpp"
#include "support/fixtures.hpp"

using namespace parselab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("parselab_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_small_config(const std::string& path) {
  std::ofstream out(path);
  out << "# test config\n";
  out << "feature.hash_bits = 16\n";
  out << "graph.epochs = 5\n";
  out << "transition.epochs = 3\n";
  out << "seed = 7\n";
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(cli::run({"train", "--parser", "graph"}) == 2);           // missing required options
  CHECK(cli::run({"nonsense"}) == 2);
  CHECK(cli::run({"train", "--parser", "bogus", "--train", "x", "--model", "y"}) == 2);
}

TEST_CASE("unknown config keys are rejected") {
  TempDir tmp;
  std::ofstream(tmp.file("bad.conf")) << "no.such.key = 1\n";
  treebank::write_conll_file(tmp.file("train.conll"), fixtures::synthetic_corpus(2, 1));
  CHECK(cli::run({"train", "--parser", "graph", "--train", tmp.file("train.conll"), "--model",
                  tmp.file("m.bin"), "--config", tmp.file("bad.conf")}) == 2);
}

TEST_CASE("train/parse/eval/profile round trip") {
  TempDir tmp;
  auto corpus = fixtures::synthetic_corpus(20, 5);
  treebank::write_conll_file(tmp.file("train.conll"), corpus);
  write_small_config(tmp.file("exp.conf"));

  CHECK(cli::run({"train", "--parser", "graph", "--train", tmp.file("train.conll"), "--dev",
                  tmp.file("train.conll"), "--model", tmp.file("graph.bin"), "--config",
                  tmp.file("exp.conf")}) == 0);
  CHECK(fs::exists(tmp.file("graph.bin")));
  CHECK(fs::exists(tmp.file("graph.bin.log")));
  // The resolved config is logged verbatim.
  CHECK(slurp(tmp.file("graph.bin.log")).find("config: feature.hash_bits = 16") !=
        std::string::npos);

  CHECK(cli::run({"parse", "--model", tmp.file("graph.bin"), "--input", tmp.file("train.conll"),
                  "--output", tmp.file("pred.conll")}) == 0);
  // Predictions land in the HEAD/DEPREL columns of the output.
  auto pred = treebank::read_conll_file(tmp.file("pred.conll"));
  REQUIRE(pred.size() == corpus.size());
  for (const auto& tree : pred.gold_trees()) CHECK(treebank::is_valid_tree(tree.heads));

  CHECK(cli::run({"eval", "--gold", tmp.file("train.conll"), "--pred", tmp.file("pred.conll"),
                  "--out", tmp.file("scores.txt")}) == 0);
  auto scores = slurp(tmp.file("scores.txt"));
  CHECK(scores.find("micro_uas") != std::string::npos);

  for (const char* dim : {"sentlen", "deplen", "nonproj", "rootdist"}) {
    CHECK(cli::run({"profile", "--gold", tmp.file("train.conll"), "--pred",
                    tmp.file("pred.conll"), "--by", dim, "--out",
                    tmp.file(std::string("prof_") + dim + ".csv")}) == 0);
    auto csv = slurp(tmp.file(std::string("prof_") + dim + ".csv"));
    CHECK(csv.rfind("bucket,support,p_unlab,r_unlab,p_lab,r_lab\n", 0) == 0);
  }
}

TEST_CASE("eval of a corpus against itself is all ones") {
  TempDir tmp;
  treebank::write_conll_file(tmp.file("gold.conll"), fixtures::synthetic_corpus(5, 9));
  CHECK(cli::run({"eval", "--gold", tmp.file("gold.conll"), "--pred", tmp.file("gold.conll"),
                  "--out", tmp.file("s.txt")}) == 0);
  auto s = slurp(tmp.file("s.txt"));
  CHECK(s.find("micro_uas 1.000000") != std::string::npos);
  CHECK(s.find("macro_las 1.000000") != std::string::npos);
  CHECK(s.find("mad_sentlen_uas 0.000000") != std::string::npos);
}

TEST_CASE("eval with a second system emits pairwise significance") {
  TempDir tmp;
  auto corpus = fixtures::synthetic_corpus(10, 29);
  treebank::write_conll_file(tmp.file("gold.conll"), corpus);
  // A corrupted "system": attach everything to the root.
  auto broken = corpus;
  for (auto& sent : broken.sentences) {
    for (auto& t : sent.tokens) t.gold_head = 0;
  }
  treebank::write_conll_file(tmp.file("broken.conll"), broken);
  CHECK(cli::run({"eval", "--gold", tmp.file("gold.conll"), "--pred", tmp.file("gold.conll"),
                  "--pred2", tmp.file("broken.conll"), "--out", tmp.file("s.txt")}) == 0);
  auto s = slurp(tmp.file("s.txt"));
  CHECK(s.find("pred2_micro_uas") != std::string::npos);
  CHECK(s.find("p_uas") != std::string::npos);
  CHECK(s.find("p_las") != std::string::npos);
}

TEST_CASE("training is byte-reproducible under a fixed seed") {
  TempDir tmp;
  treebank::write_conll_file(tmp.file("train.conll"), fixtures::synthetic_corpus(10, 11));
  write_small_config(tmp.file("exp.conf"));
  for (int run = 0; run < 2; ++run) {
    CHECK(cli::run({"train", "--parser", "graph", "--train", tmp.file("train.conll"), "--model",
                    tmp.file("m" + std::to_string(run) + ".bin"), "--config",
                    tmp.file("exp.conf")}) == 0);
  }
  CHECK(slurp(tmp.file("m0.bin")) == slurp(tmp.file("m1.bin")));
}

TEST_CASE("PARSELAB_SEED environment variable overrides the config seed") {
  TempDir tmp;
  treebank::write_conll_file(tmp.file("train.conll"), fixtures::synthetic_corpus(6, 13));
  write_small_config(tmp.file("exp.conf"));
  ::setenv("PARSELAB_SEED", "12345", 1);
  CHECK(cli::run({"train", "--parser", "graph", "--train", tmp.file("train.conll"), "--model",
                  tmp.file("env.bin"), "--config", tmp.file("exp.conf")}) == 0);
  ::unsetenv("PARSELAB_SEED");
  CHECK(slurp(tmp.file("env.bin.log")).find("config: seed = 12345") != std::string::npos);
}

TEST_CASE("permute is deterministic and tree-isomorphic") {
  TempDir tmp;
  auto corpus = fixtures::synthetic_corpus(8, 17);
  treebank::write_conll_file(tmp.file("in.conll"), corpus);
  CHECK(cli::run({"permute", "--input", tmp.file("in.conll"), "--seed", "3", "--out",
                  tmp.file("out1.conll")}) == 0);
  CHECK(cli::run({"permute", "--input", tmp.file("in.conll"), "--seed", "3", "--out",
                  tmp.file("out2.conll")}) == 0);
  CHECK(slurp(tmp.file("out1.conll")) == slurp(tmp.file("out2.conll")));

  auto permuted = treebank::read_conll_file(tmp.file("out1.conll"));
  REQUIRE(permuted.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(treebank::is_valid_tree(permuted.sentences[i].gold_heads()));
  }
  // Identity mode is a no-op.
  CHECK(cli::run({"permute", "--input", tmp.file("in.conll"), "--seed", "3", "--mode",
                  "identity", "--out", tmp.file("id.conll")}) == 0);
  CHECK(slurp(tmp.file("id.conll")) == slurp(tmp.file("in.conll")));
}

TEST_CASE("permuted corpora show non-projective mass (recorded, not asserted)") {
  TempDir tmp;
  treebank::write_conll_file(tmp.file("in.conll"), fixtures::synthetic_corpus(30, 31));
  REQUIRE(cli::run({"permute", "--input", tmp.file("in.conll"), "--seed", "5", "--out",
                    tmp.file("shuf.conll")}) == 0);
  REQUIRE(cli::run({"profile", "--gold", tmp.file("shuf.conll"), "--pred",
                    tmp.file("shuf.conll"), "--by", "nonproj", "--out",
                    tmp.file("np.csv")}) == 0);
  MESSAGE("nonproj profile of the shuffled fixture:\n" << slurp(tmp.file("np.csv")));
}

TEST_CASE("parse --jobs gives identical output") {
  TempDir tmp;
  treebank::write_conll_file(tmp.file("train.conll"), fixtures::synthetic_corpus(12, 19));
  write_small_config(tmp.file("exp.conf"));
  REQUIRE(cli::run({"train", "--parser", "graph", "--train", tmp.file("train.conll"), "--model",
                    tmp.file("m.bin"), "--config", tmp.file("exp.conf")}) == 0);
  CHECK(cli::run({"parse", "--model", tmp.file("m.bin"), "--input", tmp.file("train.conll"),
                  "--output", tmp.file("p1.conll"), "--jobs", "1"}) == 0);
  CHECK(cli::run({"parse", "--model", tmp.file("m.bin"), "--input", tmp.file("train.conll"),
                  "--output", tmp.file("p4.conll"), "--jobs", "4"}) == 0);
  CHECK(slurp(tmp.file("p1.conll")) == slurp(tmp.file("p4.conll")));
}

TEST_CASE("parse of an empty corpus writes an empty file") {
  TempDir tmp;
  treebank::write_conll_file(tmp.file("train.conll"), fixtures::synthetic_corpus(4, 37));
  write_small_config(tmp.file("exp.conf"));
  REQUIRE(cli::run({"train", "--parser", "graph", "--train", tmp.file("train.conll"), "--model",
                    tmp.file("m.bin"), "--config", tmp.file("exp.conf")}) == 0);
  std::ofstream(tmp.file("empty.conll")).close();
  CHECK(cli::run({"parse", "--model", tmp.file("m.bin"), "--input", tmp.file("empty.conll"),
                  "--output", tmp.file("out.conll")}) == 0);
  CHECK(slurp(tmp.file("out.conll")).empty());
}

TEST_CASE("parse dispatches on the model family") {
  TempDir tmp;
  treebank::write_conll_file(tmp.file("train.conll"), fixtures::synthetic_corpus(6, 23));
  write_small_config(tmp.file("exp.conf"));
  REQUIRE(cli::run({"train", "--parser", "arceager", "--train", tmp.file("train.conll"),
                    "--model", tmp.file("eager.bin"), "--config", tmp.file("exp.conf")}) == 0);
  CHECK(cli::run({"parse", "--model", tmp.file("eager.bin"), "--input", tmp.file("train.conll"),
                  "--output", tmp.file("pe.conll")}) == 0);
  auto pred = treebank::read_conll_file(tmp.file("pe.conll"));
  for (const auto& tree : pred.gold_trees()) CHECK(treebank::is_valid_tree(tree.heads));

  CHECK(cli::run({"parse", "--model", tmp.file("train.conll"), "--input",
                  tmp.file("train.conll"), "--output", tmp.file("x.conll")}) == 1);
}
