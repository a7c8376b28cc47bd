#include "support/fixtures.hpp"

#include <string>
#include <vector>

namespace fixtures {

using parselab::Rng;
using parselab::treebank::Corpus;
using parselab::treebank::Sentence;
using parselab::treebank::Token;

namespace {

const std::vector<std::string> kNouns = {"ramah", "sita", "vanam", "nagaram", "putrah",
                                         "acharyah", "shishyah", "raja"};
const std::vector<std::string> kVerbs = {"gacchati", "pashyati", "vadati", "bhavati"};
const std::vector<std::string> kAdjs = {"mahan", "shubhah", "viras", "priyah", "navah"};
const std::vector<std::string> kAdvs = {"shighram", "sadaa", "tatra"};

Token make_token(int id, const std::string& form, const std::string& morph, int head,
                 const std::string& label) {
  Token t;
  t.id = id;
  t.form = form;
  t.morph = morph;
  t.gold_head = head;
  t.gold_label = label;
  return t;
}

}  // namespace

Corpus synthetic_corpus(int sentences, std::uint64_t seed) {
  Rng rng(seed);
  Corpus corpus;
  for (int s = 0; s < sentences; ++s) {
    Sentence sent;
    const int n_phrases = 1 + static_cast<int>(rng.uniform(3));  // 1..3 noun phrases
    const int n_advs = static_cast<int>(rng.uniform(3));         // 0..2 adverbs
    struct Planned {
      std::string form, morph, label;
      int head_slot;  // -1 verb, -2 next noun
    };
    std::vector<Planned> plan;
    const std::vector<std::string> case_tags = {"N.nom", "N.acc", "N.ins"};
    const std::vector<std::string> case_labels = {"karta", "karma", "karana"};
    for (int p = 0; p < n_phrases; ++p) {
      const int n_adjs = static_cast<int>(rng.uniform(3));  // 0..2 adjectives
      for (int a = 0; a < n_adjs; ++a) {
        plan.push_back({kAdjs[rng.uniform(kAdjs.size())], "ADJ", "visheshana", -2});
      }
      std::size_t c = rng.uniform(case_tags.size());
      plan.push_back({kNouns[rng.uniform(kNouns.size())], case_tags[c], case_labels[c], -1});
    }
    plan.push_back({kVerbs[rng.uniform(kVerbs.size())], "V.3", "root", 0});
    for (int a = 0; a < n_advs; ++a) {
      plan.push_back({kAdvs[rng.uniform(kAdvs.size())], "ADV", "kriyavisheshana", -1});
    }

    const int verb_pos = static_cast<int>(plan.size()) - n_advs;
    for (std::size_t i = 0; i < plan.size(); ++i) {
      int head;
      if (plan[i].head_slot == 0) {
        head = 0;
      } else if (plan[i].head_slot == -1) {
        head = verb_pos;
      } else {
        // Next noun to the right.
        head = verb_pos;
        for (std::size_t j = i + 1; j < plan.size(); ++j) {
          if (plan[j].morph[0] == 'N') {
            head = static_cast<int>(j) + 1;
            break;
          }
        }
      }
      sent.tokens.push_back(make_token(static_cast<int>(i) + 1, plan[i].form, plan[i].morph,
                                       head, plan[i].label));
    }
    corpus.sentences.push_back(std::move(sent));
  }
  return corpus;
}

Corpus nonprojective_corpus() {
  Corpus corpus;
  {
    // Crossing arcs: (1 -> 3) and (4 -> 2).
    Sentence s;
    s.tokens.push_back(make_token(1, "ramah", "N.nom", 0, "root"));
    s.tokens.push_back(make_token(2, "vanam", "N.acc", 4, "karma"));
    s.tokens.push_back(make_token(3, "putrah", "N.nom", 1, "karta"));
    s.tokens.push_back(make_token(4, "gacchati", "V.3", 1, "kriya"));
    corpus.sentences.push_back(std::move(s));
  }
  {
    Sentence s;
    s.tokens.push_back(make_token(1, "sita", "N.nom", 3, "karta"));
    s.tokens.push_back(make_token(2, "tatra", "ADV", 5, "kriyavisheshana"));
    s.tokens.push_back(make_token(3, "pashyati", "V.3", 0, "root"));
    s.tokens.push_back(make_token(4, "nagaram", "N.acc", 5, "karma"));
    s.tokens.push_back(make_token(5, "vadati", "V.3", 3, "kriya"));
    corpus.sentences.push_back(std::move(s));
  }
  {
    // Projective sentence mixed in.
    Sentence s;
    s.tokens.push_back(make_token(1, "mahan", "ADJ", 2, "visheshana"));
    s.tokens.push_back(make_token(2, "raja", "N.nom", 3, "karta"));
    s.tokens.push_back(make_token(3, "bhavati", "V.3", 0, "root"));
    corpus.sentences.push_back(std::move(s));
  }
  return corpus;
}

}  // namespace fixtures
