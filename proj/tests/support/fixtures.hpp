#pragma once

#include "parselab/rng.hpp"
#include "parselab/treebank.hpp"

namespace fixtures {

// Synthetic projective treebank with strong positional regularities:
// clauses of noun phrases ([ADJ]* NOUN) followed by a verb and optional
// adverbs. Adjectives attach to the next noun, nouns and adverbs to the
// verb, the verb to the root. Learnable from morph tags alone in the given
// order; shuffling the words destroys the positional cues.
parselab::treebank::Corpus synthetic_corpus(int sentences, std::uint64_t seed);

// Small hand-rolled corpus containing non-projective trees.
parselab::treebank::Corpus nonprojective_corpus();

}  // namespace fixtures
