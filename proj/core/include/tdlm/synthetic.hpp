#ifndef TDLM_SYNTHETIC_HPP_
#define TDLM_SYNTHETIC_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "tdlm/base.hpp"

TDLM_NAMESPACE_BEGIN

/// A corpus with known topics: every document draws its content words from
/// one of several disjoint vocabularies, interleaved with shared stopwords.
struct PlantedCorpusOptions {
  std::size_t topics = 4;
  std::size_t words_per_topic = 50;
  std::size_t documents = 500;
  std::size_t sentences = 10;
  std::size_t min_sentence = 6;  // tokens per sentence
  std::size_t max_sentence = 12;
  bool labels = false;  // `#label=topic<t>`
  bool tags = false;    // `#tags=tag<t>`
  std::uint64_t seed = 1;
};

struct PlantedCorpus {
  std::string text;                  // corpus file contents
  std::vector<std::size_t> planted;  // topic of each document
  std::vector<std::vector<std::string>> topic_words;
  std::vector<std::string> function_words;
};

// Sentences alternate a stopword and a topic word, starting with the stopword.
PlantedCorpus make_planted_corpus(const PlantedCorpusOptions& options);

TDLM_NAMESPACE_END

#endif  // TDLM_SYNTHETIC_HPP_
