#ifndef TDLM_TOPICS_HPP_
#define TDLM_TOPICS_HPP_

#include <string>
#include <vector>

#include "tdlm/coherence.hpp"
#include "tdlm/model.hpp"

TDLM_NAMESPACE_BEGIN

struct TopicWord {
  TokenId id = 0;
  std::string word;
  double prob = 0.0;
};

// The n most probable content words of a topic's word distribution, ties
// broken by id. Reserved symbols and stopwords are never listed. ConfigError
// for the vanilla model, IndexError for a topic out of range.
std::vector<TopicWord> top_topic_words(const TdlmModel& model, std::size_t topic, std::size_t n);

// Ranked ids for every topic.
std::vector<std::vector<TokenId>> top_word_ids(const TdlmModel& model, std::size_t n);

// JSON array of {topic_id, top_words: [{word, prob}]}, plus npmi_5 .. npmi_20
// and coherence fields when a report is given.
std::string topics_json(const TdlmModel& model, std::size_t n, const CoherenceReport* coherence = nullptr);

TDLM_NAMESPACE_END

#endif  // TDLM_TOPICS_HPP_
