#include "tdlm/synthetic.hpp"

#include <cstdio>

#include "tdlm/random.hpp"

TDLM_NAMESPACE_BEGIN

PlantedCorpus make_planted_corpus(const PlantedCorpusOptions& options) {
  if (options.topics == 0 || options.words_per_topic == 0 || options.min_sentence == 0 ||
      options.min_sentence > options.max_sentence) {
    throw ConfigError("planted corpus: topics, words per topic and sentence lengths must be positive and ordered");
  }
  PlantedCorpus out;
  out.function_words = {"the", "a",  "of", "and", "to", "in",   "was", "with",
                        "for", "on", "is", "at",  "by", "from", "this"};
  for (std::size_t t = 0; t < options.topics; ++t) {
    std::vector<std::string> words;
    for (std::size_t j = 0; j < options.words_per_topic; ++j) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "t%zuw%02zu", t, j);
      words.emplace_back(buf);
    }
    out.topic_words.push_back(std::move(words));
  }
  Rng rng = Rng::derive(options.seed, "planted-corpus");
  for (std::size_t d = 0; d < options.documents; ++d) {
    const auto topic = static_cast<std::size_t>(rng.below(options.topics));
    out.planted.push_back(topic);
    if (d > 0) out.text += '\n';
    if (options.labels) out.text += "#label=topic" + std::to_string(topic) + "\n";
    if (options.tags) out.text += "#tags=tag" + std::to_string(topic) + "\n";
    for (std::size_t s = 0; s < options.sentences; ++s) {
      const auto length = options.min_sentence + rng.below(options.max_sentence - options.min_sentence + 1);
      for (std::size_t i = 0; i < length; ++i) {
        if (i > 0) out.text += ' ';
        if (i % 2 == 0) {
          out.text += out.function_words[rng.below(out.function_words.size())];
        } else {
          out.text += out.topic_words[topic][rng.below(options.words_per_topic)];
        }
      }
      out.text += '\n';
    }
  }
  return out;
}

TDLM_NAMESPACE_END
