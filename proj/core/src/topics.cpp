#include "tdlm/topics.hpp"

#include <algorithm>
#include <numeric>

#include "json.hpp"

TDLM_NAMESPACE_BEGIN

std::vector<TopicWord> top_topic_words(const TdlmModel& model, std::size_t topic, std::size_t n) {
  if (model.vanilla()) throw ConfigError("the vanilla model has no topics");
  const Tensor dist = topic_word_distribution(model.topic(), topic);
  const auto& vocab = model.vocab();
  std::vector<TokenId> ids;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (vocab.is_content(static_cast<TokenId>(i))) ids.push_back(static_cast<TokenId>(i));
  }
  const std::size_t keep = std::min(n, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(keep), ids.end(), [&](TokenId a, TokenId b) {
    const auto pa = dist[static_cast<std::size_t>(a)], pb = dist[static_cast<std::size_t>(b)];
    return pa != pb ? pa > pb : a < b;
  });
  std::vector<TopicWord> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    out.push_back({ids[i], vocab.word(ids[i]), static_cast<double>(dist[static_cast<std::size_t>(ids[i])])});
  }
  return out;
}

std::vector<std::vector<TokenId>> top_word_ids(const TdlmModel& model, std::size_t n) {
  std::vector<std::vector<TokenId>> out;
  for (std::size_t t = 0; t < model.config().k; ++t) {
    std::vector<TokenId> ids;
    for (const auto& w : top_topic_words(model, t, n)) ids.push_back(w.id);
    out.push_back(std::move(ids));
  }
  return out;
}

std::string topics_json(const TdlmModel& model, std::size_t n, const CoherenceReport* coherence) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < model.config().k; ++t) {
    nlohmann::ordered_json entry;
    entry["topic_id"] = t;
    auto words = nlohmann::ordered_json::array();
    for (const auto& w : top_topic_words(model, t, n)) words.push_back({{"word", w.word}, {"prob", w.prob}});
    entry["top_words"] = std::move(words);
    if (coherence != nullptr && t < coherence->topics.size()) {
      const auto& c = coherence->topics[t];
      for (std::size_t i = 0; i < kCoherenceCutoffs.size(); ++i) {
        entry["npmi_" + std::to_string(kCoherenceCutoffs[i])] = c.npmi[i];
      }
      entry["coherence"] = c.average;
    }
    out.push_back(std::move(entry));
  }
  return out.dump(2) + "\n";
}

TDLM_NAMESPACE_END
