#include "tdlm/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

TDLM_NAMESPACE_BEGIN

std::uint64_t CooccurrenceIndex::key(TokenId a, TokenId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

CooccurrenceIndex CooccurrenceIndex::build(std::span<const std::vector<TokenId>> documents, std::size_t window,
                                           std::span<const TokenId> query) {
  if (window < 2) throw ConfigError("coherence window must be at least 2");
  CooccurrenceIndex index;
  index.window_ = window;
  const std::unordered_set<TokenId> wanted(query.begin(), query.end());
  std::vector<TokenId> present;
  for (const auto& doc : documents) {
    for (std::size_t start = 0; start < doc.size(); ++start) {
      ++index.windows_;
      present.clear();
      const std::size_t end = std::min(doc.size(), start + window);
      for (std::size_t i = start; i < end; ++i) {
        const TokenId w = doc[i];
        if (wanted.count(w) && std::find(present.begin(), present.end(), w) == present.end()) present.push_back(w);
      }
      for (std::size_t i = 0; i < present.size(); ++i) {
        ++index.word_counts_[present[i]];
        for (std::size_t j = i + 1; j < present.size(); ++j) ++index.pair_counts_[key(present[i], present[j])];
      }
    }
  }
  if (index.windows_ == 0) throw IndexError("coherence reference corpus has no tokens");
  return index;
}

std::uint64_t CooccurrenceIndex::count(TokenId w) const {
  auto it = word_counts_.find(w);
  return it == word_counts_.end() ? 0 : it->second;
}

std::uint64_t CooccurrenceIndex::count(TokenId w1, TokenId w2) const {
  if (w1 == w2) return count(w1);
  auto it = pair_counts_.find(key(w1, w2));
  return it == pair_counts_.end() ? 0 : it->second;
}

std::optional<double> npmi_from_counts(std::uint64_t n1, std::uint64_t n2, std::uint64_t n12, std::uint64_t total) {
  if (n1 == 0 || n2 == 0) return std::nullopt;
  if (n12 == 0) return -1.0;
  if (n12 == n1 && n12 == n2) return 1.0;
  const double t = static_cast<double>(total);
  const double p1 = static_cast<double>(n1) / t;
  const double p2 = static_cast<double>(n2) / t;
  const double p12 = static_cast<double>(n12) / t;
  const double value = std::log(p12 / (p1 * p2)) / -std::log(p12);
  return std::clamp(value, -1.0, 1.0);
}

std::optional<double> npmi_pair(TokenId w1, TokenId w2, const CooccurrenceIndex& index) {
  return npmi_from_counts(index.count(w1), index.count(w2), index.count(w1, w2), index.windows());
}

TopicCoherence topic_coherence(std::size_t topic, std::span<const TokenId> words, const CooccurrenceIndex& index) {
  const std::size_t needed = kCoherenceCutoffs.back();
  if (words.size() < needed) {
    throw DataError("topic " + std::to_string(topic) + " has " + std::to_string(words.size()) +
                    " ranked words, coherence needs " + std::to_string(needed));
  }
  TopicCoherence out;
  out.topic = topic;
  double sum_of_means = 0.0;
  for (std::size_t c = 0; c < kCoherenceCutoffs.size(); ++c) {
    const std::size_t n = kCoherenceCutoffs[c];
    double total = 0.0;
    std::size_t scored = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (auto score = npmi_pair(words[i], words[j], index)) {
          total += *score;
          ++scored;
        }
      }
    }
    out.npmi[c] = scored > 0 ? total / static_cast<double>(scored) : 0.0;
    out.scored_pairs[c] = scored;
    sum_of_means += out.npmi[c];
  }
  out.average = sum_of_means / static_cast<double>(kCoherenceCutoffs.size());
  return out;
}

CoherenceReport coherence_report(std::span<const std::vector<TokenId>> topic_words, const CooccurrenceIndex& index) {
  CoherenceReport report;
  double total = 0.0;
  for (std::size_t t = 0; t < topic_words.size(); ++t) {
    report.topics.push_back(topic_coherence(t, topic_words[t], index));
    total += report.topics.back().average;
  }
  report.mean = topic_words.empty() ? 0.0 : total / static_cast<double>(topic_words.size());
  return report;
}

std::string coherence_csv(const CoherenceReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "topic_id,npmi_5,npmi_10,npmi_15,npmi_20,avg\n";
  for (const auto& t : report.topics) {
    out << t.topic;
    for (double v : t.npmi) out << ',' << v;
    out << ',' << t.average << '\n';
  }
  return out.str();
}

TDLM_NAMESPACE_END
