#ifndef TDLM_COHERENCE_HPP_
#define TDLM_COHERENCE_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tdlm/base.hpp"

TDLM_NAMESPACE_BEGIN

/// Sliding-window document frequencies of a fixed set of query words and of
/// every unordered pair of them.
///
/// A window starts at every token of a document and covers up to `window`
/// tokens, so windows near the end of a document are shorter. Each window
/// counts a word or pair at most once.
class CooccurrenceIndex {
 public:
  // Throws IndexError when no document has any token, ConfigError when
  // window < 2.
  static CooccurrenceIndex build(std::span<const std::vector<TokenId>> documents, std::size_t window,
                                 std::span<const TokenId> query);

  std::size_t window() const { return window_; }
  std::uint64_t windows() const { return windows_; }
  // 0 for words outside the query set or absent from the reference.
  std::uint64_t count(TokenId w) const;
  std::uint64_t count(TokenId w1, TokenId w2) const;

 private:
  static std::uint64_t key(TokenId a, TokenId b);

  std::size_t window_ = 0;
  std::uint64_t windows_ = 0;
  std::unordered_map<TokenId, std::uint64_t> word_counts_;
  std::unordered_map<std::uint64_t, std::uint64_t> pair_counts_;
};

// NPMI from window counts. No value when either word never occurs (the pair
// is left out of any average). -1 when both occur but never together, 1 when
// the two words occur in exactly the same windows, otherwise
// log(P(w1,w2) / (P(w1) P(w2))) / -log P(w1,w2) clamped to [-1, 1].
std::optional<double> npmi_from_counts(std::uint64_t n1, std::uint64_t n2, std::uint64_t n12, std::uint64_t total);

std::optional<double> npmi_pair(TokenId w1, TokenId w2, const CooccurrenceIndex& index);

inline constexpr std::array<std::size_t, 4> kCoherenceCutoffs = {5, 10, 15, 20};

struct TopicCoherence {
  std::size_t topic = 0;
  // Mean NPMI over the scored pairs of the top 5, 10, 15 and 20 words; 0
  // when no pair of a cutoff could be scored.
  std::array<double, 4> npmi{};
  std::array<std::size_t, 4> scored_pairs{};
  double average = 0.0;  // mean of the four values
};

// `words` is the topic's ranking, best first. DataError naming the topic if
// fewer than 20 words are given.
TopicCoherence topic_coherence(std::size_t topic, std::span<const TokenId> words, const CooccurrenceIndex& index);

struct CoherenceReport {
  std::vector<TopicCoherence> topics;
  double mean = 0.0;  // mean of the per-topic averages
};

CoherenceReport coherence_report(std::span<const std::vector<TokenId>> topic_words, const CooccurrenceIndex& index);

// `topic_id,npmi_5,npmi_10,npmi_15,npmi_20,avg`
std::string coherence_csv(const CoherenceReport& report);

TDLM_NAMESPACE_END

#endif  // TDLM_COHERENCE_HPP_
