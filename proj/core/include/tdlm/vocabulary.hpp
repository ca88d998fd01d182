#ifndef TDLM_VOCABULARY_HPP_
#define TDLM_VOCABULARY_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tdlm/base.hpp"
#include "tdlm/stopwords.hpp"

TDLM_NAMESPACE_BEGIN

struct VocabOptions {
  std::uint64_t min_count = 10;
  // Fraction of the most frequent surviving types to drop.
  double top_exclude_fraction = 0.001;
};

using WordCounts = std::unordered_map<std::string, std::uint64_t>;

/// Bidirectional word <-> id map. Ids 0..2 are reserved for padding, unknown
/// words and the sentence boundary; retained types follow in order of
/// descending frequency, ties broken lexicographically.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kReserved = 3;

  Vocabulary();

  static Vocabulary build(const WordCounts& counts, const VocabOptions& options, const StopwordSet& stopwords);
  // Reassembles a vocabulary from stored columns (reserved entries included).
  static Vocabulary from_entries(std::vector<std::string> words, std::vector<std::uint64_t> frequencies,
                                 std::vector<bool> stopword);

  std::size_t size() const { return words_.size(); }
  // Unknown words map to kUnk.
  TokenId id(std::string_view word) const;
  bool contains(std::string_view word) const;
  const std::string& word(TokenId id) const;
  std::uint64_t frequency(TokenId id) const { return frequencies_.at(static_cast<std::size_t>(id)); }
  bool is_stopword(TokenId id) const { return stopword_.at(static_cast<std::size_t>(id)); }
  // Retained, non-reserved, non-stopword: eligible for the topic model.
  bool is_content(TokenId id) const { return id >= kReserved && !is_stopword(id); }

  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::uint64_t>& frequencies() const { return frequencies_; }
  const std::vector<bool>& stopword_flags() const { return stopword_; }

  // `id<TAB>word<TAB>frequency<TAB>stopword_flag` per line.
  std::string to_tsv() const;
  static Vocabulary from_tsv(std::string_view text);

  bool operator==(const Vocabulary& other) const {
    return words_ == other.words_ && frequencies_ == other.frequencies_ && stopword_ == other.stopword_;
  }

 private:
  void reindex();

  std::vector<std::string> words_;
  std::vector<std::uint64_t> frequencies_;
  std::vector<bool> stopword_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Name <-> id table for document labels and tags.
class NameIndex {
 public:
  NameIndex() = default;
  explicit NameIndex(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  bool contains(std::string_view name) const { return index_.count(std::string(name)) != 0; }
  // Throws DataError on an unknown name.
  TokenId id(std::string_view name) const;
  // -1 for an unknown name.
  TokenId find(std::string_view name) const;
  const std::string& name(TokenId id) const { return names_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& names() const { return names_; }

  bool operator==(const NameIndex& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, TokenId> index_;
};

TDLM_NAMESPACE_END

#endif  // TDLM_VOCABULARY_HPP_
