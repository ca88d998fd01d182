#ifndef TDLM_CORPUS_HPP_
#define TDLM_CORPUS_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdlm/tokenizer.hpp"
#include "tdlm/vocabulary.hpp"

TDLM_NAMESPACE_BEGIN

/// A document as read from text, before vocabulary mapping.
struct RawDocument {
  std::vector<Sentence> sentences;
  std::optional<std::string> label;
  std::vector<std::string> tags;
  std::size_t first_line = 0;  // 1-based line of the document's first line
};

// Corpus text format: documents are separated by blank lines, each line of a
// document is one (or, with sentence splitting, more) sentences. Leading
// `#label=<name>` and `#tags=<a>,<b>` lines carry metadata. Any other
// leading line starting with '#' is a DataError naming the line.
std::vector<RawDocument> parse_corpus(std::string_view text, const TokenizerOptions& options = {});
std::vector<RawDocument> read_corpus(const std::filesystem::path& path, const TokenizerOptions& options = {});

WordCounts count_words(std::span<const RawDocument> docs);

struct Document {
  std::vector<std::vector<TokenId>> sentences;
  // For sentence j: the content words of every other sentence, in document order.
  std::vector<std::vector<TokenId>> bow_context;
  // All content words of the document, in order.
  std::vector<TokenId> content;
  TokenId label = -1;
  std::vector<TokenId> tags;

  std::size_t token_count() const;
};

Document make_document(std::vector<std::vector<TokenId>> sentences, TokenId label, std::vector<TokenId> tags,
                       const Vocabulary& vocab);

struct Corpus {
  std::vector<Document> documents;

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
  std::size_t token_count() const;
};

// Labels sorted by name; tags by descending document frequency, then name.
NameIndex build_label_index(std::span<const RawDocument> docs);
NameIndex build_tag_index(std::span<const RawDocument> docs);
std::vector<std::uint64_t> tag_frequencies(std::span<const RawDocument> docs, const NameIndex& tags);

// Maps words to ids (unknown -> unk). An unknown label is a DataError;
// unknown tags are dropped, which is the same as a zero tag vector.
Corpus index_corpus(std::span<const RawDocument> docs, const Vocabulary& vocab, const NameIndex& labels,
                    const NameIndex& tags);

// Compact binary form: sentences, label and tag ids per document.
std::string encode_corpus(const Corpus& corpus);
Corpus decode_corpus(std::string_view bytes, const Vocabulary& vocab);

/// A preprocessed corpus with its vocabulary and metadata tables.
struct Dataset {
  Vocabulary vocab;
  NameIndex labels;
  NameIndex tags;
  std::vector<std::uint64_t> tag_counts;
  Corpus train;
  Corpus dev;
  Corpus test;

  const Corpus& split(std::string_view name) const;
};

struct SplitOptions {
  double dev_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 1;
};

struct RawSplits {
  std::vector<RawDocument> train, dev, test;
};

// Seeded shuffle, then the first round(dev_fraction * n) documents go to dev
// and the next round(test_fraction * n) to test.
RawSplits split_documents(std::vector<RawDocument> docs, const SplitOptions& options);

// The vocabulary comes from the training split only; label and tag tables
// cover all three splits.
Dataset build_dataset(const RawSplits& raw, const VocabOptions& vocab_options, const StopwordSet& stopwords);

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

TDLM_NAMESPACE_END

#endif  // TDLM_CORPUS_HPP_
