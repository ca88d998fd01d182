#ifndef TDLM_BATCHING_HPP_
#define TDLM_BATCHING_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tdlm/corpus.hpp"
#include "tdlm/random.hpp"

TDLM_NAMESPACE_BEGIN

/// Language-model minibatch. Rows are sentence chunks; each row starts from a
/// fresh LSTM state. Arrays are row-major [rows x steps].
struct LmBatch {
  std::size_t rows = 0;
  std::size_t steps = 0;  // m2
  std::vector<TokenId> inputs;
  std::vector<TokenId> targets;
  std::vector<std::uint8_t> mask;
  // Per row: document context with the row's own sentence excluded,
  // truncated to m3 (not yet padded).
  std::vector<std::vector<TokenId>> contexts;
  std::vector<std::vector<TokenId>> tags;
  std::vector<std::size_t> documents;

  // Last unmasked step + 1 over all rows.
  std::size_t used_steps() const;
  std::size_t token_count() const;
};

/// Topic-model minibatch: one row per document.
struct TmBatch {
  std::size_t rows = 0;
  std::size_t targets_per_row = 0;  // m1
  std::vector<std::vector<TokenId>> contexts;
  std::vector<std::vector<TokenId>> tags;
  std::vector<TokenId> targets;
  std::vector<std::uint8_t> mask;
  std::vector<std::size_t> documents;
};

struct TmBatches {
  std::vector<TmBatch> batches;
  std::size_t skipped_documents = 0;  // documents with no content words
};

/// Document-classification minibatch.
struct ClassBatch {
  std::size_t rows = 0;
  std::vector<std::vector<TokenId>> contexts;
  std::vector<TokenId> labels;
  std::vector<std::vector<TokenId>> tags;
  std::vector<std::size_t> documents;
};

// Splits every sentence (wrapped with eos on both sides) into rows of at most
// m2 predictions and groups them into batches of n_batch rows. Rows are
// shuffled when `shuffle` is non-null; otherwise corpus order is kept.
std::vector<LmBatch> make_lm_batches(const Corpus& corpus, std::size_t n_batch, std::size_t m2, std::size_t m3,
                                     Rng* shuffle);

// One row per document with content words: m1 targets drawn uniformly
// without replacement (with replacement when fewer than m1 exist), context =
// the content words truncated to m3. Document order is shuffled by `rng`.
TmBatches make_tm_batches(const Corpus& corpus, std::size_t n_batch, std::size_t m1, std::size_t m3, Rng& rng);

// Throws DataError naming the first unlabeled document.
std::vector<ClassBatch> make_class_batches(const Corpus& corpus, std::size_t n_batch, std::size_t m3, Rng* shuffle);

// Truncates to m3 then pads with the pad id to exactly max(m3, width) entries.
std::vector<TokenId> pad_context(std::span<const TokenId> ids, std::size_t m3, std::size_t width);

TDLM_NAMESPACE_END

#endif  // TDLM_BATCHING_HPP_
