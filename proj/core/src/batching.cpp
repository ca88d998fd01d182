#include "tdlm/batching.hpp"

#include <algorithm>
#include <numeric>

TDLM_NAMESPACE_BEGIN

namespace {

struct LmRow {
  std::vector<TokenId> inputs;
  std::vector<TokenId> targets;
  std::size_t document;
  std::size_t sentence;
};

std::vector<TokenId> truncated(std::span<const TokenId> ids, std::size_t m3) {
  return {ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(std::min(ids.size(), m3))};
}

}  // namespace

std::size_t LmBatch::used_steps() const {
  std::size_t used = 0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t t = 0; t < steps; ++t)
      if (mask[r * steps + t]) used = std::max(used, t + 1);
  return used;
}

std::size_t LmBatch::token_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

std::vector<LmBatch> make_lm_batches(const Corpus& corpus, std::size_t n_batch, std::size_t m2, std::size_t m3,
                                     Rng* shuffle) {
  if (n_batch == 0 || m2 == 0) throw ConfigError("n_batch and m2 must be positive");
  std::vector<LmRow> rows;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const auto& doc = corpus.documents[d];
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      std::vector<TokenId> seq;
      seq.reserve(doc.sentences[s].size() + 2);
      seq.push_back(Vocabulary::kEos);
      seq.insert(seq.end(), doc.sentences[s].begin(), doc.sentences[s].end());
      seq.push_back(Vocabulary::kEos);
      const std::size_t predictions = seq.size() - 1;
      for (std::size_t start = 0; start < predictions; start += m2) {
        const std::size_t len = std::min(m2, predictions - start);
        LmRow row;
        row.inputs.assign(seq.begin() + static_cast<std::ptrdiff_t>(start),
                          seq.begin() + static_cast<std::ptrdiff_t>(start + len));
        row.targets.assign(seq.begin() + static_cast<std::ptrdiff_t>(start + 1),
                           seq.begin() + static_cast<std::ptrdiff_t>(start + 1 + len));
        row.document = d;
        row.sentence = s;
        rows.push_back(std::move(row));
      }
    }
  }
  if (shuffle) shuffle->shuffle(rows.begin(), rows.end());

  std::vector<LmBatch> batches;
  for (std::size_t first = 0; first < rows.size(); first += n_batch) {
    const std::size_t count = std::min(n_batch, rows.size() - first);
    LmBatch batch;
    batch.rows = count;
    batch.steps = m2;
    batch.inputs.assign(count * m2, Vocabulary::kPad);
    batch.targets.assign(count * m2, Vocabulary::kPad);
    batch.mask.assign(count * m2, 0);
    for (std::size_t r = 0; r < count; ++r) {
      const auto& row = rows[first + r];
      std::copy(row.inputs.begin(), row.inputs.end(), batch.inputs.begin() + static_cast<std::ptrdiff_t>(r * m2));
      std::copy(row.targets.begin(), row.targets.end(), batch.targets.begin() + static_cast<std::ptrdiff_t>(r * m2));
      std::fill_n(batch.mask.begin() + static_cast<std::ptrdiff_t>(r * m2), row.inputs.size(), std::uint8_t{1});
      const auto& doc = corpus.documents[row.document];
      batch.contexts.push_back(truncated(doc.bow_context[row.sentence], m3));
      batch.tags.push_back(doc.tags);
      batch.documents.push_back(row.document);
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

TmBatches make_tm_batches(const Corpus& corpus, std::size_t n_batch, std::size_t m1, std::size_t m3, Rng& rng) {
  if (n_batch == 0 || m1 == 0) throw ConfigError("n_batch and m1 must be positive");
  TmBatches out;
  std::vector<std::size_t> order;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    if (corpus.documents[d].content.empty()) {
      ++out.skipped_documents;
    } else {
      order.push_back(d);
    }
  }
  rng.shuffle(order.begin(), order.end());
  for (std::size_t first = 0; first < order.size(); first += n_batch) {
    const std::size_t count = std::min(n_batch, order.size() - first);
    TmBatch batch;
    batch.rows = count;
    batch.targets_per_row = m1;
    batch.mask.assign(count * m1, 1);
    for (std::size_t r = 0; r < count; ++r) {
      const std::size_t d = order[first + r];
      const auto& content = corpus.documents[d].content;
      if (content.size() >= m1) {
        // Partial Fisher-Yates over positions.
        std::vector<std::size_t> positions(content.size());
        std::iota(positions.begin(), positions.end(), std::size_t{0});
        for (std::size_t j = 0; j < m1; ++j) {
          const auto pick = j + rng.below(positions.size() - j);
          std::swap(positions[j], positions[pick]);
          batch.targets.push_back(content[positions[j]]);
        }
      } else {
        for (std::size_t j = 0; j < m1; ++j) batch.targets.push_back(content[rng.below(content.size())]);
      }
      batch.contexts.push_back(truncated(content, m3));
      batch.tags.push_back(corpus.documents[d].tags);
      batch.documents.push_back(d);
    }
    out.batches.push_back(std::move(batch));
  }
  return out;
}

std::vector<ClassBatch> make_class_batches(const Corpus& corpus, std::size_t n_batch, std::size_t m3, Rng* shuffle) {
  if (n_batch == 0) throw ConfigError("n_batch must be positive");
  std::vector<std::size_t> order(corpus.documents.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (auto d : order) {
    if (corpus.documents[d].label < 0) {
      throw DataError("document " + std::to_string(d) + " has no label in a supervised run");
    }
  }
  if (shuffle) shuffle->shuffle(order.begin(), order.end());
  std::vector<ClassBatch> batches;
  for (std::size_t first = 0; first < order.size(); first += n_batch) {
    const std::size_t count = std::min(n_batch, order.size() - first);
    ClassBatch batch;
    batch.rows = count;
    for (std::size_t r = 0; r < count; ++r) {
      const auto& doc = corpus.documents[order[first + r]];
      batch.contexts.push_back(truncated(doc.content, m3));
      batch.labels.push_back(doc.label);
      batch.tags.push_back(doc.tags);
      batch.documents.push_back(order[first + r]);
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

std::vector<TokenId> pad_context(std::span<const TokenId> ids, std::size_t m3, std::size_t width) {
  const std::size_t length = std::max(m3, width);
  std::vector<TokenId> out(length, Vocabulary::kPad);
  std::copy_n(ids.begin(), std::min(ids.size(), m3), out.begin());
  return out;
}

TDLM_NAMESPACE_END
