#ifndef TDLM_EXTENSIONS_HPP_
#define TDLM_EXTENSIONS_HPP_

#include <span>
#include <string>
#include <vector>

#include "tdlm/batching.hpp"
#include "tdlm/topic_model.hpp"
#include "tdlm/vocabulary.hpp"

TDLM_NAMESPACE_BEGIN

/// Dense softmax layer over the concatenated document vector and topic
/// vector.
struct ClassifierHead {
  Tensor weight;  // [(dim(d) + b) x C]
  Tensor bias;    // [C]

  bool defined() const { return weight.defined(); }
  std::size_t classes() const { return bias.size(); }
};

// Logits [n x C] from d and s of each context. In training mode d and s
// carry the topic encoder's dropout; no further mask is applied.
Tensor class_logits(const TopicParams& topic, const ClassifierHead& head,
                    std::span<const std::vector<TokenId>> contexts, std::span<const std::vector<TokenId>> tags,
                    const TopicOptions& options, bool training, Rng& rng);

// Class probabilities for one document with dropout off. ConfigError if the
// head is absent.
std::vector<double> classify(const TopicParams& topic, const ClassifierHead& head, std::span<const TokenId> content,
                             std::span<const TokenId> tags, const TopicOptions& options);

// Mean cross-entropy of the batch's labels.
Tensor classification_loss(const TopicParams& topic, const ClassifierHead& head, const ClassBatch& batch,
                           const TopicOptions& options, bool training, Rng& rng);

// Encoding with the summed tag vectors appended to d. Tags outside the table
// contribute nothing.
DocEncoding tag_augmented_encoding(const TopicParams& topic, std::span<const TokenId> content,
                                   std::span<const TokenId> tags, const TopicOptions& options);

// CSV `tag,v1..vf`, one row per tag by descending tag frequency, ties by name.
// ConfigError when the model has no tag table.
std::string export_tag_vectors(const TopicParams& topic, const NameIndex& tags,
                               std::span<const std::uint64_t> frequencies);

TDLM_NAMESPACE_END

#endif  // TDLM_EXTENSIONS_HPP_
