#ifndef TDLM_TOPIC_MODEL_HPP_
#define TDLM_TOPIC_MODEL_HPP_

#include <span>
#include <vector>

#include "tdlm/batching.hpp"
#include "tdlm/random.hpp"
#include "tdlm/tensor.hpp"

TDLM_NAMESPACE_BEGIN

/// Parameters of the topic-model half: a convolutional document encoder,
/// the topic input table A (attention keys) and output table B (topic
/// vectors), and the bag-of-words output layer.
struct TopicParams {
  Tensor embeddings;      // [V x e]; the pad row stays zero
  Tensor conv_filters;    // [a x e*h]
  Tensor conv_bias;       // [a]
  Tensor topic_in;        // A: [k x a], or [k x (a + f)] with tags
  Tensor topic_out;       // B: [k x b]
  Tensor out_weight;      // [b x V]
  Tensor out_bias;        // [V]
  Tensor tag_embeddings;  // [n_tags x f]; undefined unless tags are enabled

  std::size_t embedding_size() const { return embeddings.cols(); }
  std::size_t width() const { return conv_filters.cols() / embeddings.cols(); }
  std::size_t filters() const { return conv_filters.rows(); }
  std::size_t topics() const { return topic_in.rows(); }
  std::size_t vocab_size() const { return embeddings.rows(); }
  bool has_tags() const { return tag_embeddings.defined(); }
};

struct TopicOptions {
  std::size_t m3 = 300;
  double keep_prob = 0.4;  // dropout on d and s while training
};

/// Batched document encoding; row i belongs to context i.
struct DocEncoding {
  Tensor d;  // [n x a], or [n x (a + f)] when tags are concatenated
  Tensor p;  // [n x k] attention over topics
  Tensor s;  // [n x b] attention-weighted topic vector
};

// Pads each context to m3 with the pad id, embeds it, applies the a filters
// over every window of h words with identity activation and max-pools over
// time to get d; p = softmax(A d), s = B^T p. While training, dropout is
// applied to d and to s. `tags` is either empty or holds one tag-id list
// per context; the summed tag vectors are concatenated onto d before the
// attention.
DocEncoding encode_documents(const TopicParams& params, std::span<const std::vector<TokenId>> contexts,
                             std::span<const std::vector<TokenId>> tags, const TopicOptions& options, bool training,
                             Rng& rng);

// Logits over the vocabulary for topic vectors s [n x b].
Tensor topic_word_logits(const TopicParams& params, const Tensor& s);

// Mean cross-entropy of the m1 targets per document, averaged over the batch.
Tensor tm_loss(const TopicParams& params, const TmBatch& batch, const TopicOptions& options, bool training, Rng& rng);

// Softmax of the output layer applied to row t of B. IndexError if t >= k.
Tensor topic_word_distribution(const TopicParams& params, std::size_t topic);

// Attention p for one document with dropout disabled.
Tensor document_topic_distribution(const TopicParams& params, std::span<const TokenId> content,
                                   std::span<const TokenId> tags, const TopicOptions& options);

// Summed tag vectors per row, [n x f].
Tensor sum_tag_vectors(const Tensor& tag_embeddings, std::span<const std::vector<TokenId>> tags);

TDLM_NAMESPACE_END

#endif  // TDLM_TOPIC_MODEL_HPP_
