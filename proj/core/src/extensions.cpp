#include "tdlm/extensions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tdlm/ops.hpp"

TDLM_NAMESPACE_BEGIN

namespace {

void require_head(const ClassifierHead& head) {
  if (!head.defined()) throw ConfigError("the model has no classification head; train with supervised=true");
}

std::vector<TokenId> known_tags(std::span<const TokenId> tags, const TopicParams& topic) {
  std::vector<TokenId> out;
  if (!topic.has_tags()) return out;
  for (auto t : tags) {
    if (t >= 0 && static_cast<std::size_t>(t) < topic.tag_embeddings.rows()) out.push_back(t);
  }
  return out;
}

}  // namespace

Tensor class_logits(const TopicParams& topic, const ClassifierHead& head,
                    std::span<const std::vector<TokenId>> contexts, std::span<const std::vector<TokenId>> tags,
                    const TopicOptions& options, bool training, Rng& rng) {
  require_head(head);
  auto enc = encode_documents(topic, contexts, tags, options, training, rng);
  const Tensor parts[] = {enc.d, enc.s};
  return add_bias(matmul(concat_cols(parts), head.weight), head.bias);
}

std::vector<double> classify(const TopicParams& topic, const ClassifierHead& head, std::span<const TokenId> content,
                             std::span<const TokenId> tags, const TopicOptions& options) {
  require_head(head);
  Rng unused(0);
  const std::vector<TokenId> ctx(content.begin(), content.end());
  const std::vector<TokenId> tag_list = known_tags(tags, topic);
  Tensor probs =
      softmax(class_logits(topic, head, std::span(&ctx, 1), std::span(&tag_list, 1), options, false, unused));
  return {probs.data().begin(), probs.data().end()};
}

Tensor classification_loss(const TopicParams& topic, const ClassifierHead& head, const ClassBatch& batch,
                           const TopicOptions& options, bool training, Rng& rng) {
  Tensor logits = class_logits(topic, head, batch.contexts, batch.tags, options, training, rng);
  Tensor total = cross_entropy_sum(logits, batch.labels, {}, 1);
  return scale(total, static_cast<Real>(1.0 / static_cast<double>(batch.rows)));
}

DocEncoding tag_augmented_encoding(const TopicParams& topic, std::span<const TokenId> content,
                                   std::span<const TokenId> tags, const TopicOptions& options) {
  if (!topic.has_tags()) throw ConfigError("the model has no tag table; train with tags=true");
  Rng unused(0);
  const std::vector<TokenId> ctx(content.begin(), content.end());
  const std::vector<TokenId> tag_list = known_tags(tags, topic);
  return encode_documents(topic, std::span(&ctx, 1), std::span(&tag_list, 1), options, false, unused);
}

std::string export_tag_vectors(const TopicParams& topic, const NameIndex& tags,
                               std::span<const std::uint64_t> frequencies) {
  if (!topic.has_tags()) throw ConfigError("the model has no tag table; train with tags=true");
  const std::size_t n = topic.tag_embeddings.rows();
  const std::size_t f = topic.tag_embeddings.cols();
  if (tags.size() != n || frequencies.size() != n) {
    throw DimensionError("export_tag_vectors: " + std::to_string(tags.size()) + " tag names for a table of " +
                         std::to_string(n) + " rows");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (frequencies[x] != frequencies[y]) return frequencies[x] > frequencies[y];
    return tags.name(static_cast<TokenId>(x)) < tags.name(static_cast<TokenId>(y));
  });
  std::ostringstream out;
  out.precision(9);
  out << "tag";
  for (std::size_t j = 1; j <= f; ++j) out << ",v" << j;
  out << '\n';
  for (auto i : order) {
    out << tags.name(static_cast<TokenId>(i));
    for (std::size_t j = 0; j < f; ++j) out << ',' << topic.tag_embeddings.at(i, j);
    out << '\n';
  }
  return out.str();
}

TDLM_NAMESPACE_END
