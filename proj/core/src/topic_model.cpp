#include "tdlm/topic_model.hpp"

#include "tdlm/ops.hpp"
#include "tdlm/vocabulary.hpp"

TDLM_NAMESPACE_BEGIN

Tensor sum_tag_vectors(const Tensor& tag_embeddings, std::span<const std::vector<TokenId>> tags) {
  const std::size_t n_tags = tag_embeddings.rows();
  auto indicator = Tensor::zeros({tags.size(), n_tags});
  for (std::size_t i = 0; i < tags.size(); ++i) {
    for (auto t : tags[i]) {
      if (t < 0 || static_cast<std::size_t>(t) >= n_tags) {
        throw IndexError("tag id " + std::to_string(t) + " outside tag table of " + std::to_string(n_tags));
      }
      indicator[i * n_tags + static_cast<std::size_t>(t)] = Real(1);
    }
  }
  return matmul(indicator, tag_embeddings);
}

DocEncoding encode_documents(const TopicParams& params, std::span<const std::vector<TokenId>> contexts,
                             std::span<const std::vector<TokenId>> tags, const TopicOptions& options, bool training,
                             Rng& rng) {
  const std::size_t n = contexts.size();
  const std::size_t width = params.width();
  if (n == 0) throw InvariantError("encode_documents: no contexts");
  const std::size_t length = std::max(options.m3, width);
  std::vector<TokenId> ids;
  ids.reserve(n * length);
  for (const auto& ctx : contexts) {
    auto padded = pad_context(ctx, options.m3, width);
    ids.insert(ids.end(), padded.begin(), padded.end());
  }
  Tensor x = gather_rows(params.embeddings, ids, Vocabulary::kPad);
  Tensor windows = unfold_windows(x, n, length, width);
  Tensor features = add_bias(matmul_bt(windows, params.conv_filters), params.conv_bias);
  Tensor d = max_pool_time(features, n, length - width + 1);
  d = dropout(d, options.keep_prob, training, rng);
  if (params.has_tags()) {
    if (!tags.empty() && tags.size() != n) throw DimensionError("encode_documents: one tag list per context needed");
    std::vector<std::vector<TokenId>> none;
    if (tags.empty()) none.resize(n);
    Tensor summed = sum_tag_vectors(params.tag_embeddings, tags.empty() ? std::span(none) : tags);
    const Tensor parts[] = {d, summed};
    d = concat_cols(parts);
  }
  Tensor p = softmax(matmul_bt(d, params.topic_in));
  Tensor s = matmul(p, params.topic_out);
  s = dropout(s, options.keep_prob, training, rng);
  return {d, p, s};
}

Tensor topic_word_logits(const TopicParams& params, const Tensor& s) {
  return add_bias(matmul(s, params.out_weight), params.out_bias);
}

Tensor tm_loss(const TopicParams& params, const TmBatch& batch, const TopicOptions& options, bool training, Rng& rng) {
  auto enc = encode_documents(params, batch.contexts, batch.tags, options, training, rng);
  Tensor logits = topic_word_logits(params, enc.s);
  Tensor total = cross_entropy_sum(logits, batch.targets, batch.mask, batch.targets_per_row);
  std::size_t counted = 0;
  for (auto m : batch.mask) counted += m ? 1 : 0;
  if (counted == 0) throw InvariantError("tm_loss: batch has no targets");
  return scale(total, static_cast<Real>(1.0 / static_cast<double>(counted)));
}

Tensor topic_word_distribution(const TopicParams& params, std::size_t topic) {
  const std::size_t k = params.topics();
  if (topic >= k) {
    throw IndexError("topic " + std::to_string(topic) + " outside [0, " + std::to_string(k) + ")");
  }
  const std::size_t b = params.topic_out.cols();
  auto row = params.topic_out.data().subspan(topic * b, b);
  Tensor s = Tensor::from({1, b}, {row.begin(), row.end()});
  Tensor probs = softmax(topic_word_logits(params, s.detach()));
  return Tensor::from({probs.size()}, {probs.data().begin(), probs.data().end()});
}

Tensor document_topic_distribution(const TopicParams& params, std::span<const TokenId> content,
                                   std::span<const TokenId> tags, const TopicOptions& options) {
  Rng unused(0);
  const std::vector<TokenId> ctx(content.begin(), content.end());
  const std::vector<TokenId> tag_list(tags.begin(), tags.end());
  auto enc = encode_documents(params, std::span(&ctx, 1), std::span(&tag_list, 1), options, false, unused);
  return Tensor::from({enc.p.size()}, {enc.p.data().begin(), enc.p.data().end()});
}

TDLM_NAMESPACE_END
