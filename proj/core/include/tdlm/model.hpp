#ifndef TDLM_MODEL_HPP_
#define TDLM_MODEL_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "tdlm/corpus.hpp"
#include "tdlm/extensions.hpp"
#include "tdlm/language_model.hpp"
#include "tdlm/optim.hpp"
#include "tdlm/topic_model.hpp"
#include "tdlm/train_config.hpp"

TDLM_NAMESPACE_BEGIN

struct Perplexity {
  double total_loss = 0.0;  // summed token cross-entropy
  std::size_t tokens = 0;
  double value = 0.0;  // exp(total_loss / tokens)
};

/// The complete model: both components, the optional classifier head and
/// the tables needed to read and write text.
///
/// Parameter names are stable and form the checkpoint directory:
///   tm.*  topic component (absent in the vanilla model)
///   lm.*  language model, lm.gate.* the topic gate
///   cls.* classifier head (supervised only)
class TdlmModel {
 public:
  TdlmModel() = default;

  // Every tensor is drawn from its own stream keyed by (seed, name), so two
  // models built from the same seed share every parameter they have in common.
  static TdlmModel create(const TrainConfig& config, Vocabulary vocab, NameIndex labels = {}, NameIndex tags = {},
                          std::vector<std::uint64_t> tag_counts = {});
  static TdlmModel create(const TrainConfig& config, const Dataset& dataset);

  const TrainConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  const NameIndex& labels() const { return labels_; }
  const NameIndex& tags() const { return tags_; }
  const std::vector<std::uint64_t>& tag_counts() const { return tag_counts_; }

  // Deep copy; the copy shares no tensor storage with this model.
  TdlmModel clone() const;

  bool vanilla() const { return config_.vanilla; }
  bool supervised() const { return head_.defined(); }

  TopicParams& topic() { return topic_; }
  const TopicParams& topic() const { return topic_; }
  LmParams& lm() { return lm_; }
  const LmParams& lm() const { return lm_; }
  ClassifierHead& head() { return head_; }
  const ClassifierHead& head() const { return head_; }

  TopicOptions topic_options() const;
  LmOptions lm_options() const;

  // All parameters in a fixed order.
  std::vector<NamedParam> parameters() const;
  // The parameters each sub-task's loss depends on.
  std::vector<NamedParam> tm_parameters() const;
  std::vector<NamedParam> lm_parameters() const;
  std::vector<NamedParam> cls_parameters() const;
  std::size_t parameter_count() const;

  // Replaces a parameter's values; DimensionError on a shape mismatch.
  void assign(const std::string& name, const Shape& shape, std::span<const Real> values);

  Tensor tm_loss(const TmBatch& batch, bool training, Rng& rng) const;
  LmLoss lm_loss(const LmBatch& batch, bool training, Rng& rng) const;
  Tensor cls_loss(const ClassBatch& batch, bool training, Rng& rng) const;

  // Dropout off. DataError on a split with no tokens.
  Perplexity perplexity(const Corpus& corpus) const;
  double accuracy(const Corpus& corpus) const;

 private:
  TrainConfig config_;
  Vocabulary vocab_;
  NameIndex labels_;
  NameIndex tags_;
  std::vector<std::uint64_t> tag_counts_;
  TopicParams topic_;
  LmParams lm_;
  ClassifierHead head_;
};

// Reads `<count> <dim>` then `word v1 .. vdim` lines and copies each vector
// into both embedding tables for words in the vocabulary. Returns the number
// of words copied. DataError if dim differs from the embedding size.
std::size_t load_pretrained_embeddings(TdlmModel& model, const std::filesystem::path& path);

TDLM_NAMESPACE_END

#endif  // TDLM_MODEL_HPP_
