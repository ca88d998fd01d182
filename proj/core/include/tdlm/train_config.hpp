#ifndef TDLM_TRAIN_CONFIG_HPP_
#define TDLM_TRAIN_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tdlm/base.hpp"

TDLM_NAMESPACE_BEGIN

/// Every hyper-parameter of a run. Defaults are the published settings for
/// the news domain (m3 = 300, one 600-unit LSTM layer, 100 topics).
struct TrainConfig {
  // Model and training.
  std::size_t m1 = 3;    // targets per document for the topic model
  std::size_t m2 = 30;   // language-model sequence length
  std::size_t m3 = 300;  // maximum document length
  std::size_t n_batch = 64;
  std::size_t n_layer = 1;
  std::size_t n_hidden = 600;
  std::size_t n_epoch = 10;
  std::size_t k = 100;  // topics
  std::size_t e = 300;  // word embedding size
  std::size_t h = 2;    // convolution width
  std::size_t a = 20;   // filters / topic input vector size
  std::size_t b = 50;   // topic output vector size
  double l = 0.001;     // learning rate
  double p1 = 0.4;      // topic-model dropout keep probability
  double p2 = 0.6;      // language-model dropout keep probability
  std::uint64_t seed = 1;
  double clip_norm = 5.0;  // <= 0 disables clipping
  double lr_decay = 1.0;   // learning-rate multiplier applied after each epoch
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool vanilla = false;
  bool supervised = false;
  bool tags = false;
  std::size_t f = 5;  // tag vector size
  // Half-widths of the uniform initialisation of the topic input table A and
  // the topic output table B.
  double topic_init = 0.05;
  double topic_out_init = 0.05;

  // Preprocessing.
  std::uint64_t min_count = 10;
  double top_exclude_fraction = 0.001;
  bool split_sentences = true;
  bool split_contractions = false;
  std::string stopwords;  // path; empty selects the bundled list

  // Throws ConfigError describing the first invalid field.
  void validate() const;

  // `key=value` lines, one per field, in declaration order.
  std::string to_text() const;

  bool operator==(const TrainConfig&) const = default;
};

std::vector<std::string> config_keys();

// Parses `key=value` lines ('#' comments, blank lines allowed). Unknown keys,
// malformed values and duplicates are ConfigErrors. Overrides are applied
// after the file, then supervised-mode defaults (a=80, b=100, m3=150,
// n_epoch=20) fill any of those keys not set explicitly. The result is
// validated.
TrainConfig load_config(std::string_view text, const std::map<std::string, std::string>& overrides = {});

// Sets one field from its textual value.
void set_config_value(TrainConfig& config, std::string_view key, std::string_view value);

TDLM_NAMESPACE_END

#endif  // TDLM_TRAIN_CONFIG_HPP_
