#ifndef TDLM_LANGUAGE_MODEL_HPP_
#define TDLM_LANGUAGE_MODEL_HPP_

#include <vector>

#include "tdlm/batching.hpp"
#include "tdlm/random.hpp"
#include "tdlm/tensor.hpp"
#include "tdlm/topic_model.hpp"

TDLM_NAMESPACE_BEGIN

/// One LSTM layer. Input weights are [in x n_hidden], recurrent weights
/// [n_hidden x n_hidden]; rows of the batch are multiplied from the left.
struct LstmLayerParams {
  Tensor w_input, w_forget, w_output, w_cell;
  Tensor u_input, u_forget, u_output, u_cell;
  Tensor b_input, b_forget, b_output, b_cell;

  std::size_t hidden_size() const { return u_input.rows(); }
};

/// GRU-style unit mixing the topic vector s into the top hidden state.
/// W_* are [b x n_hidden], U_* [n_hidden x n_hidden].
struct TopicGateParams {
  Tensor w_update, w_reset, w_candidate;
  Tensor u_update, u_reset, u_candidate;
  Tensor b_update, b_reset, b_candidate;
};

struct LmParams {
  Tensor embeddings;  // [V x e]; the pad row stays zero
  std::vector<LstmLayerParams> layers;
  TopicGateParams gate;  // undefined tensors in the vanilla model
  Tensor out_weight;     // [n_hidden x V]
  Tensor out_bias;       // [V]

  bool has_gate() const { return gate.w_update.defined(); }
  std::size_t hidden_size() const { return layers.front().hidden_size(); }
  std::size_t vocab_size() const { return embeddings.rows(); }
};

/// Per-layer hidden and cell state, each [rows x n_hidden].
struct LstmState {
  std::vector<Tensor> h;
  std::vector<Tensor> c;

  static LstmState zeros(std::size_t layers, std::size_t rows, std::size_t hidden);
};

struct LmOptions {
  double keep_prob = 0.6;  // dropout on input embeddings and top hidden outputs
  TopicOptions topic;
};

struct LmLoss {
  Tensor total;  // masked sum of token cross-entropies, shape [1]
  std::size_t tokens = 0;
};

// i, f, o and the candidate from v [rows x in] and the previous h, then
// c = f*c_prev + i*candidate and h = o*tanh(c).
void lstm_step(const Tensor& v, const Tensor& h_prev, const Tensor& c_prev, const LstmLayerParams& layer, Tensor& h_out,
               Tensor& c_out);

// z = sigmoid(s W_z + h U_z + b_z), r likewise, candidate =
// tanh(s W_h + (r*h) U_h + b_h), result (1 - z)*h + z*candidate. s and h have
// the same number of rows.
Tensor fuse_topic(const Tensor& h, const Tensor& s, const TopicGateParams& gate);

// Runs every row of the batch from a zero state. `topic` is null for the
// vanilla model; otherwise s is computed once per row from the row's context
// and fused at every step of the top layer.
LmLoss lm_loss(const LmParams& lm, const TopicParams* topic, const LmBatch& batch, const LmOptions& options,
               bool training, Rng& rng);

// Logits for the next word given the top hidden state after fusion.
Tensor lm_logits(const LmParams& lm, const Tensor& fused);

TDLM_NAMESPACE_END

#endif  // TDLM_LANGUAGE_MODEL_HPP_
