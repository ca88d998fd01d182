#include "tdlm/language_model.hpp"

#include "tdlm/ops.hpp"
#include "tdlm/vocabulary.hpp"

TDLM_NAMESPACE_BEGIN

namespace {

struct GateInputs {
  Tensor input, forget, output, cell;
};

GateInputs project_inputs(const Tensor& v, const LstmLayerParams& layer) {
  return {add_bias(matmul(v, layer.w_input), layer.b_input), add_bias(matmul(v, layer.w_forget), layer.b_forget),
          add_bias(matmul(v, layer.w_output), layer.b_output), add_bias(matmul(v, layer.w_cell), layer.b_cell)};
}

void recur(const GateInputs& x, const Tensor& h_prev, const Tensor& c_prev, const LstmLayerParams& layer, Tensor& h_out,
           Tensor& c_out) {
  Tensor i = sigmoid(add(x.input, matmul(h_prev, layer.u_input)));
  Tensor f = sigmoid(add(x.forget, matmul(h_prev, layer.u_forget)));
  Tensor o = sigmoid(add(x.output, matmul(h_prev, layer.u_output)));
  Tensor candidate = tanh(add(x.cell, matmul(h_prev, layer.u_cell)));
  c_out = add(mul(f, c_prev), mul(i, candidate));
  h_out = mul(o, tanh(c_out));
}

}  // namespace

LstmState LstmState::zeros(std::size_t layers, std::size_t rows, std::size_t hidden) {
  LstmState state;
  for (std::size_t l = 0; l < layers; ++l) {
    state.h.push_back(Tensor::zeros({rows, hidden}));
    state.c.push_back(Tensor::zeros({rows, hidden}));
  }
  return state;
}

void lstm_step(const Tensor& v, const Tensor& h_prev, const Tensor& c_prev, const LstmLayerParams& layer, Tensor& h_out,
               Tensor& c_out) {
  recur(project_inputs(v, layer), h_prev, c_prev, layer, h_out, c_out);
}

Tensor fuse_topic(const Tensor& h, const Tensor& s, const TopicGateParams& gate) {
  if (h.rows() != s.rows()) {
    throw DimensionError("fuse_topic: h " + shape_string(h.shape()) + " and s " + shape_string(s.shape()));
  }
  Tensor z = sigmoid(add_bias(add(matmul(s, gate.w_update), matmul(h, gate.u_update)), gate.b_update));
  Tensor r = sigmoid(add_bias(add(matmul(s, gate.w_reset), matmul(h, gate.u_reset)), gate.b_reset));
  Tensor candidate =
      tanh(add_bias(add(matmul(s, gate.w_candidate), matmul(mul(r, h), gate.u_candidate)), gate.b_candidate));
  return add(mul(one_minus(z), h), mul(z, candidate));
}

Tensor lm_logits(const LmParams& lm, const Tensor& fused) {
  return add_bias(matmul(fused, lm.out_weight), lm.out_bias);
}

LmLoss lm_loss(const LmParams& lm, const TopicParams* topic, const LmBatch& batch, const LmOptions& options,
               bool training, Rng& rng) {
  const std::size_t n = batch.rows;
  const std::size_t steps = batch.used_steps();
  const std::size_t hidden = lm.hidden_size();
  if (n == 0 || steps == 0) throw InvariantError("lm_loss: empty batch");
  if (topic != nullptr && !lm.has_gate()) throw InvariantError("lm_loss: topic given to a model without a gate");

  // Time-major layout: row t * n + r holds step t of batch row r.
  std::vector<TokenId> inputs(steps * n), targets(steps * n);
  std::vector<std::uint8_t> mask(steps * n);
  std::size_t tokens = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t src = r * batch.steps + t;
      inputs[t * n + r] = batch.inputs[src];
      targets[t * n + r] = batch.targets[src];
      mask[t * n + r] = batch.mask[src];
      tokens += batch.mask[src] ? 1 : 0;
    }
  }

  Tensor layer_input = dropout(gather_rows(lm.embeddings, inputs, Vocabulary::kPad), options.keep_prob, training, rng);
  for (const auto& layer : lm.layers) {
    const GateInputs projected = project_inputs(layer_input, layer);
    Tensor h = Tensor::zeros({n, hidden});
    Tensor c = Tensor::zeros({n, hidden});
    std::vector<Tensor> outputs;
    outputs.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      const GateInputs x{slice_rows(projected.input, t * n, n), slice_rows(projected.forget, t * n, n),
                         slice_rows(projected.output, t * n, n), slice_rows(projected.cell, t * n, n)};
      Tensor h_next, c_next;
      recur(x, h, c, layer, h_next, c_next);
      h = h_next;
      c = c_next;
      outputs.push_back(h);
    }
    layer_input = concat_rows(outputs);
  }

  Tensor top = dropout(layer_input, options.keep_prob, training, rng);
  if (topic != nullptr) {
    auto enc = encode_documents(*topic, batch.contexts, batch.tags, options.topic, training, rng);
    std::vector<Tensor> repeated(steps, enc.s);
    top = fuse_topic(top, concat_rows(repeated), lm.gate);
  }
  Tensor total = cross_entropy_sum(lm_logits(lm, top), targets, mask, 1);
  return {total, tokens};
}

TDLM_NAMESPACE_END
