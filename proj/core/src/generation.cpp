#include "tdlm/generation.hpp"

#include <cmath>
#include <limits>

#include "tdlm/ops.hpp"

TDLM_NAMESPACE_BEGIN

namespace {

TokenId pick(std::span<const Real> logits, double temperature, Rng& rng) {
  const auto pad = static_cast<std::size_t>(Vocabulary::kPad);
  if (temperature < 1e-6) {
    std::size_t best = pad == 0 ? 1 : 0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
      if (i != pad && logits[i] > logits[best]) best = i;
    }
    return static_cast<TokenId>(best);
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (i != pad) top = std::max(top, static_cast<double>(logits[i]) / temperature);
  }
  std::vector<double> weights(logits.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (i == pad) continue;
    weights[i] = std::exp(static_cast<double>(logits[i]) / temperature - top);
    total += weights[i];
  }
  double u = rng.uniform() * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last = i;
    if (u < weights[i]) return static_cast<TokenId>(i);
    u -= weights[i];
  }
  return static_cast<TokenId>(last);
}

GeneratedSentence generate(const TdlmModel& model, const Tensor& s, const GenerationOptions& options) {
  if (!(options.temperature > 0.0)) throw ConfigError("generation temperature must be positive");
  GeneratedSentence out;
  if (options.max_words == 0) return out;
  const auto& lm = model.lm();
  const std::size_t hidden = lm.hidden_size();
  Rng rng(options.seed);
  auto state = LstmState::zeros(lm.layers.size(), 1, hidden);
  TokenId input = Vocabulary::kEos;
  while (out.ids.size() < options.max_words) {
    const TokenId ids[] = {input};
    Tensor x = gather_rows(lm.embeddings, ids);
    for (std::size_t l = 0; l < lm.layers.size(); ++l) {
      Tensor h, c;
      lstm_step(x, state.h[l], state.c[l], lm.layers[l], h, c);
      state.h[l] = h;
      state.c[l] = c;
      x = h;
    }
    Tensor logits = lm_logits(lm, fuse_topic(x, s, lm.gate));
    const TokenId next = pick(logits.data(), options.temperature, rng);
    if (next == Vocabulary::kEos) break;
    out.ids.push_back(next);
    out.words.push_back(model.vocab().word(next));
    input = next;
  }
  return out;
}

void require_topics(const TdlmModel& model) {
  if (model.vanilla()) throw ConfigError("topic-conditioned generation needs a model with a topic component");
}

}  // namespace

GeneratedSentence generate_sentence(const TdlmModel& model, std::size_t topic, const GenerationOptions& options) {
  require_topics(model);
  const auto& table = model.topic().topic_out;
  if (topic >= table.rows()) {
    throw IndexError("topic " + std::to_string(topic) + " outside [0, " + std::to_string(table.rows()) + ")");
  }
  const std::size_t b = table.cols();
  auto row = table.data().subspan(topic * b, b);
  return generate(model, Tensor::from({1, b}, {row.begin(), row.end()}), options);
}

GeneratedSentence generate_mixture(const TdlmModel& model, std::span<const double> weights,
                                   const GenerationOptions& options) {
  require_topics(model);
  const auto& table = model.topic().topic_out;
  const std::size_t k = table.rows(), b = table.cols();
  if (weights.size() != k) {
    throw ConfigError("mixture needs " + std::to_string(k) + " weights, got " + std::to_string(weights.size()));
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ConfigError("mixture weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-6) throw ConfigError("mixture weights must sum to 1");
  std::vector<Real> s(b, Real(0));
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t j = 0; j < b; ++j) s[j] += static_cast<Real>(weights[t]) * table.at(t, j);
  }
  return generate(model, Tensor::from({1, b}, std::move(s)), options);
}

TDLM_NAMESPACE_END
