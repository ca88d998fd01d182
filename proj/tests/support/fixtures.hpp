#ifndef TDLM_TESTS_FIXTURES_HPP_
#define TDLM_TESTS_FIXTURES_HPP_

// Shared helpers for the test binaries. Everything sits inside the precision
// namespace so single- and double-precision translation units can coexist.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "tdlm/batching.hpp"
#include "tdlm/corpus.hpp"
#include "tdlm/model.hpp"
#include "tdlm/tensor.hpp"
#include "tdlm/vocabulary.hpp"

TDLM_NAMESPACE_BEGIN
namespace fixtures {

// Reserved entries plus words w3 .. w{V-1}; ids listed in `stop` are flagged
// as stopwords.
inline Vocabulary tiny_vocab(std::size_t size, std::vector<TokenId> stop = {}) {
  std::vector<std::string> words = {"<pad>", "<unk>", "<eos>"};
  std::vector<std::uint64_t> freq = {0, 0, 0};
  std::vector<bool> flags = {false, false, false};
  for (std::size_t i = Vocabulary::kReserved; i < size; ++i) {
    words.push_back("w" + std::to_string(i));
    freq.push_back(100 - i);
    flags.push_back(std::find(stop.begin(), stop.end(), static_cast<TokenId>(i)) != stop.end());
  }
  return Vocabulary::from_entries(std::move(words), std::move(freq), std::move(flags));
}

// Small documents over a vocabulary of `vocab` ids, deterministic in `seed`.
inline Corpus random_corpus(const Vocabulary& vocab, std::size_t docs, std::size_t sentences, std::size_t max_len,
                            std::uint64_t seed, std::size_t labels = 0, std::size_t tags = 0) {
  Rng rng(seed);
  Corpus corpus;
  const std::uint64_t words = vocab.size() - Vocabulary::kReserved;
  for (std::size_t d = 0; d < docs; ++d) {
    std::vector<std::vector<TokenId>> sents;
    for (std::size_t s = 0; s < sentences; ++s) {
      std::vector<TokenId> ids(1 + rng.below(max_len));
      for (auto& id : ids) id = static_cast<TokenId>(Vocabulary::kReserved + rng.below(words));
      sents.push_back(std::move(ids));
    }
    const TokenId label = labels > 0 ? static_cast<TokenId>(d % labels) : -1;
    std::vector<TokenId> tag_ids;
    if (tags > 0) tag_ids.push_back(static_cast<TokenId>(d % tags));
    corpus.documents.push_back(make_document(std::move(sents), label, std::move(tag_ids), vocab));
  }
  return corpus;
}

// The dimensions used by the model-wide gradient checks.
inline TrainConfig small_config() {
  TrainConfig c;
  c.e = 6;
  c.n_hidden = 5;
  c.k = 3;
  c.a = 4;
  c.b = 5;
  c.h = 2;
  c.m1 = 3;
  c.m2 = 6;
  c.m3 = 12;
  c.n_batch = 4;
  c.f = 3;
  c.seed = 7;
  return c;
}

// A model over tiny_vocab(vocab_size) with stopwords {3, 4}.
inline TdlmModel small_model(TrainConfig config, std::size_t vocab_size, std::size_t labels = 0, std::size_t tags = 0) {
  std::vector<std::string> label_names, tag_names;
  for (std::size_t i = 0; i < labels; ++i) label_names.push_back("class" + std::to_string(i));
  for (std::size_t i = 0; i < tags; ++i) tag_names.push_back("tag" + std::to_string(i));
  auto model = TdlmModel::create(config, tiny_vocab(vocab_size, {3, 4}), NameIndex(label_names), NameIndex(tag_names));
  // Non-zero biases and tag vectors so their gradients are exercised at a
  // generic point.
  Rng rng(99);
  for (auto& p : model.parameters()) {
    if (p.tensor.rank() == 1 || p.name == "tm.tag_embeddings") {
      for (auto& v : p.tensor.data()) v = rng.uniform(-0.3, 0.3);
    }
  }
  return model;
}

struct GradientMismatch {
  std::string parameter;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative = 0.0;
};

struct GradientCheck {
  std::size_t checked = 0;
  double worst_relative = 0.0;
  std::vector<GradientMismatch> failures;
};

inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// The pad row of a word-embedding table is frozen: it feeds the forward pass
// but never receives a gradient.
inline bool is_frozen(const std::string& name, const Tensor& t, std::size_t index) {
  const bool word_table = name == "tm.embeddings" || name == "lm.embeddings";
  return word_table && index / t.cols() == static_cast<std::size_t>(Vocabulary::kPad);
}

// Compares the tape gradient of `loss` with central differences of step
// `step` for every element of every parameter; frozen elements must have a
// zero gradient instead. `loss` must be a pure
// function of the parameter values. Elements whose gradients are both below
// `floor` in magnitude are compared on an absolute scale of `floor`.
inline GradientCheck check_gradients(const std::vector<NamedParam>& params, const std::function<Tensor()>& loss,
                                     double step = 1e-3, double tolerance = 1e-3, double floor = 1e-6) {
  for (const auto& p : params) const_cast<Tensor&>(p.tensor).zero_grad();
  {
    Tape tape;
    Tensor value;
    {
      TapeScope scope(tape);
      value = loss();
    }
    tape.backward(value);
  }
  GradientCheck out;
  for (const auto& p : params) {
    Tensor t = p.tensor;
    std::vector<Real> analytic(t.grad().begin(), t.grad().end());
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (is_frozen(p.name, t, i)) {
        if (analytic[i] != Real(0)) out.failures.push_back({p.name, i, static_cast<double>(analytic[i]), 0.0, 1.0});
        continue;
      }
      const Real saved = t[i];
      t[i] = saved + static_cast<Real>(step);
      const double up = static_cast<double>(loss().item());
      t[i] = saved - static_cast<Real>(step);
      const double down = static_cast<double>(loss().item());
      t[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double rel = relative_error(static_cast<double>(analytic[i]), numeric, floor);
      out.worst_relative = std::max(out.worst_relative, rel);
      ++out.checked;
      if (rel > tolerance) out.failures.push_back({p.name, i, static_cast<double>(analytic[i]), numeric, rel});
    }
    t.zero_grad();
  }
  return out;
}

}  // namespace fixtures
TDLM_NAMESPACE_END

#endif  // TDLM_TESTS_FIXTURES_HPP_
