#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "tdlm/extensions.hpp"
#include "tdlm/language_model.hpp"
#include "tdlm/model.hpp"
#include "tdlm/ops.hpp"
#include "tdlm/topic_model.hpp"

using namespace tdlm;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double range = 0.5) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto& v : t.data()) v = static_cast<Real>(rng.uniform(-range, range));
  return t;
}

// V words, embeddings e, width 2, a filters, k topics, b topic dims.
TopicParams topic_params(std::size_t V, std::size_t e, std::size_t a, std::size_t k, std::size_t b, Rng& rng) {
  TopicParams p;
  p.embeddings = random_tensor({V, e}, rng);
  for (std::size_t j = 0; j < e; ++j) p.embeddings[j] = 0;  // pad row
  p.conv_filters = random_tensor({a, e * 2}, rng);
  p.conv_bias = Tensor::zeros({a});
  p.topic_in = random_tensor({k, a}, rng);
  p.topic_out = random_tensor({k, b}, rng);
  p.out_weight = random_tensor({b, V}, rng);
  p.out_bias = random_tensor({V}, rng);
  return p;
}

TopicOptions eval_options() {
  TopicOptions o;
  o.m3 = 10;
  o.keep_prob = 0.4;
  return o;
}

TopicGateParams gate_params(std::size_t b, std::size_t n, Rng& rng) {
  TopicGateParams g;
  g.w_update = random_tensor({b, n}, rng);
  g.w_reset = random_tensor({b, n}, rng);
  g.w_candidate = random_tensor({b, n}, rng);
  g.u_update = random_tensor({n, n}, rng);
  g.u_reset = random_tensor({n, n}, rng);
  g.u_candidate = random_tensor({n, n}, rng);
  g.b_update = random_tensor({n}, rng);
  g.b_reset = random_tensor({n}, rng);
  g.b_candidate = random_tensor({n}, rng);
  return g;
}

LstmLayerParams zero_layer(std::size_t in, std::size_t n) {
  LstmLayerParams l;
  for (Tensor* w : {&l.w_input, &l.w_forget, &l.w_output, &l.w_cell}) *w = Tensor::zeros({in, n});
  for (Tensor* u : {&l.u_input, &l.u_forget, &l.u_output, &l.u_cell}) *u = Tensor::zeros({n, n});
  for (Tensor* b : {&l.b_input, &l.b_forget, &l.b_output, &l.b_cell}) *b = Tensor::zeros({n});
  return l;
}

double total(const Tensor& t) {
  double s = 0;
  for (Real v : t.data()) s += v;
  return s;
}

}  // namespace

// Topic component.

TEST(TopicComponent, AllPadContextGivesUniformAttention) {
  Rng rng(1);
  TopicParams p = topic_params(8, 4, 3, 5, 6, rng);
  std::vector<std::vector<TokenId>> contexts = {{}};
  DocEncoding enc = encode_documents(p, contexts, {}, eval_options(), false, rng);
  for (Real v : enc.d.data()) EXPECT_EQ(v, 0);
  for (Real v : enc.p.data()) EXPECT_NEAR(v, 1.0 / 5, 1e-6);
}

TEST(TopicComponent, SingleTopicCopiesItsVector) {
  Rng rng(2);
  TopicParams p = topic_params(8, 4, 3, 1, 6, rng);
  std::vector<std::vector<TokenId>> contexts = {{3, 4, 5}};
  DocEncoding enc = encode_documents(p, contexts, {}, eval_options(), false, rng);
  EXPECT_EQ(enc.p[0], 1);
  for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(enc.s[j], p.topic_out[j]);
}

TEST(TopicComponent, IdenticalKeysGiveMeanTopicVector) {
  Rng rng(3);
  TopicParams p = topic_params(8, 4, 3, 2, 6, rng);
  for (std::size_t j = 0; j < 3; ++j) p.topic_in[3 + j] = p.topic_in[j];
  std::vector<std::vector<TokenId>> contexts = {{3, 7, 6, 5}};
  DocEncoding enc = encode_documents(p, contexts, {}, eval_options(), false, rng);
  EXPECT_NEAR(enc.p[0], 0.5, 1e-6);
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(enc.s[j], 0.5 * (p.topic_out[j] + p.topic_out[6 + j]), 1e-6);
}

TEST(TopicComponent, EvaluationIsDeterministicAndConvex) {
  Rng rng(4);
  TopicParams p = topic_params(10, 4, 3, 4, 5, rng);
  std::vector<TokenId> doc = {3, 9, 4, 4, 8};
  Tensor x = document_topic_distribution(p, doc, {}, eval_options());
  Tensor y = document_topic_distribution(p, doc, {}, eval_options());
  EXPECT_EQ(std::vector<Real>(x.data().begin(), x.data().end()), std::vector<Real>(y.data().begin(), y.data().end()));
  EXPECT_NEAR(total(x), 1.0, 1e-6);

  // s is the p-weighted combination of B's rows.
  std::vector<std::vector<TokenId>> contexts = {doc};
  DocEncoding enc = encode_documents(p, contexts, {}, eval_options(), false, rng);
  for (std::size_t j = 0; j < 5; ++j) {
    double expect = 0;
    for (std::size_t t = 0; t < 4; ++t) expect += enc.p[t] * p.topic_out.at(t, j);
    EXPECT_NEAR(enc.s[j], expect, 1e-6);
  }
}

TEST(TopicComponent, AttentionArgmaxFollowsLogits) {
  Rng rng(5);
  TopicParams p = topic_params(10, 4, 3, 4, 5, rng);
  std::vector<std::vector<TokenId>> contexts = {{3, 5, 7}};
  DocEncoding enc = encode_documents(p, contexts, {}, eval_options(), false, rng);
  Tensor logits = matmul_bt(enc.d, p.topic_in);
  Tensor scaled = matmul_bt(scale(enc.d, 3), p.topic_in);
  auto argmax = [](const Tensor& t) {
    return static_cast<std::size_t>(std::max_element(t.data().begin(), t.data().end()) - t.data().begin());
  };
  EXPECT_EQ(argmax(enc.p), argmax(logits));
  EXPECT_EQ(argmax(logits), argmax(scaled));
}

TEST(TopicComponent, ZeroProjectionGivesLogV) {
  Rng rng(6);
  TopicParams p = topic_params(11, 4, 3, 3, 5, rng);
  p.out_weight = Tensor::zeros({5, 11});
  p.out_bias = Tensor::zeros({11});
  TmBatch batch;
  batch.rows = 2;
  batch.targets_per_row = 3;
  batch.contexts = {{3, 4}, {5, 6, 7}};
  batch.targets = {3, 4, 3, 5, 6, 7};
  batch.mask = {1, 1, 1, 1, 1, 1};
  EXPECT_NEAR(tm_loss(p, batch, eval_options(), false, rng).item(), std::log(11.0), 1e-5);
  for (std::size_t t = 0; t < 3; ++t) {
    Tensor dist = topic_word_distribution(p, t);
    for (Real v : dist.data()) EXPECT_NEAR(v, 1.0 / 11, 1e-6);
  }
}

TEST(TopicComponent, RepeatedTargetLossIsThatWordsSurprisal) {
  Rng rng(7);
  TopicParams p = topic_params(9, 4, 3, 3, 5, rng);
  TmBatch batch;
  batch.rows = 1;
  batch.targets_per_row = 3;
  batch.contexts = {{3, 4, 5}};
  batch.targets = {6, 6, 6};
  batch.mask = {1, 1, 1};
  std::vector<std::vector<TokenId>> contexts = batch.contexts;
  DocEncoding enc = encode_documents(p, contexts, {}, eval_options(), false, rng);
  Tensor word = softmax(topic_word_logits(p, enc.s));
  EXPECT_NEAR(tm_loss(p, batch, eval_options(), false, rng).item(), -std::log(word[6]), 1e-5);
}

TEST(TopicComponent, TopicWordDistributionRange) {
  Rng rng(8);
  TopicParams p = topic_params(9, 4, 3, 3, 5, rng);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_NEAR(total(topic_word_distribution(p, t)), 1.0, 1e-6);
  EXPECT_THROW(topic_word_distribution(p, 3), IndexError);
}

// Language model.

TEST(Lstm, ZeroWeightsGiveHalfGatesAndZeroState) {
  LstmLayerParams layer = zero_layer(3, 4);
  Tensor v = Tensor::from({1, 3}, {1, -2, 0.5f});
  Tensor h, c;
  lstm_step(v, Tensor::zeros({1, 4}), Tensor::zeros({1, 4}), layer, h, c);
  for (Real x : h.data()) EXPECT_EQ(x, 0);
  for (Real x : c.data()) EXPECT_EQ(x, 0);
}

TEST(Lstm, SaturatedForgetGateKeepsCell) {
  Rng rng(9);
  LstmLayerParams layer = zero_layer(3, 4);
  layer.w_cell = random_tensor({3, 4}, rng);
  for (std::size_t j = 0; j < 4; ++j) {
    layer.b_forget[j] = 1e6f;
    layer.b_input[j] = -1e6f;
  }
  Tensor c_prev = Tensor::from({1, 4}, {0.3f, -0.7f, 1.2f, 0.0f});
  Tensor h, c;
  lstm_step(random_tensor({1, 3}, rng), random_tensor({1, 4}, rng), c_prev, layer, h, c);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(c[j], c_prev[j], 1e-6);
}

TEST(Lstm, StatesStayFiniteOverManySteps) {
  Rng rng(10);
  LstmLayerParams layer = zero_layer(4, 6);
  for (Tensor* t : {&layer.w_input, &layer.w_forget, &layer.w_output, &layer.w_cell, &layer.u_input, &layer.u_forget,
                    &layer.u_output, &layer.u_cell})
    *t = random_tensor(t->shape(), rng, 2.0);
  Tensor h = Tensor::zeros({1, 6}), c = Tensor::zeros({1, 6});
  for (int step = 0; step < 10000; ++step) {
    Tensor h2, c2;
    lstm_step(random_tensor({1, 4}, rng, 3.0), h, c, layer, h2, c2);
    h = h2;
    c = c2;
  }
  for (Real x : c.data()) EXPECT_TRUE(std::isfinite(x));
  for (Real x : h.data()) EXPECT_LE(std::abs(x), 1.0);
}

TEST(TopicGate, ClosedAndOpenGate) {
  Rng rng(11);
  TopicGateParams g = gate_params(3, 4, rng);
  Tensor h = random_tensor({2, 4}, rng), s = random_tensor({2, 3}, rng);
  for (std::size_t j = 0; j < 4; ++j) g.b_update[j] = -1e6f;
  Tensor closed = fuse_topic(h, s, g);
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(closed[i], h[i], 1e-6);

  for (std::size_t j = 0; j < 4; ++j) g.b_update[j] = 1e6f;
  Tensor open = fuse_topic(h, s, g);
  // Candidate computed independently of fuse_topic.
  Tensor r = sigmoid(add_bias(add(matmul(s, g.w_reset), matmul(h, g.u_reset)), g.b_reset));
  Tensor cand = tanh(add_bias(add(matmul(s, g.w_candidate), matmul(mul(r, h), g.u_candidate)), g.b_candidate));
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(open[i], cand[i], 1e-6);
}

TEST(TopicGate, ZeroTopicAndWeightsMatchHandComputation) {
  TopicGateParams g;
  g.w_update = g.w_reset = g.w_candidate = Tensor::zeros({3, 2});
  g.u_update = g.u_reset = Tensor::zeros({2, 2});
  g.u_candidate = Tensor::from({2, 2}, {0.4f, -0.3f, 0.9f, 0.2f});
  g.b_update = g.b_reset = Tensor::zeros({2});
  g.b_candidate = Tensor::from({2}, {0.1f, -0.2f});
  const double h0 = 0.6, h1 = -0.8;
  Tensor out =
      fuse_topic(Tensor::from({1, 2}, {static_cast<Real>(h0), static_cast<Real>(h1)}), Tensor::zeros({1, 3}), g);
  // z = r = 0.5, candidate = tanh(0.5 h U_h + b_h).
  const double c0 = std::tanh(0.5 * (h0 * 0.4 + h1 * 0.9) + 0.1);
  const double c1 = std::tanh(0.5 * (h0 * -0.3 + h1 * 0.2) - 0.2);
  EXPECT_NEAR(out[0], 0.5 * h0 + 0.5 * c0, 1e-6);
  EXPECT_NEAR(out[1], 0.5 * h1 + 0.5 * c1, 1e-6);
}

TEST(LanguageModel, ZeroProjectionGivesLogVPerToken) {
  TrainConfig config = fixtures::small_config();
  TdlmModel model = fixtures::small_model(config, 13);
  for (auto& v : model.lm().out_weight.data()) v = 0;
  for (auto& v : model.lm().out_bias.data()) v = 0;
  Corpus corpus = fixtures::random_corpus(model.vocab(), 4, 3, 8, 21);
  Rng rng(1);
  for (const auto& batch : make_lm_batches(corpus, 4, config.m2, config.m3, nullptr)) {
    LmLoss loss = model.lm_loss(batch, false, rng);
    EXPECT_NEAR(loss.total.item() / loss.tokens, std::log(13.0), 1e-5);
  }
  EXPECT_NEAR(model.perplexity(corpus).value, 13.0, 1e-3);
}

TEST(LanguageModel, VanillaEqualsClosedGate) {
  TrainConfig config = fixtures::small_config();
  TdlmModel model = fixtures::small_model(config, 13);
  for (auto& v : model.lm().gate.b_update.data()) v = -1e6f;
  TrainConfig plain = config;
  plain.vanilla = true;
  TdlmModel vanilla = fixtures::small_model(plain, 13);
  for (const auto& p : model.parameters()) {
    if (p.name.rfind("lm.", 0) == 0 && p.name.rfind("lm.gate.", 0) != 0)
      vanilla.assign(p.name, p.tensor.shape(), p.tensor.data());
  }
  Corpus corpus = fixtures::random_corpus(model.vocab(), 5, 3, 9, 22);
  Rng a(1), b(1);
  for (const auto& batch : make_lm_batches(corpus, 4, config.m2, config.m3, nullptr)) {
    EXPECT_EQ(model.lm_loss(batch, false, a).total.item(), vanilla.lm_loss(batch, false, b).total.item());
  }
}

TEST(LanguageModel, AppendedPaddingLeavesLossUnchanged) {
  TrainConfig config = fixtures::small_config();
  TdlmModel model = fixtures::small_model(config, 13);
  Corpus corpus = fixtures::random_corpus(model.vocab(), 3, 2, 4, 23);
  auto batch = make_lm_batches(corpus, 8, config.m2, config.m3, nullptr).at(0);
  LmBatch padded = batch;
  padded.steps = batch.steps + 3;
  padded.inputs.clear();
  padded.targets.clear();
  padded.mask.clear();
  for (std::size_t r = 0; r < batch.rows; ++r) {
    for (std::size_t t = 0; t < padded.steps; ++t) {
      const bool inside = t < batch.steps;
      padded.inputs.push_back(inside ? batch.inputs[r * batch.steps + t] : Vocabulary::kPad);
      padded.targets.push_back(inside ? batch.targets[r * batch.steps + t] : Vocabulary::kPad);
      padded.mask.push_back(inside ? batch.mask[r * batch.steps + t] : 0);
    }
  }
  Rng a(1), b(1);
  LmLoss x = model.lm_loss(batch, false, a), y = model.lm_loss(padded, false, b);
  EXPECT_EQ(x.tokens, y.tokens);
  EXPECT_NEAR(x.total.item(), y.total.item(), 1e-5);
}

// Extensions.

TEST(Classifier, ZeroHeadIsUniformAndLossIsLogC) {
  TrainConfig config = fixtures::small_config();
  config.supervised = true;
  TdlmModel model = fixtures::small_model(config, 13, 4);
  for (auto& v : model.head().weight.data()) v = 0;
  for (auto& v : model.head().bias.data()) v = 0;
  std::vector<TokenId> doc = {5, 6, 7};
  auto probs = classify(model.topic(), model.head(), doc, {}, model.topic_options());
  ASSERT_EQ(probs.size(), 4u);
  for (double p : probs) EXPECT_NEAR(p, 0.25, 1e-6);

  Corpus corpus = fixtures::random_corpus(model.vocab(), 6, 2, 5, 24, 4);
  Rng rng(1);
  auto batch = make_class_batches(corpus, 6, config.m3, nullptr).at(0);
  EXPECT_NEAR(model.cls_loss(batch, true, rng).item(), std::log(4.0), 1e-5);
}

TEST(Classifier, SingleClassAndNormalisation) {
  TrainConfig config = fixtures::small_config();
  config.supervised = true;
  TdlmModel one = fixtures::small_model(config, 13, 1);
  std::vector<TokenId> doc = {5, 9};
  EXPECT_NEAR(classify(one.topic(), one.head(), doc, {}, one.topic_options()).at(0), 1.0, 1e-6);

  TdlmModel three = fixtures::small_model(config, 13, 3);
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    std::vector<TokenId> ids(1 + rng.below(10));
    for (auto& id : ids) id = static_cast<TokenId>(3 + rng.below(10));
    double sum = 0;
    for (double p : classify(three.topic(), three.head(), ids, {}, three.topic_options())) sum += p;
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
  ClassifierHead absent;
  EXPECT_THROW(classify(three.topic(), absent, doc, {}, three.topic_options()), ConfigError);
}

TEST(Classifier, OverfitsTwoSeparableDocuments) {
  TrainConfig config = fixtures::small_config();
  config.supervised = true;
  TdlmModel model = fixtures::small_model(config, 13, 2);
  Corpus corpus;
  corpus.documents.push_back(make_document({{5, 6, 7, 5}}, 0, {}, model.vocab()));
  corpus.documents.push_back(make_document({{9, 10, 11, 12}}, 1, {}, model.vocab()));
  auto batch = make_class_batches(corpus, 2, config.m3, nullptr).at(0);
  Adam adam({0.01});
  auto params = model.cls_parameters();
  Rng rng(3);
  for (int step = 0; step < 200; ++step) {
    Tape tape;
    Tensor loss;
    {
      TapeScope scope(tape);
      loss = model.cls_loss(batch, true, rng);
    }
    tape.backward(loss);
    adam.step(params);
  }
  EXPECT_LT(model.cls_loss(batch, false, rng).item(), 0.1);
}

TEST(Tags, SumRuleAndZeroVector) {
  Tensor table = Tensor::from({3, 2}, {1, 2, 10, 20, 100, 200});
  std::vector<std::vector<TokenId>> tags = {{0, 2}, {}, {1}};
  Tensor e = sum_tag_vectors(table, tags);
  EXPECT_EQ(std::vector<Real>(e.data().begin(), e.data().end()), (std::vector<Real>{101, 202, 0, 0, 10, 20}));
}

TEST(Tags, ZeroTagTableMatchesUntaggedAttention) {
  TrainConfig config = fixtures::small_config();
  TdlmModel plain = fixtures::small_model(config, 13);
  config.tags = true;
  TdlmModel tagged = fixtures::small_model(config, 13, 0, 2);
  for (auto& v : tagged.topic().tag_embeddings.data()) v = 0;
  for (const auto& p : plain.parameters())
    if (p.name != "tm.topic_in") tagged.assign(p.name, p.tensor.shape(), p.tensor.data());
  const std::size_t a = config.a, width = a + config.f;
  for (std::size_t t = 0; t < config.k; ++t)
    for (std::size_t j = 0; j < a; ++j) tagged.topic().topic_in[t * width + j] = plain.topic().topic_in[t * a + j];

  std::vector<TokenId> doc = {5, 6, 8, 12}, tag_ids = {1};
  Tensor x = document_topic_distribution(plain.topic(), doc, {}, plain.topic_options());
  Tensor y = document_topic_distribution(tagged.topic(), doc, tag_ids, tagged.topic_options());
  Tensor z = document_topic_distribution(tagged.topic(), doc, {}, tagged.topic_options());
  for (std::size_t t = 0; t < config.k; ++t) {
    EXPECT_NEAR(x[t], y[t], 1e-6);
    EXPECT_NEAR(x[t], z[t], 1e-6);
  }
}

TEST(Tags, ExportFormat) {
  TrainConfig config = fixtures::small_config();
  config.tags = true;
  config.f = 5;
  TdlmModel model = fixtures::small_model(config, 13, 0, 3);
  for (auto& v : model.topic().tag_embeddings.data()) v = 0;
  const std::vector<std::uint64_t> freq = {1, 5, 3};
  const std::string csv = export_tag_vectors(model.topic(), model.tags(), freq);
  EXPECT_EQ(csv, "tag,v1,v2,v3,v4,v5\ntag1,0,0,0,0,0\ntag2,0,0,0,0,0\ntag0,0,0,0,0,0\n");

  TdlmModel untagged = fixtures::small_model(fixtures::small_config(), 13);
  EXPECT_THROW(export_tag_vectors(untagged.topic(), untagged.tags(), {}), ConfigError);
}
