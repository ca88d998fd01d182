#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "fixtures.hpp"
#include "tdlm/checkpoint.hpp"
#include "tdlm/io.hpp"
#include "tdlm/trainer.hpp"

using namespace tdlm;

namespace {

TrainConfig tiny_config() {
  TrainConfig c = fixtures::small_config();
  c.n_batch = 4;
  c.n_epoch = 2;
  c.m2 = 8;
  c.l = 0.01;
  return c;
}

Dataset tiny_dataset(std::size_t docs, std::size_t labels = 0, std::size_t tags = 0) {
  Dataset ds;
  ds.vocab = fixtures::tiny_vocab(13, {3, 4});
  std::vector<std::string> label_names, tag_names;
  for (std::size_t i = 0; i < labels; ++i) label_names.push_back("class" + std::to_string(i));
  for (std::size_t i = 0; i < tags; ++i) tag_names.push_back("tag" + std::to_string(i));
  ds.labels = NameIndex(label_names);
  ds.tags = NameIndex(tag_names);
  ds.tag_counts.assign(tags, 1);
  ds.train = fixtures::random_corpus(ds.vocab, docs, 3, 8, 31, labels, tags);
  ds.dev = fixtures::random_corpus(ds.vocab, 4, 3, 8, 32, labels, tags);
  ds.test = fixtures::random_corpus(ds.vocab, 4, 3, 8, 33, labels, tags);
  return ds;
}

// Two-topic corpus: documents use either words 5..8 or 9..12, each followed
// by a stopword.
Dataset topical_dataset(std::size_t docs, std::uint64_t seed) {
  Dataset ds;
  ds.vocab = fixtures::tiny_vocab(13, {3, 4});
  Rng rng(seed);
  auto make = [&](std::size_t n) {
    Corpus c;
    for (std::size_t d = 0; d < n; ++d) {
      const TokenId base = d % 2 ? 9 : 5;
      std::vector<std::vector<TokenId>> sents;
      for (int s = 0; s < 4; ++s) {
        std::vector<TokenId> ids;
        for (int w = 0; w < 4; ++w) {
          ids.push_back(static_cast<TokenId>(3 + rng.below(2)));
          ids.push_back(static_cast<TokenId>(base + rng.below(4)));
        }
        sents.push_back(ids);
      }
      c.documents.push_back(make_document(std::move(sents), -1, {}, ds.vocab));
    }
    return c;
  };
  ds.train = make(docs);
  ds.dev = make(10);
  ds.test = make(10);
  return ds;
}

std::vector<EpochMetrics> run(const TrainConfig& config, const Dataset& ds, TdlmModel* out = nullptr) {
  TdlmModel model = TdlmModel::create(config, ds);
  TrainState state = TrainState::initial(config);
  train(model, state, ds);
  if (out) *out = model;
  return state.history;
}

}  // namespace

TEST(Schedule, ProportionalRoundRobin) {
  EXPECT_EQ(interleave_schedule(2, 2), "TLTL");
  EXPECT_EQ(interleave_schedule(1, 3), "LTLL");
  EXPECT_EQ(interleave_schedule(0, 3), "LLL");
  EXPECT_EQ(interleave_schedule(3, 0), "TTT");
  EXPECT_TRUE(classification_follows_joint_batches("TLTLCC"));
  EXPECT_FALSE(classification_follows_joint_batches("TLCTL"));
}

TEST(Trainer, ZeroEpochsReturnsInitialisedModel) {
  TrainConfig config = tiny_config();
  config.n_epoch = 0;
  Dataset ds = tiny_dataset(8);
  TdlmModel model = TdlmModel::create(config, ds);
  TdlmModel before = model.clone();
  TrainState state = TrainState::initial(config);
  train(model, state, ds);
  EXPECT_TRUE(state.history.empty());
  auto a = model.parameters(), b = before.parameters();
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_TRUE(std::equal(a[i].tensor.data().begin(), a[i].tensor.data().end(), b[i].tensor.data().begin()));
}

TEST(Trainer, VanillaSkipsTopicModel) {
  TrainConfig config = tiny_config();
  config.vanilla = true;
  Dataset ds = tiny_dataset(8);
  TdlmModel model;
  auto history = run(config, ds, &model);
  for (const auto& m : history) {
    EXPECT_TRUE(std::isnan(m.tm_loss));
    EXPECT_EQ(m.schedule.find('T'), std::string::npos);
  }
  std::size_t lm_only = 0;
  for (const auto& p : model.parameters()) {
    EXPECT_EQ(p.name.rfind("lm.", 0), 0u) << p.name;
    EXPECT_EQ(p.name.rfind("lm.gate.", 0), std::string::npos) << p.name;
    lm_only += p.tensor.size();
  }
  EXPECT_EQ(model.parameter_count(), lm_only);
}

TEST(Trainer, DevPerplexityImprovesOnEasyCorpus) {
  TrainConfig config = tiny_config();
  config.n_epoch = 3;
  auto history = run(config, topical_dataset(50, 3));
  ASSERT_EQ(history.size(), 3u);
  EXPECT_LT(history[2].dev_ppl, history[0].dev_ppl);
}

TEST(Trainer, IdenticalSeedsGiveIdenticalLogs) {
  TrainConfig config = tiny_config();
  Dataset ds = tiny_dataset(10);
  EXPECT_EQ(metrics_csv(run(config, ds)), metrics_csv(run(config, ds)));
}

TEST(Trainer, AdamStepsEqualMinibatches) {
  TrainConfig config = tiny_config();
  config.supervised = true;
  Dataset ds = tiny_dataset(10, 2);
  TdlmModel model = TdlmModel::create(config, ds);
  TrainState state = TrainState::initial(config);
  train(model, state, ds);
  std::size_t batches = 0;
  for (const auto& m : state.history) {
    batches += m.schedule.size();
    EXPECT_TRUE(classification_follows_joint_batches(m.schedule));
    EXPECT_NE(m.schedule.find('C'), std::string::npos);
    EXPECT_TRUE(m.dev_acc.has_value());
  }
  EXPECT_EQ(state.adam.step_count(), batches);
}

TEST(Trainer, DivergenceNamesTheSubTask) {
  TrainConfig config = tiny_config();
  Dataset ds = tiny_dataset(8);
  TdlmModel model = TdlmModel::create(config, ds);
  model.lm().out_bias[5] = NAN;
  TrainState state = TrainState::initial(config);
  try {
    train(model, state, ds);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("language model"), std::string::npos) << e.what();
  }
}

TEST(Trainer, SharedParameterContract) {
  TrainConfig config = tiny_config();
  Dataset ds = tiny_dataset(6);
  TdlmModel model = TdlmModel::create(config, ds);
  Rng rng(1);
  auto lm_batch = make_lm_batches(ds.train, 4, config.m2, config.m3, nullptr).at(0);
  auto tm_batch = make_tm_batches(ds.train, 4, config.m1, config.m3, rng).batches.at(0);
  auto grad_mass = [&](const std::string& name) {
    for (const auto& p : model.parameters()) {
      if (p.name != name) continue;
      double s = 0;
      if (p.tensor.has_grad())
        for (Real g : p.tensor.grad()) s += std::abs(g);
      return s;
    }
    ADD_FAILURE() << "no parameter " << name;
    return 0.0;
  };
  auto backprop = [&](auto&& loss_fn) {
    for (auto& p : model.parameters()) p.tensor.zero_grad();
    Tape tape;
    Tensor loss;
    {
      TapeScope scope(tape);
      loss = loss_fn();
    }
    tape.backward(loss);
  };

  backprop([&] { return model.lm_loss(lm_batch, false, rng).total; });
  EXPECT_GT(grad_mass("tm.embeddings"), 0);
  EXPECT_GT(grad_mass("tm.topic_in"), 0);
  EXPECT_GT(grad_mass("tm.topic_out"), 0);
  EXPECT_GT(grad_mass("lm.embeddings"), 0);

  backprop([&] { return model.tm_loss(tm_batch, false, rng); });
  EXPECT_GT(grad_mass("tm.embeddings"), 0);
  EXPECT_GT(grad_mass("tm.topic_in"), 0);
  EXPECT_EQ(grad_mass("lm.embeddings"), 0);
}

TEST(Metrics, CsvLayout) {
  EpochMetrics a;
  a.epoch = 1;
  a.tm_loss = 2.5;
  a.lm_loss = 3.25;
  a.dev_ppl = 20;
  const std::string csv = metrics_csv({a});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,tm_loss,lm_loss,dev_ppl");
  a.dev_acc = 0.5;
  const std::string with_acc = metrics_csv({a});
  EXPECT_EQ(with_acc.substr(0, with_acc.find('\n')), "epoch,tm_loss,lm_loss,dev_ppl,dev_acc");
}

TEST(Checkpoint, RoundTripIsExact) {
  TrainConfig config = tiny_config();
  config.supervised = true;
  config.tags = true;
  Dataset ds = tiny_dataset(8, 2, 2);
  TdlmModel model = TdlmModel::create(config, ds);
  TrainState state = TrainState::initial(config);
  train(model, state, ds);

  const std::string bytes = encode_checkpoint(model, state);
  Checkpoint back = decode_checkpoint(bytes);
  EXPECT_EQ(encode_checkpoint(back.model, back.state), bytes);
  auto a = model.parameters(), b = back.model.parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_EQ(a[i].tensor.shape(), b[i].tensor.shape());
    EXPECT_EQ(std::memcmp(a[i].tensor.data().data(), b[i].tensor.data().data(), a[i].tensor.size() * sizeof(Real)), 0);
  }
  EXPECT_EQ(model.perplexity(ds.test).value, back.model.perplexity(ds.test).value);
  EXPECT_EQ(back.state.history, state.history);
  EXPECT_EQ(back.model.vocab(), model.vocab());

  const auto path = std::filesystem::temp_directory_path() / "tdlm_checkpoint_test.bin";
  save_checkpoint(path, model, state);
  EXPECT_EQ(read_file(path), bytes);
  EXPECT_EQ(encode_checkpoint(load_checkpoint(path).model, state), bytes);
  std::filesystem::remove(path);
}

TEST(Checkpoint, DistinctLoadErrors) {
  TrainConfig config = tiny_config();
  config.n_epoch = 0;
  Dataset ds = tiny_dataset(4);
  TdlmModel model = TdlmModel::create(config, ds);
  const std::string bytes = encode_checkpoint(model, TrainState::initial(config));

  std::string bad = bytes;
  bad[0] = 'X';
  try {
    decode_checkpoint(bad);
    FAIL() << "expected BadMagicError";
  } catch (const BadMagicError& e) {
    EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos) << e.what();
  }

  std::string version = bytes;
  const auto v = version.find("\"format_version\":1");
  ASSERT_NE(v, std::string::npos);
  version[v + 17] = '2';
  EXPECT_THROW(decode_checkpoint(version), VersionMismatchError);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 7)), TruncatedCheckpointError);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, 9)), TruncatedCheckpointError);

  // Same layout, different dimensions: swap a shape in the header.
  std::string shape = bytes;
  const std::string from = "\"shape\":[13,6]", to = "\"shape\":[13,7]";
  const auto at = shape.find(from);
  ASSERT_NE(at, std::string::npos);
  shape.replace(at, from.size(), to);
  EXPECT_THROW(decode_checkpoint(shape), ShapeMismatchError);
}

TEST(Checkpoint, ResumeMatchesUninterruptedRun) {
  TrainConfig config = tiny_config();
  config.n_epoch = 3;
  Dataset ds = tiny_dataset(10);
  TdlmModel full = TdlmModel::create(config, ds);
  TrainState full_state = TrainState::initial(config);
  std::string snapshot;
  TrainHooks hooks;
  hooks.on_epoch = [&](const TdlmModel& m, const TrainState& s, bool) {
    if (s.epoch == 1) snapshot = encode_checkpoint(m, s);
  };
  train(full, full_state, ds, hooks);
  ASSERT_FALSE(snapshot.empty());

  Checkpoint resumed = decode_checkpoint(snapshot);
  train(resumed.model, resumed.state, ds);
  EXPECT_EQ(resumed.state.history, full_state.history);
  EXPECT_EQ(encode_checkpoint(resumed.model, resumed.state), encode_checkpoint(full, full_state));
}
