#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "tdlm/coherence.hpp"
#include "tdlm/generation.hpp"
#include "tdlm/topics.hpp"

using namespace tdlm;

namespace {

using Docs = std::vector<std::vector<TokenId>>;

// Enumerates the windows explicitly as sets and counts by membership.
struct BruteForce {
  std::vector<std::set<TokenId>> windows;

  BruteForce(const Docs& docs, std::size_t size) {
    for (const auto& doc : docs)
      for (std::size_t start = 0; start < doc.size(); ++start)
        windows.emplace_back(doc.begin() + start, doc.begin() + std::min(doc.size(), start + size));
  }
  std::uint64_t count(TokenId w) const {
    return std::count_if(windows.begin(), windows.end(), [&](const auto& s) { return s.count(w) > 0; });
  }
  std::uint64_t count(TokenId a, TokenId b) const {
    return std::count_if(windows.begin(), windows.end(), [&](const auto& s) { return s.count(a) && s.count(b); });
  }
};

Docs random_docs(std::size_t n, std::size_t words, std::uint64_t seed) {
  Rng rng(seed);
  Docs docs(n);
  for (auto& d : docs) {
    d.resize(1 + rng.below(15));
    for (auto& id : d) id = static_cast<TokenId>(rng.below(words));
  }
  return docs;
}

std::vector<TokenId> iota_ids(std::size_t n, TokenId from = 0) {
  std::vector<TokenId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = from + static_cast<TokenId>(i);
  return ids;
}

TdlmModel trained_free_model(std::size_t topics) {
  TrainConfig config = fixtures::small_config();
  config.k = topics;
  return fixtures::small_model(config, 13);
}

}  // namespace

// Coherence.

TEST(Cooccurrence, TwoWordDocument) {
  Docs docs = {{0, 1}};
  std::vector<TokenId> query = {0, 1, 7};
  auto index = CooccurrenceIndex::build(docs, 2, query);
  EXPECT_EQ(index.windows(), 2u);
  EXPECT_EQ(index.count(0), 1u);
  EXPECT_EQ(index.count(1), 2u);
  EXPECT_EQ(index.count(0, 1), 1u);
  EXPECT_EQ(index.count(7), 0u);
}

TEST(Cooccurrence, MatchesBruteForceAndIsSymmetric) {
  Docs docs = random_docs(5, 8, 41);
  auto query = iota_ids(8);
  for (std::size_t window : {2u, 3u, 6u}) {
    auto index = CooccurrenceIndex::build(docs, window, query);
    BruteForce oracle(docs, window);
    EXPECT_EQ(index.windows(), oracle.windows.size());
    for (TokenId a : query) {
      EXPECT_EQ(index.count(a), oracle.count(a));
      for (TokenId b : query) {
        if (a == b) continue;
        EXPECT_EQ(index.count(a, b), oracle.count(a, b)) << a << "," << b;
        EXPECT_EQ(index.count(a, b), index.count(b, a));
        EXPECT_LE(index.count(a, b), std::min(index.count(a), index.count(b)));
      }
    }
  }
}

TEST(Cooccurrence, SymmetricOverRandomPairs) {
  Docs docs = random_docs(30, 40, 42);
  auto query = iota_ids(40);
  auto index = CooccurrenceIndex::build(docs, 5, query);
  Rng rng(43);
  for (int i = 0; i < 100; ++i) {
    TokenId a = static_cast<TokenId>(rng.below(40)), b = static_cast<TokenId>(rng.below(40));
    EXPECT_EQ(index.count(a, b), index.count(b, a));
    const auto s = npmi_pair(a, b, index), t = npmi_pair(b, a, index);
    ASSERT_EQ(s.has_value(), t.has_value());
    if (s) {
      EXPECT_EQ(*s, *t);
      EXPECT_GE(*s, -1.0);
      EXPECT_LE(*s, 1.0);
    }
  }
}

TEST(Cooccurrence, DocumentOrderDoesNotMatter) {
  Docs docs = random_docs(12, 10, 44);
  Docs shuffled = docs;
  Rng rng(45);
  rng.shuffle(shuffled.begin(), shuffled.end());
  auto query = iota_ids(10);
  auto a = CooccurrenceIndex::build(docs, 4, query), b = CooccurrenceIndex::build(shuffled, 4, query);
  EXPECT_EQ(a.windows(), b.windows());
  for (TokenId x : query)
    for (TokenId y : query) EXPECT_EQ(a.count(x, y), b.count(x, y));
}

TEST(Cooccurrence, Errors) {
  std::vector<TokenId> query = {0};
  Docs empty = {{}, {}};
  EXPECT_THROW(CooccurrenceIndex::build(empty, 2, query), IndexError);
  Docs one = {{0}};
  EXPECT_THROW(CooccurrenceIndex::build(one, 1, query), ConfigError);
}

TEST(Npmi, BoundaryCases) {
  EXPECT_DOUBLE_EQ(*npmi_from_counts(5, 5, 5, 5), 1.0);
  EXPECT_DOUBLE_EQ(*npmi_from_counts(3, 3, 3, 10), 1.0);
  EXPECT_DOUBLE_EQ(*npmi_from_counts(3, 4, 0, 10), -1.0);
  EXPECT_FALSE(npmi_from_counts(0, 4, 0, 10).has_value());
  // Independence: P(a,b) = P(a) P(b).
  EXPECT_NEAR(*npmi_from_counts(40, 25, 10, 100), 0.0, 1e-9);
  const double expect = std::log(0.2 / (0.4 * 0.3)) / -std::log(0.2);
  EXPECT_NEAR(*npmi_from_counts(40, 30, 20, 100), expect, 1e-12);
}

TEST(TopicCoherence, ConstantScoresAverageToThatScore) {
  // Twenty words that never share a window: every pair scores -1.
  auto query = iota_ids(20);
  Docs apart;
  for (TokenId w : query) apart.push_back({w});
  auto split = CooccurrenceIndex::build(apart, 2, query);
  auto c = topic_coherence(0, query, split);
  EXPECT_DOUBLE_EQ(c.average, -1.0);
  EXPECT_EQ(c.scored_pairs[3], 190u);

  // Words absent from the reference: nothing scored, coherence 0.
  Docs other = {iota_ids(20)};
  auto none = CooccurrenceIndex::build(other, 5, iota_ids(20, 100));
  auto zero = topic_coherence(0, iota_ids(20, 100), none);
  EXPECT_EQ(zero.average, 0.0);
  EXPECT_EQ(zero.scored_pairs[0], 0u);
}

TEST(TopicCoherence, MatchesBruteForceAggregation) {
  Docs docs = random_docs(40, 25, 46);
  auto words = iota_ids(20, 2);
  auto index = CooccurrenceIndex::build(docs, 6, words);
  BruteForce oracle(docs, 6);
  auto c = topic_coherence(3, words, index);
  double sum_of_means = 0;
  for (std::size_t cut = 0; cut < 4; ++cut) {
    const std::size_t n = kCoherenceCutoffs[cut];
    double sum = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double n1 = oracle.count(words[i]), n2 = oracle.count(words[j]);
        const double n12 = oracle.count(words[i], words[j]), total = oracle.windows.size();
        if (n1 == 0 || n2 == 0) continue;
        ++pairs;
        if (n12 == 0) {
          sum += -1;
        } else if (n12 == n1 && n12 == n2) {
          sum += 1;
        } else {
          const double p12 = n12 / total;
          sum += std::clamp(std::log(p12 / ((n1 / total) * (n2 / total))) / -std::log(p12), -1.0, 1.0);
        }
      }
    }
    EXPECT_EQ(c.scored_pairs[cut], pairs);
    const double mean = pairs ? sum / pairs : 0.0;
    EXPECT_NEAR(c.npmi[cut], mean, 1e-12);
    sum_of_means += mean;
  }
  EXPECT_NEAR(c.average, sum_of_means / 4, 1e-12);
  EXPECT_EQ(c.topic, 3u);
}

TEST(TopicCoherence, ShortRankingNamesTheTopic) {
  Docs docs = {iota_ids(20)};
  auto index = CooccurrenceIndex::build(docs, 5, iota_ids(20));
  try {
    topic_coherence(7, iota_ids(19), index);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("topic 7"), std::string::npos) << e.what();
  }
}

TEST(CoherenceReport, MeanIsOrderInvariant) {
  Docs docs = random_docs(40, 30, 47);
  auto index = CooccurrenceIndex::build(docs, 5, iota_ids(30));
  std::vector<std::vector<TokenId>> topics = {iota_ids(20), iota_ids(20, 10), iota_ids(20, 5)};
  std::vector<std::vector<TokenId>> reversed(topics.rbegin(), topics.rend());
  EXPECT_NEAR(coherence_report(topics, index).mean, coherence_report(reversed, index).mean, 1e-12);
  const std::string csv = coherence_csv(coherence_report(topics, index));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "topic_id,npmi_5,npmi_10,npmi_15,npmi_20,avg");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

// Generation.

TEST(Generation, GreedyIgnoresSeed) {
  TdlmModel model = trained_free_model(3);
  GenerationOptions a{1e-9, 12, 1}, b{1e-9, 12, 999};
  EXPECT_EQ(generate_sentence(model, 1, a).ids, generate_sentence(model, 1, b).ids);
}

TEST(Generation, ZeroLengthAndBounds) {
  TdlmModel model = trained_free_model(3);
  GenerationOptions none{0.75, 0, 4};
  EXPECT_TRUE(generate_sentence(model, 0, none).ids.empty());
  EXPECT_THROW(generate_sentence(model, 3, {}), IndexError);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    GenerationOptions o{1.5, 6, seed};
    auto out = generate_sentence(model, seed % 3, o);
    EXPECT_LE(out.ids.size(), 6u);
    EXPECT_EQ(out.ids.size(), out.words.size());
    for (TokenId id : out.ids) {
      EXPECT_NE(id, Vocabulary::kPad);
      EXPECT_NE(id, Vocabulary::kEos);
      EXPECT_LT(static_cast<std::size_t>(id), model.vocab().size());
    }
  }
}

TEST(Generation, SameSeedSameSentence) {
  TdlmModel model = trained_free_model(3);
  GenerationOptions o{1.0, 20, 77};
  EXPECT_EQ(generate_sentence(model, 2, o).ids, generate_sentence(model, 2, o).ids);
}

TEST(Generation, OneHotMixtureEqualsTopic) {
  TdlmModel model = trained_free_model(3);
  for (std::uint64_t seed = 1; seed < 6; ++seed) {
    GenerationOptions o{0.75, 20, seed};
    std::vector<double> w = {0, 1, 0};
    EXPECT_EQ(generate_mixture(model, w, o).ids, generate_sentence(model, 1, o).ids);
  }
  TdlmModel single = trained_free_model(1);
  std::vector<double> uniform = {1.0};
  GenerationOptions o{0.75, 20, 3};
  EXPECT_EQ(generate_mixture(single, uniform, o).ids, generate_sentence(single, 0, o).ids);
}

TEST(Generation, InvalidMixtureWeights) {
  TdlmModel model = trained_free_model(3);
  std::vector<double> negative = {1.2, -0.2, 0}, unnormalised = {0.5, 0.2, 0.2}, short_vector = {1.0};
  EXPECT_THROW(generate_mixture(model, negative, {}), ConfigError);
  EXPECT_THROW(generate_mixture(model, unnormalised, {}), ConfigError);
  EXPECT_THROW(generate_mixture(model, short_vector, {}), ConfigError);
}

// Topic reports.

TEST(Topics, TopWordsAreRankedContentWords) {
  TdlmModel model = trained_free_model(3);
  auto words = top_topic_words(model, 0, 5);
  ASSERT_EQ(words.size(), 5u);
  for (std::size_t i = 0; i < words.size(); ++i) {
    EXPECT_TRUE(model.vocab().is_content(words[i].id));
    if (i) EXPECT_GE(words[i - 1].prob, words[i].prob);
  }
  auto ids = top_word_ids(model, 4);
  EXPECT_EQ(ids.size(), 3u);
  EXPECT_THROW(top_topic_words(model, 3, 5), IndexError);

  TrainConfig plain = fixtures::small_config();
  plain.vanilla = true;
  EXPECT_THROW(top_topic_words(fixtures::small_model(plain, 13), 0, 5), ConfigError);
}

TEST(Topics, JsonShape) {
  TdlmModel model = trained_free_model(3);
  const std::string json = topics_json(model, 4);
  EXPECT_EQ(json.front(), '[');
  EXPECT_NE(json.find("\"topic_id\""), std::string::npos);
  EXPECT_NE(json.find("\"top_words\""), std::string::npos);
  EXPECT_EQ(json.find("npmi_5"), std::string::npos);
}
