#include <benchmark/benchmark.h>

#include <vector>

#include "tdlm/batching.hpp"
#include "tdlm/coherence.hpp"
#include "tdlm/generation.hpp"
#include "tdlm/model.hpp"
#include "tdlm/ops.hpp"
#include "tdlm/synthetic.hpp"

using namespace tdlm;

namespace {

Tensor random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t = Tensor::zeros({rows, cols});
  for (auto& v : t.data()) v = static_cast<Real>(rng.uniform(-1, 1));
  return t;
}

// A preprocessed planted corpus shared by the model benchmarks.
const Dataset& planted() {
  static const Dataset data = [] {
    PlantedCorpusOptions options;
    options.documents = 200;
    TokenizerOptions tok;
    tok.split_sentences = false;
    auto raw = split_documents(parse_corpus(make_planted_corpus(options).text, tok), {0.1, 0.1, 1});
    VocabOptions vocab;
    vocab.min_count = 1;
    vocab.top_exclude_fraction = 0;
    return build_dataset(raw, vocab, {});
  }();
  return data;
}

TrainConfig bench_config(std::size_t hidden) {
  TrainConfig c;
  c.e = 50;
  c.n_hidden = hidden;
  c.k = 20;
  c.m3 = 150;
  c.n_batch = 32;
  return c;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Tensor a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b).data().data());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->RangeMultiplier(2)->Range(32, 256);

void BM_Softmax(benchmark::State& state) {
  Tensor x = random_matrix(64, static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(softmax(x).data().data());
}
BENCHMARK(BM_Softmax)->Arg(1000)->Arg(10000);

void BM_TmLossForwardBackward(benchmark::State& state) {
  const Dataset& data = planted();
  TdlmModel model = TdlmModel::create(bench_config(100), data);
  Rng rng(4);
  const TmBatch batch = make_tm_batches(data.train, 32, 3, 150, rng).batches.at(0);
  for (auto _ : state) {
    Tape tape;
    Tensor loss;
    {
      TapeScope scope(tape);
      loss = model.tm_loss(batch, true, rng);
    }
    tape.backward(loss);
  }
}
BENCHMARK(BM_TmLossForwardBackward)->Unit(benchmark::kMillisecond);

void BM_LmLossForwardBackward(benchmark::State& state) {
  const Dataset& data = planted();
  TrainConfig config = bench_config(static_cast<std::size_t>(state.range(0)));
  config.vanilla = state.range(1) != 0;
  TdlmModel model = TdlmModel::create(config, data);
  const LmBatch batch = make_lm_batches(data.train, 32, 30, 150, nullptr).at(0);
  Rng rng(5);
  for (auto _ : state) {
    Tape tape;
    Tensor loss;
    {
      TapeScope scope(tape);
      loss = model.lm_loss(batch, true, rng).total;
    }
    tape.backward(loss);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.token_count()));
}
BENCHMARK(BM_LmLossForwardBackward)
    ->ArgsProduct({{100, 300}, {0, 1}})
    ->ArgNames({"hidden", "vanilla"})
    ->Unit(benchmark::kMillisecond);

void BM_Perplexity(benchmark::State& state) {
  const Dataset& data = planted();
  TdlmModel model = TdlmModel::create(bench_config(100), data);
  for (auto _ : state) benchmark::DoNotOptimize(model.perplexity(data.dev).value);
}
BENCHMARK(BM_Perplexity)->Unit(benchmark::kMillisecond);

void BM_CooccurrenceIndex(benchmark::State& state) {
  const Dataset& data = planted();
  std::vector<std::vector<TokenId>> streams;
  for (const auto& doc : data.train.documents) {
    std::vector<TokenId> ids;
    for (const auto& s : doc.sentences) ids.insert(ids.end(), s.begin(), s.end());
    streams.push_back(std::move(ids));
  }
  std::vector<TokenId> query;
  for (TokenId id = Vocabulary::kReserved; id < static_cast<TokenId>(data.vocab.size()) && query.size() < 80; ++id)
    query.push_back(id);
  const auto window = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(CooccurrenceIndex::build(streams, window, query).windows());
}
BENCHMARK(BM_CooccurrenceIndex)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_GenerateSentence(benchmark::State& state) {
  const Dataset& data = planted();
  TdlmModel model = TdlmModel::create(bench_config(100), data);
  GenerationOptions options;
  for (auto _ : state) {
    ++options.seed;
    benchmark::DoNotOptimize(generate_sentence(model, 0, options).ids.size());
  }
}
BENCHMARK(BM_GenerateSentence)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
