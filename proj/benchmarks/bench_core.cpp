#include <benchmark/benchmark.h>

#include <filesystem>

#include "dialect/corpus.hpp"
#include "dialect/density.hpp"
#include "dialect/metrics.hpp"
#include "dialect/pairgen.hpp"
#include "dialect/recognizers.hpp"
#include "dialect/rng.hpp"

namespace {

using namespace dialect;
const std::filesystem::path kData = std::filesystem::path(DIALECT_SOURCE_DIR) / "data";

void BM_Tokenize(benchmark::State& state) {
  const std::string text = "My father, he works for a solar company in Delhi itself, isn't it?";
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(text));
}
BENCHMARK(BM_Tokenize);

void BM_RocAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  std::vector<double> s(n);
  std::vector<std::uint8_t> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = rng.uniform();
    y[i] = rng.bernoulli(0.3);
  }
  y[0] = 1;
  y[1] = 0;
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(s, y));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RocAuc)->RangeMultiplier(10)->Range(100, 100000)->Complexity();

void BM_BalancedThreshold(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  std::vector<double> pos(n), neg(n);
  for (double& v : pos) v = rng.normal(1.0, 1.0);
  for (double& v : neg) v = rng.normal(0.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(balanced_threshold(pos, neg));
}
BENCHMARK(BM_BalancedThreshold)->Range(64, 16384);

void BM_RegexDetect(benchmark::State& state) {
  const std::string text = "every year inflation is there only, and all that, isn't it?";
  for (auto _ : state) benchmark::DoNotOptimize(regex_detect(text));
}
BENCHMARK(BM_RegexDetect);

void BM_ExpandLangePairs(benchmark::State& state) {
  const FeatureCatalog catalog = load_catalog(kData / "catalog_lange.jsonl");
  const MinimalPairSet pairs = load_pairs(kData / "pairs_lange.jsonl", catalog);
  for (auto _ : state) benchmark::DoNotOptimize(expand_pairs(pairs, catalog));
}
BENCHMARK(BM_ExpandLangePairs);

void BM_TinyEncoderForward(benchmark::State& state) {
  EncoderSpec spec;
  spec.dimension = static_cast<std::size_t>(state.range(0));
  Vocabulary vocab;
  const auto tokens = tokenize("my old life I want to spend it in India only");
  vocab.add_all(tokens);
  const TinyEncoder enc(spec, vocab, 1);
  const EncodedInput in = build_input(vocab, UnknownPolicy::strict, tokens, 64);
  for (auto _ : state) benchmark::DoNotOptimize(enc.encode(in));
}
BENCHMARK(BM_TinyEncoderForward)->Arg(32)->Arg(64)->Arg(128);

void BM_TrainMultiheadEpoch(benchmark::State& state) {
  SynthConfig cfg;
  cfg.transcripts_per_locale = 10;
  const SyntheticData d = generate_synthetic(cfg, 3);
  const MultitaskDataset ds = corpus_dataset(d.corpus, d.catalog.ids());
  HyperParams hp;
  hp.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_multihead(ds, EncoderSpec{}, hp));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(ds.texts().size()));
}
BENCHMARK(BM_TrainMultiheadEpoch)->Unit(benchmark::kMillisecond);

void BM_LearnedDensities(benchmark::State& state) {
  SynthConfig cfg;
  cfg.transcripts_per_locale = 10;
  const SyntheticData d = generate_synthetic(cfg, 4);
  const ScoreFn score = oracle_scorer(d.corpus, d.catalog.ids());
  for (auto _ : state) benchmark::DoNotOptimize(learned_densities(d.corpus, score));
}
BENCHMARK(BM_LearnedDensities);

}  // namespace

BENCHMARK_MAIN();
