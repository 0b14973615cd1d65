// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "dialect/corpus.hpp"
#include "dialect/density.hpp"
#include "dialect/experiments.hpp"
#include "dialect/metrics.hpp"
#include "dialect/pairgen.hpp"
#include "dialect/recognizers.hpp"
#include "dialect/rng.hpp"
#include "gradient_check.hpp"

namespace fs = std::filesystem;
using namespace dialect;

namespace {

// Tolerances and thresholds.
constexpr double kPairExpansionMaxSeconds = 1.0;
constexpr double kAucOracleTolerance = 1e-12;
constexpr int kAucTrials = 200;
constexpr std::size_t kAucMaxN = 50;
constexpr std::size_t kDPrimeSamples = 10000;
constexpr double kDPrimeLow = 1.9;
constexpr double kDPrimeHigh = 2.1;
constexpr std::size_t kSpearmanMaxN = 5;
constexpr std::size_t kKappaSamples = 10000;
constexpr double kKappaNullTolerance = 0.05;
constexpr double kMultiheadMinAuc = 0.95;
constexpr double kDamlMinAuc = 0.90;
constexpr double kLearnabilityMaxSeconds = 120.0;
constexpr double kPairsMinAuc = 0.85;
constexpr double kLearnedMinSpearman = 0.9;
constexpr double kClassifyMinAccuracy = 0.95;
constexpr double kClassifyMinDPrime = 1.5;
constexpr double kMinRateGap = 0.3;
constexpr double kGradientMaxRelError = 1e-4;

const fs::path kSource(DIALECT_SOURCE_DIR);

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

// 8 features, 50 transcripts x 10 examples per locale, split 50/50 by
// transcript: 500 train and 500 test examples.
ExperimentConfig synthetic_base() {
  ExperimentConfig c;
  SynthConfig& s = c.data.synth;
  s.num_features = 8;
  s.transcripts_per_locale = 50;
  s.examples_per_transcript = 10;
  s.rate_a = {0.4};
  s.rate_b = {0.05};
  s.transcript_variation = 0.5;
  s.pairs_per_feature = 5;
  c.positive_locale = s.locale_a;
  c.seed = 1;
  c.seed_count = 5;
  c.hp.epochs = 100;
  c.hp.batch_size = 32;
  c.hp.learning_rate = 1e-3;
  return c;
}

// --- 1 -----------------------------------------------------------------------

Outcome pair_expansion() {
  const auto t0 = std::chrono::steady_clock::now();
  using Row = std::tuple<int, std::string, std::string>;
  const FeatureCatalog fig_cat = load_catalog(kSource / "data/figure_catalog.jsonl");
  const MultitaskDataset fig =
      expand_pairs(load_pairs(kSource / "data/figure_pairs.jsonl", fig_cat), fig_cat);
  std::set<Row> got;
  for (const auto& i : fig.instances()) got.emplace(i.y, i.feature_id, i.text);
  const std::set<Row> expected{
      {1, "article_omission", "Chair is black."},
      {0, "focus_only", "Chair is black."},
      {0, "article_omission", "The chair is black."},
      {0, "focus_only", "The chair is black."},
      {0, "article_omission", "I was there yesterday only."},
      {1, "focus_only", "I was there yesterday only."},
      {0, "article_omission", "I was there just yesterday."},
      {0, "focus_only", "I was there just yesterday."},
  };
  bool ok = got == expected && fig.size() == expected.size();

  auto check_size = [&](const MinimalPairSet& pairs, const FeatureCatalog& cat) {
    std::set<std::string> texts;
    for (const auto& p : pairs) {
      texts.insert(p.positive_variants.begin(), p.positive_variants.end());
      texts.insert(p.negative_variants.begin(), p.negative_variants.end());
    }
    const MultitaskDataset d = expand_pairs(pairs, cat);
    return d.size() == texts.size() * cat.size();
  };
  const FeatureCatalog lange = load_catalog(kSource / "data/catalog_lange.jsonl");
  ok = ok && check_size(load_pairs(kSource / "data/figure_pairs.jsonl", fig_cat), fig_cat);
  ok = ok && check_size(load_pairs(kSource / "data/pairs_lange.jsonl", lange), lange);
  const SyntheticData syn = generate_synthetic(synthetic_base().data.synth, 1);
  ok = ok && check_size(syn.pairs, syn.catalog);

  const double secs = seconds_since(t0);
  return {ok && secs < kPairExpansionMaxSeconds,
          "figure rows " + std::to_string(got.size()) + "/8, 3 fixtures sized, " +
              fmt("%.3f s", secs)};
}

// --- 2 -----------------------------------------------------------------------

Outcome regex_fidelity() {
  const std::vector<std::pair<std::string, std::set<std::string>>> cases{
      {"he is doing engineering in Delhi itself", {"focus_itself"}},
      {"I was there yesterday only", {"focus_only"}},
      {"every year inflation is there", {"non_initial_existential"}},
      {"the children are outside, isn't it?", {"invariant_tag"}},
      {"then she did her schooling and all", {"and_all"}},
      {"chair is black", {}},
  };
  std::size_t right = 0;
  for (const auto& [text, want] : cases) {
    std::set<std::string> got;
    for (const RegexMatch& m : regex_detect(text)) {
      if (m.present) got.insert(m.feature_id);
    }
    right += got == want;
  }
  return {right == cases.size(),
          std::to_string(right) + "/" + std::to_string(cases.size()) + " exact"};
}

// --- 3 -----------------------------------------------------------------------

Outcome auc_oracle() {
  Rng rng(2024);
  double worst = 0.0;
  for (int t = 0; t < kAucTrials; ++t) {
    const std::size_t n = 2 + rng.below(kAucMaxN - 1);
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = rng.uniform();
      y[i] = rng.bernoulli(0.5);
    }
    // Inject ties by copying scores.
    for (std::size_t k = 0; k < n / 3; ++k) s[rng.below(n)] = s[rng.below(n)];
    // Both classes must occur.
    y[0] = 1;
    y[1] = 0;

    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!y[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (y[j]) continue;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        pairs += 1.0;
      }
    }
    worst = std::max(worst, std::abs(roc_auc(s, y) - wins / pairs));
  }
  const std::vector<std::uint8_t> y{1, 0, 1, 0, 1};
  const std::vector<double> tied(5, 0.42);
  const std::vector<double> separated{0.9, 0.1, 0.8, 0.2, 0.7};
  const bool bounds = roc_auc(tied, y) == 0.5 && roc_auc(separated, y) == 1.0;
  return {worst <= kAucOracleTolerance && bounds,
          "max |diff| " + fmt("%.2e", worst) + (bounds ? ", boundaries exact" : ", boundary mismatch")};
}

// --- 4 -----------------------------------------------------------------------

Outcome d_prime_checks() {
  Rng rng(77);
  std::vector<double> a(kDPrimeSamples), b(kDPrimeSamples);
  for (double& v : a) v = rng.normal(2.0, 1.0);
  for (double& v : b) v = rng.normal(0.0, 1.0);
  const double d = d_prime(PopulationStats::of(a), PopulationStats::of(b));

  // Means, variances, the shift, and the power-of-two scale are all exact in
  // binary, so invariance can be checked with ==.
  const std::vector<double> x{1, 2, 3, 6};
  const std::vector<double> w{0, 1, 1, 2};
  auto dp = [](const std::vector<double>& p, const std::vector<double>& q) {
    return d_prime(PopulationStats::of(p), PopulationStats::of(q));
  };
  auto map = [](std::vector<double> v, double scale, double shift) {
    for (double& e : v) e = e * scale + shift;
    return v;
  };
  const double base = dp(x, w);
  const bool anti = dp(w, x) == -base;
  const bool shift = dp(map(x, 1.0, 8.0), map(w, 1.0, 8.0)) == base;
  const bool scale = dp(map(x, 4.0, 0.0), map(w, 4.0, 0.0)) == base;
  return {d >= kDPrimeLow && d <= kDPrimeHigh && anti && shift && scale,
          "d'=" + fmt("%.4f", d) + (anti ? " antisym" : " ANTISYM FAIL") +
              (shift ? " shift" : " SHIFT FAIL") + (scale ? " scale" : " SCALE FAIL")};
}

// --- 5 -----------------------------------------------------------------------

Outcome spearman_kappa() {
  std::size_t perms = 0, exact = 0;
  for (std::size_t n = 2; n <= kSpearmanMaxN; ++n) {
    std::vector<double> x(n);
    std::iota(x.begin(), x.end(), 1.0);
    std::vector<double> y = x;
    do {
      double d2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
      // 1 - 6 D / (n (n^2 - 1)) as one fraction of exact integers, so the
      // reference is the correctly rounded value.
      const double nn = static_cast<double>(n);
      const double denom = nn * (nn * nn - 1.0);
      const double expected = (denom - 6.0 * d2) / denom;
      ++perms;
      exact += spearman(x, y) == expected;
    } while (std::next_permutation(y.begin(), y.end()));
  }
  const std::vector<std::uint8_t> ka{1, 1, 0, 0}, kb{1, 0, 0, 0};
  const double fixture = cohen_kappa(ka, kb);
  Rng rng(5);
  std::vector<std::uint8_t> ra(kKappaSamples), rb(kKappaSamples);
  for (std::size_t i = 0; i < kKappaSamples; ++i) {
    ra[i] = rng.bernoulli(0.5);
    rb[i] = rng.bernoulli(0.5);
  }
  const double null_kappa = cohen_kappa(ra, rb);
  return {exact == perms && fixture == 0.5 && std::abs(null_kappa) <= kKappaNullTolerance,
          "spearman " + std::to_string(exact) + "/" + std::to_string(perms) +
              " exact, kappa fixture " + fmt("%.3f", fixture) + ", null " +
              fmt("%+.4f", null_kappa)};
}

// --- 6 -----------------------------------------------------------------------

Outcome learnability() {
  ExperimentConfig c = synthetic_base();
  c.supervision = {"corpus"};
  const ExperimentData data = load_experiment_data(c);

  c.architectures = {"multihead"};
  const auto t0 = std::chrono::steady_clock::now();
  const GridResult mh = run_grid(c, data, jobs());
  const double mh_secs = seconds_since(t0);

  c.architectures = {"daml"};
  const GridResult daml = run_grid(c, data, jobs());

  const double mh_auc = mh.cells.at(0).average.macro_auc;
  const double daml_auc = daml.cells.at(0).average.macro_auc;
  const bool sizes = mh.split.train_examples == 500 && mh.split.test_examples == 500;
  return {sizes && mh_auc >= kMultiheadMinAuc && daml_auc >= kDamlMinAuc &&
              mh_secs < kLearnabilityMaxSeconds,
          "multihead " + fmt("%.4f", mh_auc) + " in " + fmt("%.1f s", mh_secs) +
              ", daml " + fmt("%.4f", daml_auc) + ", split " +
              std::to_string(mh.split.train_examples) + "/" +
              std::to_string(mh.split.test_examples)};
}

// --- 7 -----------------------------------------------------------------------

Outcome pair_efficiency() {
  ExperimentConfig c = load_experiment_config(kSource / "configs/stratified.cfg");
  c.architectures = {"multihead"};
  const ExperimentData data = load_experiment_data(c);
  const StratifiedResult r = run_stratified(c, data, jobs());
  const StratifiedArm& arm = r.arms.at(0);
  const double pairs = arm.pairs.macro_auc;
  const double strat = arm.stratified.macro_auc;
  return {c.data.synth.pairs_per_feature == 5 && pairs >= kPairsMinAuc && pairs > strat,
          "pairs " + fmt("%.4f", pairs) + " vs stratified " + fmt("%.4f", strat) + " (" +
              std::to_string(c.seed_count) + " seeds, " + std::to_string(c.repetitions) +
              " reps)"};
}

// --- 8 -----------------------------------------------------------------------

Outcome ddm_ranking() {
  ExperimentConfig c = synthetic_base();
  c.methods = {"oracle", "multihead"};
  const ExperimentData data = load_experiment_data(c);
  const DensityResult r = run_ddm_rank(c, data, jobs());
  std::optional<double> oracle, learned;
  for (const MethodScores& m : r.methods) {
    if (m.method == "oracle") oracle = m.spearman;
    if (m.method == "multihead") learned = m.spearman;
  }
  const bool ok = oracle && learned && *oracle == 1.0 && *learned >= kLearnedMinSpearman;
  return {ok, "oracle r=" + fmt("%.4f", oracle.value_or(NAN)) +
                  ", multihead r=" + fmt("%.4f", learned.value_or(NAN)) + " over " +
                  std::to_string(r.gold.size()) + " test transcripts"};
}

// --- 9 -----------------------------------------------------------------------

Outcome dialect_classification() {
  ExperimentConfig c = load_experiment_config(kSource / "configs/dialect_classify.cfg");
  c.methods = {"multihead", "docclf"};
  const SynthConfig& s = c.data.synth;
  double gap = 1.0;
  for (std::size_t k = 0; k < s.num_features; ++k) {
    gap = std::min(gap, s.rate(0, k) - s.rate(1, k));
  }
  const ExperimentData data = load_experiment_data(c);
  const DensityResult r = run_dialect_classify(c, data, jobs());
  bool ok = gap >= kMinRateGap && r.methods.size() == 2;
  std::string detail = "rate gap " + fmt("%.2f", gap);
  for (const MethodScores& m : r.methods) {
    const double acc = m.accuracy.value_or(0.0);
    const double dp = m.d_prime.value_or(0.0);
    ok = ok && acc >= kClassifyMinAccuracy && dp > kClassifyMinDPrime;
    detail += ", " + m.method + " acc " + fmt("%.3f", acc) + " d'=" + fmt("%.2f", dp);
  }
  const testing::GradientCheck g = testing::check_tiny_encoder_gradients();
  ok = ok && g.relative_error <= kGradientMaxRelError;
  detail += ", grad rel err " + fmt("%.2e", g.relative_error);
  return {ok, detail};
}

// --- 10 ----------------------------------------------------------------------

std::map<std::string, std::string> result_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name == "manifest.json") continue;  // records the start time
    std::ifstream in(e.path(), std::ios::binary);
    out[name] = {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }
  return out;
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "dialect_acceptance_determinism";
  fs::remove_all(base);
  std::size_t identical = 0, kinds = 0, files = 0;
  for (const char* name : {"grid", "curve", "stratified", "ddm_rank", "dialect_classify"}) {
    ExperimentConfig c = load_experiment_config(kSource / "configs" / (std::string(name) + ".cfg"));
    // Smaller data and shorter training keep the double run quick; the
    // protocol code paths are unchanged.
    c.data.synth.transcripts_per_locale = 20;
    c.data.synth.examples_per_transcript = 6;
    c.data.synth.pairs_per_feature = 2;
    c.hp.epochs = 5;
    c.seed_count = 2;
    c.repetitions = 2;
    if (!c.sizes.empty()) c.sizes = {10, 20};
    ++kinds;
    const ExperimentRun a = run_experiment(c, base, 1, "acceptance");
    const ExperimentRun b = run_experiment(c, base, jobs(), "acceptance");
    const auto fa = result_files(a.directory);
    files += fa.size();
    identical += !fa.empty() && fa == result_files(b.directory);
  }
  fs::remove_all(base);
  return {identical == kinds, std::to_string(identical) + "/" + std::to_string(kinds) +
                                  " protocols byte-identical (" + std::to_string(files) +
                                  " files)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"pair-expansion fidelity", pair_expansion},
      {"regex fidelity", regex_fidelity},
      {"AUC oracle equivalence", auc_oracle},
      {"D' correctness", d_prime_checks},
      {"Spearman and kappa correctness", spearman_kappa},
      {"learnability", learnability},
      {"minimal-pair efficiency", pair_efficiency},
      {"DDM ranking", ddm_ranking},
      {"dialect classification and gradient check", dialect_classification},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %2zu  %-42s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed;
}
