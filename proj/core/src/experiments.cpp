#include "dialect/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <future>
#include <mutex>
#include <set>
#include <sstream>

#include "dialect/error.hpp"
#include "dialect/io.hpp"
#include "dialect/rng.hpp"
#include "json.hpp"

namespace dialect {

namespace {

using Json = nlohmann::ordered_json;

// Stream tags for mix_seed, one per independent random choice.
constexpr std::uint64_t kSplitStream = 11;
constexpr std::uint64_t kSubsampleStream = 21;
constexpr std::uint64_t kStratifyStream = 31;
constexpr std::uint64_t kLocaleSplitStream = 41;

std::string transcript_locale(const Corpus& corpus, const std::string& tid) {
  const auto idx = corpus.transcript(tid);
  if (idx.empty()) return {};
  return corpus.examples()[idx.front()].locale.value_or("");
}

Corpus select_by_locale(const Corpus& corpus, const std::string& locale, bool keep) {
  std::vector<std::string> ids;
  for (const std::string& tid : corpus.transcript_ids()) {
    if ((transcript_locale(corpus, tid) == locale) == keep) ids.push_back(tid);
  }
  return corpus.select_transcripts(ids);
}

// Concatenates corpora; annotations survive only when every part has them.
Corpus merge_corpora(const std::vector<const Corpus*>& parts) {
  std::vector<Example> examples;
  bool annotated = true;
  AnnotationSet labels;
  for (const Corpus* c : parts) {
    examples.insert(examples.end(), c->examples().begin(), c->examples().end());
    if (!c->annotations()) {
      annotated = false;
      continue;
    }
    for (const auto& [key, label] : c->annotations()->entries()) {
      labels.add(key.first, key.second, label);
    }
  }
  if (!annotated) return Corpus(std::move(examples));
  return Corpus(std::move(examples), std::move(labels));
}

SplitSizes split_sizes(const Corpus& train, const Corpus& test) {
  return {train.transcript_ids().size(), test.transcript_ids().size(), train.size(),
          test.size()};
}

MultitaskDataset corpus_training_set(const Corpus& train, const FeatureCatalog& catalog) {
  if (!train.annotations()) {
    throw MissingAnnotationError("corpus supervision needs annotations");
  }
  const auto ids = catalog.ids();
  return corpus_dataset(train, ids);
}

MultitaskDataset pair_training_set(const ExperimentData& data) {
  if (data.pairs.empty()) throw EmptyDatasetError("pair supervision needs minimal pairs");
  return expand_pairs(data.pairs, data.catalog);
}

MultitaskDataset test_set(const Corpus& test, const FeatureCatalog& catalog) {
  if (!test.annotations()) {
    throw MissingAnnotationError("held-out evaluation needs test annotations");
  }
  const auto ids = catalog.ids();
  return corpus_dataset(test, ids);
}

HyperParams with_seed(HyperParams hp, std::uint64_t seed) {
  hp.seed = seed;
  return hp;
}

std::unique_ptr<FeatureDetector> train_detector(const std::string& architecture,
                                                const MultitaskDataset& ds,
                                                const ExperimentConfig& config,
                                                const FeatureCatalog& catalog,
                                                std::uint64_t seed) {
  const HyperParams hp = with_seed(config.hp, seed);
  if (architecture == "multihead") {
    return std::make_unique<MultiheadModel>(train_multihead(ds, config.encoder, hp));
  }
  return std::make_unique<DamlModel>(
      train_daml(ds, catalog, config.encoder, hp, config.prefix_policy));
}

EvalReport train_and_evaluate(const std::string& architecture, const MultitaskDataset& ds,
                              const MultitaskDataset& test,
                              const ExperimentConfig& config,
                              const FeatureCatalog& catalog, std::uint64_t seed) {
  const auto model = train_detector(architecture, ds, config, catalog, seed);
  EvalReport report = evaluate_detector(*model, test);
  report.seeds = {seed};
  return report;
}

std::vector<double> density_values(const std::vector<DensityScore>& scores) {
  std::vector<double> out;
  for (const DensityScore& s : scores) out.push_back(s.density);
  return out;
}

std::string opt(const std::optional<double>& v) {
  return v ? format_fixed(*v, 3) : std::string("-");
}

std::string opt_exact(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::string pad(std::string s, std::size_t width) {
  s.append(s.size() < width ? width - s.size() : 1, ' ');
  return s;
}

void write_jsonl(const std::filesystem::path& path, const std::string& provenance,
                 const std::vector<Json>& records) {
  std::string text = Json{{"provenance", provenance.substr(2)}}.dump() + "\n";
  for (const Json& r : records) text += r.dump() + "\n";
  write_text_file(path, text);
}

}  // namespace

std::string toolkit_version() { return DIALECT_VERSION; }

// --- Data --------------------------------------------------------------------

ExperimentData load_experiment_data(const ExperimentConfig& config) {
  ExperimentData data;
  if (config.data.synthetic) {
    SyntheticData s = generate_synthetic(config.data.synth, config.seed);
    std::ostringstream blob;
    write_catalog(blob, s.catalog);
    write_corpus(blob, s.corpus);
    write_annotations(blob, *s.corpus.annotations());
    write_pairs(blob, s.pairs);
    data.hashes["synthetic"] = hex64(fnv1a64(blob.str()));
    data.catalog = std::move(s.catalog);
    data.corpus = std::move(s.corpus);
    data.pairs = std::move(s.pairs);
    return data;
  }

  const DataSource& src = config.data;
  data.catalog = load_catalog(src.catalog);
  data.hashes["catalog"] = hash_file(src.catalog);
  data.corpus = load_corpus(src.corpus);
  data.hashes["corpus"] = hash_file(src.corpus);
  if (!src.annotations.empty()) {
    data.corpus =
        data.corpus.with_annotations(load_annotations(src.annotations, data.corpus, data.catalog));
    data.hashes["annotations"] = hash_file(src.annotations);
  }
  if (!src.pairs.empty()) {
    data.pairs = load_pairs(src.pairs, data.catalog);
    data.hashes["pairs"] = hash_file(src.pairs);
  }
  if (!src.corpus_b.empty()) {
    Corpus b = load_corpus(src.corpus_b);
    data.hashes["corpus_b"] = hash_file(src.corpus_b);
    if (!src.annotations_b.empty()) {
      b = b.with_annotations(load_annotations(src.annotations_b, b, data.catalog));
      data.hashes["annotations_b"] = hash_file(src.annotations_b);
    }
    data.corpus_b = std::move(b);
  }
  return data;
}

std::pair<Corpus, Corpus> split_transcripts(const Corpus& corpus, double fraction,
                                            std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw RangeError("split fraction must lie strictly between 0 and 1");
  }
  const auto& all = corpus.transcript_ids();
  if (all.size() < 2) throw EmptyDatasetError("splitting needs at least two transcripts");

  // Split each locale separately so both halves keep the locale mix.
  std::map<std::string, std::vector<std::size_t>> by_locale;
  for (std::size_t i = 0; i < all.size(); ++i) {
    by_locale[transcript_locale(corpus, all[i])].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> first, second;
  for (auto& [locale, idx] : by_locale) {
    rng.shuffle(idx);
    auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    if (idx.size() >= 2) take = std::clamp<std::size_t>(take, 1, idx.size() - 1);
    first.insert(first.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
    second.insert(second.end(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end());
  }
  if (first.empty() || second.empty()) {
    throw EmptyDatasetError("split left one side without transcripts");
  }
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  auto ids = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::string> out;
    for (std::size_t i : idx) out.push_back(all[i]);
    return out;
  };
  return {corpus.select_transcripts(ids(first)), corpus.select_transcripts(ids(second))};
}

void run_parallel(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::future<void>> workers;
  for (std::size_t w = 0; w < std::min(jobs, n); ++w) {
    workers.push_back(std::async(std::launch::async, worker));
  }
  for (auto& f : workers) f.get();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

EvalReport evaluate_detector(const FeatureDetector& detector,
                             const MultitaskDataset& test) {
  if (test.empty()) throw EmptyDatasetError("test set is empty");
  std::map<std::string, FeatureScores> cache;
  std::vector<ScoredInstance> rows;
  rows.reserve(test.size());
  for (const LabeledInstance& inst : test.instances()) {
    auto it = cache.find(inst.text);
    if (it == cache.end()) it = cache.emplace(inst.text, detector.score(inst.text)).first;
    const auto s = it->second.find(inst.feature_id);
    if (s == it->second.end()) {
      throw UnknownFeatureError("detector does not score '" + inst.feature_id + "'");
    }
    rows.push_back({inst.feature_id, s->second, inst.y});
  }
  return auc_report(rows);
}

// --- Protocols ---------------------------------------------------------------

GridResult run_grid(const ExperimentConfig& config, const ExperimentData& data,
                    std::size_t jobs) {
  config.validate();
  const auto [train, test] =
      split_transcripts(data.corpus, config.train_fraction, mix_seed(config.seed, kSplitStream));
  const MultitaskDataset test_ds = test_set(test, data.catalog);

  // Build every training set first so data errors surface before training.
  std::map<std::string, MultitaskDataset> training;
  for (const std::string& sup : config.supervision) {
    training[sup] = sup == "corpus" ? corpus_training_set(train, data.catalog)
                                    : pair_training_set(data);
  }

  GridResult result;
  result.split = split_sizes(train, test);
  for (const std::string& sup : config.supervision) {
    for (const std::string& arch : config.architectures) {
      result.cells.push_back({sup, arch, {}, {}});
    }
  }
  const auto seeds = config.seeds();
  for (GridCell& cell : result.cells) cell.runs.resize(seeds.size());
  run_parallel(result.cells.size() * seeds.size(), jobs, [&](std::size_t task) {
    GridCell& cell = result.cells[task / seeds.size()];
    const std::size_t s = task % seeds.size();
    cell.runs[s] = train_and_evaluate(cell.architecture, training.at(cell.supervision),
                                      test_ds, config, data.catalog, seeds[s]);
  });
  for (GridCell& cell : result.cells) cell.average = seed_average(cell.runs);
  return result;
}

CurveResult run_learning_curve(const ExperimentConfig& config, const ExperimentData& data,
                               std::size_t jobs) {
  config.validate();
  const auto [train, test] =
      split_transcripts(data.corpus, config.train_fraction, mix_seed(config.seed, kSplitStream));
  const MultitaskDataset test_ds = test_set(test, data.catalog);
  const MultitaskDataset train_ds = corpus_training_set(train, data.catalog);
  const std::size_t available = train_ds.texts().size();
  for (std::size_t n : config.sizes) {
    if (n > available) {
      throw RangeError("curve size " + std::to_string(n) + " exceeds the " +
                       std::to_string(available) + " training texts");
    }
  }

  const std::size_t reps = config.repetitions;
  CurveResult result;
  result.points.resize(config.sizes.size() * reps);
  const std::uint64_t stream = mix_seed(config.seed, kSubsampleStream);
  run_parallel(result.points.size(), jobs, [&](std::size_t task) {
    const std::size_t n = config.sizes[task / reps];
    const std::size_t rep = task % reps;
    const MultitaskDataset sub = subsample(train_ds, n, mix_seed(stream, task));
    const EvalReport report =
        train_and_evaluate("multihead", sub, test_ds, config, data.catalog, config.seed);
    result.points[task] = {n, rep, report.macro_auc};
  });
  for (std::size_t i = 0; i < config.sizes.size(); ++i) {
    std::vector<double> values;
    for (std::size_t r = 0; r < reps; ++r) values.push_back(result.points[i * reps + r].macro_auc);
    result.boxes[config.sizes[i]] = box_stats(values);
  }
  return result;
}

StratifiedResult run_stratified(const ExperimentConfig& config, const ExperimentData& data,
                                std::size_t jobs) {
  config.validate();
  const auto [train, test] =
      split_transcripts(data.corpus, config.train_fraction, mix_seed(config.seed, kSplitStream));
  const MultitaskDataset test_ds = test_set(test, data.catalog);
  const MultitaskDataset pair_ds = pair_training_set(data);
  const MultitaskDataset corpus_ds = corpus_training_set(train, data.catalog);

  StratifiedResult result;
  result.target_counts = pair_ds.counts();
  std::vector<MultitaskDataset> samples;
  const std::uint64_t stream = mix_seed(config.seed, kStratifyStream);
  for (std::size_t r = 0; r < config.repetitions; ++r) {
    samples.push_back(stratified_sample(corpus_ds, result.target_counts, mix_seed(stream, r)));
  }

  const auto seeds = config.seeds();
  const std::size_t per_arch = seeds.size() + samples.size();
  std::vector<EvalReport> reports(config.architectures.size() * per_arch);
  run_parallel(reports.size(), jobs, [&](std::size_t task) {
    const std::string& arch = config.architectures[task / per_arch];
    const std::size_t k = task % per_arch;
    if (k < seeds.size()) {
      reports[task] = train_and_evaluate(arch, pair_ds, test_ds, config, data.catalog, seeds[k]);
    } else {
      reports[task] = train_and_evaluate(arch, samples[k - seeds.size()], test_ds, config,
                                         data.catalog, config.seed);
    }
  });
  for (std::size_t a = 0; a < config.architectures.size(); ++a) {
    const auto first = reports.begin() + static_cast<std::ptrdiff_t>(a * per_arch);
    const std::vector<EvalReport> pair_runs(first, first + static_cast<std::ptrdiff_t>(seeds.size()));
    const std::vector<EvalReport> strat_runs(first + static_cast<std::ptrdiff_t>(seeds.size()),
                                             first + static_cast<std::ptrdiff_t>(per_arch));
    result.arms.push_back({config.architectures[a], seed_average(pair_runs),
                           seed_average(strat_runs)});
  }
  return result;
}

namespace {

// Trains what each method needs and returns its transcript densities on each
// evaluation corpus.
struct MethodPlan {
  const ExperimentConfig& config;
  const ExperimentData& data;
  const Corpus& train;             // detector supervision
  const Corpus* docclf_positive;   // docclf training halves
  const Corpus* docclf_negative;

  std::vector<std::vector<DensityScore>> run(const std::string& method,
                                             const std::vector<const Corpus*>& eval) const {
    std::vector<std::vector<DensityScore>> out;
    const std::vector<std::string> ids = data.catalog.ids();
    if (method == "oracle") {
      for (const Corpus* c : eval) out.push_back(learned_densities(*c, oracle_scorer(*c, ids)));
    } else if (method == "regex") {
      for (const Corpus* c : eval) out.push_back(regex_densities(*c));
    } else if (method == "docclf") {
      const DocClassifier clf = train_docclf(*docclf_positive, *docclf_negative,
                                             config.encoder, with_seed(config.hp, config.seed));
      for (const Corpus* c : eval) out.push_back(docclf_densities(*c, clf));
    } else {
      const MultitaskDataset ds = config.detector_supervision == "pairs"
                                      ? pair_training_set(data)
                                      : corpus_training_set(train, data.catalog);
      const auto model = train_detector(method, ds, config, data.catalog, config.seed);
      for (const Corpus* c : eval) out.push_back(learned_densities(*c, detector_scorer(*model)));
    }
    return out;
  }
};

void separation(MethodScores& m, const std::vector<DensityScore>& pos,
                const std::vector<DensityScore>& neg) {
  const auto p = density_values(pos);
  const auto n = density_values(neg);
  try {
    m.d_prime = d_prime(PopulationStats::of(p), PopulationStats::of(n));
  } catch (const ZeroVarianceError& e) {
    m.undefined["d_prime"] = e.what();
  }
  const ThresholdResult t = balanced_threshold(p, n);
  m.accuracy = t.accuracy;
  m.threshold = t.threshold;
}

std::string resolve_positive_locale(const ExperimentConfig& config, const Corpus& corpus) {
  if (!config.positive_locale.empty()) return config.positive_locale;
  const auto locales = corpus.locales();
  if (locales.empty()) throw ConfigError("corpus has no locale labels");
  return *locales.begin();
}

}  // namespace

DensityResult run_ddm_rank(const ExperimentConfig& config, const ExperimentData& data,
                           std::size_t jobs) {
  config.validate();
  const auto [train, test] =
      split_transcripts(data.corpus, config.train_fraction, mix_seed(config.seed, kSplitStream));
  if (!test.annotations()) throw MissingAnnotationError("DDM ranking needs gold annotations");
  const std::vector<std::string> ids = data.catalog.ids();

  DensityResult result;
  result.split = split_sizes(train, test);
  result.gold = gold_densities(test, ids);
  const std::vector<double> gold = density_values(result.gold);

  const bool two_locales = test.locales().size() == 2;
  std::string positive;
  std::optional<Corpus> train_pos, train_neg, test_pos, test_neg;
  if (two_locales) {
    positive = resolve_positive_locale(config, test);
    test_pos = select_by_locale(test, positive, true);
    test_neg = select_by_locale(test, positive, false);
  }
  const bool wants_docclf = std::find(config.methods.begin(), config.methods.end(),
                                      "docclf") != config.methods.end();
  if (wants_docclf) {
    if (!two_locales) throw ConfigError("docclf needs a corpus with two locales");
    train_pos = select_by_locale(train, positive, true);
    train_neg = select_by_locale(train, positive, false);
  }

  const MethodPlan plan{config, data, train, train_pos ? &*train_pos : nullptr,
                        train_neg ? &*train_neg : nullptr};
  result.methods.resize(config.methods.size());
  run_parallel(config.methods.size(), jobs, [&](std::size_t i) {
    MethodScores& m = result.methods[i];
    m.method = config.methods[i];
    m.densities = plan.run(m.method, {&test}).front();
    try {
      m.spearman = spearman(density_values(m.densities), gold);
    } catch (const ConstantInputError& e) {
      m.undefined["r"] = e.what();
    }
    if (two_locales) {
      std::vector<DensityScore> pos, neg;
      for (const DensityScore& d : m.densities) {
        (transcript_locale(test, d.unit_id) == positive ? pos : neg).push_back(d);
      }
      separation(m, pos, neg);
    }
  });
  return result;
}

DensityResult run_dialect_classify(const ExperimentConfig& config,
                                   const ExperimentData& data, std::size_t jobs) {
  config.validate();
  Corpus a, b;
  if (data.corpus_b) {
    a = data.corpus;
    b = *data.corpus_b;
    for (const std::string& l : a.locales()) {
      if (b.locales().contains(l)) {
        throw LocaleOverlapError("locale '" + l + "' appears in both corpora");
      }
    }
  } else {
    if (data.corpus.locales().size() < 2) {
      throw ConfigError("dialect classification needs two locales");
    }
    const std::string positive = resolve_positive_locale(config, data.corpus);
    a = select_by_locale(data.corpus, positive, true);
    b = select_by_locale(data.corpus, positive, false);
    if (a.empty()) throw ConfigError("no transcripts for locale '" + positive + "'");
  }

  const std::uint64_t split_seed = mix_seed(config.seed, kLocaleSplitStream);
  const auto [a_train, a_test] = split_transcripts(a, config.train_fraction, mix_seed(split_seed, 0));
  const auto [b_train, b_test] = split_transcripts(b, config.train_fraction, mix_seed(split_seed, 1));

  std::vector<const Corpus*> annotated;
  for (const Corpus* c : {&a_train, &b_train}) {
    if (c->annotations()) annotated.push_back(c);
  }
  const Corpus detector_train = merge_corpora(annotated);

  DensityResult result;
  result.split = {a_train.transcript_ids().size() + b_train.transcript_ids().size(),
                  a_test.transcript_ids().size() + b_test.transcript_ids().size(),
                  a_train.size() + b_train.size(), a_test.size() + b_test.size()};
  if (a_test.annotations() && b_test.annotations()) {
    const std::vector<std::string> ids = data.catalog.ids();
    result.gold = gold_densities(a_test, ids);
    const auto gb = gold_densities(b_test, ids);
    result.gold.insert(result.gold.end(), gb.begin(), gb.end());
  }

  const MethodPlan plan{config, data, detector_train, &a_train, &b_train};
  result.methods.resize(config.methods.size());
  run_parallel(config.methods.size(), jobs, [&](std::size_t i) {
    MethodScores& m = result.methods[i];
    m.method = config.methods[i];
    const auto scores = plan.run(m.method, {&a_test, &b_test});
    separation(m, scores[0], scores[1]);
    m.densities = scores[0];
    m.densities.insert(m.densities.end(), scores[1].begin(), scores[1].end());
  });
  return result;
}

// --- Run directories and result tables ---------------------------------------

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string RunManifest::to_json() const {
  Json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["input_hashes"] = input_hashes;
  j["seeds"] = seeds;
  j["version"] = version;
  j["started_at"] = started_at;
  return j.dump(2) + "\n";
}

std::filesystem::path create_run_directory(const std::filesystem::path& base,
                                           std::string_view name) {
  std::filesystem::create_directories(base);
  for (int i = 1; i < 100000; ++i) {
    char suffix[8];
    std::snprintf(suffix, sizeof suffix, "%03d", i);
    const auto dir = base / (std::string(name) + "-" + suffix);
    if (std::filesystem::create_directory(dir)) return dir;
  }
  throw ArtifactError("no free run directory under " + base.string());
}

void write_run_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
  const auto path = dir / "manifest.json";
  if (std::filesystem::exists(path)) {
    throw ArtifactError(path.string() + " already exists; run directories are append-only");
  }
  write_text_file(path, manifest.to_json());
}

std::string provenance_header(const ExperimentConfig& config, const ExperimentData& data) {
  std::string out = "# config_hash=" + config.hash() + " inputs=";
  bool first = true;
  for (const auto& [name, hash] : data.hashes) {
    if (!first) out += ',';
    out += name + ":" + hash;
    first = false;
  }
  out += " seeds=";
  const auto seeds = config.seeds();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(seeds[i]);
  }
  return out;
}

std::string write_results(const std::filesystem::path& dir, const GridResult& result,
                          const std::string& provenance) {
  std::string csv = provenance + "\nsupervision,architecture,macro_auc,macro_auc_sd\n";
  std::vector<Json> records;
  for (const GridCell& c : result.cells) {
    csv += c.supervision + "," + c.architecture + "," + format_double(c.average.macro_auc) +
           "," + format_double(c.average.macro_auc_sd) + "\n";
    Json r;
    r["supervision"] = c.supervision;
    r["architecture"] = c.architecture;
    r["report"] = Json::parse(report_record(c.average));
    records.push_back(std::move(r));
  }
  write_text_file(dir / "grid.csv", csv);
  write_jsonl(dir / "reports.jsonl", provenance, records);

  // Features down, cells across.
  std::set<std::string> features;
  for (const GridCell& c : result.cells) {
    for (const auto& [id, auc] : c.average.feature_auc) features.insert(id);
  }
  std::size_t width = 10;
  for (const std::string& f : features) width = std::max(width, f.size() + 2);
  std::ostringstream out;
  out << "split: " << result.split.train_transcripts << "/" << result.split.test_transcripts
      << " transcripts, " << result.split.train_examples << "/"
      << result.split.test_examples << " examples\n";
  out << pad("feature", width);
  for (const GridCell& c : result.cells) out << pad(c.supervision + "/" + c.architecture, 18);
  out << '\n';
  for (const std::string& f : features) {
    out << pad(f, width);
    for (const GridCell& c : result.cells) {
      const auto it = c.average.feature_auc.find(f);
      out << pad(it == c.average.feature_auc.end() ? "-" : format_fixed(it->second, 3), 18);
    }
    out << '\n';
  }
  out << pad("Macro-AUC", width);
  for (const GridCell& c : result.cells) {
    out << pad(format_fixed(c.average.macro_auc, 3) + " (" +
                   format_fixed(c.average.macro_auc_sd, 3) + ")",
               18);
  }
  out << '\n';
  write_text_file(dir / "grid.txt", provenance + "\n" + out.str());
  return out.str();
}

std::string write_results(const std::filesystem::path& dir, const CurveResult& result,
                          const std::string& provenance) {
  std::string points = provenance + "\nn,repetition,macro_auc\n";
  for (const CurvePoint& p : result.points) {
    points += std::to_string(p.n) + "," + std::to_string(p.repetition) + "," +
              format_double(p.macro_auc) + "\n";
  }
  write_text_file(dir / "curve.csv", points);

  std::string box = provenance + "\nn,count,whisker_low,q1,median,q3,whisker_high\n";
  std::ostringstream out;
  out << pad("n", 8) << pad("low", 8) << pad("q1", 8) << pad("median", 8) << pad("q3", 8)
      << "high\n";
  for (const auto& [n, b] : result.boxes) {
    box += std::to_string(n) + "," + std::to_string(b.count) + "," +
           format_double(b.whisker_low) + "," + format_double(b.q1) + "," +
           format_double(b.median) + "," + format_double(b.q3) + "," +
           format_double(b.whisker_high) + "\n";
    out << pad(std::to_string(n), 8) << pad(format_fixed(b.whisker_low, 3), 8)
        << pad(format_fixed(b.q1, 3), 8) << pad(format_fixed(b.median, 3), 8)
        << pad(format_fixed(b.q3, 3), 8) << format_fixed(b.whisker_high, 3) << '\n';
  }
  write_text_file(dir / "curve_box.csv", box);
  return out.str();
}

std::string write_results(const std::filesystem::path& dir, const StratifiedResult& result,
                          const std::string& provenance) {
  std::string counts = provenance + "\nfeature_id,positives,negatives\n";
  for (const auto& [id, c] : result.target_counts) {
    counts += id + "," + std::to_string(c.positives) + "," + std::to_string(c.negatives) + "\n";
  }
  write_text_file(dir / "target_counts.csv", counts);

  std::string csv = provenance + "\narchitecture,condition,macro_auc,macro_auc_sd,runs\n";
  std::vector<Json> records;
  std::ostringstream out;
  out << pad("architecture", 14) << pad("condition", 12) << "macro-AUC (sd)\n";
  for (const StratifiedArm& arm : result.arms) {
    for (const auto& [name, report] :
         {std::pair{"pairs", &arm.pairs}, std::pair{"stratified", &arm.stratified}}) {
      csv += arm.architecture + "," + name + "," + format_double(report->macro_auc) + "," +
             format_double(report->macro_auc_sd) + "," +
             std::to_string(report->run_macro_auc.size()) + "\n";
      Json r;
      r["architecture"] = arm.architecture;
      r["condition"] = name;
      r["report"] = Json::parse(report_record(*report));
      records.push_back(std::move(r));
      out << pad(arm.architecture, 14) << pad(name, 12) << format_fixed(report->macro_auc, 3)
          << " (" << format_fixed(report->macro_auc_sd, 3) << ")\n";
    }
  }
  write_text_file(dir / "stratified.csv", csv);
  write_jsonl(dir / "reports.jsonl", provenance, records);
  return out.str();
}

std::string write_results(const std::filesystem::path& dir, const DensityResult& result,
                          const std::string& provenance) {
  std::string csv = provenance + "\nmethod,r,d_prime,accuracy,threshold\n";
  std::ostringstream out;
  out << pad("method", 12) << pad("r", 8) << pad("D'", 8) << "acc\n";
  for (const MethodScores& m : result.methods) {
    csv += m.method + "," + opt_exact(m.spearman) + "," + opt_exact(m.d_prime) + "," +
           opt_exact(m.accuracy) + "," + opt_exact(m.threshold) + "\n";
    out << pad(m.method, 12) << pad(opt(m.spearman), 8) << pad(opt(m.d_prime), 8)
        << opt(m.accuracy) << '\n';
    for (const auto& [stat, reason] : m.undefined) {
      out << "  " << m.method << ": " << stat << " undefined (" << reason << ")\n";
    }
  }
  write_text_file(dir / "ddm.csv", csv);

  std::vector<Json> records;
  auto add = [&](const std::string& source, const std::vector<DensityScore>& scores) {
    for (const DensityScore& s : scores) {
      Json r;
      r["source"] = source;
      r["unit_id"] = s.unit_id;
      r["method"] = to_string(s.method);
      r["density"] = s.density;
      r["token_count"] = s.token_count;
      records.push_back(std::move(r));
    }
  };
  add("gold", result.gold);
  for (const MethodScores& m : result.methods) add(m.method, m.densities);
  write_jsonl(dir / "densities.jsonl", provenance, records);
  return out.str();
}

ExperimentRun run_experiment(const ExperimentConfig& config,
                             const std::filesystem::path& out_base, std::size_t jobs,
                             const std::string& command) {
  config.validate();
  if (!config.kind) throw ConfigError("experiment kind is not set");
  const ExperimentData data = load_experiment_data(config);

  ExperimentRun run;
  run.directory = create_run_directory(out_base, to_string(*config.kind));
  RunManifest manifest;
  manifest.command = command;
  manifest.config_hash = config.hash();
  manifest.input_hashes = data.hashes;
  manifest.seeds = config.seeds();
  manifest.started_at = utc_timestamp();
  write_run_manifest(run.directory, manifest);
  write_text_file(run.directory / "config.txt", config.canonical());

  const std::string provenance = provenance_header(config, data);
  switch (*config.kind) {
    case ExperimentKind::grid:
      run.summary = write_results(run.directory, run_grid(config, data, jobs), provenance);
      break;
    case ExperimentKind::learning_curve:
      run.summary =
          write_results(run.directory, run_learning_curve(config, data, jobs), provenance);
      break;
    case ExperimentKind::stratified:
      run.summary = write_results(run.directory, run_stratified(config, data, jobs), provenance);
      break;
    case ExperimentKind::ddm_rank:
      run.summary = write_results(run.directory, run_ddm_rank(config, data, jobs), provenance);
      break;
    case ExperimentKind::dialect_classify:
      run.summary =
          write_results(run.directory, run_dialect_classify(config, data, jobs), provenance);
      break;
  }
  return run;
}

}  // namespace dialect
