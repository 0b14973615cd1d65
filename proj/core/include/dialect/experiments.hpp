#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dialect/corpus.hpp"
#include "dialect/density.hpp"
#include "dialect/encoder.hpp"
#include "dialect/metrics.hpp"
#include "dialect/pairgen.hpp"
#include "dialect/recognizers.hpp"

namespace dialect {

std::string toolkit_version();

enum class ExperimentKind { grid, learning_curve, stratified, ddm_rank, dialect_classify };

std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view name);

// Where experiment data comes from. Either the synthetic generator or files.
struct DataSource {
  bool synthetic = true;
  SynthConfig synth;
  std::filesystem::path catalog;
  std::filesystem::path corpus;
  std::filesystem::path annotations;
  std::filesystem::path pairs;
  // Second corpus for dialect classification. When empty, the main corpus is
  // split by locale.
  std::filesystem::path corpus_b;
  std::filesystem::path annotations_b;
};

// Parsed from "key = value" lines; '#' starts a comment. See configs/.
struct ExperimentConfig {
  std::optional<ExperimentKind> kind;
  DataSource data;
  EncoderSpec encoder;
  HyperParams hp;
  std::uint64_t seed = 0;
  std::size_t seed_count = 5;
  std::vector<std::size_t> sizes;      // learning curve
  std::size_t repetitions = 10;        // learning curve and stratified
  double train_fraction = 0.5;         // transcript-level split
  std::vector<std::string> supervision{"corpus", "pairs"};
  std::vector<std::string> architectures{"multihead", "daml"};
  // ddm_rank and dialect_classify: any of oracle, regex, multihead, daml, docclf.
  std::vector<std::string> methods{"oracle", "multihead", "docclf"};
  // Supervision for feature detectors in dialect classification.
  std::string detector_supervision = "corpus";
  std::string positive_locale;  // defaults to the synthetic locale_a
  PrefixPolicy prefix_policy = PrefixPolicy::name;

  // Throws ConfigError on inconsistent settings.
  void validate() const;
  // Seeds seed, seed + 1, ..., seed + seed_count - 1.
  std::vector<std::uint64_t> seeds() const;
  // Normalized key = value text; its hash identifies the configuration.
  std::string canonical() const;
  std::string hash() const;
};

// Relative paths resolve against base_dir.
ExperimentConfig parse_experiment_config(std::istream& in,
                                         const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct ExperimentData {
  FeatureCatalog catalog;
  Corpus corpus;           // may carry annotations
  MinimalPairSet pairs;
  std::optional<Corpus> corpus_b;
  std::map<std::string, std::string> hashes;  // input name -> content hash
};

ExperimentData load_experiment_data(const ExperimentConfig& config);

// Splits whole transcripts; the first part has round(fraction * T) of them.
std::pair<Corpus, Corpus> split_transcripts(const Corpus& corpus, double fraction,
                                            std::uint64_t seed);

// Runs fn(0) .. fn(n - 1) with up to jobs concurrent workers. Results keep
// index order whatever the completion order.
void run_parallel(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn);

struct SplitSizes {
  std::size_t train_transcripts = 0;
  std::size_t test_transcripts = 0;
  std::size_t train_examples = 0;
  std::size_t test_examples = 0;
};

struct GridCell {
  std::string supervision;
  std::string architecture;
  std::vector<EvalReport> runs;  // one per seed
  EvalReport average;
};

struct GridResult {
  SplitSizes split;
  std::vector<GridCell> cells;
};

struct CurvePoint {
  std::size_t n = 0;
  std::size_t repetition = 0;
  double macro_auc = 0.0;
};

struct CurveResult {
  std::vector<CurvePoint> points;
  std::map<std::size_t, BoxStats> boxes;
};

struct StratifiedArm {
  std::string architecture;
  EvalReport pairs;       // averaged over seeds
  EvalReport stratified;  // averaged over repetitions
};

struct StratifiedResult {
  std::map<std::string, ClassCounts> target_counts;
  std::vector<StratifiedArm> arms;
};

struct MethodScores {
  std::string method;
  std::optional<double> spearman;
  std::optional<double> d_prime;
  std::optional<double> accuracy;
  std::optional<double> threshold;
  // Statistics left unset because the densities make them undefined
  // (e.g. constant scores); statistic -> reason.
  std::map<std::string, std::string> undefined;
  std::vector<DensityScore> densities;
};

struct DensityResult {
  SplitSizes split;
  std::vector<DensityScore> gold;
  std::vector<MethodScores> methods;
};

// Held-out evaluation of a feature detector over every annotated
// (text, feature) in the test dataset.
EvalReport evaluate_detector(const FeatureDetector& detector,
                             const MultitaskDataset& test);

GridResult run_grid(const ExperimentConfig& config, const ExperimentData& data,
                    std::size_t jobs = 1);
CurveResult run_learning_curve(const ExperimentConfig& config,
                               const ExperimentData& data, std::size_t jobs = 1);
StratifiedResult run_stratified(const ExperimentConfig& config,
                                const ExperimentData& data, std::size_t jobs = 1);
DensityResult run_ddm_rank(const ExperimentConfig& config, const ExperimentData& data,
                           std::size_t jobs = 1);
DensityResult run_dialect_classify(const ExperimentConfig& config,
                                   const ExperimentData& data, std::size_t jobs = 1);

// Written into a run directory before any result file.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::map<std::string, std::string> input_hashes;
  std::vector<std::uint64_t> seeds;
  std::string version = toolkit_version();
  std::string started_at;  // UTC, ISO 8601

  std::string to_json() const;
};

std::string utc_timestamp();

// Creates base/<name>-NNN with the next unused NNN.
std::filesystem::path create_run_directory(const std::filesystem::path& base,
                                           std::string_view name);
// Fails with ArtifactError if the manifest already exists.
void write_run_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

// "# config_hash=... inputs=name:hash,... seeds=..." for result tables.
std::string provenance_header(const ExperimentConfig& config, const ExperimentData& data);

// Each writes its result tables into dir and returns the human summary.
std::string write_results(const std::filesystem::path& dir, const GridResult& result,
                          const std::string& provenance);
std::string write_results(const std::filesystem::path& dir, const CurveResult& result,
                          const std::string& provenance);
std::string write_results(const std::filesystem::path& dir,
                          const StratifiedResult& result, const std::string& provenance);
std::string write_results(const std::filesystem::path& dir, const DensityResult& result,
                          const std::string& provenance);

struct ExperimentRun {
  std::filesystem::path directory;
  std::string summary;
};

// Loads data, creates a run directory under out_base, writes the manifest,
// runs the experiment, and writes its tables.
ExperimentRun run_experiment(const ExperimentConfig& config,
                             const std::filesystem::path& out_base, std::size_t jobs,
                             const std::string& command);

}  // namespace dialect
