#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dialect/corpus.hpp"
#include "dialect/encoder.hpp"
#include "dialect/pairgen.hpp"

namespace dialect {

// feature_id -> detection score in [0, 1] for one text.
using FeatureScores = std::map<std::string, double>;

struct HyperParams {
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  // Throws HyperParamError unless batch >= 1, epochs >= 1, and lr > 0.
  void validate() const;

  // 1e-3 for the tiny encoder; 1e-5 for external (pretrained) encoders.
  static HyperParams defaults_for(EncoderKind kind);
};

class Adam {
 public:
  explicit Adam(const HyperParams& hp) : hp_(hp) {}
  // params[i] is updated from grads[i]; moment buffers are created lazily.
  void step(std::span<ParameterSet* const> params,
            std::span<const ParameterSet* const> grads);
  std::size_t steps() const noexcept { return t_; }

 private:
  HyperParams hp_;
  std::vector<ParameterSet> m_;
  std::vector<ParameterSet> v_;
  std::size_t t_ = 0;
};

// One encoder input and the (head index, label) targets it supervises.
struct TrainingItem {
  EncodedInput input;
  std::vector<std::pair<std::size_t, double>> targets;
};

struct TrainingTrace {
  std::vector<double> epoch_loss;  // mean binary cross-entropy per epoch
};

// Linear heads over the summary vector: block 0 is K x d weights, block 1 is
// K x 1 biases.
ParameterSet make_heads(std::size_t count, std::size_t dimension,
                        std::uint64_t seed);

// Mini-batch Adam on sigmoid(w_k . h + b_k) with binary cross-entropy,
// updating the encoder and heads jointly. Item order is reshuffled each epoch
// from hp.seed.
TrainingTrace fit(SequenceEncoder& encoder, ParameterSet& heads,
                  std::span<const TrainingItem> items, const HyperParams& hp);

// Mean loss over all targets at the current parameters (no update).
double evaluate_loss(const SequenceEncoder& encoder, const ParameterSet& heads,
                     std::span<const TrainingItem> items);

// Gradient of the mean loss over items; used by gradient checks.
void accumulate_gradients(const SequenceEncoder& encoder, const ParameterSet& heads,
                          std::span<const TrainingItem> items,
                          ParameterSet& encoder_grads, ParameterSet& head_grads);

double sigmoid(double z);

class FeatureDetector {
 public:
  virtual ~FeatureDetector() = default;
  virtual FeatureScores score(std::string_view text) const = 0;
  virtual std::vector<std::string> feature_ids() const = 0;
};

// Shared encoder plus one linear head per feature.
class MultiheadModel final : public FeatureDetector {
 public:
  MultiheadModel(std::unique_ptr<SequenceEncoder> encoder,
                 std::vector<std::string> features, ParameterSet heads,
                 HyperParams hp, TrainingTrace trace);

  FeatureScores score(std::string_view text) const override;
  // Throws UnknownFeatureError for features without a trained head.
  FeatureScores score(std::string_view text,
                      std::span<const std::string> features) const;
  std::vector<std::string> feature_ids() const override { return features_; }

  const SequenceEncoder& encoder() const { return *encoder_; }
  ParameterSet& heads() { return heads_; }
  const ParameterSet& heads() const { return heads_; }
  std::size_t parameter_count() const;
  const HyperParams& hyperparams() const { return hp_; }
  const TrainingTrace& trace() const { return trace_; }

  void save(const std::filesystem::path& dir) const;
  static MultiheadModel load(const std::filesystem::path& dir);

 private:
  std::unique_ptr<SequenceEncoder> encoder_;
  std::vector<std::string> features_;
  std::map<std::string, std::size_t, std::less<>> head_index_;
  ParameterSet heads_;
  HyperParams hp_;
  TrainingTrace trace_;
};

enum class PrefixPolicy { name, name_description };

std::string_view to_string(PrefixPolicy policy);
PrefixPolicy prefix_policy_from_string(std::string_view name);
std::string feature_prefix(const Feature& feature, PrefixPolicy policy);

// Description-aware model: the feature text is prepended to the input and a
// single head scores applicability.
class DamlModel final : public FeatureDetector {
 public:
  DamlModel(std::unique_ptr<SequenceEncoder> encoder, ParameterSet head,
            FeatureCatalog catalog, PrefixPolicy policy, HyperParams hp,
            TrainingTrace trace);

  // Any feature text works here, including features never seen in training.
  double score(std::string_view text, std::string_view feature_text) const;
  FeatureScores score(std::string_view text) const override;
  FeatureScores score(std::string_view text, std::span<const Feature> features) const;
  std::vector<std::string> feature_ids() const override { return catalog_.ids(); }

  const SequenceEncoder& encoder() const { return *encoder_; }
  const FeatureCatalog& catalog() const { return catalog_; }
  PrefixPolicy prefix_policy() const { return policy_; }
  std::size_t parameter_count() const;
  const HyperParams& hyperparams() const { return hp_; }
  const TrainingTrace& trace() const { return trace_; }

  void save(const std::filesystem::path& dir) const;
  static DamlModel load(const std::filesystem::path& dir);

 private:
  std::unique_ptr<SequenceEncoder> encoder_;
  ParameterSet head_;
  FeatureCatalog catalog_;
  PrefixPolicy policy_;
  HyperParams hp_;
  TrainingTrace trace_;
};

// Binary locale classifier over whole texts.
class DocClassifier {
 public:
  DocClassifier(std::unique_ptr<SequenceEncoder> encoder, ParameterSet head,
                std::string positive_locale, std::string negative_locale,
                HyperParams hp, TrainingTrace trace);

  // Probability that text belongs to positive_locale().
  double probability(std::string_view text) const;
  const std::string& positive_locale() const { return positive_locale_; }
  const std::string& negative_locale() const { return negative_locale_; }
  const SequenceEncoder& encoder() const { return *encoder_; }
  const TrainingTrace& trace() const { return trace_; }

  void save(const std::filesystem::path& dir) const;
  static DocClassifier load(const std::filesystem::path& dir);

 private:
  std::unique_ptr<SequenceEncoder> encoder_;
  ParameterSet head_;
  std::string positive_locale_;
  std::string negative_locale_;
  HyperParams hp_;
  TrainingTrace trace_;
};

// Throws EmptyDatasetError on empty data and HyperParamError on bad settings.
MultiheadModel train_multihead(const MultitaskDataset& dataset,
                               const EncoderSpec& spec, const HyperParams& hp);
DamlModel train_daml(const MultitaskDataset& dataset, const FeatureCatalog& catalog,
                     const EncoderSpec& spec, const HyperParams& hp,
                     PrefixPolicy policy = PrefixPolicy::name);
// Utterances of corpus_a are the positive class. The corpora must carry
// disjoint locale labels (LocaleOverlapError otherwise).
DocClassifier train_docclf(const Corpus& corpus_a, const Corpus& corpus_b,
                           const EncoderSpec& spec, const HyperParams& hp);

FeatureScores score_features(const MultiheadModel& model, std::string_view text,
                             std::span<const std::string> features);
FeatureScores score_features(const DamlModel& model, std::string_view text,
                             std::span<const Feature> features);

// Loads a saved multihead or DAML model, dispatching on its manifest.
std::unique_ptr<FeatureDetector> load_detector(const std::filesystem::path& dir);
std::string model_architecture(const std::filesystem::path& dir);

// --- Regular-expression detectors -------------------------------------------

struct RegexRule {
  std::string feature_id;
  std::string feature_name;
  std::string pattern;
};

// The five surface patterns, matched case-insensitively on raw text.
std::span<const RegexRule> regex_rules();

struct RegexMatch {
  std::string feature_id;
  std::size_t count = 0;
  bool present = false;
};

std::vector<RegexMatch> regex_detect(std::string_view text);
std::size_t regex_match_total(std::string_view text);

class RegexDetector final : public FeatureDetector {
 public:
  // Binary scores: 1 when the pattern matches at least once.
  FeatureScores score(std::string_view text) const override;
  std::vector<std::string> feature_ids() const override;
};

}  // namespace dialect
