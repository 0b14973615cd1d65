#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dialect/corpus.hpp"
#include "dialect/recognizers.hpp"

namespace dialect {

enum class DensityMethod { learned, regex, docclf, gold };

std::string_view to_string(DensityMethod method);
DensityMethod density_method_from_string(std::string_view name);

// Features per token for one utterance or transcript.
struct DensityScore {
  std::string unit_id;
  DensityMethod method = DensityMethod::learned;
  double density = 0.0;
  std::size_t token_count = 0;
};

// Sum of detection probabilities divided by token_count. Not thresholded.
double utterance_density_learned(const FeatureScores& scores, std::size_t token_count);
// Total regex matches divided by the number of tokens in text.
double utterance_density_regex(std::string_view text);

// Feature mass and token count of one utterance.
struct UtteranceMass {
  double mass = 0.0;
  std::size_t tokens = 0;
};

// Token-weighted pooling: sum of mass over sum of tokens.
DensityScore transcript_density(std::string unit_id, DensityMethod method,
                                std::span<const UtteranceMass> utterances);

// Scores one corpus example; lets trained models, regexes, and gold labels
// share the aggregation code.
using ScoreFn = std::function<FeatureScores(const Example&)>;

ScoreFn detector_scorer(const FeatureDetector& detector);
// Scores are the gold 0/1 labels. Throws MissingAnnotationError when a label
// is missing.
ScoreFn oracle_scorer(const Corpus& corpus, std::vector<std::string> feature_ids);

// One learned (or oracle) density per transcript, in transcript order.
std::vector<DensityScore> learned_densities(const Corpus& corpus, const ScoreFn& score);
std::vector<DensityScore> regex_densities(const Corpus& corpus);
// The classifier's probability over each transcript's concatenated text,
// truncated to the encoder's max length.
std::vector<DensityScore> docclf_densities(const Corpus& corpus,
                                           const DocClassifier& classifier);

// Present labels over total tokens for one transcript.
double gold_density(const Corpus& corpus, std::string_view transcript_id,
                    std::span<const std::string> feature_ids);
std::vector<DensityScore> gold_densities(const Corpus& corpus,
                                         std::span<const std::string> feature_ids);

// Line-delimited (unit_id, method, density, token_count).
void write_densities(std::ostream& out, std::span<const DensityScore> scores);
std::vector<DensityScore> parse_densities(std::istream& in);

}  // namespace dialect
