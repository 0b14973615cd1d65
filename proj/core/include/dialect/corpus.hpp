#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dialect {

// Lowercases ASCII, splits on whitespace, and strips leading and trailing
// punctuation from each token. Internal apostrophes survive ("isn't").
// Tokens that are pure punctuation are dropped.
std::vector<std::string> tokenize(std::string_view text);

struct Feature {
  std::string id;
  std::string name;
  std::string description;
  std::vector<std::string> canonical_examples;

  friend bool operator==(const Feature&, const Feature&) = default;
};

// Ordered inventory of features. Ids are unique and names non-empty.
class FeatureCatalog {
 public:
  FeatureCatalog() = default;
  explicit FeatureCatalog(std::vector<Feature> features);

  std::size_t size() const noexcept { return features_.size(); }
  bool empty() const noexcept { return features_.empty(); }
  bool contains(std::string_view id) const;
  // Throws ReferenceError for unknown ids.
  const Feature& at(std::string_view id) const;
  std::span<const Feature> features() const noexcept { return features_; }
  std::vector<std::string> ids() const;

  friend bool operator==(const FeatureCatalog& a, const FeatureCatalog& b) {
    return a.features_ == b.features_;
  }

 private:
  std::vector<Feature> features_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

struct Example {
  std::string example_id;
  std::string text;
  std::vector<std::string> tokens;
  std::string transcript_id;
  std::optional<std::string> locale;

  // Builds an example whose tokens are tokenize(text).
  static Example make(std::string example_id, std::string text,
                      std::string transcript_id,
                      std::optional<std::string> locale = std::nullopt);

  friend bool operator==(const Example&, const Example&) = default;
};

enum class Label : std::uint8_t { absent = 0, present = 1 };

// (example_id, feature_id) -> label, at most one label per pair.
class AnnotationSet {
 public:
  using Key = std::pair<std::string, std::string>;

  // Throws DuplicateIdError if the pair is already labeled.
  void add(std::string example_id, std::string feature_id, Label label);

  std::optional<Label> find(std::string_view example_id,
                            std::string_view feature_id) const;
  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  bool has_feature(std::string_view feature_id) const;
  const std::map<Key, Label>& entries() const noexcept { return labels_; }

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;

 private:
  std::map<Key, Label> labels_;
  std::map<std::string, std::size_t, std::less<>> per_feature_;
};

// Utterances grouped into transcripts, optionally with gold annotations.
// Immutable once constructed.
class Corpus {
 public:
  Corpus() = default;
  // Throws DuplicateIdError on repeated example ids and ReferenceError when
  // annotations name examples outside the corpus.
  explicit Corpus(std::vector<Example> examples,
                  std::optional<AnnotationSet> annotations = std::nullopt);

  std::span<const Example> examples() const noexcept { return examples_; }
  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }
  bool contains(std::string_view example_id) const;
  const Example& at(std::string_view example_id) const;

  // Transcript ids in order of first appearance.
  const std::vector<std::string>& transcript_ids() const noexcept {
    return transcript_order_;
  }
  // Indices into examples() for one transcript.
  std::span<const std::size_t> transcript(std::string_view transcript_id) const;

  const std::optional<AnnotationSet>& annotations() const noexcept {
    return annotations_;
  }
  std::set<std::string> locales() const;

  Corpus with_annotations(AnnotationSet annotations) const;
  // Keeps whole transcripts (and their annotations) in the given order.
  Corpus select_transcripts(std::span<const std::string> transcript_ids) const;

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.examples_ == b.examples_ && a.annotations_ == b.annotations_;
  }

 private:
  std::vector<Example> examples_;
  std::optional<AnnotationSet> annotations_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<std::string> transcript_order_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> transcripts_;
};

struct MinimalPair {
  std::string feature_id;
  std::vector<std::string> positive_variants;
  std::vector<std::string> negative_variants;
  // variant text -> other features present in that variant.
  std::map<std::string, std::set<std::string>> cross_feature_presence;

  friend bool operator==(const MinimalPair&, const MinimalPair&) = default;
};

using MinimalPairSet = std::vector<MinimalPair>;

// Checks the pair invariants; unknown feature ids raise ReferenceError.
void validate_pair(const MinimalPair& pair, const FeatureCatalog& catalog,
                   std::size_t line = 0);

// Line-delimited JSON ingestion. Every invariant is enforced at load time.
FeatureCatalog parse_catalog(std::istream& in);
Corpus parse_corpus(std::istream& in);
AnnotationSet parse_annotations(std::istream& in, const Corpus& corpus,
                                const FeatureCatalog& catalog);
MinimalPairSet parse_pairs(std::istream& in, const FeatureCatalog& catalog);

FeatureCatalog load_catalog(const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);
AnnotationSet load_annotations(const std::filesystem::path& path,
                               const Corpus& corpus,
                               const FeatureCatalog& catalog);
MinimalPairSet load_pairs(const std::filesystem::path& path,
                          const FeatureCatalog& catalog);

void write_catalog(std::ostream& out, const FeatureCatalog& catalog);
void write_corpus(std::ostream& out, const Corpus& corpus);
void write_annotations(std::ostream& out, const AnnotationSet& annotations);
void write_pairs(std::ostream& out, const MinimalPairSet& pairs);

// Surface rules used by the synthetic generator.
enum class RuleKind { insertion, substitution, deletion };

struct SynthConfig {
  std::size_t num_features = 8;
  std::size_t vocabulary_size = 200;
  std::size_t examples_per_transcript = 10;
  std::size_t transcripts_per_locale = 25;
  std::size_t min_words = 5;
  std::size_t max_words = 12;
  // Per-feature firing rates for each locale; a single value broadcasts.
  std::vector<double> rate_a{0.3};
  std::vector<double> rate_b{0.05};
  std::string locale_a = "IN";
  std::string locale_b = "US";
  std::size_t pairs_per_feature = 5;
  // Each transcript scales its rates by a factor drawn from [1-v, 1+v].
  double transcript_variation = 0.0;
  // When feature 2j fires, feature 2j+1 is forced on with this probability
  // (and vice versa), making partner features redundant in corpus data.
  double cooccurrence = 0.0;

  // Throws ConfigError for rates outside [0, 1], zero features, and similar.
  void validate() const;
  double rate(std::size_t locale_index, std::size_t feature) const;
};

struct SyntheticData {
  Corpus corpus;  // carries the gold annotation set
  FeatureCatalog catalog;
  MinimalPairSet pairs;
};

// Builds a reproducible two-locale corpus where each feature is realized by a
// deterministic surface rule, plus minimal pairs built from clean templates.
SyntheticData generate_synthetic(const SynthConfig& config, std::uint64_t seed);

RuleKind synthetic_rule_kind(std::size_t feature);
std::string synthetic_feature_id(std::size_t feature);

// Re-applies the surface rules to a synthetic text: the returned indices are
// exactly the features whose rule fired when the text was generated.
std::set<std::size_t> synthetic_features_in(std::string_view text,
                                            std::size_t num_features);

}  // namespace dialect
