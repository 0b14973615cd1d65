#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dialect/corpus.hpp"

namespace dialect {

// One binary training row: does feature_id apply to text?
struct LabeledInstance {
  std::string text;
  std::string feature_id;
  std::uint8_t y = 0;

  friend bool operator==(const LabeledInstance&, const LabeledInstance&) = default;
};

enum class Provenance { pairs, corpus, stratified, subsample };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view name);

struct ClassCounts {
  std::size_t positives = 0;
  std::size_t negatives = 0;

  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

// Flat multitask training data. No (text, feature_id) pair repeats, and the
// per-feature counts always agree with the instances.
class MultitaskDataset {
 public:
  MultitaskDataset() = default;
  MultitaskDataset(std::vector<LabeledInstance> instances, Provenance provenance);

  std::span<const LabeledInstance> instances() const noexcept { return instances_; }
  Provenance provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return instances_.size(); }
  bool empty() const noexcept { return instances_.empty(); }

  const std::map<std::string, ClassCounts>& counts() const noexcept { return counts_; }
  // Feature ids in order of first appearance.
  const std::vector<std::string>& features() const noexcept { return features_; }
  // Distinct texts in order of first appearance.
  std::vector<std::string> texts() const;

 private:
  std::vector<LabeledInstance> instances_;
  Provenance provenance_ = Provenance::corpus;
  std::map<std::string, ClassCounts> counts_;
  std::vector<std::string> features_;
};

// Each unique variant text becomes one instance per catalog feature. Its label
// is 1 for the feature it exemplifies (as a positive variant) and for every
// feature flagged in cross_feature_presence; 0 otherwise.
MultitaskDataset expand_pairs(const MinimalPairSet& pairs,
                              const FeatureCatalog& catalog);

// One instance per annotated (example, feature). Repeated texts keep their
// first occurrence.
MultitaskDataset corpus_dataset(const Corpus& corpus,
                                std::span<const std::string> feature_ids);

// Exact per-feature positive and negative counts, sampled without
// replacement.
MultitaskDataset stratified_sample(const MultitaskDataset& source,
                                   const std::map<std::string, ClassCounts>& target,
                                   std::uint64_t seed);

// n distinct texts chosen uniformly, each keeping all its instances.
MultitaskDataset subsample(const MultitaskDataset& source, std::size_t n,
                           std::uint64_t seed);

// Line-delimited (y, feature_id, text) records.
void write_instances(std::ostream& out, const MultitaskDataset& dataset);
MultitaskDataset parse_instances(std::istream& in, Provenance provenance);

}  // namespace dialect
