#include "dialect/pairgen.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "dialect/error.hpp"
#include "dialect/rng.hpp"
#include "json.hpp"

namespace dialect {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::pairs:
      return "pairs";
    case Provenance::corpus:
      return "corpus";
    case Provenance::stratified:
      return "stratified";
    case Provenance::subsample:
      return "subsample";
  }
  return "corpus";
}

Provenance provenance_from_string(std::string_view name) {
  if (name == "pairs") return Provenance::pairs;
  if (name == "corpus") return Provenance::corpus;
  if (name == "stratified") return Provenance::stratified;
  if (name == "subsample") return Provenance::subsample;
  throw ConfigError("unknown provenance '" + std::string(name) + "'");
}

MultitaskDataset::MultitaskDataset(std::vector<LabeledInstance> instances,
                                   Provenance provenance)
    : instances_(std::move(instances)), provenance_(provenance) {
  std::set<std::pair<std::string_view, std::string_view>> seen;
  for (const LabeledInstance& inst : instances_) {
    if (inst.y > 1) throw SchemaError("instance label must be 0 or 1");
    if (!seen.emplace(inst.text, inst.feature_id).second) {
      throw DuplicateIdError("duplicate instance for feature '" +
                             inst.feature_id + "' and text '" + inst.text + "'");
    }
    auto [it, fresh] = counts_.try_emplace(inst.feature_id);
    if (fresh) features_.push_back(inst.feature_id);
    if (inst.y) {
      ++it->second.positives;
    } else {
      ++it->second.negatives;
    }
  }
}

std::vector<std::string> MultitaskDataset::texts() const {
  std::vector<std::string> out;
  std::unordered_set<std::string_view> seen;
  for (const LabeledInstance& inst : instances_) {
    if (seen.insert(inst.text).second) out.push_back(inst.text);
  }
  return out;
}

MultitaskDataset expand_pairs(const MinimalPairSet& pairs,
                              const FeatureCatalog& catalog) {
  std::vector<std::string> texts;
  // text -> (feature -> label), collecting both explicit and implied labels.
  std::unordered_map<std::string, std::map<std::string, std::uint8_t>> explicit_labels;
  auto note = [&](const std::string& text) -> std::map<std::string, std::uint8_t>& {
    auto [it, fresh] = explicit_labels.try_emplace(text);
    if (fresh) texts.push_back(text);
    return it->second;
  };
  auto assign = [](std::map<std::string, std::uint8_t>& labels,
                   const std::string& feature, std::uint8_t y,
                   const std::string& text) {
    auto [it, fresh] = labels.emplace(feature, y);
    if (!fresh && it->second != y) {
      throw SchemaError("conflicting labels for feature '" + feature +
                        "' on text '" + text + "'");
    }
  };

  for (const MinimalPair& pair : pairs) {
    validate_pair(pair, catalog);
    for (const std::string& text : pair.positive_variants) {
      assign(note(text), pair.feature_id, 1, text);
    }
    for (const std::string& text : pair.negative_variants) {
      assign(note(text), pair.feature_id, 0, text);
    }
    for (const auto& [text, features] : pair.cross_feature_presence) {
      auto& labels = note(text);
      for (const std::string& f : features) assign(labels, f, 1, text);
    }
  }

  std::vector<LabeledInstance> instances;
  instances.reserve(texts.size() * catalog.size());
  for (const Feature& feature : catalog.features()) {
    for (const std::string& text : texts) {
      const auto& labels = explicit_labels.at(text);
      auto it = labels.find(feature.id);
      const std::uint8_t y = it == labels.end() ? 0 : it->second;
      instances.push_back({text, feature.id, y});
    }
  }
  return MultitaskDataset(std::move(instances), Provenance::pairs);
}

MultitaskDataset corpus_dataset(const Corpus& corpus,
                                std::span<const std::string> feature_ids) {
  if (!corpus.annotations()) {
    throw MissingAnnotationError("corpus has no annotations");
  }
  const AnnotationSet& gold = *corpus.annotations();
  std::vector<LabeledInstance> instances;
  for (const std::string& feature : feature_ids) {
    if (!gold.has_feature(feature)) {
      throw MissingAnnotationError("no annotations for feature '" + feature + "'");
    }
    std::unordered_set<std::string_view> seen;
    for (const Example& e : corpus.examples()) {
      auto label = gold.find(e.example_id, feature);
      if (!label || !seen.insert(e.text).second) continue;
      instances.push_back(
          {e.text, feature, static_cast<std::uint8_t>(*label == Label::present)});
    }
  }
  return MultitaskDataset(std::move(instances), Provenance::corpus);
}

MultitaskDataset stratified_sample(const MultitaskDataset& source,
                                   const std::map<std::string, ClassCounts>& target,
                                   std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> positives;
  std::map<std::string, std::vector<std::size_t>> negatives;
  const auto instances = source.instances();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    auto& bucket = instances[i].y ? positives : negatives;
    bucket[instances[i].feature_id].push_back(i);
  }

  // Check every feature before sampling anything.
  for (const auto& [feature, want] : target) {
    const std::size_t have_pos = positives[feature].size();
    const std::size_t have_neg = negatives[feature].size();
    if (have_pos < want.positives) {
      throw InsufficientDataError(feature, "positive", want.positives - have_pos);
    }
    if (have_neg < want.negatives) {
      throw InsufficientDataError(feature, "negative", want.negatives - have_neg);
    }
  }

  Rng rng(seed);
  std::vector<std::size_t> chosen;
  for (const auto& [feature, want] : target) {
    for (auto [pool, k] : {std::pair{&positives[feature], want.positives},
                           std::pair{&negatives[feature], want.negatives}}) {
      for (std::size_t j : rng.choose(pool->size(), k)) {
        chosen.push_back((*pool)[j]);
      }
    }
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<LabeledInstance> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(instances[i]);
  return MultitaskDataset(std::move(out), Provenance::stratified);
}

MultitaskDataset subsample(const MultitaskDataset& source, std::size_t n,
                           std::uint64_t seed) {
  const std::vector<std::string> texts = source.texts();
  if (n > texts.size()) {
    throw RangeError("subsample size " + std::to_string(n) + " exceeds the " +
                     std::to_string(texts.size()) + " available texts");
  }
  Rng rng(seed);
  std::unordered_set<std::string_view> keep;
  for (std::size_t i : rng.choose(texts.size(), n)) keep.insert(texts[i]);
  std::vector<LabeledInstance> out;
  for (const LabeledInstance& inst : source.instances()) {
    if (keep.count(inst.text)) out.push_back(inst);
  }
  return MultitaskDataset(std::move(out), Provenance::subsample);
}

void write_instances(std::ostream& out, const MultitaskDataset& dataset) {
  for (const LabeledInstance& inst : dataset.instances()) {
    nlohmann::ordered_json r;
    r["y"] = inst.y;
    r["feature_id"] = inst.feature_id;
    r["text"] = inst.text;
    out << r.dump() << '\n';
  }
}

MultitaskDataset parse_instances(std::istream& in, Provenance provenance) {
  std::vector<LabeledInstance> instances;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json r;
    try {
      r = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!r.is_object() || !r.contains("y") || !r.contains("feature_id") ||
        !r.contains("text")) {
      throw SchemaError("instance needs y, feature_id, text", line_no);
    }
    if (!r["y"].is_number_integer() || (r["y"] != 0 && r["y"] != 1)) {
      throw SchemaError("y must be 0 or 1", line_no);
    }
    if (!r["feature_id"].is_string() || !r["text"].is_string()) {
      throw SchemaError("feature_id and text must be strings", line_no);
    }
    instances.push_back({r["text"].get<std::string>(),
                         r["feature_id"].get<std::string>(),
                         static_cast<std::uint8_t>(r["y"].get<int>())});
  }
  try {
    return MultitaskDataset(std::move(instances), provenance);
  } catch (const DuplicateIdError& e) {
    throw SchemaError(e.what());
  }
}

}  // namespace dialect
