#include "dialect/corpus.hpp"

#include <algorithm>

#include "dialect/error.hpp"

namespace dialect {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_ascii_punct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) ||
         (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t end = i;
    while (end < text.size() &&
           !is_space(static_cast<unsigned char>(text[end]))) {
      ++end;
    }
    std::size_t lo = i;
    std::size_t hi = end;
    while (lo < hi && is_ascii_punct(static_cast<unsigned char>(text[lo]))) ++lo;
    while (hi > lo && is_ascii_punct(static_cast<unsigned char>(text[hi - 1]))) {
      --hi;
    }
    if (lo < hi) {
      std::string token(text.substr(lo, hi - lo));
      for (char& c : token) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
      tokens.push_back(std::move(token));
    }
    i = end;
  }
  return tokens;
}

// --- FeatureCatalog ---------------------------------------------------------

FeatureCatalog::FeatureCatalog(std::vector<Feature> features)
    : features_(std::move(features)) {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const Feature& f = features_[i];
    if (f.id.empty()) throw SchemaError("feature id must be non-empty");
    if (f.name.empty()) {
      throw SchemaError("feature '" + f.id + "' has an empty name");
    }
    if (!index_.emplace(f.id, i).second) {
      throw DuplicateIdError("duplicate feature id '" + f.id + "'");
    }
  }
}

bool FeatureCatalog::contains(std::string_view id) const {
  return index_.find(id) != index_.end();
}

const Feature& FeatureCatalog::at(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw ReferenceError("unknown feature id '" + std::string(id) + "'");
  }
  return features_[it->second];
}

std::vector<std::string> FeatureCatalog::ids() const {
  std::vector<std::string> out;
  out.reserve(features_.size());
  for (const Feature& f : features_) out.push_back(f.id);
  return out;
}

// --- Example / AnnotationSet ------------------------------------------------

Example Example::make(std::string example_id, std::string text,
                      std::string transcript_id,
                      std::optional<std::string> locale) {
  Example e;
  e.example_id = std::move(example_id);
  e.tokens = tokenize(text);
  e.text = std::move(text);
  e.transcript_id = std::move(transcript_id);
  e.locale = std::move(locale);
  return e;
}

void AnnotationSet::add(std::string example_id, std::string feature_id,
                        Label label) {
  Key key{std::move(example_id), std::move(feature_id)};
  auto [it, inserted] = labels_.emplace(key, label);
  if (!inserted) {
    throw DuplicateIdError("duplicate annotation for example '" + key.first +
                           "', feature '" + key.second + "'");
  }
  ++per_feature_[it->first.second];
}

std::optional<Label> AnnotationSet::find(std::string_view example_id,
                                         std::string_view feature_id) const {
  auto it = labels_.find(Key{std::string(example_id), std::string(feature_id)});
  if (it == labels_.end()) return std::nullopt;
  return it->second;
}

bool AnnotationSet::has_feature(std::string_view feature_id) const {
  return per_feature_.find(feature_id) != per_feature_.end();
}

// --- Corpus -----------------------------------------------------------------

Corpus::Corpus(std::vector<Example> examples,
               std::optional<AnnotationSet> annotations)
    : examples_(std::move(examples)), annotations_(std::move(annotations)) {
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const Example& e = examples_[i];
    if (e.example_id.empty()) throw SchemaError("example_id must be non-empty");
    if (!index_.emplace(e.example_id, i).second) {
      throw DuplicateIdError("duplicate example_id '" + e.example_id + "'");
    }
    auto [it, fresh] = transcripts_.try_emplace(e.transcript_id);
    if (fresh) transcript_order_.push_back(e.transcript_id);
    it->second.push_back(i);
  }
  if (annotations_) {
    for (const auto& [key, label] : annotations_->entries()) {
      if (!contains(key.first)) {
        throw ReferenceError("annotation references unknown example_id '" +
                             key.first + "'");
      }
    }
  }
}

bool Corpus::contains(std::string_view example_id) const {
  return index_.find(example_id) != index_.end();
}

const Example& Corpus::at(std::string_view example_id) const {
  auto it = index_.find(example_id);
  if (it == index_.end()) {
    throw ReferenceError("unknown example_id '" + std::string(example_id) + "'");
  }
  return examples_[it->second];
}

std::span<const std::size_t> Corpus::transcript(
    std::string_view transcript_id) const {
  auto it = transcripts_.find(transcript_id);
  if (it == transcripts_.end()) {
    throw ReferenceError("unknown transcript_id '" + std::string(transcript_id) +
                         "'");
  }
  return it->second;
}

std::set<std::string> Corpus::locales() const {
  std::set<std::string> out;
  for (const Example& e : examples_) {
    if (e.locale) out.insert(*e.locale);
  }
  return out;
}

Corpus Corpus::with_annotations(AnnotationSet annotations) const {
  return Corpus(examples_, std::move(annotations));
}

Corpus Corpus::select_transcripts(
    std::span<const std::string> transcript_ids) const {
  std::vector<Example> kept;
  for (const std::string& tid : transcript_ids) {
    for (std::size_t i : transcript(tid)) kept.push_back(examples_[i]);
  }
  std::optional<AnnotationSet> kept_annotations;
  if (annotations_) {
    std::set<std::string_view> ids;
    for (const Example& e : kept) ids.insert(e.example_id);
    AnnotationSet subset;
    for (const auto& [key, label] : annotations_->entries()) {
      if (ids.count(key.first)) subset.add(key.first, key.second, label);
    }
    kept_annotations = std::move(subset);
  }
  return Corpus(std::move(kept), std::move(kept_annotations));
}

}  // namespace dialect
