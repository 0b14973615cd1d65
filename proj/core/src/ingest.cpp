// Line-delimited JSON readers and writers for catalog, corpus, annotation,
// and minimal-pair files. One object per line; blank lines are skipped.

#include <algorithm>
#include <istream>
#include <ostream>

#include "dialect/corpus.hpp"
#include "dialect/error.hpp"
#include "dialect/io.hpp"
#include "json.hpp"

namespace dialect {

namespace {

using Json = nlohmann::ordered_json;

template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw SchemaError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!record.is_object()) {
      throw SchemaError("record must be a JSON object", line_no);
    }
    fn(record, line_no);
  }
}

std::string require_string(const Json& record, const char* field,
                           std::size_t line) {
  auto it = record.find(field);
  if (it == record.end()) {
    throw SchemaError(std::string("missing field '") + field + "'", line);
  }
  if (!it->is_string()) {
    throw SchemaError(std::string("field '") + field + "' must be a string",
                      line);
  }
  return it->get<std::string>();
}

std::vector<std::string> string_list(const Json& record, const char* field,
                                     std::size_t line, bool required) {
  auto it = record.find(field);
  if (it == record.end()) {
    if (required) {
      throw SchemaError(std::string("missing field '") + field + "'", line);
    }
    return {};
  }
  if (!it->is_array()) {
    throw SchemaError(std::string("field '") + field + "' must be an array",
                      line);
  }
  std::vector<std::string> out;
  for (const Json& v : *it) {
    if (!v.is_string()) {
      throw SchemaError(std::string("field '") + field +
                            "' must contain only strings",
                        line);
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

void write_line(std::ostream& out, const Json& record) {
  out << record.dump() << '\n';
}

}  // namespace

void validate_pair(const MinimalPair& pair, const FeatureCatalog& catalog,
                   std::size_t line) {
  if (!catalog.contains(pair.feature_id)) {
    throw ReferenceError((line ? "line " + std::to_string(line) + ": " : "") +
                         "pair references unknown feature_id '" +
                         pair.feature_id + "'");
  }
  if (pair.positive_variants.empty()) {
    throw SchemaError("pair for '" + pair.feature_id +
                          "' has no positive variants",
                      line);
  }
  if (pair.negative_variants.empty()) {
    throw SchemaError("pair for '" + pair.feature_id +
                          "' has no negative variants",
                      line);
  }
  auto is_variant = [&](const std::string& text) {
    return std::find(pair.positive_variants.begin(),
                     pair.positive_variants.end(),
                     text) != pair.positive_variants.end() ||
           std::find(pair.negative_variants.begin(),
                     pair.negative_variants.end(),
                     text) != pair.negative_variants.end();
  };
  for (const auto& [text, features] : pair.cross_feature_presence) {
    if (!is_variant(text)) {
      throw SchemaError("cross_feature_presence names '" + text +
                            "', which is not a variant of this pair",
                        line);
    }
    for (const std::string& fid : features) {
      if (fid == pair.feature_id) {
        throw SchemaError("cross_feature_presence for '" + text +
                              "' must not contain the pair's own feature",
                          line);
      }
      if (!catalog.contains(fid)) {
        throw ReferenceError(
            (line ? "line " + std::to_string(line) + ": " : "") +
            "cross_feature_presence references unknown feature_id '" + fid +
            "'");
      }
    }
  }
}

FeatureCatalog parse_catalog(std::istream& in) {
  std::vector<Feature> features;
  std::map<std::string, std::size_t> seen;
  for_each_record(in, [&](const Json& r, std::size_t line) {
    Feature f;
    f.id = require_string(r, "id", line);
    f.name = require_string(r, "name", line);
    if (f.id.empty()) throw SchemaError("id must be non-empty", line);
    if (f.name.empty()) throw SchemaError("name must be non-empty", line);
    if (r.contains("description")) f.description = require_string(r, "description", line);
    f.canonical_examples = string_list(r, "canonical_examples", line, false);
    if (!seen.emplace(f.id, line).second) {
      throw DuplicateIdError("line " + std::to_string(line) +
                             ": duplicate feature id '" + f.id + "'");
    }
    features.push_back(std::move(f));
  });
  return FeatureCatalog(std::move(features));
}

Corpus parse_corpus(std::istream& in) {
  std::vector<Example> examples;
  std::map<std::string, std::size_t> seen;
  for_each_record(in, [&](const Json& r, std::size_t line) {
    std::string id = require_string(r, "example_id", line);
    if (id.empty()) throw SchemaError("example_id must be non-empty", line);
    std::string text = require_string(r, "text", line);
    std::string transcript = require_string(r, "transcript_id", line);
    std::optional<std::string> locale;
    if (auto it = r.find("locale"); it != r.end() && !it->is_null()) {
      locale = require_string(r, "locale", line);
    }
    if (!seen.emplace(id, line).second) {
      throw DuplicateIdError("line " + std::to_string(line) +
                             ": duplicate example_id '" + id + "'");
    }
    Example e = Example::make(std::move(id), std::move(text),
                              std::move(transcript), std::move(locale));
    if (r.contains("tokens") &&
        string_list(r, "tokens", line, true) != e.tokens) {
      throw SchemaError("tokens do not match the tokenizer output for text",
                        line);
    }
    examples.push_back(std::move(e));
  });
  return Corpus(std::move(examples));
}

AnnotationSet parse_annotations(std::istream& in, const Corpus& corpus,
                                const FeatureCatalog& catalog) {
  AnnotationSet set;
  for_each_record(in, [&](const Json& r, std::size_t line) {
    std::string example_id = require_string(r, "example_id", line);
    std::string feature_id = require_string(r, "feature_id", line);
    std::string label = require_string(r, "label", line);
    Label value;
    if (label == "present") {
      value = Label::present;
    } else if (label == "absent") {
      value = Label::absent;
    } else {
      throw SchemaError("label must be 'present' or 'absent'", line);
    }
    if (!corpus.contains(example_id)) {
      throw ReferenceError("line " + std::to_string(line) +
                           ": unknown example_id '" + example_id + "'");
    }
    if (!catalog.contains(feature_id)) {
      throw ReferenceError("line " + std::to_string(line) +
                           ": unknown feature_id '" + feature_id + "'");
    }
    if (set.find(example_id, feature_id)) {
      throw DuplicateIdError("line " + std::to_string(line) +
                             ": duplicate annotation for ('" + example_id +
                             "', '" + feature_id + "')");
    }
    set.add(std::move(example_id), std::move(feature_id), value);
  });
  return set;
}

MinimalPairSet parse_pairs(std::istream& in, const FeatureCatalog& catalog) {
  MinimalPairSet pairs;
  for_each_record(in, [&](const Json& r, std::size_t line) {
    MinimalPair p;
    p.feature_id = require_string(r, "feature_id", line);
    p.positive_variants = string_list(r, "positive_variants", line, true);
    p.negative_variants = string_list(r, "negative_variants", line, true);
    if (auto it = r.find("cross_feature_presence"); it != r.end()) {
      if (!it->is_object()) {
        throw SchemaError("cross_feature_presence must be an object", line);
      }
      for (const auto& [text, ids] : it->items()) {
        if (!ids.is_array()) {
          throw SchemaError("cross_feature_presence values must be arrays",
                            line);
        }
        std::set<std::string>& bucket = p.cross_feature_presence[text];
        for (const Json& id : ids) {
          if (!id.is_string()) {
            throw SchemaError("cross_feature_presence ids must be strings",
                              line);
          }
          bucket.insert(id.get<std::string>());
        }
      }
    }
    validate_pair(p, catalog, line);
    pairs.push_back(std::move(p));
  });
  return pairs;
}

FeatureCatalog load_catalog(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_catalog(in);
}

Corpus load_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_corpus(in);
}

AnnotationSet load_annotations(const std::filesystem::path& path,
                               const Corpus& corpus,
                               const FeatureCatalog& catalog) {
  auto in = open_input(path);
  return parse_annotations(in, corpus, catalog);
}

MinimalPairSet load_pairs(const std::filesystem::path& path,
                          const FeatureCatalog& catalog) {
  auto in = open_input(path);
  return parse_pairs(in, catalog);
}

void write_catalog(std::ostream& out, const FeatureCatalog& catalog) {
  for (const Feature& f : catalog.features()) {
    Json r;
    r["id"] = f.id;
    r["name"] = f.name;
    r["description"] = f.description;
    r["canonical_examples"] = f.canonical_examples;
    write_line(out, r);
  }
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const Example& e : corpus.examples()) {
    Json r;
    r["example_id"] = e.example_id;
    r["text"] = e.text;
    r["transcript_id"] = e.transcript_id;
    if (e.locale) {
      r["locale"] = *e.locale;
    } else {
      r["locale"] = nullptr;
    }
    write_line(out, r);
  }
}

void write_annotations(std::ostream& out, const AnnotationSet& annotations) {
  for (const auto& [key, label] : annotations.entries()) {
    Json r;
    r["example_id"] = key.first;
    r["feature_id"] = key.second;
    r["label"] = label == Label::present ? "present" : "absent";
    write_line(out, r);
  }
}

void write_pairs(std::ostream& out, const MinimalPairSet& pairs) {
  for (const MinimalPair& p : pairs) {
    Json r;
    r["feature_id"] = p.feature_id;
    r["positive_variants"] = p.positive_variants;
    r["negative_variants"] = p.negative_variants;
    Json cross = Json::object();
    for (const auto& [text, ids] : p.cross_feature_presence) {
      if (!ids.empty()) cross[text] = std::vector<std::string>(ids.begin(), ids.end());
    }
    r["cross_feature_presence"] = cross;
    write_line(out, r);
  }
}

}  // namespace dialect
