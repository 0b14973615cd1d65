#include "dialect/density.hpp"

#include <istream>
#include <ostream>

#include "dialect/error.hpp"
#include "json.hpp"

namespace dialect {

namespace {

using Json = nlohmann::ordered_json;

std::size_t transcript_tokens(const Corpus& corpus, std::span<const std::size_t> idx) {
  std::size_t n = 0;
  for (std::size_t i : idx) n += corpus.examples()[i].tokens.size();
  return n;
}

}  // namespace

std::string_view to_string(DensityMethod method) {
  switch (method) {
    case DensityMethod::learned: return "learned";
    case DensityMethod::regex: return "regex";
    case DensityMethod::docclf: return "docclf";
    case DensityMethod::gold: return "gold";
  }
  return "learned";
}

DensityMethod density_method_from_string(std::string_view name) {
  if (name == "learned") return DensityMethod::learned;
  if (name == "regex") return DensityMethod::regex;
  if (name == "docclf") return DensityMethod::docclf;
  if (name == "gold") return DensityMethod::gold;
  throw SchemaError("unknown density method '" + std::string(name) + "'");
}

double utterance_density_learned(const FeatureScores& scores, std::size_t token_count) {
  if (token_count == 0) throw ZeroTokenError("utterance has no tokens");
  double mass = 0.0;
  for (const auto& [id, s] : scores) mass += s;
  return mass / static_cast<double>(token_count);
}

double utterance_density_regex(std::string_view text) {
  const std::size_t tokens = tokenize(text).size();
  if (tokens == 0) throw ZeroTokenError("utterance has no tokens");
  return static_cast<double>(regex_match_total(text)) / static_cast<double>(tokens);
}

DensityScore transcript_density(std::string unit_id, DensityMethod method,
                                std::span<const UtteranceMass> utterances) {
  if (utterances.empty()) {
    throw EmptyTranscriptError("transcript '" + unit_id + "' has no utterances");
  }
  double mass = 0.0;
  std::size_t tokens = 0;
  for (const UtteranceMass& u : utterances) {
    mass += u.mass;
    tokens += u.tokens;
  }
  if (tokens == 0) throw ZeroTokenError("transcript '" + unit_id + "' has no tokens");
  return {std::move(unit_id), method, mass / static_cast<double>(tokens), tokens};
}

ScoreFn detector_scorer(const FeatureDetector& detector) {
  return [&detector](const Example& ex) { return detector.score(ex.text); };
}

ScoreFn oracle_scorer(const Corpus& corpus, std::vector<std::string> feature_ids) {
  if (!corpus.annotations()) {
    throw MissingAnnotationError("oracle scores need gold annotations");
  }
  return [&corpus, ids = std::move(feature_ids)](const Example& ex) {
    FeatureScores out;
    for (const std::string& f : ids) {
      const auto label = corpus.annotations()->find(ex.example_id, f);
      if (!label) {
        throw MissingAnnotationError("no label for (" + ex.example_id + ", " + f + ")");
      }
      out[f] = *label == Label::present ? 1.0 : 0.0;
    }
    return out;
  };
}

std::vector<DensityScore> learned_densities(const Corpus& corpus, const ScoreFn& score) {
  std::vector<DensityScore> out;
  for (const std::string& tid : corpus.transcript_ids()) {
    std::vector<UtteranceMass> parts;
    for (std::size_t i : corpus.transcript(tid)) {
      const Example& ex = corpus.examples()[i];
      double mass = 0.0;
      for (const auto& [id, s] : score(ex)) mass += s;
      parts.push_back({mass, ex.tokens.size()});
    }
    out.push_back(transcript_density(tid, DensityMethod::learned, parts));
  }
  return out;
}

std::vector<DensityScore> regex_densities(const Corpus& corpus) {
  std::vector<DensityScore> out;
  for (const std::string& tid : corpus.transcript_ids()) {
    std::vector<UtteranceMass> parts;
    for (std::size_t i : corpus.transcript(tid)) {
      const Example& ex = corpus.examples()[i];
      parts.push_back({static_cast<double>(regex_match_total(ex.text)), ex.tokens.size()});
    }
    out.push_back(transcript_density(tid, DensityMethod::regex, parts));
  }
  return out;
}

std::vector<DensityScore> docclf_densities(const Corpus& corpus,
                                           const DocClassifier& classifier) {
  std::vector<DensityScore> out;
  for (const std::string& tid : corpus.transcript_ids()) {
    const auto idx = corpus.transcript(tid);
    if (idx.empty()) throw EmptyTranscriptError("transcript '" + tid + "' is empty");
    std::string text;
    for (std::size_t i : idx) {
      if (!text.empty()) text += ' ';
      text += corpus.examples()[i].text;
    }
    out.push_back({tid, DensityMethod::docclf, classifier.probability(text),
                   transcript_tokens(corpus, idx)});
  }
  return out;
}

double gold_density(const Corpus& corpus, std::string_view transcript_id,
                    std::span<const std::string> feature_ids) {
  if (!corpus.annotations()) {
    throw MissingAnnotationError("gold density needs annotations");
  }
  const auto idx = corpus.transcript(transcript_id);
  if (idx.empty()) {
    throw EmptyTranscriptError("transcript '" + std::string(transcript_id) + "' is empty");
  }
  std::size_t present = 0;
  for (std::size_t i : idx) {
    const Example& ex = corpus.examples()[i];
    for (const std::string& f : feature_ids) {
      const auto label = corpus.annotations()->find(ex.example_id, f);
      if (!label) {
        throw MissingAnnotationError("no label for (" + ex.example_id + ", " + f + ")");
      }
      if (*label == Label::present) ++present;
    }
  }
  const std::size_t tokens = transcript_tokens(corpus, idx);
  if (tokens == 0) {
    throw ZeroTokenError("transcript '" + std::string(transcript_id) + "' has no tokens");
  }
  return static_cast<double>(present) / static_cast<double>(tokens);
}

std::vector<DensityScore> gold_densities(const Corpus& corpus,
                                         std::span<const std::string> feature_ids) {
  std::vector<DensityScore> out;
  for (const std::string& tid : corpus.transcript_ids()) {
    out.push_back({tid, DensityMethod::gold, gold_density(corpus, tid, feature_ids),
                   transcript_tokens(corpus, corpus.transcript(tid))});
  }
  return out;
}

void write_densities(std::ostream& out, std::span<const DensityScore> scores) {
  for (const DensityScore& s : scores) {
    Json j;
    j["unit_id"] = s.unit_id;
    j["method"] = to_string(s.method);
    j["density"] = s.density;
    j["token_count"] = s.token_count;
    out << j.dump() << '\n';
  }
}

std::vector<DensityScore> parse_densities(std::istream& in) {
  std::vector<DensityScore> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json j = Json::parse(line);
      out.push_back({j.at("unit_id").get<std::string>(),
                     density_method_from_string(j.at("method").get<std::string>()),
                     j.at("density").get<double>(), j.at("token_count").get<std::size_t>()});
    } catch (const Json::exception& e) {
      throw SchemaError(e.what(), line_no);
    }
  }
  return out;
}

}  // namespace dialect
