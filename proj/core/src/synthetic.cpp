#include <algorithm>
#include <cstdio>

#include "dialect/corpus.hpp"
#include "dialect/error.hpp"
#include "dialect/rng.hpp"

namespace dialect {

namespace {

using Chunk = std::vector<std::string>;

std::string indexed(const char* stem, std::size_t k) {
  return stem + std::to_string(k);
}

std::string marker_token(std::size_t k) { return indexed("mk", k); }
std::string standard_token(std::size_t k) { return indexed("sd", k); }
std::string variant_token(std::size_t k) { return indexed("dv", k); }
std::string function_token(std::size_t k) { return indexed("fn", k); }
std::string head_token(std::size_t k) { return indexed("hd", k); }

std::string padded(std::size_t value, int width) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%0*zu", width, value);
  return buffer;
}

void insert_chunk(std::vector<Chunk>& chunks, Chunk chunk, Rng& rng) {
  const std::size_t at = rng.below(chunks.size() + 1);
  chunks.insert(chunks.begin() + static_cast<std::ptrdiff_t>(at),
                std::move(chunk));
}

// A sentence in its standard form: content words plus the envelope site of
// every substitution and deletion feature.
std::vector<Chunk> base_sentence(const SynthConfig& config, Rng& rng) {
  const std::size_t words =
      config.min_words + rng.below(config.max_words - config.min_words + 1);
  std::vector<Chunk> chunks;
  chunks.reserve(words + config.num_features);
  for (std::size_t i = 0; i < words; ++i) {
    chunks.push_back({"w" + std::to_string(rng.below(config.vocabulary_size))});
  }
  for (std::size_t k = 0; k < config.num_features; ++k) {
    switch (synthetic_rule_kind(k)) {
      case RuleKind::insertion:
        break;
      case RuleKind::substitution:
        insert_chunk(chunks, {standard_token(k)}, rng);
        break;
      case RuleKind::deletion:
        insert_chunk(chunks, {function_token(k), head_token(k)}, rng);
        break;
    }
  }
  return chunks;
}

void apply_rule(std::vector<Chunk>& chunks, std::size_t k, Rng& rng) {
  switch (synthetic_rule_kind(k)) {
    case RuleKind::insertion:
      insert_chunk(chunks, {marker_token(k)}, rng);
      break;
    case RuleKind::substitution:
      for (Chunk& c : chunks) {
        if (c.size() == 1 && c[0] == standard_token(k)) c[0] = variant_token(k);
      }
      break;
    case RuleKind::deletion:
      for (Chunk& c : chunks) {
        if (c.size() == 2 && c[0] == function_token(k)) c.erase(c.begin());
      }
      break;
  }
}

std::string render(const std::vector<Chunk>& chunks) {
  std::string text;
  for (const Chunk& c : chunks) {
    for (const std::string& token : c) {
      if (!text.empty()) text += ' ';
      text += token;
    }
  }
  if (!text.empty()) {
    text[0] = static_cast<char>(text[0] - 'a' + 'A');
    text += '.';
  }
  return text;
}

Feature make_feature(std::size_t k) {
  Feature f;
  f.id = synthetic_feature_id(k);
  switch (synthetic_rule_kind(k)) {
    case RuleKind::insertion:
      f.name = "inserted " + marker_token(k);
      f.description = "the marker token " + marker_token(k) +
                      " is inserted into the utterance";
      break;
    case RuleKind::substitution:
      f.name = variant_token(k) + " for " + standard_token(k);
      f.description = "the standard token " + standard_token(k) +
                      " is realized as " + variant_token(k);
      break;
    case RuleKind::deletion:
      f.name = "dropped " + function_token(k);
      f.description = "the function token " + function_token(k) +
                      " is omitted before " + head_token(k);
      break;
  }
  return f;
}

}  // namespace

RuleKind synthetic_rule_kind(std::size_t feature) {
  switch (feature % 3) {
    case 0:
      return RuleKind::insertion;
    case 1:
      return RuleKind::substitution;
    default:
      return RuleKind::deletion;
  }
}

std::string synthetic_feature_id(std::size_t feature) {
  return "syn" + std::to_string(feature);
}

void SynthConfig::validate() const {
  if (num_features < 1) throw ConfigError("synthetic config needs K >= 1 features");
  if (vocabulary_size < 1) throw ConfigError("vocabulary_size must be >= 1");
  if (examples_per_transcript < 1) {
    throw ConfigError("examples_per_transcript must be >= 1");
  }
  if (transcripts_per_locale < 1) {
    throw ConfigError("transcripts_per_locale must be >= 1");
  }
  if (min_words < 1 || min_words > max_words) {
    throw ConfigError("need 1 <= min_words <= max_words");
  }
  if (locale_a.empty() || locale_b.empty() || locale_a == locale_b) {
    throw ConfigError("locales must be non-empty and distinct");
  }
  for (const auto* rates : {&rate_a, &rate_b}) {
    if (rates->size() != 1 && rates->size() != num_features) {
      throw ConfigError("rate lists must have 1 or K entries");
    }
    for (double r : *rates) {
      if (!(r >= 0.0 && r <= 1.0)) {
        throw ConfigError("feature rate " + std::to_string(r) +
                          " is outside [0, 1]");
      }
    }
  }
  if (!(transcript_variation >= 0.0 && transcript_variation <= 1.0)) {
    throw ConfigError("transcript_variation must be in [0, 1]");
  }
  if (!(cooccurrence >= 0.0 && cooccurrence <= 1.0)) {
    throw ConfigError("cooccurrence must be in [0, 1]");
  }
}

double SynthConfig::rate(std::size_t locale_index, std::size_t feature) const {
  const std::vector<double>& rates = locale_index == 0 ? rate_a : rate_b;
  return rates.size() == 1 ? rates[0] : rates.at(feature);
}

SyntheticData generate_synthetic(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t K = config.num_features;

  std::vector<Feature> features;
  for (std::size_t k = 0; k < K; ++k) features.push_back(make_feature(k));

  Rng rng(mix_seed(seed, 0));
  std::vector<Example> examples;
  AnnotationSet gold;
  const std::string locales[2] = {config.locale_a, config.locale_b};
  for (std::size_t loc = 0; loc < 2; ++loc) {
    for (std::size_t t = 0; t < config.transcripts_per_locale; ++t) {
      const std::string transcript = locales[loc] + "-t" + padded(t, 3);
      const double scale =
          1.0 + config.transcript_variation * (2.0 * rng.uniform() - 1.0);
      for (std::size_t u = 0; u < config.examples_per_transcript; ++u) {
        std::vector<Chunk> chunks = base_sentence(config, rng);
        std::vector<bool> fired(K);
        for (std::size_t k = 0; k < K; ++k) {
          const double p = std::clamp(config.rate(loc, k) * scale, 0.0, 1.0);
          fired[k] = rng.bernoulli(p);
        }
        if (config.cooccurrence > 0.0) {
          for (std::size_t k = 0; k + 1 < K; k += 2) {
            const bool draw = rng.bernoulli(config.cooccurrence);
            if (draw && fired[k] != fired[k + 1]) {
              fired[k] = fired[k + 1] = true;
            }
          }
        }
        for (std::size_t k = 0; k < K; ++k) {
          if (fired[k]) apply_rule(chunks, k, rng);
        }
        const std::string id = transcript + "-u" + padded(u, 3);
        for (std::size_t k = 0; k < K; ++k) {
          gold.add(id, features[k].id, fired[k] ? Label::present : Label::absent);
        }
        examples.push_back(Example::make(id, render(chunks), transcript,
                                         locales[loc]));
      }
    }
  }

  Rng pair_rng(mix_seed(seed, 1));
  MinimalPairSet pairs;
  std::set<std::string> used;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < config.pairs_per_feature; ++i) {
      std::string negative;
      std::string positive;
      do {
        std::vector<Chunk> chunks = base_sentence(config, pair_rng);
        negative = render(chunks);
        apply_rule(chunks, k, pair_rng);
        positive = render(chunks);
      } while (used.count(negative) || used.count(positive));
      used.insert(negative);
      used.insert(positive);
      MinimalPair pair;
      pair.feature_id = features[k].id;
      pair.positive_variants = {positive};
      pair.negative_variants = {negative};
      pairs.push_back(std::move(pair));
      if (i == 0) features[k].canonical_examples = {positive};
    }
  }

  return SyntheticData{Corpus(std::move(examples), std::move(gold)),
                       FeatureCatalog(std::move(features)), std::move(pairs)};
}

std::set<std::size_t> synthetic_features_in(std::string_view text,
                                            std::size_t num_features) {
  const std::vector<std::string> tokens = tokenize(text);
  auto has = [&](const std::string& token) {
    return std::find(tokens.begin(), tokens.end(), token) != tokens.end();
  };
  std::set<std::size_t> found;
  for (std::size_t k = 0; k < num_features; ++k) {
    switch (synthetic_rule_kind(k)) {
      case RuleKind::insertion:
        if (has(marker_token(k))) found.insert(k);
        break;
      case RuleKind::substitution:
        if (has(variant_token(k))) found.insert(k);
        break;
      case RuleKind::deletion: {
        const std::string head = head_token(k);
        const std::string fn = function_token(k);
        for (std::size_t i = 0; i < tokens.size(); ++i) {
          if (tokens[i] == head && (i == 0 || tokens[i - 1] != fn)) {
            found.insert(k);
            break;
          }
        }
        break;
      }
    }
  }
  return found;
}

}  // namespace dialect
