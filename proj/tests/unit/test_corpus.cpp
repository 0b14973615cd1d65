#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "dialect/corpus.hpp"
#include "dialect/error.hpp"

namespace dialect {
namespace {

const std::filesystem::path kData = std::filesystem::path(DIALECT_SOURCE_DIR) / "data";

TEST(Tokenize, LowercasesAndStripsOuterPunctuation) {
  EXPECT_EQ(tokenize("The children are outside, isn't it?"),
            (std::vector<std::string>{"the", "children", "are", "outside", "isn't", "it"}));
  EXPECT_EQ(tokenize("  Chair   is\tblack. "),
            (std::vector<std::string>{"chair", "is", "black"}));
  EXPECT_TRUE(tokenize("... ?! --").empty());
  EXPECT_TRUE(tokenize("").empty());
}

TEST(Catalog, RejectsDuplicateIdsAndUnknownLookups) {
  std::istringstream dup(R"({"id":"a","name":"x"}
{"id":"a","name":"y"}
)");
  EXPECT_THROW(parse_catalog(dup), DuplicateIdError);

  std::istringstream ok(R"({"id":"a","name":"x"})");
  const FeatureCatalog c = parse_catalog(ok);
  EXPECT_EQ(c.size(), 1u);
  EXPECT_THROW(c.at("b"), ReferenceError);
}

TEST(Catalog, SchemaErrorsCarryLineNumbers) {
  std::istringstream in("{\"id\":\"a\",\"name\":\"x\"}\n\n{\"id\":\"b\"}\n");
  try {
    parse_catalog(in);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(CorpusIngest, TokensMustMatchText) {
  std::istringstream bad(
      R"({"example_id":"e1","text":"Hello there","tokens":["hello"],"transcript_id":"t"})");
  EXPECT_THROW(parse_corpus(bad), SchemaError);

  std::istringstream good(
      R"({"example_id":"e1","text":"Hello there","tokens":["hello","there"],"transcript_id":"t","locale":null})");
  const Corpus c = parse_corpus(good);
  EXPECT_EQ(c.size(), 1u);
  EXPECT_FALSE(c.examples()[0].locale.has_value());
}

TEST(CorpusIngest, AnnotationsValidateReferencesAndLabels) {
  std::istringstream cat(R"({"id":"f","name":"f"})");
  const FeatureCatalog catalog = parse_catalog(cat);
  const Corpus corpus({Example::make("e1", "a b", "t1")});

  std::istringstream unknown_ex(R"({"example_id":"e9","feature_id":"f","label":"present"})");
  EXPECT_THROW(parse_annotations(unknown_ex, corpus, catalog), ReferenceError);
  std::istringstream unknown_f(R"({"example_id":"e1","feature_id":"g","label":"present"})");
  EXPECT_THROW(parse_annotations(unknown_f, corpus, catalog), ReferenceError);
  std::istringstream bad_label(R"({"example_id":"e1","feature_id":"f","label":"yes"})");
  EXPECT_THROW(parse_annotations(bad_label, corpus, catalog), SchemaError);
  std::istringstream dup(R"({"example_id":"e1","feature_id":"f","label":"present"}
{"example_id":"e1","feature_id":"f","label":"absent"})");
  EXPECT_THROW(parse_annotations(dup, corpus, catalog), DuplicateIdError);
}

TEST(Corpus, TranscriptsKeepFirstAppearanceOrder) {
  const Corpus c({Example::make("a", "x", "t2"), Example::make("b", "y", "t1"),
                  Example::make("c", "z", "t2")});
  EXPECT_EQ(c.transcript_ids(), (std::vector<std::string>{"t2", "t1"}));
  ASSERT_EQ(c.transcript("t2").size(), 2u);
  EXPECT_EQ(c.transcript("t2")[1], 2u);
  EXPECT_THROW(Corpus({Example::make("a", "x", "t"), Example::make("a", "y", "t")}),
               DuplicateIdError);
}

TEST(Pairs, RejectEmptyVariantsAndUnknownFeatures) {
  std::istringstream cat(R"({"id":"f","name":"f"})");
  const FeatureCatalog catalog = parse_catalog(cat);
  std::istringstream no_neg(R"({"feature_id":"f","positive_variants":["a"],"negative_variants":[]})");
  EXPECT_THROW(parse_pairs(no_neg, catalog), SchemaError);
  std::istringstream unknown(R"({"feature_id":"g","positive_variants":["a"],"negative_variants":["b"]})");
  EXPECT_THROW(parse_pairs(unknown, catalog), ReferenceError);
}

TEST(BundledData, CatalogsAndPairsLoad) {
  const FeatureCatalog full = load_catalog(kData / "catalog_indian_english.jsonl");
  const FeatureCatalog lange = load_catalog(kData / "catalog_lange.jsonl");
  EXPECT_EQ(full.size(), 22u);
  EXPECT_EQ(lange.size(), 10u);
  for (const Feature& f : lange.features()) EXPECT_TRUE(full.contains(f.id)) << f.id;

  const MinimalPairSet pairs = load_pairs(kData / "pairs_lange.jsonl", lange);
  std::set<std::string> texts;
  std::set<std::string> covered;
  for (const MinimalPair& p : pairs) {
    covered.insert(p.feature_id);
    texts.insert(p.positive_variants.begin(), p.positive_variants.end());
    texts.insert(p.negative_variants.begin(), p.negative_variants.end());
  }
  EXPECT_EQ(texts.size(), 113u);
  EXPECT_EQ(covered.size(), lange.size());
}

TEST(Catalog, RoundTripsThroughWriter) {
  const FeatureCatalog lange = load_catalog(kData / "catalog_lange.jsonl");
  std::stringstream buf;
  write_catalog(buf, lange);
  EXPECT_EQ(parse_catalog(buf), lange);
}

// Every gold label must agree with re-applying the surface rules to the text.
TEST(Synthetic, AnnotationsMatchSurfaceRules) {
  SynthConfig cfg;
  cfg.num_features = 8;
  cfg.transcripts_per_locale = 10;
  cfg.transcript_variation = 0.5;
  cfg.cooccurrence = 0.5;
  const SyntheticData d = generate_synthetic(cfg, 7);
  ASSERT_TRUE(d.corpus.annotations().has_value());
  EXPECT_EQ(d.corpus.size(), 2 * cfg.transcripts_per_locale * cfg.examples_per_transcript);
  EXPECT_EQ(d.corpus.locales(), (std::set<std::string>{"IN", "US"}));

  std::size_t positives = 0;
  for (const Example& ex : d.corpus.examples()) {
    const auto found = synthetic_features_in(ex.text, cfg.num_features);
    for (std::size_t k = 0; k < cfg.num_features; ++k) {
      const auto label = d.corpus.annotations()->find(ex.example_id, synthetic_feature_id(k));
      ASSERT_TRUE(label.has_value());
      EXPECT_EQ(*label == Label::present, found.contains(k)) << ex.text << " / " << k;
      positives += *label == Label::present;
    }
  }
  EXPECT_GT(positives, 0u);

  ASSERT_EQ(d.pairs.size(), cfg.num_features * cfg.pairs_per_feature);
  for (const MinimalPair& p : d.pairs) {
    const std::size_t k = std::stoul(p.feature_id.substr(3));
    for (const auto& t : p.positive_variants) {
      EXPECT_TRUE(synthetic_features_in(t, cfg.num_features).contains(k)) << t;
    }
    for (const auto& t : p.negative_variants) {
      EXPECT_FALSE(synthetic_features_in(t, cfg.num_features).contains(k)) << t;
    }
  }
}

TEST(Synthetic, SameSeedSameData) {
  SynthConfig cfg;
  cfg.transcripts_per_locale = 4;
  const SyntheticData a = generate_synthetic(cfg, 3);
  const SyntheticData b = generate_synthetic(cfg, 3);
  const SyntheticData c = generate_synthetic(cfg, 4);
  EXPECT_EQ(a.corpus, b.corpus);
  EXPECT_EQ(a.pairs, b.pairs);
  EXPECT_FALSE(a.corpus == c.corpus);
}

TEST(Synthetic, ConfigValidation) {
  SynthConfig cfg;
  cfg.rate_a = {1.5};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SynthConfig{};
  cfg.num_features = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
}  // namespace dialect
