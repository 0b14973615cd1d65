#include <gtest/gtest.h>

#include <sstream>

#include "dialect/density.hpp"
#include "dialect/error.hpp"

namespace dialect {
namespace {

// Two transcripts: t1 has 4 + 6 tokens, t2 has 5.
Corpus fixture() {
  std::vector<Example> ex{
      Example::make("e1", "I was there yesterday only.", "t1", "IN"),
      Example::make("e2", "Every year inflation is there, isn't it?", "t1", "IN"),
      Example::make("e3", "We went to the market.", "t2", "US"),
  };
  AnnotationSet ann;
  ann.add("e1", "only", Label::present);
  ann.add("e1", "tag", Label::absent);
  ann.add("e2", "only", Label::absent);
  ann.add("e2", "tag", Label::present);
  ann.add("e3", "only", Label::absent);
  ann.add("e3", "tag", Label::absent);
  return Corpus(std::move(ex), std::move(ann));
}

const std::vector<std::string> kFeatures{"only", "tag"};

TEST(Density, UtteranceLearnedIsUnthresholdedMassPerToken) {
  const FeatureScores s{{"a", 0.25}, {"b", 0.5}};
  EXPECT_DOUBLE_EQ(utterance_density_learned(s, 3), 0.25);
  EXPECT_THROW(utterance_density_learned(s, 0), ZeroTokenError);
}

TEST(Density, UtteranceRegex) {
  // only + (is there) + (isn't it) over 5 + 7 tokens, per utterance.
  EXPECT_DOUBLE_EQ(utterance_density_regex("I was there yesterday only."), 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(utterance_density_regex("Every year inflation is there, isn't it?"),
                   2.0 / 7.0);
  EXPECT_THROW(utterance_density_regex("?!"), ZeroTokenError);
}

TEST(Density, TranscriptPoolsByTokens) {
  const std::vector<UtteranceMass> parts{{1.0, 2}, {0.0, 8}};
  const DensityScore d = transcript_density("t", DensityMethod::learned, parts);
  EXPECT_DOUBLE_EQ(d.density, 0.1);
  EXPECT_EQ(d.token_count, 10u);
  EXPECT_THROW(transcript_density("t", DensityMethod::learned, {}), EmptyTranscriptError);
  const std::vector<UtteranceMass> empty{{0.0, 0}};
  EXPECT_THROW(transcript_density("t", DensityMethod::learned, empty), ZeroTokenError);
}

TEST(Density, GoldCountsPresentLabelsOverTokens) {
  const Corpus c = fixture();
  EXPECT_DOUBLE_EQ(gold_density(c, "t1", kFeatures), 2.0 / 12.0);
  EXPECT_DOUBLE_EQ(gold_density(c, "t2", kFeatures), 0.0);
  const std::vector<std::string> unknown{"other"};
  EXPECT_THROW(gold_density(c, "t1", unknown), MissingAnnotationError);
  EXPECT_THROW(gold_density(Corpus({Example::make("x", "a", "t")}), "t", kFeatures),
               MissingAnnotationError);
}

TEST(Density, OracleScorerReproducesGold) {
  const Corpus c = fixture();
  const auto learned = learned_densities(c, oracle_scorer(c, kFeatures));
  const auto gold = gold_densities(c, kFeatures);
  ASSERT_EQ(learned.size(), 2u);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    EXPECT_EQ(learned[i].unit_id, gold[i].unit_id);
    EXPECT_DOUBLE_EQ(learned[i].density, gold[i].density);
    EXPECT_EQ(learned[i].token_count, gold[i].token_count);
  }
}

TEST(Density, RegexTranscripts) {
  const auto d = regex_densities(fixture());
  ASSERT_EQ(d.size(), 2u);
  EXPECT_DOUBLE_EQ(d[0].density, 3.0 / 12.0);
  EXPECT_DOUBLE_EQ(d[1].density, 0.0);
  EXPECT_EQ(d[0].method, DensityMethod::regex);
}

TEST(Density, DetectorScorerUsesTheDetector) {
  const RegexDetector det;
  const auto d = learned_densities(fixture(), detector_scorer(det));
  EXPECT_DOUBLE_EQ(d[0].density, 3.0 / 12.0);
}

TEST(Density, JsonlRoundTrip) {
  const auto gold = gold_densities(fixture(), kFeatures);
  std::stringstream buf;
  write_densities(buf, gold);
  const auto back = parse_densities(buf);
  ASSERT_EQ(back.size(), gold.size());
  EXPECT_EQ(back[0].unit_id, "t1");
  EXPECT_EQ(back[0].method, DensityMethod::gold);
  EXPECT_DOUBLE_EQ(back[0].density, gold[0].density);
  EXPECT_THROW(density_method_from_string("psychic"), SchemaError);
}

}  // namespace
}  // namespace dialect
