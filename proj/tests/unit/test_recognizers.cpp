#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "dialect/error.hpp"
#include "dialect/recognizers.hpp"

namespace dialect {
namespace {

std::set<std::string> fired(std::string_view text) {
  std::set<std::string> out;
  for (const RegexMatch& m : regex_detect(text)) {
    if (m.present) out.insert(m.feature_id);
  }
  return out;
}

TEST(Regex, FiveRulesInFixedOrder) {
  const auto rules = regex_rules();
  ASSERT_EQ(rules.size(), 5u);
  EXPECT_EQ(rules[0].feature_id, "focus_itself");
  EXPECT_EQ(rules[4].pattern, R"(\band all\b)");
}

TEST(Regex, TableExamples) {
  using S = std::set<std::string>;
  EXPECT_EQ(fired("he is doing engineering in Delhi itself"), S{"focus_itself"});
  EXPECT_EQ(fired("I was there yesterday only"), S{"focus_only"});
  EXPECT_EQ(fired("every year inflation is there"), S{"non_initial_existential"});
  EXPECT_EQ(fired("the children are outside, isn't it?"), S{"invariant_tag"});
  EXPECT_EQ(fired("then she did her schooling and all"), S{"and_all"});
  EXPECT_EQ(fired("chair is black"), S{});
}

TEST(Regex, WordBoundariesAndCase) {
  EXPECT_TRUE(fired("Nothing here is onlyish").empty());
  EXPECT_EQ(fired("ONLY this"), std::set<std::string>{"focus_only"});
  EXPECT_EQ(fired("no, na, is it"), std::set<std::string>{"invariant_tag"});
  const auto m = regex_detect("no, na, is it");
  EXPECT_EQ(m[3].count, 3u);
  EXPECT_EQ(regex_match_total("only only and all"), 3u);
}

TEST(Regex, DetectorScoresAreBinary) {
  const RegexDetector det;
  const FeatureScores s = det.score("I came today only, isn't it?");
  EXPECT_EQ(s.size(), 5u);
  EXPECT_EQ(s.at("focus_only"), 1.0);
  EXPECT_EQ(s.at("invariant_tag"), 1.0);
  EXPECT_EQ(s.at("and_all"), 0.0);
}

TEST(HyperParams, Validation) {
  HyperParams hp;
  hp.batch_size = 0;
  EXPECT_THROW(hp.validate(), HyperParamError);
  hp = HyperParams{};
  hp.learning_rate = 0.0;
  EXPECT_THROW(hp.validate(), HyperParamError);
  EXPECT_DOUBLE_EQ(HyperParams::defaults_for(EncoderKind::tiny).learning_rate, 1e-3);
  EXPECT_DOUBLE_EQ(HyperParams::defaults_for(EncoderKind::external).learning_rate, 1e-5);
}

TEST(Sigmoid, StableAtExtremes) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
}

MultitaskDataset toy() {
  std::vector<LabeledInstance> v;
  const char* pos[] = {"we met here only", "he came today only", "they left early only",
                       "she sings well only"};
  const char* neg[] = {"we met here", "he came today", "they left early", "she sings well"};
  for (const char* t : pos) {
    v.push_back({t, "focus_only", 1});
    v.push_back({t, "copula", 0});
  }
  for (const char* t : neg) {
    v.push_back({t, "focus_only", 0});
    v.push_back({t, "copula", static_cast<std::uint8_t>(std::string(t).size() % 2)});
  }
  return MultitaskDataset(std::move(v), Provenance::pairs);
}

FeatureCatalog toy_catalog() {
  return FeatureCatalog({{"focus_only", "focus only", "emphatic only", {}},
                         {"copula", "copula omission", "missing be", {}}});
}

HyperParams quick() {
  HyperParams hp;
  hp.epochs = 60;
  hp.batch_size = 4;
  hp.learning_rate = 1e-2;
  hp.seed = 5;
  return hp;
}

EncoderSpec small_spec() {
  EncoderSpec spec;
  spec.dimension = 16;
  return spec;
}

TEST(Multihead, LearnsLexicalMarkerAndLossFalls) {
  const MultiheadModel m = train_multihead(toy(), small_spec(), quick());
  const auto& loss = m.trace().epoch_loss;
  ASSERT_EQ(loss.size(), 60u);
  EXPECT_LT(loss.back(), loss.front());
  EXPECT_GT(m.score("we met here only").at("focus_only"),
            m.score("we met here").at("focus_only"));
  const std::vector<std::string> missing{"nope"};
  EXPECT_THROW(m.score("x", missing), UnknownFeatureError);
}

TEST(Multihead, SameSeedSameModel) {
  const MultiheadModel a = train_multihead(toy(), small_spec(), quick());
  const MultiheadModel b = train_multihead(toy(), small_spec(), quick());
  EXPECT_EQ(a.encoder().parameters(), b.encoder().parameters());
  EXPECT_EQ(a.heads(), b.heads());
}

TEST(Multihead, SaveLoadGivesIdenticalScores) {
  const auto dir = std::filesystem::temp_directory_path() / "dialect_multihead_rt";
  std::filesystem::remove_all(dir);
  const MultiheadModel m = train_multihead(toy(), small_spec(), quick());
  m.save(dir);
  EXPECT_EQ(model_architecture(dir), "multihead");
  const MultiheadModel back = MultiheadModel::load(dir);
  EXPECT_EQ(back.score("he came today only"), m.score("he came today only"));
  const auto det = load_detector(dir);
  EXPECT_EQ(det->score("she sings well"), m.score("she sings well"));
  std::filesystem::remove_all(dir);
}

TEST(Multihead, RejectsEmptyData) {
  EXPECT_THROW(train_multihead(MultitaskDataset{}, small_spec(), quick()), EmptyDatasetError);
}

TEST(Daml, PrefixPolicies) {
  const Feature f{"x", "focus only", "emphatic only", {}};
  EXPECT_EQ(feature_prefix(f, PrefixPolicy::name), "focus only");
  EXPECT_EQ(feature_prefix(f, PrefixPolicy::name_description), "focus only emphatic only");
  EXPECT_EQ(prefix_policy_from_string("name+description"), PrefixPolicy::name_description);
}

TEST(Daml, TrainsScoresUnseenFeaturesAndRoundTrips) {
  const DamlModel m = train_daml(toy(), toy_catalog(), small_spec(), quick());
  EXPECT_GT(m.score("we met here only").at("focus_only"),
            m.score("we met here").at("focus_only"));
  const double unseen = m.score("we met here only", "brand new feature");
  EXPECT_GE(unseen, 0.0);
  EXPECT_LE(unseen, 1.0);

  const auto dir = std::filesystem::temp_directory_path() / "dialect_daml_rt";
  std::filesystem::remove_all(dir);
  m.save(dir);
  EXPECT_EQ(model_architecture(dir), "daml");
  EXPECT_EQ(DamlModel::load(dir).score("he came today"), m.score("he came today"));
  std::filesystem::remove_all(dir);
}

TEST(DocClassifier, SeparatesLocalesAndRejectsOverlap) {
  std::vector<Example> a, b;
  for (int i = 0; i < 8; ++i) {
    a.push_back(Example::make("a" + std::to_string(i), "we go there only na", "ta", "IN"));
    b.push_back(Example::make("b" + std::to_string(i), "we go there", "tb", "US"));
  }
  const Corpus ca(a), cb(b);
  const DocClassifier clf = train_docclf(ca, cb, small_spec(), quick());
  EXPECT_EQ(clf.positive_locale(), "IN");
  EXPECT_EQ(clf.negative_locale(), "US");
  EXPECT_GT(clf.probability("we go there only na"), clf.probability("we go there"));
  EXPECT_THROW(train_docclf(ca, ca, small_spec(), quick()), LocaleOverlapError);

  const auto dir = std::filesystem::temp_directory_path() / "dialect_docclf_rt";
  std::filesystem::remove_all(dir);
  clf.save(dir);
  EXPECT_EQ(DocClassifier::load(dir).probability("we go"), clf.probability("we go"));
  EXPECT_THROW(load_detector(dir), ArtifactError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace dialect
