#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>
#include <tuple>

#include "dialect/error.hpp"
#include "dialect/pairgen.hpp"

namespace dialect {
namespace {

const std::filesystem::path kData = std::filesystem::path(DIALECT_SOURCE_DIR) / "data";

using Row = std::tuple<int, std::string, std::string>;

std::set<Row> rows(const MultitaskDataset& d) {
  std::set<Row> out;
  for (const auto& i : d.instances()) out.emplace(i.y, i.feature_id, i.text);
  return out;
}

TEST(ExpandPairs, FigureFixture) {
  const FeatureCatalog catalog = load_catalog(kData / "figure_catalog.jsonl");
  const MinimalPairSet pairs = load_pairs(kData / "figure_pairs.jsonl", catalog);
  const MultitaskDataset d = expand_pairs(pairs, catalog);

  const std::set<Row> expected{
      {1, "article_omission", "Chair is black."},
      {0, "focus_only", "Chair is black."},
      {0, "article_omission", "The chair is black."},
      {0, "focus_only", "The chair is black."},
      {0, "article_omission", "I was there yesterday only."},
      {1, "focus_only", "I was there yesterday only."},
      {0, "article_omission", "I was there just yesterday."},
      {0, "focus_only", "I was there just yesterday."},
  };
  EXPECT_EQ(rows(d), expected);
  EXPECT_EQ(d.size(), expected.size());
  EXPECT_EQ(d.provenance(), Provenance::pairs);
}

TEST(ExpandPairs, SizeIsTextsTimesFeatures) {
  const FeatureCatalog catalog = load_catalog(kData / "catalog_lange.jsonl");
  const MinimalPairSet pairs = load_pairs(kData / "pairs_lange.jsonl", catalog);
  const MultitaskDataset d = expand_pairs(pairs, catalog);
  EXPECT_EQ(d.texts().size(), 113u);
  EXPECT_EQ(d.size(), 113u * 10u);
  std::size_t total = 0;
  for (const auto& [f, c] : d.counts()) total += c.positives + c.negatives;
  EXPECT_EQ(total, d.size());
}

TEST(ExpandPairs, CrossFeaturePresenceLabelsOtherFeatures) {
  const FeatureCatalog catalog = load_catalog(kData / "catalog_lange.jsonl");
  const MinimalPairSet pairs = load_pairs(kData / "pairs_lange.jsonl", catalog);
  const MultitaskDataset d = expand_pairs(pairs, catalog);
  const auto r = rows(d);
  EXPECT_TRUE(r.contains({1, "left_dislocation", "My brother, he lives in California."}));
  EXPECT_TRUE(r.contains({1, "resumptive_subject", "My brother, he lives in California."}));
  EXPECT_TRUE(r.contains({0, "copula_omission", "My brother, he lives in California."}));
}

TEST(ExpandPairs, SharedTextAcrossPairsIsExpandedOnce) {
  const FeatureCatalog catalog({{"a", "a", "", {}}, {"b", "b", "", {}}});
  const MinimalPairSet pairs{
      {"a", {"x y"}, {"x"}, {}},
      {"b", {"x z"}, {"x"}, {}},
  };
  const MultitaskDataset d = expand_pairs(pairs, catalog);
  EXPECT_EQ(d.texts().size(), 3u);
  EXPECT_EQ(d.size(), 6u);
}

MultitaskDataset pool() {
  std::vector<LabeledInstance> v;
  for (int i = 0; i < 40; ++i) {
    const std::string t = "text " + std::to_string(i);
    v.push_back({t, "a", static_cast<std::uint8_t>(i % 4 == 0)});
    v.push_back({t, "b", static_cast<std::uint8_t>(i % 5 == 0)});
  }
  return MultitaskDataset(std::move(v), Provenance::corpus);
}

TEST(Stratified, MatchesTargetCountsExactly) {
  const std::map<std::string, ClassCounts> target{{"a", {3, 7}}, {"b", {2, 5}}};
  const MultitaskDataset s = stratified_sample(pool(), target, 11);
  EXPECT_EQ(s.counts(), target);
  EXPECT_EQ(s.provenance(), Provenance::stratified);
  EXPECT_EQ(rows(s), rows(stratified_sample(pool(), target, 11)));
}

TEST(Stratified, ReportsShortfall) {
  const std::map<std::string, ClassCounts> target{{"a", {50, 1}}};
  try {
    stratified_sample(pool(), target, 1);
    FAIL() << "expected InsufficientDataError";
  } catch (const InsufficientDataError& e) {
    EXPECT_EQ(e.feature_id(), "a");
    EXPECT_EQ(e.polarity(), "positive");
    EXPECT_EQ(e.shortfall(), 40u);
  }
}

TEST(Subsample, KeepsWholeTexts) {
  const MultitaskDataset s = subsample(pool(), 7, 5);
  EXPECT_EQ(s.texts().size(), 7u);
  EXPECT_EQ(s.size(), 14u);
  EXPECT_THROW(subsample(pool(), 41, 5), RangeError);
}

TEST(Instances, RoundTrip) {
  const MultitaskDataset d = pool();
  std::stringstream buf;
  write_instances(buf, d);
  const MultitaskDataset back = parse_instances(buf, Provenance::corpus);
  EXPECT_TRUE(std::equal(d.instances().begin(), d.instances().end(),
                         back.instances().begin(), back.instances().end()));
}

TEST(Dataset, RejectsRepeatedTextFeaturePairs) {
  EXPECT_THROW(MultitaskDataset({{"x", "a", 1}, {"x", "a", 0}}, Provenance::corpus),
               DuplicateIdError);
}

}  // namespace
}  // namespace dialect
