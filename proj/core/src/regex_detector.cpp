#include <array>
#include <iterator>
#include <regex>

#include "dialect/recognizers.hpp"

namespace dialect {

namespace {

const std::array<RegexRule, 5> kRules{{
    {"focus_itself", "focus itself", R"(\bitself\b)"},
    {"focus_only", "focus only", R"(\bonly\b)"},
    {"non_initial_existential", "non-initial existential",
     R"(\bis there\b|\bare there\b)"},
    {"invariant_tag", "invariant tag", R"(\bisn't it\b|\bis it\b|\bno\b|\bna\b)"},
    {"and_all", "quotative and all", R"(\band all\b)"},
}};

const std::vector<std::regex>& compiled() {
  static const std::vector<std::regex> patterns = [] {
    std::vector<std::regex> out;
    for (const RegexRule& r : kRules) {
      out.emplace_back(r.pattern, std::regex::ECMAScript | std::regex::icase |
                                      std::regex::optimize);
    }
    return out;
  }();
  return patterns;
}

}  // namespace

std::span<const RegexRule> regex_rules() { return kRules; }

std::vector<RegexMatch> regex_detect(std::string_view text) {
  const auto& patterns = compiled();
  std::vector<RegexMatch> out;
  out.reserve(kRules.size());
  for (std::size_t i = 0; i < kRules.size(); ++i) {
    const auto count = static_cast<std::size_t>(std::distance(
        std::cregex_iterator(text.data(), text.data() + text.size(), patterns[i]),
        std::cregex_iterator()));
    out.push_back({kRules[i].feature_id, count, count > 0});
  }
  return out;
}

std::size_t regex_match_total(std::string_view text) {
  std::size_t total = 0;
  for (const RegexMatch& m : regex_detect(text)) total += m.count;
  return total;
}

FeatureScores RegexDetector::score(std::string_view text) const {
  FeatureScores out;
  for (const RegexMatch& m : regex_detect(text)) out[m.feature_id] = m.present ? 1.0 : 0.0;
  return out;
}

std::vector<std::string> RegexDetector::feature_ids() const {
  std::vector<std::string> ids;
  for (const RegexRule& r : kRules) ids.push_back(r.feature_id);
  return ids;
}

}  // namespace dialect
