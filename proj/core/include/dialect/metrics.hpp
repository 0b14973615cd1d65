#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dialect {

// P(score+ > score-) + 0.5 P(score+ == score-), computed from average ranks.
// Throws DegenerateLabelsError unless both classes occur.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Unweighted mean. Throws EmptyReportError on an empty mapping.
double macro_auc(const std::map<std::string, double>& per_feature);

// 1-based ranks; tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

struct PopulationStats {
  double mean = 0.0;
  double variance = 0.0;  // population variance
  std::size_t count = 0;

  // Throws EmptyPopulationError for empty input.
  static PopulationStats of(std::span<const double> values);
};

// (mu_a - mu_b) / sqrt((var_a + var_b) / 2)
double d_prime(const PopulationStats& a, const PopulationStats& b);

struct ThresholdResult {
  double threshold = 0.0;
  double accuracy = 0.0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
};

// Scores above the threshold are predicted positive. Candidates are the
// midpoints between adjacent distinct scores plus -inf and +inf; the chosen
// one minimizes |FP - FN|, then maximizes accuracy, then is the lowest.
ThresholdResult balanced_threshold(std::span<const double> positives,
                                   std::span<const double> negatives);
// Counts at an arbitrary threshold, for checking the search.
ThresholdResult threshold_counts(std::span<const double> positives,
                                 std::span<const double> negatives, double threshold);

double cohen_kappa(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

// Sample standard deviation (n - 1); 0 for a single value.
double standard_deviation(std::span<const double> values);

struct EvalReport {
  std::map<std::string, double> feature_auc;
  double macro_auc = 0.0;
  // Filled by seed_average.
  std::map<std::string, double> feature_auc_sd;
  double macro_auc_sd = 0.0;
  std::vector<double> run_macro_auc;

  std::optional<double> spearman;
  std::optional<double> d_prime;
  std::optional<double> accuracy;
  std::optional<double> kappa;
  std::vector<std::uint64_t> seeds;
  std::map<std::string, std::string> excluded;  // feature -> reason
};

struct ScoredInstance {
  std::string feature_id;
  double score = 0.0;
  std::uint8_t y = 0;
};

// Per-feature AUCs and their macro mean. Features whose labels are all one
// class are listed in excluded instead.
EvalReport auc_report(std::span<const ScoredInstance> rows);

// Averages per-feature AUCs across runs, recomputes macro-AUC from the means,
// and records standard deviations. Throws FeatureSetMismatchError when the
// runs disagree on features.
EvalReport seed_average(std::span<const EvalReport> reports);

// Aligned human-readable table.
std::string format_report(const EvalReport& report);
// One JSON object on a single line.
std::string report_record(const EvalReport& report);

struct BoxStats {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;   // smallest value >= q1 - 1.5 IQR
  double whisker_high = 0.0;  // largest value <= q3 + 1.5 IQR
  std::size_t count = 0;
};

// Quartiles by linear interpolation between order statistics.
double quantile(std::span<const double> values, double q);
BoxStats box_stats(std::span<const double> values);

}  // namespace dialect
