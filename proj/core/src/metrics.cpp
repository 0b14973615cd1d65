#include "dialect/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "dialect/error.hpp"
#include "dialect/io.hpp"
#include "json.hpp"

namespace dialect {

namespace {

using Json = nlohmann::ordered_json;

void check_binary(std::span<const std::uint8_t> labels) {
  for (std::uint8_t y : labels) {
    if (y > 1) throw RangeError("labels must be 0 or 1");
  }
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 hold ranks i+1..j.
    const double rank = static_cast<double>(i + 1 + j) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw LengthMismatchError("scores and labels differ in length");
  }
  check_binary(labels);
  const auto ranks = average_ranks(scores);
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      rank_sum += ranks[i];
      ++pos;
    }
  }
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) {
    throw DegenerateLabelsError("ROC-AUC needs both positive and negative labels");
  }
  const double p = static_cast<double>(pos);
  const double n = static_cast<double>(neg);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double macro_auc(const std::map<std::string, double>& per_feature) {
  if (per_feature.empty()) throw EmptyReportError("no per-feature AUCs to average");
  double sum = 0.0;
  for (const auto& [id, auc] : per_feature) sum += auc;
  return sum / static_cast<double>(per_feature.size());
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthMismatchError("spearman inputs differ in length");
  if (x.size() < 2) throw LengthMismatchError("spearman needs at least two points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mx = mean_of(rx);
  const double my = mean_of(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ConstantInputError("spearman input is constant");
  return sxy / std::sqrt(sxx * syy);
}

PopulationStats PopulationStats::of(std::span<const double> values) {
  if (values.empty()) throw EmptyPopulationError("population is empty");
  PopulationStats s;
  s.count = values.size();
  s.mean = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.variance = ss / static_cast<double>(values.size());
  return s;
}

double d_prime(const PopulationStats& a, const PopulationStats& b) {
  const double pooled = a.variance + b.variance;
  if (!(pooled > 0.0)) throw ZeroVarianceError("both populations have zero variance");
  return (a.mean - b.mean) / std::sqrt(0.5 * pooled);
}

ThresholdResult threshold_counts(std::span<const double> positives,
                                 std::span<const double> negatives, double threshold) {
  ThresholdResult r;
  r.threshold = threshold;
  for (double s : positives) r.false_negatives += s > threshold ? 0 : 1;
  for (double s : negatives) r.false_positives += s > threshold ? 1 : 0;
  const double total = static_cast<double>(positives.size() + negatives.size());
  r.accuracy = (total - static_cast<double>(r.false_positives + r.false_negatives)) / total;
  return r;
}

ThresholdResult balanced_threshold(std::span<const double> positives,
                                   std::span<const double> negatives) {
  if (positives.empty() || negatives.empty()) {
    throw EmptyPopulationError("balanced threshold needs two non-empty populations");
  }
  std::vector<double> pos(positives.begin(), positives.end());
  std::vector<double> neg(negatives.begin(), negatives.end());
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  std::vector<double> all(pos);
  all.insert(all.end(), neg.begin(), neg.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> candidates{-kInf};
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    candidates.push_back(all[i] + (all[i + 1] - all[i]) / 2.0);
  }
  candidates.push_back(kInf);

  const double total = static_cast<double>(pos.size() + neg.size());
  ThresholdResult best;
  std::size_t best_gap = std::numeric_limits<std::size_t>::max();
  for (double t : candidates) {  // ascending, so ties keep the lowest
    ThresholdResult r;
    r.threshold = t;
    r.false_negatives = static_cast<std::size_t>(
        std::upper_bound(pos.begin(), pos.end(), t) - pos.begin());
    r.false_positives = static_cast<std::size_t>(
        neg.end() - std::upper_bound(neg.begin(), neg.end(), t));
    r.accuracy =
        (total - static_cast<double>(r.false_positives + r.false_negatives)) / total;
    const std::size_t gap = r.false_positives > r.false_negatives
                                ? r.false_positives - r.false_negatives
                                : r.false_negatives - r.false_positives;
    if (gap < best_gap || (gap == best_gap && r.accuracy > best.accuracy)) {
      best = r;
      best_gap = gap;
    }
  }
  return best;
}

double cohen_kappa(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw LengthMismatchError("label vectors differ in length");
  if (a.empty()) throw LengthMismatchError("kappa needs at least one label pair");
  check_binary(a);
  check_binary(b);
  const double n = static_cast<double>(a.size());
  std::size_t agree = 0, a1 = 0, b1 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    agree += a[i] == b[i];
    a1 += a[i];
    b1 += b[i];
  }
  const double po = static_cast<double>(agree) / n;
  const double pa = static_cast<double>(a1) / n;
  const double pb = static_cast<double>(b1) / n;
  const double pe = pa * pb + (1.0 - pa) * (1.0 - pb);
  if (pe >= 1.0) throw DegenerateError("chance agreement is 1; kappa is undefined");
  return (po - pe) / (1.0 - pe);
}

double standard_deviation(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

EvalReport auc_report(std::span<const ScoredInstance> rows) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<std::uint8_t>>> by_feature;
  for (const ScoredInstance& r : rows) {
    auto& [scores, labels] = by_feature[r.feature_id];
    scores.push_back(r.score);
    labels.push_back(r.y);
  }
  EvalReport report;
  for (const auto& [id, data] : by_feature) {
    const auto& [scores, labels] = data;
    const auto positives = std::count(labels.begin(), labels.end(), std::uint8_t{1});
    if (positives == 0) {
      report.excluded[id] = "no positive test labels";
    } else if (static_cast<std::size_t>(positives) == labels.size()) {
      report.excluded[id] = "no negative test labels";
    } else {
      report.feature_auc[id] = roc_auc(scores, labels);
    }
  }
  report.macro_auc = macro_auc(report.feature_auc);
  report.run_macro_auc = {report.macro_auc};
  return report;
}

EvalReport seed_average(std::span<const EvalReport> reports) {
  if (reports.empty()) throw EmptyReportError("no reports to average");
  std::set<std::string> features;
  for (const auto& [id, auc] : reports.front().feature_auc) features.insert(id);
  for (const EvalReport& r : reports) {
    std::set<std::string> these;
    for (const auto& [id, auc] : r.feature_auc) these.insert(id);
    if (these != features) {
      throw FeatureSetMismatchError("reports were evaluated on different features");
    }
  }

  EvalReport out;
  for (const std::string& id : features) {
    std::vector<double> values;
    for (const EvalReport& r : reports) values.push_back(r.feature_auc.at(id));
    out.feature_auc[id] = mean_of(values);
    out.feature_auc_sd[id] = standard_deviation(values);
  }
  out.macro_auc = macro_auc(out.feature_auc);
  for (const EvalReport& r : reports) {
    out.run_macro_auc.push_back(r.macro_auc);
    out.seeds.insert(out.seeds.end(), r.seeds.begin(), r.seeds.end());
    out.excluded.insert(r.excluded.begin(), r.excluded.end());
  }
  out.macro_auc_sd = standard_deviation(out.run_macro_auc);

  auto average = [&](std::optional<double> EvalReport::*field) -> std::optional<double> {
    std::vector<double> values;
    for (const EvalReport& r : reports) {
      if (!(r.*field)) return std::nullopt;
      values.push_back(*(r.*field));
    }
    return mean_of(values);
  };
  out.spearman = average(&EvalReport::spearman);
  out.d_prime = average(&EvalReport::d_prime);
  out.accuracy = average(&EvalReport::accuracy);
  out.kappa = average(&EvalReport::kappa);
  return out;
}

std::string format_report(const EvalReport& report) {
  std::size_t width = std::string("Macro-AUC").size();
  for (const auto& [id, auc] : report.feature_auc) width = std::max(width, id.size());
  for (const auto& [id, why] : report.excluded) width = std::max(width, id.size());

  std::ostringstream out;
  auto row = [&](const std::string& label, const std::string& value) {
    out << label << std::string(width - label.size() + 2, ' ') << value << '\n';
  };
  const bool has_sd = !report.feature_auc_sd.empty();
  for (const auto& [id, auc] : report.feature_auc) {
    std::string value = format_fixed(auc, 3);
    if (has_sd) value += "  sd " + format_fixed(report.feature_auc_sd.at(id), 3);
    row(id, value);
  }
  for (const auto& [id, why] : report.excluded) row(id, "excluded (" + why + ")");
  std::string macro = format_fixed(report.macro_auc, 3);
  if (report.run_macro_auc.size() > 1) macro += "  sd " + format_fixed(report.macro_auc_sd, 3);
  row("Macro-AUC", macro);
  if (report.spearman) row("r", format_fixed(*report.spearman, 3));
  if (report.d_prime) row("D'", format_fixed(*report.d_prime, 3));
  if (report.accuracy) row("accuracy", format_fixed(*report.accuracy, 3));
  if (report.kappa) row("kappa", format_fixed(*report.kappa, 3));
  return out.str();
}

std::string report_record(const EvalReport& report) {
  Json j;
  j["feature_auc"] = report.feature_auc;
  j["macro_auc"] = report.macro_auc;
  if (!report.feature_auc_sd.empty()) j["feature_auc_sd"] = report.feature_auc_sd;
  j["macro_auc_sd"] = report.macro_auc_sd;
  j["run_macro_auc"] = report.run_macro_auc;
  if (report.spearman) j["spearman"] = *report.spearman;
  if (report.d_prime) j["d_prime"] = *report.d_prime;
  if (report.accuracy) j["accuracy"] = *report.accuracy;
  if (report.kappa) j["kappa"] = *report.kappa;
  j["seeds"] = report.seeds;
  j["excluded"] = report.excluded;
  return j.dump();
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw EmptyPopulationError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw RangeError("quantile level must lie in [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

BoxStats box_stats(std::span<const double> values) {
  if (values.empty()) throw EmptyPopulationError("box statistics of an empty sample");
  BoxStats b;
  b.count = values.size();
  b.q1 = quantile(values, 0.25);
  b.median = quantile(values, 0.5);
  b.q3 = quantile(values, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_low = std::numeric_limits<double>::infinity();
  b.whisker_high = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (v >= lo_fence) b.whisker_low = std::min(b.whisker_low, v);
    if (v <= hi_fence) b.whisker_high = std::max(b.whisker_high, v);
  }
  return b;
}

}  // namespace dialect
