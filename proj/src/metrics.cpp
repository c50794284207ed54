#include "lbse/metrics.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace lbse {

ConfusionCounts confusion_counts(const std::vector<std::uint32_t>& predicted,
                                 const std::vector<std::uint32_t>& truth,
                                 std::uint32_t num_classes) {
  require(predicted.size() == truth.size(), ErrorCode::LengthMismatch,
          "predicted and truth lengths differ");
  require(!truth.empty(), ErrorCode::LengthMismatch, "cannot score an empty query set");
  require(num_classes >= 1, ErrorCode::ConfigViolation, "num_classes must be positive");

  ConfusionCounts counts;
  counts.total = truth.size();
  counts.tp.assign(num_classes, 0);
  counts.fp.assign(num_classes, 0);
  counts.fn.assign(num_classes, 0);
  counts.tn.assign(num_classes, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] < num_classes && predicted[i] < num_classes, ErrorCode::LabelOutOfRange,
            "class id out of range");
    if (predicted[i] == truth[i]) {
      counts.tp[truth[i]] += 1;
    } else {
      counts.fn[truth[i]] += 1;
      counts.fp[predicted[i]] += 1;
    }
  }
  for (std::uint32_t c = 0; c < num_classes; ++c)
    counts.tn[c] = counts.total - counts.tp[c] - counts.fp[c] - counts.fn[c];
  return counts;
}

MetricsReport classification_metrics(const std::vector<std::uint32_t>& predicted,
                                     const std::vector<std::uint32_t>& truth,
                                     std::uint32_t num_classes,
                                     std::optional<std::uint32_t> positive_class) {
  const auto counts = confusion_counts(predicted, truth, num_classes);

  MetricsReport report;
  std::size_t correct = 0;
  for (std::uint32_t c = 0; c < num_classes; ++c) correct += counts.tp[c];
  report.oa = static_cast<double>(correct) / static_cast<double>(counts.total);

  const auto class_sensitivity = [&](std::uint32_t c) -> std::optional<double> {
    const auto denom = counts.tp[c] + counts.fn[c];
    if (denom == 0) return std::nullopt;
    return static_cast<double>(counts.tp[c]) / static_cast<double>(denom);
  };
  const auto class_ppv = [&](std::uint32_t c) -> std::optional<double> {
    const auto denom = counts.tp[c] + counts.fp[c];
    if (denom == 0) return std::nullopt;
    return static_cast<double>(counts.tp[c]) / static_cast<double>(denom);
  };

  if (positive_class) {
    require(*positive_class < num_classes, ErrorCode::LabelOutOfRange,
            "positive class out of range");
    report.sensitivity = class_sensitivity(*positive_class).value_or(0.0);
    report.ppv = class_ppv(*positive_class).value_or(0.0);
  } else {
    double sen_sum = 0, ppv_sum = 0;
    std::size_t sen_n = 0, ppv_n = 0;
    for (std::uint32_t c = 0; c < num_classes; ++c) {
      if (const auto s = class_sensitivity(c)) sen_sum += *s, ++sen_n;
      if (const auto p = class_ppv(c)) ppv_sum += *p, ++ppv_n;
    }
    report.sensitivity = sen_n ? sen_sum / static_cast<double>(sen_n) : 0.0;
    report.ppv = ppv_n ? ppv_sum / static_cast<double>(ppv_n) : 0.0;
  }
  const double denom = report.sensitivity + report.ppv;
  report.f1 = denom > 0 ? 2.0 * report.sensitivity * report.ppv / denom : 0.0;
  return report;
}

double average_precision(const std::vector<std::uint8_t>& relevance_ranked, std::size_t depth) {
  require(depth >= 1, ErrorCode::ConfigViolation, "depth must be at least 1");
  const std::size_t limit = std::min(depth, relevance_ranked.size());
  std::size_t hits = 0;
  double precision_sum = 0.0;
  for (std::size_t rank = 1; rank <= limit; ++rank) {
    if (relevance_ranked[rank - 1]) {
      ++hits;
      precision_sum += static_cast<double>(hits) / static_cast<double>(rank);
    }
  }
  return hits ? precision_sum / static_cast<double>(hits) : 0.0;
}

double mean_average_precision(const std::vector<std::vector<std::uint8_t>>& per_query_relevance,
                              std::size_t depth) {
  require(!per_query_relevance.empty(), ErrorCode::LengthMismatch,
          "mean average precision needs at least one query");
  double sum = 0.0;
  for (const auto& relevance : per_query_relevance) sum += average_precision(relevance, depth);
  return sum / static_cast<double>(per_query_relevance.size());
}

double precision_at_k(const std::vector<std::uint8_t>& relevance_ranked, std::size_t k) {
  require(k >= 1, ErrorCode::ConfigViolation, "k must be at least 1");
  const std::size_t limit = std::min(k, relevance_ranked.size());
  if (limit == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < limit; ++r) hits += relevance_ranked[r] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(limit);
}

std::string to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["oa"] = report.oa;
  j["sensitivity"] = report.sensitivity;
  j["ppv"] = report.ppv;
  j["f1"] = report.f1;
  j["map"] = report.map;
  auto& pk = j["precision_at_k"] = nlohmann::json::array();
  for (const auto& [k, value] : report.precision_at_k) pk.push_back({{"k", k}, {"value", value}});
  if (!report.per_query.empty()) {
    auto& rows = j["per_query"] = nlohmann::json::array();
    for (const auto& row : report.per_query)
      rows.push_back({{"query", row.query},
                      {"truth", row.truth},
                      {"predicted", row.predicted},
                      {"average_precision", row.average_precision}});
  }
  return j.dump(2);
}

std::string to_csv(const MetricsReport& report) {
  std::ostringstream out;
  out.precision(10);
  out << "metric,value\n";
  out << "oa," << report.oa << '\n';
  out << "sensitivity," << report.sensitivity << '\n';
  out << "ppv," << report.ppv << '\n';
  out << "f1," << report.f1 << '\n';
  out << "map," << report.map << '\n';
  for (const auto& [k, value] : report.precision_at_k)
    out << "p_at_" << k << ',' << value << '\n';
  return out.str();
}

}  // namespace lbse
