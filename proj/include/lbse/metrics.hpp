#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lbse/error.hpp"

namespace lbse {

/// Per-class confusion counts over a query set. For every class,
/// tp + fp + fn + tn equals the number of queries.
struct ConfusionCounts {
  std::vector<std::size_t> tp, fp, fn, tn;
  std::size_t total = 0;
};

struct QueryDetail {
  std::size_t query = 0;
  std::uint32_t truth = 0;
  std::uint32_t predicted = 0;
  double average_precision = 0.0;
};

struct MetricsReport {
  double oa = 0.0;           // overall accuracy
  double sensitivity = 0.0;  // macro-averaged recall
  double ppv = 0.0;          // macro-averaged precision
  double f1 = 0.0;           // harmonic mean of the two macro averages
  double map = 0.0;          // mean average precision at the retrieval depth
  std::vector<std::pair<std::size_t, double>> precision_at_k;
  std::vector<QueryDetail> per_query;
};

ConfusionCounts confusion_counts(const std::vector<std::uint32_t>& predicted,
                                 const std::vector<std::uint32_t>& truth,
                                 std::uint32_t num_classes);

/// OA plus macro-averaged sensitivity/PPV/F1. Classes with an empty
/// denominator are excluded from the corresponding macro mean. When
/// positive_class is set, sensitivity/PPV/F1 come from that class alone
/// (standard binary convention).
MetricsReport classification_metrics(const std::vector<std::uint32_t>& predicted,
                                     const std::vector<std::uint32_t>& truth,
                                     std::uint32_t num_classes,
                                     std::optional<std::uint32_t> positive_class = std::nullopt);

/// Average precision of one ranked relevance vector truncated at depth,
/// normalized by the number of relevant items within the depth; zero when
/// nothing relevant appears.
double average_precision(const std::vector<std::uint8_t>& relevance_ranked, std::size_t depth);

/// Mean of average_precision over queries.
double mean_average_precision(const std::vector<std::vector<std::uint8_t>>& per_query_relevance,
                              std::size_t depth);

/// Fraction of relevant items in the top min(k, returned) ranks; divides by
/// the shorter of the two, never counting missing ranks as misses.
double precision_at_k(const std::vector<std::uint8_t>& relevance_ranked, std::size_t k);

std::string to_json(const MetricsReport& report);

/// Flat "metric,value" rows for plot ingestion.
std::string to_csv(const MetricsReport& report);

}  // namespace lbse
