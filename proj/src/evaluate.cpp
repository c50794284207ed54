#include "lbse/evaluate.hpp"

#include <algorithm>

namespace lbse {

MetricsReport evaluate_retrieval(const HammingIndex& index, const CodeMatrix& query_codes,
                                 const std::vector<std::uint32_t>& query_labels,
                                 std::uint32_t num_classes, const EvalOptions& options) {
  require(index.size() > 0, ErrorCode::EmptyIndex, "database index is empty");
  require(query_codes.size() > 0, ErrorCode::EmptyIndex, "query set is empty");
  require(query_labels.size() == static_cast<std::size_t>(query_codes.size()),
          ErrorCode::LengthMismatch, "query labels must match query count");
  require(query_codes.code_length() == index.code_length(), ErrorCode::LengthMismatch,
          "query and database code lengths differ");
  require(options.depth >= 1 && options.k_vote >= 1, ErrorCode::ConfigViolation,
          "depth and k_vote must be at least 1");

  const std::size_t want = std::max(options.depth, options.k_vote) + (options.exclude_self ? 1 : 0);

  std::vector<std::uint32_t> predicted;
  predicted.reserve(static_cast<std::size_t>(query_codes.size()));
  std::vector<std::vector<std::uint8_t>> relevance;
  relevance.reserve(static_cast<std::size_t>(query_codes.size()));

  for (Eigen::Index qi = 0; qi < query_codes.size(); ++qi) {
    Neighbors neighbors = index.search(query_codes.code(qi), want);
    if (options.exclude_self) {
      for (std::size_t r = 0; r < neighbors.ids.size(); ++r) {
        if (neighbors.ids[r] == static_cast<std::uint32_t>(qi)) {
          neighbors.ids.erase(neighbors.ids.begin() + static_cast<std::ptrdiff_t>(r));
          neighbors.distances.erase(neighbors.distances.begin() + static_cast<std::ptrdiff_t>(r));
          break;
        }
      }
    }

    predicted.push_back(vote(neighbors, index.labels(), options.k_vote));

    const std::size_t depth_here = std::min(options.depth, neighbors.ids.size());
    std::vector<std::uint8_t> rel(depth_here);
    for (std::size_t r = 0; r < depth_here; ++r)
      rel[r] = index.labels()[neighbors.ids[r]] ==
                       query_labels[static_cast<std::size_t>(qi)]
                   ? 1
                   : 0;
    relevance.push_back(std::move(rel));
  }

  MetricsReport report = classification_metrics(predicted, query_labels, num_classes);
  report.map = mean_average_precision(relevance, options.depth);
  for (const auto k : options.precision_ks) {
    double sum = 0.0;
    for (const auto& rel : relevance) sum += precision_at_k(rel, k);
    report.precision_at_k.emplace_back(k, sum / static_cast<double>(relevance.size()));
  }
  if (options.per_query) {
    report.per_query.reserve(relevance.size());
    for (std::size_t qi = 0; qi < relevance.size(); ++qi)
      report.per_query.push_back({qi, query_labels[qi], predicted[qi],
                                  average_precision(relevance[qi], options.depth)});
  }
  return report;
}

}  // namespace lbse
