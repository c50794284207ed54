#pragma once

#include <cstdint>
#include <vector>

#include "lbse/index.hpp"
#include "lbse/metrics.hpp"

namespace lbse {

struct EvalOptions {
  std::size_t depth = 99;  // retrieval truncation for mAP and precision@K
  std::size_t k_vote = 5;  // neighbors consulted for classification
  bool exclude_self = false;  // drop database item i for query i (self-retrieval runs)
  std::vector<std::size_t> precision_ks = {1, 5, 10, 99};
  bool per_query = false;
};

/// Full retrieval + classification evaluation of a query code set against a
/// database index: kNN-vote labels for OA/Sen/PPV/F1 and same-class
/// relevance for mAP and precision@K.
MetricsReport evaluate_retrieval(const HammingIndex& index, const CodeMatrix& query_codes,
                                 const std::vector<std::uint32_t>& query_labels,
                                 std::uint32_t num_classes, const EvalOptions& options = {});

}  // namespace lbse
