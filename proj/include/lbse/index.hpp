#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lbse/encoder.hpp"

namespace lbse {

/// Ranked retrieval results; distances nondecreasing, ties broken by
/// ascending database index.
struct Neighbors {
  std::vector<std::uint32_t> ids;
  std::vector<std::uint32_t> distances;
};

/// Exact linear-scan Hamming index over packed codes with per-item labels.
/// Immutable after construction; concurrent queries are safe.
class HammingIndex {
 public:
  HammingIndex(CodeMatrix codes, std::vector<std::uint32_t> labels);

  Eigen::Index size() const { return codes_.size(); }
  Eigen::Index code_length() const { return codes_.code_length(); }
  const CodeMatrix& codes() const { return codes_; }
  const std::vector<std::uint32_t>& labels() const { return labels_; }

  /// Top-min(k, N) neighbors by (Hamming distance, index).
  Neighbors search(std::span<const std::uint64_t> query, std::size_t k) const;

  /// Majority label among the top k_vote neighbors. Ties fall back to the
  /// smaller summed distance, then to the smaller class id.
  std::uint32_t knn_classify(std::span<const std::uint64_t> query, std::size_t k_vote) const;

 private:
  CodeMatrix codes_;
  std::vector<std::uint32_t> labels_;
};

/// Voting rule shared by knn_classify and evaluation pipelines that first
/// filter the neighbor list.
std::uint32_t vote(const Neighbors& neighbors, const std::vector<std::uint32_t>& labels,
                   std::size_t k_vote);

}  // namespace lbse
