#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "lbse/error.hpp"

namespace lbse {

/// Label-induced pairwise similarity: entry (i, j) is +1 when labels match
/// and -1 otherwise, so the diagonal is +1 and the matrix is symmetric.
///
/// The matrix is never materialized beyond a configurable size cap. Products
/// against it use the single-label factorization
///   M * S = 2 * (per-class column sums broadcast to members) - (M * 1) * 1^T
/// which costs O(L * N) instead of O(L * N^2).
class SimilarityOracle {
 public:
  explicit SimilarityOracle(std::vector<std::uint32_t> labels, std::uint32_t num_classes,
                            Eigen::Index max_dense = 2048);

  Eigen::Index size() const { return static_cast<Eigen::Index>(labels_.size()); }
  std::uint32_t num_classes() const { return num_classes_; }
  const std::vector<std::uint32_t>& labels() const { return labels_; }

  /// S[i][j] without forming S.
  int entry(Eigen::Index i, Eigen::Index j) const;

  /// M * S for an L x N matrix M, assembled in column blocks of the given
  /// width. The result is independent of the block schedule.
  Eigen::MatrixXd right_multiply(const Eigen::MatrixXd& m, Eigen::Index block = 512) const;

  /// Fully materialized S; refused above the max_dense cap. Intended for
  /// testing against the factorized path.
  Eigen::MatrixXd dense() const;

 private:
  std::vector<std::uint32_t> labels_;
  std::uint32_t num_classes_;
  Eigen::Index max_dense_;
};

}  // namespace lbse
