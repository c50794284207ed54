#include "lbse/similarity.hpp"

#include <algorithm>
#include <string>

namespace lbse {

SimilarityOracle::SimilarityOracle(std::vector<std::uint32_t> labels, std::uint32_t num_classes,
                                   Eigen::Index max_dense)
    : labels_(std::move(labels)), num_classes_(num_classes), max_dense_(max_dense) {
  require(!labels_.empty(), ErrorCode::DimensionMismatch, "similarity needs at least one label");
  require(num_classes_ >= 1, ErrorCode::ConfigViolation, "num_classes must be positive");
  for (const auto label : labels_)
    require(label < num_classes_, ErrorCode::LabelOutOfRange,
            "label " + std::to_string(label) + " out of range");
}

int SimilarityOracle::entry(Eigen::Index i, Eigen::Index j) const {
  require(i >= 0 && i < size() && j >= 0 && j < size(), ErrorCode::IndexOutOfRange,
          "similarity index out of range");
  return labels_[static_cast<std::size_t>(i)] == labels_[static_cast<std::size_t>(j)] ? 1 : -1;
}

Eigen::MatrixXd SimilarityOracle::right_multiply(const Eigen::MatrixXd& m,
                                                 Eigen::Index block) const {
  require(m.cols() == size(), ErrorCode::DimensionMismatch,
          "right_multiply expects as many columns as labels");
  require(block >= 1, ErrorCode::ConfigViolation, "block width must be positive");

  // class_sums.col(c) = sum of m's columns belonging to class c
  Eigen::MatrixXd class_sums = Eigen::MatrixXd::Zero(m.rows(), num_classes_);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    class_sums.col(labels_[static_cast<std::size_t>(j)]) += m.col(j);
  const Eigen::VectorXd total = class_sums.rowwise().sum();

  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index start = 0; start < m.cols(); start += block) {
    const Eigen::Index width = std::min(block, m.cols() - start);
    for (Eigen::Index j = start; j < start + width; ++j)
      out.col(j) = 2.0 * class_sums.col(labels_[static_cast<std::size_t>(j)]) - total;
  }
  return out;
}

Eigen::MatrixXd SimilarityOracle::dense() const {
  require(size() <= max_dense_, ErrorCode::ConfigViolation,
          "dense similarity refused for N > " + std::to_string(max_dense_));
  Eigen::MatrixXd s(size(), size());
  for (Eigen::Index i = 0; i < size(); ++i)
    for (Eigen::Index j = 0; j < size(); ++j)
      s(i, j) = labels_[static_cast<std::size_t>(i)] == labels_[static_cast<std::size_t>(j)]
                    ? 1.0
                    : -1.0;
  return s;
}

}  // namespace lbse
