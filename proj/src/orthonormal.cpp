#include "lbse/detail/orthonormal.hpp"

#include <random>

#include "lbse/detail/rng.hpp"

namespace lbse::detail {

namespace {

void project_out(Eigen::Ref<Eigen::VectorXd> v, const Eigen::MatrixXd* basis,
                 const Eigen::VectorXd* unit_extra, const Eigen::MatrixXd& prior,
                 Eigen::Index prior_count) {
  if (unit_extra) v -= unit_extra->dot(v) * (*unit_extra);
  if (basis && basis->cols() > 0) v -= (*basis) * (basis->transpose() * v);
  if (prior_count > 0) {
    const auto done = prior.leftCols(prior_count);
    v -= done * (done.transpose() * v);
  }
}

}  // namespace

bool orthonormalize_columns(Eigen::MatrixXd& columns, const Eigen::MatrixXd* basis,
                            const Eigen::VectorXd* unit_extra, double collapse_tol) {
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    for (int pass = 0; pass < 2; ++pass)
      project_out(columns.col(c), basis, unit_extra, columns, c);
    const double norm = columns.col(c).norm();
    if (norm < collapse_tol) return false;
    columns.col(c) /= norm;
  }
  return true;
}

std::optional<Eigen::MatrixXd> random_orthonormal_complement(Eigen::Index rows, Eigen::Index count,
                                                             const Eigen::MatrixXd* basis,
                                                             const Eigen::VectorXd* unit_extra,
                                                             std::uint64_t seed, int max_redraws) {
  Eigen::MatrixXd result(rows, count);
  if (count == 0) return result;
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  int redraws = 0;
  for (Eigen::Index c = 0; c < count;) {
    for (Eigen::Index r = 0; r < rows; ++r) result(r, c) = gauss(rng);
    for (int pass = 0; pass < 2; ++pass)
      project_out(result.col(c), basis, unit_extra, result, c);
    const double norm = result.col(c).norm();
    // a fresh Gaussian direction projected onto the complement keeps a norm
    // of order sqrt(remaining dimensions); anything tiny signals degeneracy
    if (norm < 1e-6 * std::sqrt(static_cast<double>(rows))) {
      if (++redraws > max_redraws) return std::nullopt;
      continue;
    }
    result.col(c) /= norm;
    ++c;
  }
  return result;
}

}  // namespace lbse::detail
