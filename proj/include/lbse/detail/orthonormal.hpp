#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>

namespace lbse::detail {

// Modified Gram-Schmidt with re-orthogonalization, in column order. Each
// column is orthogonalized against `unit_extra` (assumed unit norm when
// present), the columns of `basis` (assumed orthonormal when present) and all
// previously processed columns, then normalized. Returns false when a column
// collapses below the tolerance instead of producing a direction.
bool orthonormalize_columns(Eigen::MatrixXd& columns, const Eigen::MatrixXd* basis,
                            const Eigen::VectorXd* unit_extra, double collapse_tol = 1e-8);

// Seeded Gaussian draw of `count` orthonormal columns in R^rows, orthogonal
// to `basis`'s columns and to `unit_extra`. Columns that collapse are
// redrawn; returns nullopt once the retry budget is exhausted.
std::optional<Eigen::MatrixXd> random_orthonormal_complement(Eigen::Index rows,
                                                             Eigen::Index count,
                                                             const Eigen::MatrixXd* basis,
                                                             const Eigen::VectorXd* unit_extra,
                                                             std::uint64_t seed,
                                                             int max_redraws = 64);

}  // namespace lbse::detail
