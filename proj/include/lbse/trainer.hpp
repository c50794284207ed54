#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "lbse/dataset.hpp"
#include "lbse/similarity.hpp"

namespace lbse {

struct LbseConfig {
  Eigen::Index code_length = 32;  // L, must be >= num_classes
  double alpha = 0.5;
  double beta = 5.0;
  double gamma = 1e-5;
  double lambda = 1e-5;
  std::size_t max_iters = 15;
  std::uint64_t seed = 0;
  Eigen::Index block = 512;  // column block width for products against S
  double tol = 1e-8;         // constraint tolerance used by diagnostics
};

void validate_config(const LbseConfig& config);

/// The four optimization variables. H and B are L x N, W is C x L with
/// orthonormal rows, P is D x L.
struct TrainState {
  Eigen::MatrixXd H;
  Eigen::MatrixXd B;
  Eigen::MatrixXd W;
  Eigen::MatrixXd P;
};

struct TrainStats {
  std::vector<double> objective_per_iter;
  std::vector<std::int64_t> bits_flipped_per_iter;
  std::optional<std::size_t> converged_at;  // 1-based iteration where H reached a fixed point

  // constraint diagnostics recorded after the corresponding step of each iteration
  std::vector<double> w_orthogonality_error;   // max |W W^T - I|
  std::vector<double> b_balance_error;         // max |B 1|
  std::vector<double> b_uncorrelation_error;   // max |B B^T - N I|
  std::vector<double> h_sign_error;            // max ||H| - 1|, zero for a valid sign matrix

  std::vector<double> seconds_w, seconds_b, seconds_h, seconds_p;

  std::size_t iterations() const { return objective_per_iter.size(); }
};

struct LbseModel {
  Eigen::MatrixXd P;  // D x L out-of-sample projection
  Eigen::MatrixXd W;  // C x L label projection
  LbseConfig config;
  TrainStats history;  // in-memory only; not persisted by save_model
};

/// Value of the joint objective
///   |H^T B - L S|^2 + alpha |H - W^T Y|^2 + beta |H - B|^2
///   + gamma |H - P^T X|^2 + lambda |P|^2
/// with the first term accumulated over column blocks of S.
double objective(const TrainState& state, const Eigen::MatrixXd& features,
                 const Eigen::MatrixXd& label_matrix, const SimilarityOracle& sim,
                 const LbseConfig& config);

/// Orthogonal Procrustes step: the row-orthonormal W maximizing
/// tr(W H Y^T), from the SVD of H Y^T.
Eigen::MatrixXd solve_w(const Eigen::MatrixXd& codes, const Eigen::MatrixXd& label_matrix);

/// Constrained trace maximization: B maximizing tr(B^T (H S + beta H))
/// subject to B 1 = 0 and B B^T = N I, built from the eigendecomposition of
/// the centered Gram matrix plus a seeded random completion of the
/// rank-deficient directions. Requires N > L.
Eigen::MatrixXd solve_b(const Eigen::MatrixXd& codes, const SimilarityOracle& sim, double beta,
                        std::uint64_t seed, Eigen::Index block = 512);

/// Discrete step: sign of B S + alpha W^T Y + beta B + gamma P^T X, with
/// sign(0) = -1.
Eigen::MatrixXd solve_h(const Eigen::MatrixXd& B, const Eigen::MatrixXd& W,
                        const Eigen::MatrixXd& label_matrix, const Eigen::MatrixXd& P,
                        const Eigen::MatrixXd& features, const SimilarityOracle& sim,
                        const LbseConfig& config);

/// Ridge step: P = (X X^T + lambda I)^{-1} X H^T. Rejects systems whose
/// normal-equation residual is not small (lambda = 0 with rank-deficient X).
Eigen::MatrixXd solve_p(const Eigen::MatrixXd& features, const Eigen::MatrixXd& codes,
                        double lambda);

/// Alternating minimization over W, B, H, P in that order, stopping at
/// max_iters or when H repeats between consecutive iterations. Deterministic
/// for a fixed config.
LbseModel train(const Dataset& dataset, const LbseConfig& config);

/// Model container: magic "LBSM", u8 version, u32 D/C/L, the real-valued
/// config scalars as float64 (alpha, beta, gamma, lambda, tol), u32
/// max_iters, u32 block, u64 seed, then P and W as column-major float64.
void save_model(const LbseModel& model, const std::filesystem::path& path);
LbseModel load_model(const std::filesystem::path& path);

}  // namespace lbse
