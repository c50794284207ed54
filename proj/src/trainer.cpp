#include "lbse/trainer.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "lbse/detail/binary_io.hpp"
#include "lbse/detail/orthonormal.hpp"
#include "lbse/detail/rng.hpp"

namespace lbse {

namespace {

constexpr char kModelMagic[4] = {'L', 'B', 'S', 'M'};
constexpr std::uint8_t kModelVersion = 1;

// relative cutoff below which eigenvalues of Q J Q^T count as zero rank
constexpr double kEigenvalueCutoff = 1e-10;

// stream tags for deriving per-step RNG seeds from the config seed
constexpr std::uint64_t kInitStream = 0x1b5e0001;
constexpr std::uint64_t kBStepStream = 0x1b5e0002;

Eigen::MatrixXd sign_matrix(const Eigen::MatrixXd& values) {
  // sign(0) = -1 by convention
  return values.unaryExpr([](double v) { return v > 0.0 ? 1.0 : -1.0; });
}

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void check_state_dims(const TrainState& state, Eigen::Index dim, Eigen::Index count,
                      Eigen::Index classes) {
  require(state.H.cols() == count && state.B.cols() == count, ErrorCode::DimensionMismatch,
          "H and B must have one column per sample");
  require(state.H.rows() == state.B.rows(), ErrorCode::DimensionMismatch,
          "H and B must share the code length");
  require(state.W.rows() == classes && state.W.cols() == state.H.rows(),
          ErrorCode::DimensionMismatch, "W must be C x L");
  require(state.P.rows() == dim && state.P.cols() == state.H.rows(),
          ErrorCode::DimensionMismatch, "P must be D x L");
}

}  // namespace

void validate_config(const LbseConfig& config) {
  require(config.code_length >= 1, ErrorCode::ConfigViolation, "code_length must be positive");
  require(config.alpha >= 0 && config.beta >= 0 && config.gamma >= 0 && config.lambda >= 0,
          ErrorCode::ConfigViolation, "hyperparameters must be nonnegative");
  require(config.max_iters >= 1, ErrorCode::ConfigViolation, "max_iters must be at least 1");
  require(config.block >= 1, ErrorCode::ConfigViolation, "block width must be positive");
  require(config.tol > 0, ErrorCode::ConfigViolation, "tol must be positive");
}

double objective(const TrainState& state, const Eigen::MatrixXd& features,
                 const Eigen::MatrixXd& label_matrix, const SimilarityOracle& sim,
                 const LbseConfig& config) {
  validate_config(config);
  const Eigen::Index count = features.cols();
  require(label_matrix.cols() == count && sim.size() == count, ErrorCode::DimensionMismatch,
          "features, labels and similarity must agree on N");
  check_state_dims(state, features.rows(), count, label_matrix.rows());

  const Eigen::Index code_length = state.H.rows();
  const double scale = static_cast<double>(code_length);
  const auto& labels = sim.labels();

  // |H^T B - L S|^2, one column block of S at a time
  double similarity_term = 0.0;
  for (Eigen::Index start = 0; start < count; start += config.block) {
    const Eigen::Index width = std::min(config.block, count - start);
    Eigen::MatrixXd residual = state.H.transpose() * state.B.middleCols(start, width);
    for (Eigen::Index jj = 0; jj < width; ++jj) {
      const auto label_j = labels[static_cast<std::size_t>(start + jj)];
      for (Eigen::Index i = 0; i < count; ++i)
        residual(i, jj) -= labels[static_cast<std::size_t>(i)] == label_j ? scale : -scale;
    }
    similarity_term += residual.squaredNorm();
  }

  double value = similarity_term;
  value += config.alpha * (state.H - state.W.transpose() * label_matrix).squaredNorm();
  value += config.beta * (state.H - state.B).squaredNorm();
  value += config.gamma * (state.H - state.P.transpose() * features).squaredNorm();
  value += config.lambda * state.P.squaredNorm();
  return value;
}

Eigen::MatrixXd solve_w(const Eigen::MatrixXd& codes, const Eigen::MatrixXd& label_matrix) {
  const Eigen::Index code_length = codes.rows();
  const Eigen::Index classes = label_matrix.rows();
  require(label_matrix.cols() == codes.cols(), ErrorCode::DimensionMismatch,
          "codes and label matrix must agree on N");
  require(code_length >= classes, ErrorCode::ConfigViolation,
          "code length must be at least the class count");

  const Eigen::MatrixXd cross = codes * label_matrix.transpose();  // L x C
  require(cross.allFinite(), ErrorCode::SvdFailure, "non-finite input to the W-step SVD");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  // W = V U_hat^T with U_hat the first C left singular vectors
  return svd.matrixV() * svd.matrixU().leftCols(classes).transpose();
}

Eigen::MatrixXd solve_b(const Eigen::MatrixXd& codes, const SimilarityOracle& sim, double beta,
                        std::uint64_t seed, Eigen::Index block) {
  const Eigen::Index code_length = codes.rows();
  const Eigen::Index count = codes.cols();
  require(count == sim.size(), ErrorCode::DimensionMismatch,
          "codes and similarity must agree on N");
  require(count > code_length, ErrorCode::ConfigViolation,
          "the B-step needs more samples than code bits (N > L)");
  require(beta >= 0, ErrorCode::ConfigViolation, "beta must be nonnegative");

  // Q = H S + beta H, then K = J Q^T with J the centering projector, so that
  // Q J Q^T = K^T K is symmetric by construction.
  Eigen::MatrixXd q = sim.right_multiply(codes, block);
  q += beta * codes;
  Eigen::MatrixXd centered = q.transpose();  // N x L
  centered.rowwise() -= q.rowwise().mean().transpose();

  Eigen::MatrixXd gram = centered.transpose() * centered;
  gram = 0.5 * (gram + gram.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  require(eig.info() == Eigen::Success, ErrorCode::SvdFailure,
          "eigendecomposition failed in the B-step");

  const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
  const double largest = values(code_length - 1);
  const double cutoff = largest > 0 ? kEigenvalueCutoff * largest : 0.0;
  Eigen::Index rank = 0;
  while (rank < code_length && values(code_length - 1 - rank) > cutoff) ++rank;

  // eigenvectors in descending eigenvalue order: kept directions first
  Eigen::MatrixXd kept(code_length, rank);
  Eigen::MatrixXd complement(code_length, code_length - rank);
  for (Eigen::Index i = 0; i < code_length; ++i) {
    const Eigen::Index src = code_length - 1 - i;
    if (i < rank)
      kept.col(i) = eig.eigenvectors().col(src);
    else
      complement.col(i - rank) = eig.eigenvectors().col(src);
  }

  const Eigen::VectorXd ones_unit =
      Eigen::VectorXd::Constant(count, 1.0 / std::sqrt(static_cast<double>(count)));

  // M = J Q^T Z Omega^{-1/2}; a Gram-Schmidt pass keeps the balance and
  // orthonormality contracts tight even when kept eigenvalues sit near the
  // cutoff
  Eigen::MatrixXd m_kept = centered * kept;
  for (Eigen::Index c = 0; c < rank; ++c) m_kept.col(c) /= std::sqrt(values(code_length - 1 - c));
  if (!detail::orthonormalize_columns(m_kept, nullptr, &ones_unit))
    fail(ErrorCode::RankDegeneracy, "B-step directions collapsed during orthonormalization");

  auto m_random = detail::random_orthonormal_complement(count, code_length - rank, &m_kept,
                                                        &ones_unit, seed);
  if (!m_random)
    fail(ErrorCode::RankDegeneracy,
         "could not complete the B-step basis after bounded retries");

  const double root_n = std::sqrt(static_cast<double>(count));
  Eigen::MatrixXd b = kept * m_kept.transpose();
  if (rank < code_length) b += complement * m_random->transpose();
  return root_n * b;
}

Eigen::MatrixXd solve_h(const Eigen::MatrixXd& B, const Eigen::MatrixXd& W,
                        const Eigen::MatrixXd& label_matrix, const Eigen::MatrixXd& P,
                        const Eigen::MatrixXd& features, const SimilarityOracle& sim,
                        const LbseConfig& config) {
  require(B.cols() == sim.size() && label_matrix.cols() == B.cols() &&
              features.cols() == B.cols(),
          ErrorCode::DimensionMismatch, "B, labels and features must agree on N");
  require(W.cols() == B.rows() && P.cols() == B.rows(), ErrorCode::DimensionMismatch,
          "W and P must map to the code length");
  require(W.rows() == label_matrix.rows() && P.rows() == features.rows(),
          ErrorCode::DimensionMismatch, "W and P must match label and feature dimensions");

  Eigen::MatrixXd scores = sim.right_multiply(B, config.block);
  scores.noalias() += config.alpha * (W.transpose() * label_matrix);
  scores += config.beta * B;
  scores.noalias() += config.gamma * (P.transpose() * features);
  return sign_matrix(scores);
}

Eigen::MatrixXd solve_p(const Eigen::MatrixXd& features, const Eigen::MatrixXd& codes,
                        double lambda) {
  require(features.cols() == codes.cols(), ErrorCode::DimensionMismatch,
          "features and codes must agree on N");
  require(lambda >= 0, ErrorCode::ConfigViolation, "lambda must be nonnegative");

  Eigen::MatrixXd normal = features * features.transpose();
  normal.diagonal().array() += lambda;
  const Eigen::MatrixXd rhs = features * codes.transpose();
  Eigen::MatrixXd projection = normal.ldlt().solve(rhs);

  const double rhs_norm = rhs.norm();
  const double residual = (normal * projection - rhs).norm();
  if (!projection.allFinite() || residual > 1e-8 * std::max(rhs_norm, 1e-300))
    fail(ErrorCode::SingularSystem,
         "ridge system is singular; use lambda > 0 or full-rank features");
  return projection;
}

LbseModel train(const Dataset& dataset, const LbseConfig& config) {
  dataset.validate();
  validate_config(config);
  const Eigen::Index count = dataset.size();
  const Eigen::Index code_length = config.code_length;
  require(code_length >= dataset.num_classes, ErrorCode::ConfigViolation,
          "code_length must be at least num_classes (L >= C)");
  require(count > code_length, ErrorCode::ConfigViolation,
          "training needs more samples than code bits (N > L)");

  const Eigen::MatrixXd label_matrix = to_label_matrix(dataset);
  const SimilarityOracle sim(dataset.labels, dataset.num_classes);
  const Eigen::MatrixXd& features = dataset.features;

  // Feasible start: H from a seeded Gaussian sign pattern, then one closed-form
  // solve per variable so every iterate the loop sees satisfies its constraint.
  TrainState state;
  {
    auto rng = detail::make_rng(config.seed, kInitStream);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd noise(code_length, count);
    for (Eigen::Index j = 0; j < count; ++j)
      for (Eigen::Index i = 0; i < code_length; ++i) noise(i, j) = gauss(rng);
    state.H = sign_matrix(noise);
  }
  state.B = solve_b(state.H, sim, config.beta, detail::mix_seed(config.seed, kBStepStream),
                    config.block);
  state.W = solve_w(state.H, label_matrix);
  state.P = solve_p(features, state.H, config.lambda);

  TrainStats stats;
  const Eigen::MatrixXd identity =
      Eigen::MatrixXd::Identity(dataset.num_classes, dataset.num_classes);
  const double n_real = static_cast<double>(count);

  for (std::size_t iter = 1; iter <= config.max_iters; ++iter) {
    auto tick = std::chrono::steady_clock::now();
    state.W = solve_w(state.H, label_matrix);
    stats.seconds_w.push_back(seconds_since(tick));
    stats.w_orthogonality_error.push_back(
        (state.W * state.W.transpose() - identity).cwiseAbs().maxCoeff());

    tick = std::chrono::steady_clock::now();
    state.B = solve_b(state.H, sim, config.beta,
                      detail::mix_seed(config.seed, kBStepStream + iter), config.block);
    stats.seconds_b.push_back(seconds_since(tick));
    stats.b_balance_error.push_back((state.B.rowwise().sum()).cwiseAbs().maxCoeff());
    stats.b_uncorrelation_error.push_back(
        (state.B * state.B.transpose() - n_real * Eigen::MatrixXd::Identity(code_length, code_length))
            .cwiseAbs()
            .maxCoeff());

    tick = std::chrono::steady_clock::now();
    const Eigen::MatrixXd previous = state.H;
    state.H = solve_h(state.B, state.W, label_matrix, state.P, features, sim, config);
    stats.seconds_h.push_back(seconds_since(tick));
    const auto flipped =
        static_cast<std::int64_t>(((state.H - previous).cwiseAbs().sum() / 2.0) + 0.5);
    stats.bits_flipped_per_iter.push_back(flipped);
    stats.h_sign_error.push_back((state.H.cwiseAbs().array() - 1.0).abs().maxCoeff());

    tick = std::chrono::steady_clock::now();
    state.P = solve_p(features, state.H, config.lambda);
    stats.seconds_p.push_back(seconds_since(tick));

    stats.objective_per_iter.push_back(objective(state, features, label_matrix, sim, config));

    if (flipped == 0) {
      stats.converged_at = iter;
      break;
    }
  }

  LbseModel model;
  model.P = std::move(state.P);
  model.W = std::move(state.W);
  model.config = config;
  model.history = std::move(stats);
  return model;
}

void save_model(const LbseModel& model, const std::filesystem::path& path) {
  require(model.P.allFinite() && model.W.allFinite(), ErrorCode::NonFiniteValue,
          "model contains non-finite entries");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  detail::write_magic(out, kModelMagic);
  detail::write_scalar<std::uint8_t>(out, kModelVersion);
  detail::write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(model.P.rows()));
  detail::write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(model.W.rows()));
  detail::write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(model.P.cols()));
  detail::write_scalar<double>(out, model.config.alpha);
  detail::write_scalar<double>(out, model.config.beta);
  detail::write_scalar<double>(out, model.config.gamma);
  detail::write_scalar<double>(out, model.config.lambda);
  detail::write_scalar<double>(out, model.config.tol);
  detail::write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(model.config.max_iters));
  detail::write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(model.config.block));
  detail::write_scalar<std::uint64_t>(out, model.config.seed);
  out.write(reinterpret_cast<const char*>(model.P.data()),
            static_cast<std::streamsize>(sizeof(double) * model.P.size()));
  out.write(reinterpret_cast<const char*>(model.W.data()),
            static_cast<std::streamsize>(sizeof(double) * model.W.size()));
  if (!out) fail(ErrorCode::IoError, "failed writing " + path.string());
}

LbseModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  detail::expect_magic(in, kModelMagic, "LBSM model");
  const auto version = detail::read_scalar<std::uint8_t>(in, "version");
  if (version != kModelVersion)
    fail(ErrorCode::MalformedHeader, "unsupported LBSM version " + std::to_string(version));
  const auto dim = detail::read_scalar<std::uint32_t>(in, "D");
  const auto classes = detail::read_scalar<std::uint32_t>(in, "C");
  const auto code_length = detail::read_scalar<std::uint32_t>(in, "L");

  LbseModel model;
  model.config.alpha = detail::read_scalar<double>(in, "alpha");
  model.config.beta = detail::read_scalar<double>(in, "beta");
  model.config.gamma = detail::read_scalar<double>(in, "gamma");
  model.config.lambda = detail::read_scalar<double>(in, "lambda");
  model.config.tol = detail::read_scalar<double>(in, "tol");
  model.config.max_iters = detail::read_scalar<std::uint32_t>(in, "max_iters");
  model.config.block = detail::read_scalar<std::uint32_t>(in, "block");
  model.config.seed = detail::read_scalar<std::uint64_t>(in, "seed");
  model.config.code_length = code_length;

  model.P.resize(dim, code_length);
  in.read(reinterpret_cast<char*>(model.P.data()),
          static_cast<std::streamsize>(sizeof(double) * model.P.size()));
  if (!in) fail(ErrorCode::MalformedHeader, "truncated projection block");
  model.W.resize(classes, code_length);
  in.read(reinterpret_cast<char*>(model.W.data()),
          static_cast<std::streamsize>(sizeof(double) * model.W.size()));
  if (!in) fail(ErrorCode::MalformedHeader, "truncated label-projection block");
  require(model.P.allFinite() && model.W.allFinite(), ErrorCode::NonFiniteValue,
          "model contains non-finite entries");
  return model;
}

}  // namespace lbse
