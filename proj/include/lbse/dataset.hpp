#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "lbse/error.hpp"

namespace lbse {

enum class DatasetFormat { Csv, LbseBinary };

/// Supervised dataset: a D x N feature matrix (one sample per column) with a
/// class id in [0, num_classes) for every column.
struct Dataset {
  Eigen::MatrixXd features;           // D x N
  std::vector<std::uint32_t> labels;  // N entries
  std::uint32_t num_classes = 0;

  Eigen::Index dim() const { return features.rows(); }
  Eigen::Index size() const { return features.cols(); }

  /// Throws if any invariant is violated (shape consistency, label range,
  /// finiteness, num_classes >= 2).
  void validate() const;
};

struct SplitSpec {
  double query_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct SplitResult {
  Dataset database;
  Dataset query;
  std::vector<Eigen::Index> database_indices;  // ascending positions in the source
  std::vector<Eigen::Index> query_indices;
};

/// CSV layout: header "D,N,C", then D feature rows of N comma-separated
/// decimals, then one row of N integer labels.
/// Binary layout: magic "LBSE", u8 version, u32 D/N/C, column-major float64
/// features, u32 labels. All fields little-endian.
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path, DatasetFormat format);

/// One-hot C x N label matrix: entry (c, i) is 1 iff labels[i] == c.
Eigen::MatrixXd to_label_matrix(const Dataset& dataset);

/// Gaussian blobs: num_classes centers drawn from a standard normal, then
/// n_per_class isotropic samples with the given spread around each center.
/// Samples are laid out class-major. Deterministic per seed.
Dataset synth_clusters(std::size_t n_per_class, std::uint32_t num_classes, Eigen::Index dim,
                       double spread, std::uint64_t seed);

/// Seeded disjoint/exhaustive partition into database and query sides.
SplitResult split(const Dataset& dataset, const SplitSpec& spec);

/// In-place zero-mean/unit-variance transform per feature dimension.
/// Returns the (mean, standard deviation) pair used; near-constant dimensions
/// keep scale 1.
std::pair<Eigen::VectorXd, Eigen::VectorXd> standardize_features(Dataset& dataset);

}  // namespace lbse
