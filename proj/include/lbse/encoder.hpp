#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "lbse/error.hpp"
#include "lbse/trainer.hpp"

namespace lbse {

/// Immutable bit-packed binary codes, one sample per ceil(L/64)-word run.
/// Code row r lives in bit (r % 64) of word (r / 64); a set bit means +1.
/// Padding bits beyond the code length stay zero.
class CodeMatrix {
 public:
  CodeMatrix() = default;
  CodeMatrix(Eigen::Index code_length, Eigen::Index count);

  /// Adopts packed words, enforcing the zero-padding invariant.
  static CodeMatrix from_words(Eigen::Index code_length, Eigen::Index count,
                               std::vector<std::uint64_t> words);

  Eigen::Index code_length() const { return code_length_; }
  Eigen::Index size() const { return count_; }
  Eigen::Index words_per_code() const { return words_per_code_; }

  std::span<const std::uint64_t> code(Eigen::Index sample) const;
  std::span<std::uint64_t> code(Eigen::Index sample);
  const std::vector<std::uint64_t>& words() const { return words_; }

  void set_bit(Eigen::Index sample, Eigen::Index row);

 private:
  std::vector<std::uint64_t> words_;
  Eigen::Index code_length_ = 0;
  Eigen::Index count_ = 0;
  Eigen::Index words_per_code_ = 0;
};

/// Pack an L x N sign matrix (+1 maps to a set bit). Inverse of unpack.
CodeMatrix pack(const Eigen::MatrixXd& sign_matrix);
Eigen::MatrixXd unpack(const CodeMatrix& codes);

/// Out-of-sample extension: sign(P^T x) per column, sign(0) = -1.
CodeMatrix encode(const LbseModel& model, const Eigen::MatrixXd& features);

/// Popcount Hamming distance between two packed codes of equal word length.
std::uint32_t hamming_distance(std::span<const std::uint64_t> a,
                               std::span<const std::uint64_t> b);

struct CodeFile {
  CodeMatrix codes;
  std::optional<std::vector<std::uint32_t>> labels;
};

/// Code container: magic "LBSC", u8 version, u32 L, u32 N, the packed words,
/// a presence byte, then the optional u32 labels. Little-endian throughout.
void save_codes(const CodeMatrix& codes, const std::optional<std::vector<std::uint32_t>>& labels,
                const std::filesystem::path& path);
CodeFile load_codes(const std::filesystem::path& path);

}  // namespace lbse
