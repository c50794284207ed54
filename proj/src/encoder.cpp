#include "lbse/encoder.hpp"

#include <bit>
#include <fstream>
#include <string>

#include "lbse/detail/binary_io.hpp"

namespace lbse {

namespace {

constexpr char kCodesMagic[4] = {'L', 'B', 'S', 'C'};
constexpr std::uint8_t kCodesVersion = 1;

}  // namespace

CodeMatrix::CodeMatrix(Eigen::Index code_length, Eigen::Index count)
    : code_length_(code_length), count_(count), words_per_code_((code_length + 63) / 64) {
  require(code_length >= 1, ErrorCode::ConfigViolation, "code length must be positive");
  require(count >= 0, ErrorCode::ConfigViolation, "sample count must be nonnegative");
  words_.assign(static_cast<std::size_t>(words_per_code_ * count_), 0);
}

CodeMatrix CodeMatrix::from_words(Eigen::Index code_length, Eigen::Index count,
                                  std::vector<std::uint64_t> words) {
  CodeMatrix codes(code_length, count);
  require(words.size() == codes.words_.size(), ErrorCode::LengthMismatch,
          "word count does not match code dimensions");
  codes.words_ = std::move(words);
  if (code_length % 64 != 0) {
    const std::uint64_t padding_mask = ~((std::uint64_t{1} << (code_length % 64)) - 1);
    for (Eigen::Index j = 0; j < count; ++j)
      require((codes.code(j).back() & padding_mask) == 0, ErrorCode::MalformedHeader,
              "nonzero padding bits in packed code");
  }
  return codes;
}

std::span<const std::uint64_t> CodeMatrix::code(Eigen::Index sample) const {
  require(sample >= 0 && sample < count_, ErrorCode::IndexOutOfRange, "sample out of range");
  return {words_.data() + sample * words_per_code_, static_cast<std::size_t>(words_per_code_)};
}

std::span<std::uint64_t> CodeMatrix::code(Eigen::Index sample) {
  require(sample >= 0 && sample < count_, ErrorCode::IndexOutOfRange, "sample out of range");
  return {words_.data() + sample * words_per_code_, static_cast<std::size_t>(words_per_code_)};
}

void CodeMatrix::set_bit(Eigen::Index sample, Eigen::Index row) {
  require(row >= 0 && row < code_length_, ErrorCode::IndexOutOfRange, "code row out of range");
  code(sample)[static_cast<std::size_t>(row / 64)] |= (std::uint64_t{1} << (row % 64));
}

CodeMatrix pack(const Eigen::MatrixXd& sign_matrix) {
  CodeMatrix codes(sign_matrix.rows(), sign_matrix.cols());
  for (Eigen::Index j = 0; j < sign_matrix.cols(); ++j)
    for (Eigen::Index r = 0; r < sign_matrix.rows(); ++r)
      if (sign_matrix(r, j) > 0) codes.set_bit(j, r);
  return codes;
}

Eigen::MatrixXd unpack(const CodeMatrix& codes) {
  Eigen::MatrixXd out(codes.code_length(), codes.size());
  for (Eigen::Index j = 0; j < codes.size(); ++j) {
    const auto words = codes.code(j);
    for (Eigen::Index r = 0; r < codes.code_length(); ++r)
      out(r, j) = (words[static_cast<std::size_t>(r / 64)] >> (r % 64)) & 1 ? 1.0 : -1.0;
  }
  return out;
}

CodeMatrix encode(const LbseModel& model, const Eigen::MatrixXd& features) {
  require(features.rows() == model.P.rows(), ErrorCode::DimensionMismatch,
          "feature dimension does not match the model (expected " +
              std::to_string(model.P.rows()) + ", got " + std::to_string(features.rows()) + ")");
  require(features.allFinite(), ErrorCode::NonFiniteValue, "features contain NaN or Inf");
  const Eigen::MatrixXd projected = model.P.transpose() * features;  // L x M
  CodeMatrix codes(projected.rows(), projected.cols());
  for (Eigen::Index j = 0; j < projected.cols(); ++j)
    for (Eigen::Index r = 0; r < projected.rows(); ++r)
      if (projected(r, j) > 0) codes.set_bit(j, r);
  return codes;
}

std::uint32_t hamming_distance(std::span<const std::uint64_t> a,
                               std::span<const std::uint64_t> b) {
  require(a.size() == b.size(), ErrorCode::LengthMismatch, "code word lengths differ");
  std::uint32_t distance = 0;
  for (std::size_t w = 0; w < a.size(); ++w) distance += std::popcount(a[w] ^ b[w]);
  return distance;
}

void save_codes(const CodeMatrix& codes, const std::optional<std::vector<std::uint32_t>>& labels,
                const std::filesystem::path& path) {
  if (labels)
    require(labels->size() == static_cast<std::size_t>(codes.size()), ErrorCode::LengthMismatch,
            "label count does not match code count");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  detail::write_magic(out, kCodesMagic);
  detail::write_scalar<std::uint8_t>(out, kCodesVersion);
  detail::write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(codes.code_length()));
  detail::write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(codes.size()));
  out.write(reinterpret_cast<const char*>(codes.words().data()),
            static_cast<std::streamsize>(sizeof(std::uint64_t) * codes.words().size()));
  detail::write_scalar<std::uint8_t>(out, labels ? 1 : 0);
  if (labels)
    out.write(reinterpret_cast<const char*>(labels->data()),
              static_cast<std::streamsize>(sizeof(std::uint32_t) * labels->size()));
  if (!out) fail(ErrorCode::IoError, "failed writing " + path.string());
}

CodeFile load_codes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  detail::expect_magic(in, kCodesMagic, "LBSC codes");
  const auto version = detail::read_scalar<std::uint8_t>(in, "version");
  if (version != kCodesVersion)
    fail(ErrorCode::MalformedHeader, "unsupported LBSC version " + std::to_string(version));
  const auto code_length = detail::read_scalar<std::uint32_t>(in, "L");
  const auto count = detail::read_scalar<std::uint32_t>(in, "N");
  require(code_length >= 1, ErrorCode::MalformedHeader, "code length must be positive");

  const auto words_per_code = static_cast<std::size_t>((code_length + 63) / 64);
  std::vector<std::uint64_t> words(words_per_code * count);
  in.read(reinterpret_cast<char*>(words.data()),
          static_cast<std::streamsize>(sizeof(std::uint64_t) * words.size()));
  if (!in) fail(ErrorCode::MalformedHeader, "truncated code block");
  CodeFile file;
  file.codes = CodeMatrix::from_words(code_length, count, std::move(words));
  const auto has_labels = detail::read_scalar<std::uint8_t>(in, "label flag");
  if (has_labels) {
    std::vector<std::uint32_t> labels(count);
    in.read(reinterpret_cast<char*>(labels.data()),
            static_cast<std::streamsize>(sizeof(std::uint32_t) * labels.size()));
    if (!in) fail(ErrorCode::MalformedHeader, "truncated label block");
    file.labels = std::move(labels);
  }
  return file;
}

}  // namespace lbse
