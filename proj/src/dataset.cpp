#include "lbse/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "lbse/detail/binary_io.hpp"
#include "lbse/detail/rng.hpp"

namespace lbse {

namespace {

constexpr char kDatasetMagic[4] = {'L', 'B', 'S', 'E'};
constexpr std::uint8_t kDatasetVersion = 1;

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string field = line.substr(start, comma == std::string::npos ? comma : comma - start);
    // trim surrounding blanks and a trailing CR from windows line endings
    const auto is_blank = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!field.empty() && is_blank(field.front())) field.erase(field.begin());
    while (!field.empty() && is_blank(field.back())) field.pop_back();
    fields.push_back(std::move(field));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_double(const std::string& token, const char* context) {
  double value = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    fail(ErrorCode::MalformedHeader,
         std::string("cannot parse '") + token + "' as a number in " + context);
  return value;
}

std::uint64_t parse_uint(const std::string& token, const char* context) {
  std::uint64_t value = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    fail(ErrorCode::MalformedHeader,
         std::string("cannot parse '") + token + "' as an integer in " + context);
  return value;
}

bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

Dataset load_csv(const std::filesystem::path& path) {
  auto in = open_input(path, std::ios::in);
  std::string line;
  if (!next_content_line(in, line)) fail(ErrorCode::MalformedHeader, "empty CSV file");
  const auto header = split_fields(line);
  if (header.size() != 3)
    fail(ErrorCode::MalformedHeader, "CSV header must be 'D,N,C', got '" + line + "'");
  const auto dim = parse_uint(header[0], "CSV header");
  const auto count = parse_uint(header[1], "CSV header");
  const auto classes = parse_uint(header[2], "CSV header");
  if (dim == 0 || count == 0)
    fail(ErrorCode::MalformedHeader, "CSV header declares an empty dataset");

  Dataset dataset;
  dataset.features.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(count));
  dataset.num_classes = static_cast<std::uint32_t>(classes);
  for (std::uint64_t row = 0; row < dim; ++row) {
    if (!next_content_line(in, line))
      fail(ErrorCode::DimensionMismatch,
           "expected " + std::to_string(dim) + " feature rows, found " + std::to_string(row));
    const auto fields = split_fields(line);
    if (fields.size() != count)
      fail(ErrorCode::DimensionMismatch, "feature row " + std::to_string(row) + " has " +
                                             std::to_string(fields.size()) + " values, expected " +
                                             std::to_string(count));
    for (std::uint64_t col = 0; col < count; ++col) {
      const double value = parse_double(fields[col], "feature row");
      if (!std::isfinite(value))
        fail(ErrorCode::NonFiniteValue, "non-finite feature at row " + std::to_string(row) +
                                            ", column " + std::to_string(col));
      dataset.features(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = value;
    }
  }
  if (!next_content_line(in, line)) fail(ErrorCode::DimensionMismatch, "missing label row");
  const auto fields = split_fields(line);
  if (fields.size() != count)
    fail(ErrorCode::DimensionMismatch, "label row has " + std::to_string(fields.size()) +
                                           " values, expected " + std::to_string(count));
  dataset.labels.reserve(count);
  for (const auto& field : fields) {
    const auto label = parse_uint(field, "label row");
    if (label >= classes)
      fail(ErrorCode::LabelOutOfRange,
           "label " + field + " exceeds declared class count " + std::to_string(classes));
    dataset.labels.push_back(static_cast<std::uint32_t>(label));
  }
  if (next_content_line(in, line))
    fail(ErrorCode::DimensionMismatch, "unexpected content after the label row");
  dataset.validate();
  return dataset;
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
  auto out = open_output(path, std::ios::out);
  out << dataset.dim() << ',' << dataset.size() << ',' << dataset.num_classes << '\n';
  std::ostringstream buffer;
  buffer.precision(17);
  for (Eigen::Index row = 0; row < dataset.dim(); ++row) {
    for (Eigen::Index col = 0; col < dataset.size(); ++col) {
      if (col) buffer << ',';
      buffer << dataset.features(row, col);
    }
    buffer << '\n';
  }
  for (std::size_t i = 0; i < dataset.labels.size(); ++i) {
    if (i) buffer << ',';
    buffer << dataset.labels[i];
  }
  buffer << '\n';
  out << buffer.str();
  if (!out) fail(ErrorCode::IoError, "failed writing " + path.string());
}

Dataset load_binary(const std::filesystem::path& path) {
  auto in = open_input(path, std::ios::binary);
  detail::expect_magic(in, kDatasetMagic, "LBSE dataset");
  const auto version = detail::read_scalar<std::uint8_t>(in, "version");
  if (version != kDatasetVersion)
    fail(ErrorCode::MalformedHeader, "unsupported LBSE version " + std::to_string(version));
  const auto dim = detail::read_scalar<std::uint32_t>(in, "D");
  const auto count = detail::read_scalar<std::uint32_t>(in, "N");
  const auto classes = detail::read_scalar<std::uint32_t>(in, "C");
  if (dim == 0 || count == 0) fail(ErrorCode::MalformedHeader, "header declares an empty dataset");

  Dataset dataset;
  dataset.features.resize(dim, count);
  dataset.num_classes = classes;
  in.read(reinterpret_cast<char*>(dataset.features.data()),
          static_cast<std::streamsize>(sizeof(double) * dim * count));
  if (!in) fail(ErrorCode::MalformedHeader, "truncated feature block");
  dataset.labels.resize(count);
  in.read(reinterpret_cast<char*>(dataset.labels.data()),
          static_cast<std::streamsize>(sizeof(std::uint32_t) * count));
  if (!in) fail(ErrorCode::MalformedHeader, "truncated label block");
  dataset.validate();
  return dataset;
}

void save_binary(const Dataset& dataset, const std::filesystem::path& path) {
  auto out = open_output(path, std::ios::binary);
  detail::write_magic(out, kDatasetMagic);
  detail::write_scalar<std::uint8_t>(out, kDatasetVersion);
  detail::write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.dim()));
  detail::write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.size()));
  detail::write_scalar<std::uint32_t>(out, dataset.num_classes);
  out.write(reinterpret_cast<const char*>(dataset.features.data()),
            static_cast<std::streamsize>(sizeof(double) * dataset.features.size()));
  out.write(reinterpret_cast<const char*>(dataset.labels.data()),
            static_cast<std::streamsize>(sizeof(std::uint32_t) * dataset.labels.size()));
  if (!out) fail(ErrorCode::IoError, "failed writing " + path.string());
}

Dataset gather(const Dataset& source, const std::vector<Eigen::Index>& indices) {
  Dataset out;
  out.features.resize(source.dim(), static_cast<Eigen::Index>(indices.size()));
  out.labels.reserve(indices.size());
  out.num_classes = source.num_classes;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.features.col(static_cast<Eigen::Index>(i)) = source.features.col(indices[i]);
    out.labels.push_back(source.labels[static_cast<std::size_t>(indices[i])]);
  }
  return out;
}

}  // namespace

void Dataset::validate() const {
  require(features.rows() >= 1 && features.cols() >= 1, ErrorCode::DimensionMismatch,
          "dataset must have at least one feature dimension and one sample");
  require(labels.size() == static_cast<std::size_t>(features.cols()), ErrorCode::DimensionMismatch,
          "label count does not match sample count");
  require(num_classes >= 2, ErrorCode::ConfigViolation, "num_classes must be at least 2");
  require(features.allFinite(), ErrorCode::NonFiniteValue, "features contain NaN or Inf");
  for (const auto label : labels)
    require(label < num_classes, ErrorCode::LabelOutOfRange,
            "label " + std::to_string(label) + " out of range [0, " + std::to_string(num_classes) +
                ")");
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  return format == DatasetFormat::Csv ? load_csv(path) : load_binary(path);
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path,
                  DatasetFormat format) {
  dataset.validate();
  if (format == DatasetFormat::Csv)
    save_csv(dataset, path);
  else
    save_binary(dataset, path);
}

Eigen::MatrixXd to_label_matrix(const Dataset& dataset) {
  dataset.validate();
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(dataset.num_classes, dataset.size());
  for (Eigen::Index i = 0; i < dataset.size(); ++i)
    y(dataset.labels[static_cast<std::size_t>(i)], i) = 1.0;
  return y;
}

Dataset synth_clusters(std::size_t n_per_class, std::uint32_t num_classes, Eigen::Index dim,
                       double spread, std::uint64_t seed) {
  require(n_per_class >= 1, ErrorCode::ConfigViolation, "n_per_class must be positive");
  require(num_classes >= 2, ErrorCode::ConfigViolation, "num_classes must be at least 2");
  require(dim >= 1, ErrorCode::ConfigViolation, "dim must be positive");
  require(spread > 0, ErrorCode::ConfigViolation, "spread must be positive");

  auto rng = detail::make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::MatrixXd centers(dim, num_classes);
  for (int attempt = 0;; ++attempt) {
    for (Eigen::Index c = 0; c < centers.cols(); ++c)
      for (Eigen::Index d = 0; d < dim; ++d) centers(d, c) = gauss(rng);
    double min_gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < centers.cols(); ++a)
      for (Eigen::Index b = a + 1; b < centers.cols(); ++b)
        min_gap = std::min(min_gap, (centers.col(a) - centers.col(b)).norm());
    if (min_gap > 1e-6) break;
    if (attempt >= 32) fail(ErrorCode::RankDegeneracy, "could not draw distinct class centers");
  }

  const auto count = static_cast<Eigen::Index>(n_per_class) * num_classes;
  Dataset dataset;
  dataset.features.resize(dim, count);
  dataset.labels.reserve(static_cast<std::size_t>(count));
  dataset.num_classes = num_classes;
  Eigen::Index col = 0;
  for (std::uint32_t c = 0; c < num_classes; ++c) {
    for (std::size_t k = 0; k < n_per_class; ++k, ++col) {
      for (Eigen::Index d = 0; d < dim; ++d)
        dataset.features(d, col) = centers(d, c) + spread * gauss(rng);
      dataset.labels.push_back(c);
    }
  }
  return dataset;
}

SplitResult split(const Dataset& dataset, const SplitSpec& spec) {
  dataset.validate();
  require(spec.query_fraction > 0.0 && spec.query_fraction < 1.0, ErrorCode::ConfigViolation,
          "query_fraction must lie in (0, 1)");
  const auto total = dataset.size();
  const auto n_query =
      static_cast<Eigen::Index>(std::llround(static_cast<double>(total) * spec.query_fraction));
  if (n_query < 1 || n_query >= total)
    fail(ErrorCode::DegenerateSplit, "split would leave an empty side (N=" + std::to_string(total) +
                                         ", fraction=" + std::to_string(spec.query_fraction) + ")");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto rng = detail::make_rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);

  SplitResult result;
  result.query_indices.assign(order.begin(), order.begin() + n_query);
  result.database_indices.assign(order.begin() + n_query, order.end());
  std::sort(result.query_indices.begin(), result.query_indices.end());
  std::sort(result.database_indices.begin(), result.database_indices.end());
  result.query = gather(dataset, result.query_indices);
  result.database = gather(dataset, result.database_indices);
  return result;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> standardize_features(Dataset& dataset) {
  dataset.validate();
  const double count = static_cast<double>(dataset.size());
  Eigen::VectorXd mean = dataset.features.rowwise().mean();
  dataset.features.colwise() -= mean;
  Eigen::VectorXd stddev = (dataset.features.array().square().rowwise().sum() / count).sqrt();
  for (Eigen::Index d = 0; d < stddev.size(); ++d) {
    if (stddev(d) < 1e-12) stddev(d) = 1.0;
  }
  dataset.features.array().colwise() /= stddev.array();
  return {std::move(mean), std::move(stddev)};
}

}  // namespace lbse
