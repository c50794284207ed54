#include "lbse/index.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace lbse {

HammingIndex::HammingIndex(CodeMatrix codes, std::vector<std::uint32_t> labels)
    : codes_(std::move(codes)), labels_(std::move(labels)) {
  require(labels_.size() == static_cast<std::size_t>(codes_.size()), ErrorCode::LengthMismatch,
          "index labels must match code count");
}

Neighbors HammingIndex::search(std::span<const std::uint64_t> query, std::size_t k) const {
  require(query.size() == static_cast<std::size_t>(codes_.words_per_code()),
          ErrorCode::LengthMismatch, "query code length does not match the index");
  require(k >= 1, ErrorCode::ConfigViolation, "k must be at least 1");

  const auto count = static_cast<std::size_t>(codes_.size());
  std::vector<std::uint32_t> distances(count);
  for (std::size_t i = 0; i < count; ++i)
    distances[i] = hamming_distance(codes_.code(static_cast<Eigen::Index>(i)), query);

  const std::size_t take = std::min(k, count);
  std::vector<std::uint32_t> order(count);
  std::iota(order.begin(), order.end(), 0u);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      return distances[a] != distances[b] ? distances[a] < distances[b] : a < b;
                    });

  Neighbors result;
  result.ids.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
  result.distances.reserve(take);
  for (const auto id : result.ids) result.distances.push_back(distances[id]);
  return result;
}

std::uint32_t HammingIndex::knn_classify(std::span<const std::uint64_t> query,
                                         std::size_t k_vote) const {
  require(size() > 0, ErrorCode::EmptyIndex, "cannot classify against an empty index");
  require(k_vote >= 1, ErrorCode::ConfigViolation, "k_vote must be at least 1");
  return vote(search(query, k_vote), labels_, k_vote);
}

std::uint32_t vote(const Neighbors& neighbors, const std::vector<std::uint32_t>& labels,
                   std::size_t k_vote) {
  require(!neighbors.ids.empty(), ErrorCode::EmptyIndex, "cannot vote over zero neighbors");
  const std::size_t take = std::min(k_vote, neighbors.ids.size());

  std::map<std::uint32_t, std::pair<std::size_t, std::uint64_t>> tally;  // class -> (votes, distance sum)
  for (std::size_t r = 0; r < take; ++r) {
    auto& entry = tally[labels[neighbors.ids[r]]];
    entry.first += 1;
    entry.second += neighbors.distances[r];
  }

  auto best = tally.begin();
  for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
    const bool wins = it->second.first != best->second.first
                          ? it->second.first > best->second.first
                          : it->second.second < best->second.second;
    // map iteration is ascending by class id, so strict comparisons keep the
    // smaller class on full ties
    if (wins) best = it;
  }
  return best->first;
}

}  // namespace lbse
