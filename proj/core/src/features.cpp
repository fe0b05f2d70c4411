/*
 * Copyright 2026 The allnode Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "allnode/features.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "binary_io.hpp"

namespace allnode {
namespace {

constexpr std::string_view kFeatMagic = "DEALFEAT";
constexpr std::uint64_t kFeatHeaderBytes = 8 + 8 + 4;

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

FeatureFileHeader read_header(std::istream& in) {
  detail::expect_magic(in, kFeatMagic);
  FeatureFileHeader h;
  h.node_count = detail::read_le<std::uint64_t>(in, "node count");
  h.dim = detail::read_le<std::uint32_t>(in, "feature dimension");
  return h;
}

}  // namespace

void write_features(const std::filesystem::path& path, std::span<const NodeId> ids,
                    const DenseMatrix<float>& rows) {
  if (ids.size() != rows.rows()) throw ShapeError("one id per feature row is required");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  detail::write_magic(out, kFeatMagic);
  detail::write_le<std::uint64_t>(out, ids.size());
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(rows.cols()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    detail::write_le<std::uint64_t>(out, ids[i]);
    for (float v : rows.row(i)) detail::write_le(out, v);
  }
  if (!out) throw Error("failed writing " + path.string());
}

FeatureFileHeader read_feature_header(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_header(in);
}

template <typename T>
FeatureShard<T> read_feature_shard(const std::filesystem::path& path, int machine, int machines) {
  auto in = open_in(path);
  const FeatureFileHeader h = read_header(in);
  const IndexRange recs = split_range(h.node_count, static_cast<std::uint64_t>(machines),
                                      static_cast<std::uint64_t>(machine));
  const std::uint64_t rec_bytes = 8 + 4ULL * h.dim;
  in.seekg(static_cast<std::streamoff>(kFeatHeaderBytes + recs.begin * rec_bytes));
  FeatureShard<T> shard;
  shard.ids.reserve(recs.size());
  shard.rows = DenseMatrix<T>(recs.size(), h.dim);
  for (std::uint64_t i = 0; i < recs.size(); ++i) {
    const auto id = detail::read_le<std::uint64_t>(in, "node id");
    if (id >= h.node_count) {
      throw ParseError("feature record for node " + std::to_string(id) + " outside [0, " +
                       std::to_string(h.node_count) + ")");
    }
    shard.ids.push_back(id);
    for (auto& v : shard.rows.row(i)) v = static_cast<T>(detail::read_le<float>(in, "feature value"));
  }
  return shard;
}

template <typename T>
DenseMatrix<T> assemble_features(std::span<const FeatureShard<T>> shards, std::uint64_t node_count) {
  std::size_t dim = 0;
  for (const auto& s : shards) {
    if (s.rows.rows() > 0) dim = s.rows.cols();
  }
  DenseMatrix<T> out(node_count, dim);
  std::vector<bool> seen(node_count, false);
  for (const auto& s : shards) {
    for (std::size_t i = 0; i < s.ids.size(); ++i) {
      const NodeId v = s.ids[i];
      if (v >= node_count || seen[v]) throw IntegrityError("node " + std::to_string(v) + " loaded twice or out of range");
      seen[v] = true;
      std::copy(s.rows.row(i).begin(), s.rows.row(i).end(), out.row(v).begin());
    }
  }
  for (std::uint64_t v = 0; v < node_count; ++v) {
    if (!seen[v]) throw IntegrityError("node " + std::to_string(v) + " has no feature record");
  }
  return out;
}

namespace {

template <typename T>
std::vector<FeatureShard<T>> shards_from_order(const DenseMatrix<T>& x, int machines,
                                               const std::vector<NodeId>& order) {
  std::vector<FeatureShard<T>> out(static_cast<std::size_t>(machines));
  for (int i = 0; i < machines; ++i) {
    const IndexRange r = split_range(order.size(), static_cast<std::uint64_t>(machines), static_cast<std::uint64_t>(i));
    auto& s = out[static_cast<std::size_t>(i)];
    s.ids.assign(order.begin() + static_cast<std::ptrdiff_t>(r.begin), order.begin() + static_cast<std::ptrdiff_t>(r.end));
    s.rows = DenseMatrix<T>(r.size(), x.cols());
    for (std::size_t k = 0; k < s.ids.size(); ++k) {
      std::copy(x.row(s.ids[k]).begin(), x.row(s.ids[k]).end(), s.rows.row(k).begin());
    }
  }
  return out;
}

}  // namespace

template <typename T>
std::vector<FeatureShard<T>> canonical_shards(const DenseMatrix<T>& x, int machines) {
  std::vector<NodeId> order(x.rows());
  std::iota(order.begin(), order.end(), NodeId{0});
  return shards_from_order(x, machines, order);
}

template <typename T>
std::vector<FeatureShard<T>> shuffled_shards(const DenseMatrix<T>& x, int machines, std::uint64_t seed) {
  std::vector<NodeId> order(x.rows());
  std::iota(order.begin(), order.end(), NodeId{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return shards_from_order(x, machines, order);
}

template <typename T>
FeatureLocationTable location_table(std::span<const FeatureShard<T>> shards, std::uint64_t node_count) {
  std::vector<std::vector<NodeId>> ids;
  ids.reserve(shards.size());
  for (const auto& s : shards) ids.push_back(s.ids);
  return FeatureLocationTable::build(ids, node_count);
}

template <typename T>
DenseMatrix<T> random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo, double hi) {
  DenseMatrix<T> out(rows, cols);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& v : out.values()) v = static_cast<T>(dist(rng));
  return out;
}

#define ALLNODE_INSTANTIATE(T)                                                                        \
  template FeatureShard<T> read_feature_shard(const std::filesystem::path&, int, int);               \
  template DenseMatrix<T> assemble_features(std::span<const FeatureShard<T>>, std::uint64_t);        \
  template std::vector<FeatureShard<T>> canonical_shards(const DenseMatrix<T>&, int);                \
  template std::vector<FeatureShard<T>> shuffled_shards(const DenseMatrix<T>&, int, std::uint64_t);  \
  template FeatureLocationTable location_table(std::span<const FeatureShard<T>>, std::uint64_t);     \
  template DenseMatrix<T> random_matrix(std::size_t, std::size_t, std::uint64_t, double, double);

ALLNODE_INSTANTIATE(float)
ALLNODE_INSTANTIATE(double)

#undef ALLNODE_INSTANTIATE

}  // namespace allnode
