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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "allnode/dense.hpp"
#include "allnode/graph.hpp"
#include "allnode/partition.hpp"

namespace allnode {

/// Feature records loaded by one machine, in file order.
template <typename T>
struct FeatureShard {
  std::vector<NodeId> ids;
  DenseMatrix<T> rows;
};

struct FeatureFileHeader {
  std::uint64_t node_count = 0;
  std::uint32_t dim = 0;
};

/// "DEALFEAT", u64 N, u32 D, then N records of (u64 id, D x f32), any order.
/// Embedding files use the same layout.
void write_features(const std::filesystem::path& path, std::span<const NodeId> ids,
                    const DenseMatrix<float>& rows);
FeatureFileHeader read_feature_header(const std::filesystem::path& path);

/// Records [split_range(N, machines, machine)) of the file, in file order.
template <typename T>
FeatureShard<T> read_feature_shard(const std::filesystem::path& path, int machine, int machines);

/// Dense N x D matrix from shards keyed by node id. Throws IntegrityError
/// when a node is missing or loaded twice.
template <typename T>
DenseMatrix<T> assemble_features(std::span<const FeatureShard<T>> shards, std::uint64_t node_count);

/// Machine i loads nodes split_range(N, machines, i) in ascending order.
template <typename T>
std::vector<FeatureShard<T>> canonical_shards(const DenseMatrix<T>& x, int machines);

/// Nodes in a seeded random order, cut into `machines` consecutive shards.
template <typename T>
std::vector<FeatureShard<T>> shuffled_shards(const DenseMatrix<T>& x, int machines, std::uint64_t seed);

template <typename T>
FeatureLocationTable location_table(std::span<const FeatureShard<T>> shards, std::uint64_t node_count);

/// Seeded uniform values in [lo, hi].
template <typename T>
DenseMatrix<T> random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo = -1.0,
                             double hi = 1.0);

}  // namespace allnode
