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
#include <span>
#include <string>
#include <vector>

#include "allnode/dense.hpp"
#include "allnode/error.hpp"
#include "allnode/graph.hpp"

namespace allnode {

/// Half-open index interval [begin, end). Used for node ranges and feature
/// column ranges alike.
struct IndexRange {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;

  std::uint64_t size() const noexcept { return end - begin; }
  bool contains(std::uint64_t i) const noexcept { return i >= begin && i < end; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

using NodeRange = IndexRange;
using ColumnRange = IndexRange;

/// Ceil-balanced contiguous split: the first (total % parts) pieces are one
/// element larger.
IndexRange split_range(std::uint64_t total, std::uint64_t parts, std::uint64_t index);

/// Index of the piece of split_range(total, parts, .) that holds `element`.
std::uint64_t split_owner(std::uint64_t total, std::uint64_t parts, std::uint64_t element);

struct GridCoord {
  int p = 0;
  int m = 0;
  friend bool operator==(const GridCoord&, const GridCoord&) = default;
};

/// P x M machine grid: P graph row partitions, each replicated on M machines
/// that split the feature columns. Machines are numbered p * M + m.
struct GridConfig {
  int p_parts = 1;
  int m_parts = 1;
  std::uint64_t node_count = 0;
  std::uint64_t feat_dim = 0;

  int machines() const noexcept { return p_parts * m_parts; }
  int machine_id(int p, int m) const;
  GridCoord coord(int machine) const;
  /// Machine ids of row-group p in ascending order.
  std::vector<int> row_group(int p) const;

  void validate() const;
};

NodeRange node_range(const GridConfig& grid, int p);
ColumnRange feature_range(const GridConfig& grid, int m);
/// Column slice m of an arbitrary width (layers change the feature width).
ColumnRange column_range(std::uint64_t width, int m_parts, int m);
/// Row-group that owns node v.
int owner_row_group(const GridConfig& grid, NodeId v);

/// Dense block of a feature matrix held by one machine.
template <typename T>
struct TensorTile {
  NodeRange rows;
  ColumnRange cols;
  /// Width of the whole matrix the tile was cut from.
  std::uint64_t width = 0;
  DenseMatrix<T> data;
};

/// Zero tile of `width`-column matrix in the canonical layout of `machine`.
template <typename T>
TensorTile<T> make_tile(const GridConfig& grid, int machine, std::uint64_t width) {
  const GridCoord c = grid.coord(machine);
  TensorTile<T> t{node_range(grid, c.p), column_range(width, grid.m_parts, c.m), width, {}};
  t.data = DenseMatrix<T>(t.rows.size(), t.cols.size());
  return t;
}

/// Throws ShapeError unless `tile` has the canonical layout of `machine`.
template <typename T>
void check_tile(const GridConfig& grid, int machine, const TensorTile<T>& tile) {
  const GridCoord c = grid.coord(machine);
  if (tile.rows != node_range(grid, c.p) ||
      tile.cols != column_range(tile.width, grid.m_parts, c.m) ||
      tile.data.rows() != tile.rows.size() || tile.data.cols() != tile.cols.size()) {
    throw ShapeError("tile of machine " + std::to_string(machine) + " has the wrong layout");
  }
}

/// Splits a full N x D matrix into per-machine tiles, indexed by machine id.
template <typename T>
std::vector<TensorTile<T>> scatter_tiles(const DenseMatrix<T>& full, const GridConfig& grid);

/// Inverse of scatter_tiles for an arbitrary column width. Tiles must be
/// indexed by machine id and cover the matrix exactly.
template <typename T>
DenseMatrix<T> gather_tiles(std::span<const TensorTile<T>> tiles, const GridConfig& grid);

struct FeatureLocation {
  int machine = -1;
  std::uint64_t offset = 0;
};

/// Where each node's feature record was loaded: (loader machine, record
/// offset within that machine's shard).
class FeatureLocationTable {
 public:
  /// shard_ids[i] lists the node ids loaded by machine i, in record order.
  static FeatureLocationTable build(std::span<const std::vector<NodeId>> shard_ids,
                                    std::uint64_t node_count);

  /// Throws IntegrityError when v has no recorded location.
  const FeatureLocation& at(NodeId v) const;
  std::uint64_t node_count() const noexcept { return locations_.size(); }
  const std::vector<NodeId>& shard(int machine) const { return shards_.at(machine); }
  int machines() const noexcept { return static_cast<int>(shards_.size()); }

 private:
  std::vector<FeatureLocation> locations_;
  std::vector<std::vector<NodeId>> shards_;
};

}  // namespace allnode
