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

#include "allnode/partition.hpp"

#include <algorithm>

#include "allnode/error.hpp"

namespace allnode {

IndexRange split_range(std::uint64_t total, std::uint64_t parts, std::uint64_t index) {
  if (parts == 0 || index >= parts) {
    throw BoundsError("partition index " + std::to_string(index) + " not in [0," +
                      std::to_string(parts) + ")");
  }
  const std::uint64_t base = total / parts;
  const std::uint64_t rem = total % parts;
  const std::uint64_t begin = index * base + std::min(index, rem);
  return {begin, begin + base + (index < rem ? 1 : 0)};
}

std::uint64_t split_owner(std::uint64_t total, std::uint64_t parts, std::uint64_t element) {
  if (element >= total) {
    throw BoundsError("element " + std::to_string(element) + " outside [0," +
                      std::to_string(total) + ")");
  }
  const std::uint64_t base = total / parts;
  const std::uint64_t rem = total % parts;
  const std::uint64_t big = rem * (base + 1);
  if (element < big) return element / (base + 1);
  return rem + (element - big) / base;
}

int GridConfig::machine_id(int p, int m) const {
  if (p < 0 || p >= p_parts || m < 0 || m >= m_parts) {
    throw BoundsError("grid coordinate (" + std::to_string(p) + "," + std::to_string(m) +
                      ") outside " + std::to_string(p_parts) + "x" + std::to_string(m_parts));
  }
  return p * m_parts + m;
}

GridCoord GridConfig::coord(int machine) const {
  if (machine < 0 || machine >= machines()) {
    throw BoundsError("machine id " + std::to_string(machine) + " outside grid");
  }
  return {machine / m_parts, machine % m_parts};
}

std::vector<int> GridConfig::row_group(int p) const {
  std::vector<int> ids;
  for (int m = 0; m < m_parts; ++m) ids.push_back(machine_id(p, m));
  return ids;
}

void GridConfig::validate() const {
  if (p_parts < 1 || m_parts < 1) throw BoundsError("grid needs P >= 1 and M >= 1");
}

NodeRange node_range(const GridConfig& grid, int p) {
  if (p < 0 || p >= grid.p_parts) {
    throw BoundsError("row partition " + std::to_string(p) + " outside [0," +
                      std::to_string(grid.p_parts) + ")");
  }
  return split_range(grid.node_count, static_cast<std::uint64_t>(grid.p_parts),
                     static_cast<std::uint64_t>(p));
}

ColumnRange feature_range(const GridConfig& grid, int m) {
  return column_range(grid.feat_dim, grid.m_parts, m);
}

ColumnRange column_range(std::uint64_t width, int m_parts, int m) {
  if (m < 0 || m >= m_parts) {
    throw BoundsError("feature partition " + std::to_string(m) + " outside [0," +
                      std::to_string(m_parts) + ")");
  }
  return split_range(width, static_cast<std::uint64_t>(m_parts), static_cast<std::uint64_t>(m));
}

int owner_row_group(const GridConfig& grid, NodeId v) {
  return static_cast<int>(split_owner(grid.node_count, static_cast<std::uint64_t>(grid.p_parts), v));
}

template <typename T>
std::vector<TensorTile<T>> scatter_tiles(const DenseMatrix<T>& full, const GridConfig& grid) {
  grid.validate();
  if (full.rows() != grid.node_count || full.cols() != grid.feat_dim) {
    throw ShapeError("matrix is " + std::to_string(full.rows()) + "x" +
                     std::to_string(full.cols()) + ", grid expects " +
                     std::to_string(grid.node_count) + "x" + std::to_string(grid.feat_dim));
  }
  std::vector<TensorTile<T>> tiles;
  tiles.reserve(static_cast<std::size_t>(grid.machines()));
  for (int id = 0; id < grid.machines(); ++id) {
    const auto [p, m] = grid.coord(id);
    TensorTile<T> t{node_range(grid, p), feature_range(grid, m), full.cols(), {}};
    t.data = DenseMatrix<T>(t.rows.size(), t.cols.size());
    for (std::uint64_t r = 0; r < t.rows.size(); ++r) {
      auto src = full.row(t.rows.begin + r).subspan(t.cols.begin, t.cols.size());
      std::copy(src.begin(), src.end(), t.data.row(r).begin());
    }
    tiles.push_back(std::move(t));
  }
  return tiles;
}

template <typename T>
DenseMatrix<T> gather_tiles(std::span<const TensorTile<T>> tiles, const GridConfig& grid) {
  if (tiles.size() != static_cast<std::size_t>(grid.machines())) {
    throw ShapeError("expected one tile per machine");
  }
  std::uint64_t width = 0;
  for (int m = 0; m < grid.m_parts; ++m) width += tiles[static_cast<std::size_t>(m)].cols.size();
  DenseMatrix<T> full(grid.node_count, width);
  for (int id = 0; id < grid.machines(); ++id) {
    const auto [p, m] = grid.coord(id);
    const auto& t = tiles[static_cast<std::size_t>(id)];
    if (t.rows != node_range(grid, p) || t.cols != column_range(width, grid.m_parts, m) ||
        t.data.rows() != t.rows.size() || t.data.cols() != t.cols.size()) {
      throw ShapeError("tile of machine " + std::to_string(id) + " has the wrong layout");
    }
    for (std::uint64_t r = 0; r < t.rows.size(); ++r) {
      auto src = t.data.row(r);
      std::copy(src.begin(), src.end(), full.row(t.rows.begin + r).begin() + t.cols.begin);
    }
  }
  return full;
}

FeatureLocationTable FeatureLocationTable::build(std::span<const std::vector<NodeId>> shard_ids,
                                                 std::uint64_t node_count) {
  FeatureLocationTable table;
  table.locations_.assign(node_count, FeatureLocation{});
  table.shards_.assign(shard_ids.begin(), shard_ids.end());
  for (std::size_t m = 0; m < shard_ids.size(); ++m) {
    for (std::uint64_t off = 0; off < shard_ids[m].size(); ++off) {
      const NodeId v = shard_ids[m][off];
      if (v >= node_count) {
        throw IntegrityError("shard " + std::to_string(m) + " holds unknown node " +
                             std::to_string(v));
      }
      auto& loc = table.locations_[v];
      if (loc.machine >= 0) {
        throw IntegrityError("node " + std::to_string(v) + " loaded twice");
      }
      loc = {static_cast<int>(m), off};
    }
  }
  for (NodeId v = 0; v < node_count; ++v) {
    if (table.locations_[v].machine < 0) {
      throw IntegrityError("node " + std::to_string(v) + " missing from location table");
    }
  }
  return table;
}

const FeatureLocation& FeatureLocationTable::at(NodeId v) const {
  if (v >= locations_.size() || locations_[v].machine < 0) {
    throw IntegrityError("node " + std::to_string(v) + " missing from location table");
  }
  return locations_[v];
}

template std::vector<TensorTile<float>> scatter_tiles(const DenseMatrix<float>&, const GridConfig&);
template std::vector<TensorTile<double>> scatter_tiles(const DenseMatrix<double>&, const GridConfig&);
template DenseMatrix<float> gather_tiles(std::span<const TensorTile<float>>, const GridConfig&);
template DenseMatrix<double> gather_tiles(std::span<const TensorTile<double>>, const GridConfig&);

}  // namespace allnode
