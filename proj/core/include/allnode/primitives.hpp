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
#include <vector>

#include "allnode/kernels.hpp"
#include "allnode/partition.hpp"
#include "allnode/transport.hpp"

namespace allnode {

/// Distributed H * W for a column-split H. Inside each row-group the tile is
/// redistributed to row slices over a ring, multiplied locally with the
/// replicated W, and redistributed back to the column split of the output.
template <typename T>
TensorTile<T> dist_gemm(Worker& worker, const TensorTile<T>& h, const DenseMatrix<T>& w);

/// Baseline GEMM: every machine multiplies its column slice with the
/// matching rows of W, and each output column slice is reduced on its owner,
/// summing partials in ascending machine order.
template <typename T>
TensorTile<T> dist_gemm_allreduce(Worker& worker, const TensorTile<T>& h, const DenseMatrix<T>& w);

/// Three-tensor SPMM with feature exchange. Machine (p, m) asks (p', m) for
/// the deduplicated column ids of row-group p' that its block touches and
/// computes its output tile locally.
template <typename T>
TensorTile<T> dist_spmm(Worker& worker, const CsrGraph& block, const EdgeValues<T>& edges,
                        const TensorTile<T>& h);

/// Baseline SPMM: ships the sub-block of the graph (structure and edge
/// values) that touches row-group p' to (p', m), which returns partial rows.
template <typename T>
TensorTile<T> dist_spmm_graph_exchange(Worker& worker, const CsrGraph& block,
                                       const EdgeValues<T>& edges, const TensorTile<T>& h);

/// SDDMM with the rows of the block split among the row-group replicas and
/// the computed scores exchanged afterwards. Every replica returns the full
/// AttnBlock of its block.
template <typename T>
AttnBlock<T> dist_sddmm_split(Worker& worker, const CsrGraph& block, const TensorTile<T>& dest,
                              const TensorTile<T>& src, std::size_t heads);

/// SDDMM where every replica computes all scores of its block.
template <typename T>
AttnBlock<T> dist_sddmm_duplicate(Worker& worker, const CsrGraph& block, const TensorTile<T>& dest,
                                  const TensorTile<T>& src, std::size_t heads);

/// Row boundaries (parts + 1 entries, local row indices) splitting the block
/// into contiguous row ranges with balanced non-zero counts.
std::vector<std::uint64_t> split_rows_by_nnz(const CsrGraph& block, int parts);

/// Rows of `tile` for the requested global ids, concatenated. Throws
/// ProtocolError for an id outside the tile's row range.
template <typename T>
std::vector<T> gather_rows_for_request(const TensorTile<T>& tile, std::span<const NodeId> ids);

/// Sorted distinct column ids of rows [rows.begin, rows.end) of `block`,
/// bucketed by owning row-group.
std::vector<std::vector<NodeId>> columns_by_owner(const CsrGraph& block, const GridConfig& grid,
                                                  IndexRange rows);

}  // namespace allnode
