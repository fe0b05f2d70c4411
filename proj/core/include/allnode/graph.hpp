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

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace allnode {

using NodeId = std::uint64_t;

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Directed edges as read from disk. Duplicates are allowed here and removed
/// when a CsrGraph is built.
struct EdgeList {
  std::uint64_t node_count = 0;
  std::vector<Edge> edges;

  /// Throws BoundsError if any endpoint is >= node_count.
  void validate() const;
};

/// Destination-major compressed sparse rows: row r lists the in-neighbours of
/// node row_begin + r, sorted ascending and free of duplicates. A full graph
/// has row_begin == 0 and node_count rows; a row-block covers a contiguous
/// slice of destinations but keeps global column ids.
struct CsrGraph {
  std::uint64_t node_count = 0;
  NodeId row_begin = 0;
  std::vector<std::uint64_t> row_offsets{0};
  std::vector<NodeId> col_ids;

  std::uint64_t rows() const noexcept { return row_offsets.size() - 1; }
  std::uint64_t nnz() const noexcept { return col_ids.size(); }
  NodeId row_end() const noexcept { return row_begin + rows(); }

  /// In-neighbours of local row r.
  std::span<const NodeId> row(std::uint64_t r) const {
    return {col_ids.data() + row_offsets[r], col_ids.data() + row_offsets[r + 1]};
  }
  std::uint64_t degree(std::uint64_t r) const {
    return row_offsets[r + 1] - row_offsets[r];
  }

  /// Throws IntegrityError when any structural invariant is broken.
  void validate() const;

  friend bool operator==(const CsrGraph&, const CsrGraph&) = default;
};

struct RmatParams {
  unsigned scale = 10;
  std::uint64_t avg_degree = 20;
  std::array<double, 4> probs{0.57, 0.19, 0.19, 0.05};
  std::uint64_t seed = 1;

  void validate() const;
};

/// Reads the text edge-list format: '#' comments, an optional "N <count>"
/// header, then one "src dst" pair per line.
EdgeList parse_edge_list(const std::filesystem::path& path);
EdgeList parse_edge_list(std::istream& in);
void write_edge_list(const EdgeList& el, std::ostream& out);

CsrGraph build_csr(const EdgeList& el);

/// CSR row-block of destinations [begin, end) from edges whose destinations
/// all fall in that range.
CsrGraph build_csr_rows(std::span<const Edge> edges, std::uint64_t node_count, NodeId begin,
                        NodeId end);

/// Enumerates the (src, dst) pairs stored in a CSR graph or row-block, in
/// row-major order.
std::vector<Edge> enumerate_edges(const CsrGraph& g);

/// Recursive-matrix edge generator. Quadrant order is (a: src low / dst low,
/// b: src low / dst high, c: src high / dst low, d: src high / dst high).
EdgeList generate_rmat(const RmatParams& params);

/// Copy of rows [begin, end) of g as a row-block (global column ids kept).
CsrGraph slice_rows(const CsrGraph& g, NodeId begin, NodeId end);

/// Concatenates consecutive row-blocks into one graph starting at the first
/// block's row_begin. Throws IntegrityError when blocks are not contiguous.
CsrGraph concat_row_blocks(std::span<const CsrGraph> blocks);

/// Returns g with node r inserted into row r wherever it is missing.
CsrGraph with_self_loops(const CsrGraph& g);

/// Binary cache: "DEALCSR1", u64 node_count, u64 nnz, u64 row_offsets[n+1],
/// u64 col_ids[nnz], all little-endian. Only full graphs are stored.
void write_csr_binary(const CsrGraph& g, const std::filesystem::path& path);
CsrGraph read_csr_binary(const std::filesystem::path& path);

}  // namespace allnode
