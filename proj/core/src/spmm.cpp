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

#include <string>

#include "prim_common.hpp"

namespace allnode {

template <typename T>
std::vector<T> gather_rows_for_request(const TensorTile<T>& tile, std::span<const NodeId> ids) {
  const std::size_t w = tile.cols.size();
  std::vector<T> out;
  out.reserve(ids.size() * w);
  for (NodeId v : ids) {
    if (!tile.rows.contains(v)) {
      throw ProtocolError("requested node " + std::to_string(v) + " is outside the owned range [" +
                          std::to_string(tile.rows.begin) + ", " + std::to_string(tile.rows.end) + ")");
    }
    auto row = tile.data.row(v - tile.rows.begin);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

std::vector<std::vector<NodeId>> columns_by_owner(const CsrGraph& block, const GridConfig& grid,
                                                  IndexRange rows) {
  std::vector<std::vector<NodeId>> out(static_cast<std::size_t>(grid.p_parts));
  const auto first = block.col_ids.begin() + static_cast<std::ptrdiff_t>(block.row_offsets[rows.begin]);
  const auto last = block.col_ids.begin() + static_cast<std::ptrdiff_t>(block.row_offsets[rows.end]);
  std::vector<NodeId> cols(first, last);
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  for (NodeId c : cols) out[static_cast<std::size_t>(owner_row_group(grid, c))].push_back(c);
  return out;
}

namespace detail {

void check_block(const Worker& worker, const CsrGraph& block) {
  const GridConfig& grid = worker.grid();
  if (block.node_count != grid.node_count || block.row_begin != node_range(grid, worker.p()).begin ||
      block.rows() != node_range(grid, worker.p()).size()) {
    throw ShapeError("graph block of machine " + std::to_string(worker.id()) +
                     " does not match its row-group range");
  }
}

}  // namespace detail

template <typename T>
TensorTile<T> dist_spmm(Worker& worker, const CsrGraph& block, const EdgeValues<T>& edges,
                        const TensorTile<T>& h) {
  const GridConfig& grid = worker.grid();
  check_tile(grid, worker.id(), h);
  detail::check_block(worker, block);
  const std::size_t w = h.cols.size();
  edges.validate(block.nnz(), w);
  const int p = worker.p();

  Channel ch = worker.open_channel();
  ch.serve(Tag::IdRequest, Tag::FeatureBlock, detail::row_server(h));

  auto wanted = columns_by_owner(block, grid, {0, block.rows()});
  std::vector<detail::FetchedRows<T>> fetched(wanted.size());
  std::int64_t inflight = 0;
  for (int q = 0; q < grid.p_parts; ++q) {
    auto& ids = wanted[static_cast<std::size_t>(q)];
    if (q == p || ids.empty()) continue;
    ch.send(grid.machine_id(q, worker.m()), Tag::IdRequest, encode_ids(ids, grid.node_count));
    inflight += static_cast<std::int64_t>(ids.size() * w);
  }
  worker.track_inflight(inflight);
  for (int q = 0; q < grid.p_parts; ++q) {
    auto& ids = wanted[static_cast<std::size_t>(q)];
    if (q == p || ids.empty()) continue;
    auto& f = fetched[static_cast<std::size_t>(q)];
    f.values = detail::expect_values<T>(ch.recv(grid.machine_id(q, worker.m()), Tag::FeatureBlock), ids.size() * w);
    f.ids = std::move(ids);
    f.width = w;
  }

  TensorTile<T> out = make_tile<T>(grid, worker.id(), h.width);
  worker.compute(static_cast<double>(block.nnz() * w));
  kernel::spmm_rows(block, edges, [&](NodeId c) -> const T* {
    if (h.rows.contains(c)) return h.data.row(c - h.rows.begin).data();
    return fetched[static_cast<std::size_t>(owner_row_group(grid, c))].find(c);
  }, out.data);
  worker.track_inflight(-inflight);
  ch.close();
  return out;
}

template <typename T>
TensorTile<T> dist_spmm_graph_exchange(Worker& worker, const CsrGraph& block,
                                       const EdgeValues<T>& edges, const TensorTile<T>& h) {
  const GridConfig& grid = worker.grid();
  check_tile(grid, worker.id(), h);
  detail::check_block(worker, block);
  const std::size_t w = h.cols.size();
  edges.validate(block.nnz(), w);
  const int p = worker.p();
  const int m = worker.m();
  const std::size_t ew = edges.width;
  Channel ch = worker.open_channel();

  // Sub-blocks by owning row-group: touched rows, their lengths, columns and
  // edge values.
  struct SubBlock {
    std::vector<NodeId> rows;
    std::vector<NodeId> lengths;
    std::vector<NodeId> cols;
    std::vector<T> values;
  };
  std::vector<SubBlock> subs(static_cast<std::size_t>(grid.p_parts));
  for (std::uint64_t r = 0; r < block.rows(); ++r) {
    for (std::uint64_t nz = block.row_offsets[r]; nz < block.row_offsets[r + 1]; ++nz) {
      const NodeId c = block.col_ids[nz];
      auto& s = subs[static_cast<std::size_t>(owner_row_group(grid, c))];
      if (s.rows.empty() || s.rows.back() != block.row_begin + r) {
        s.rows.push_back(block.row_begin + r);
        s.lengths.push_back(0);
      }
      ++s.lengths.back();
      s.cols.push_back(c);
      s.values.insert(s.values.end(), edges.values.begin() + static_cast<std::ptrdiff_t>(nz * ew),
                      edges.values.begin() + static_cast<std::ptrdiff_t>((nz + 1) * ew));
    }
  }
  for (int q = 0; q < grid.p_parts; ++q) {
    if (q == p) continue;
    const auto& s = subs[static_cast<std::size_t>(q)];
    const int dst = grid.machine_id(q, m);
    std::vector<NodeId> head = s.rows;
    head.insert(head.end(), s.lengths.begin(), s.lengths.end());
    ch.send(dst, Tag::EdgeShuffle, encode_ids(head, grid.node_count));
    ch.send(dst, Tag::EdgeShuffle, encode_ids(s.cols, grid.node_count));
    ch.send(dst, Tag::FeatureBlock, Payload::of(s.values));
  }

  // Partial rows of a sub-block against the local tile, in sub-block order.
  auto partial_rows = [&](std::span<const NodeId> lengths, std::span<const NodeId> cols,
                          const std::vector<T>& values) {
    EdgeValues<T> ev{ew, values};
    std::vector<T> out(lengths.size() * w, T{});
    std::uint64_t nz = 0;
    for (std::size_t t = 0; t < lengths.size(); ++t) {
      std::span<T> o(out.data() + t * w, w);
      for (NodeId k = 0; k < lengths[t]; ++k, ++nz) {
        const NodeId c = cols[nz];
        if (!h.rows.contains(c)) {
          throw ProtocolError("shipped column " + std::to_string(c) + " is not owned here");
        }
        kernel::spmm_axpy(ev, nz, h.data.row(c - h.rows.begin).data(), o);
      }
    }
    return out;
  };

  for (int q = 0; q < grid.p_parts; ++q) {
    if (q == p) continue;
    const int src = grid.machine_id(q, m);
    const auto head = decode_ids(ch.recv(src, Tag::EdgeShuffle).payload);
    const auto cols = decode_ids(ch.recv(src, Tag::EdgeShuffle).payload);
    if (head.size() % 2 != 0) throw ProtocolError("malformed shipped sub-block header");
    const std::size_t k = head.size() / 2;
    std::span<const NodeId> lengths(head.data() + k, k);
    std::uint64_t total = 0;
    for (NodeId len : lengths) total += len;
    if (total != cols.size()) throw ProtocolError("shipped sub-block lengths do not match its columns");
    const auto values = detail::expect_values<T>(ch.recv(src, Tag::FeatureBlock), cols.size() * ew);
    worker.compute(static_cast<double>(cols.size() * w));
    ch.send(src, Tag::PartialResult, Payload::of(partial_rows(lengths, cols, values)));
  }

  std::vector<std::vector<T>> partials(static_cast<std::size_t>(grid.p_parts));
  {
    const auto& own = subs[static_cast<std::size_t>(p)];
    worker.compute(static_cast<double>(own.cols.size() * w));
    partials[static_cast<std::size_t>(p)] = partial_rows(own.lengths, own.cols, own.values);
  }
  for (int q = 0; q < grid.p_parts; ++q) {
    if (q == p) continue;
    partials[static_cast<std::size_t>(q)] = detail::expect_values<T>(
        ch.recv(grid.machine_id(q, m), Tag::PartialResult), subs[static_cast<std::size_t>(q)].rows.size() * w);
  }

  TensorTile<T> out = make_tile<T>(grid, worker.id(), h.width);
  for (int q = 0; q < grid.p_parts; ++q) {
    const auto& rows = subs[static_cast<std::size_t>(q)].rows;
    const auto& part = partials[static_cast<std::size_t>(q)];
    for (std::size_t t = 0; t < rows.size(); ++t) {
      auto o = out.data.row(rows[t] - out.rows.begin);
      for (std::size_t i = 0; i < w; ++i) o[i] += part[t * w + i];
    }
  }
  return out;
}

#define ALLNODE_INSTANTIATE(T)                                                                    \
  template std::vector<T> gather_rows_for_request(const TensorTile<T>&, std::span<const NodeId>); \
  template TensorTile<T> dist_spmm(Worker&, const CsrGraph&, const EdgeValues<T>&,                \
                                   const TensorTile<T>&);                                         \
  template TensorTile<T> dist_spmm_graph_exchange(Worker&, const CsrGraph&, const EdgeValues<T>&, \
                                                  const TensorTile<T>&);

ALLNODE_INSTANTIATE(float)
ALLNODE_INSTANTIATE(double)

#undef ALLNODE_INSTANTIATE

}  // namespace allnode
