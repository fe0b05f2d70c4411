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

std::vector<std::uint64_t> split_rows_by_nnz(const CsrGraph& block, int parts) {
  if (parts < 1) throw BoundsError("row split needs at least one part");
  const auto n = static_cast<std::uint64_t>(parts);
  std::vector<std::uint64_t> bounds(n + 1, 0);
  bounds[n] = block.rows();
  if (block.nnz() == 0) {
    for (std::uint64_t j = 1; j < n; ++j) bounds[j] = split_range(block.rows(), n, j).begin;
    return bounds;
  }
  for (std::uint64_t j = 1; j < n; ++j) {
    const std::uint64_t target = (j * block.nnz() + n / 2) / n;
    auto it = std::lower_bound(block.row_offsets.begin(), block.row_offsets.end(), target);
    bounds[j] = std::max(bounds[j - 1], static_cast<std::uint64_t>(it - block.row_offsets.begin()));
    bounds[j] = std::min(bounds[j], block.rows());
  }
  return bounds;
}

namespace {

template <typename T>
void check_sddmm_inputs(const Worker& worker, const CsrGraph& block, const TensorTile<T>& dest,
                        const TensorTile<T>& src, std::size_t heads) {
  check_tile(worker.grid(), worker.id(), dest);
  check_tile(worker.grid(), worker.id(), src);
  detail::check_block(worker, block);
  if (dest.width != src.width) throw ShapeError("sddmm operand widths differ");
  kernel::check_heads(dest.width, heads);
}

// Full-width rows needed by one machine: destination rows [rows) of its
// block and every source column those rows touch.
template <typename T>
struct Gathered {
  DenseMatrix<T> dest;
  std::vector<detail::FetchedRows<T>> src;
};

template <typename T>
Gathered<T> gather_operands(Worker& worker, Channel& push, Channel& req, const CsrGraph& block,
                            const TensorTile<T>& dest, const TensorTile<T>& src,
                            std::span<const std::uint64_t> bounds, bool shared_bounds) {
  const GridConfig& grid = worker.grid();
  const int p = worker.p();
  const int m = worker.m();
  const int mp = grid.m_parts;
  const std::uint64_t d = dest.width;
  const auto rows_of = [&](int j) {
    return shared_bounds ? IndexRange{bounds[0], bounds.back()}
                         : IndexRange{bounds[static_cast<std::size_t>(j)], bounds[static_cast<std::size_t>(j) + 1]};
  };
  const IndexRange mine = rows_of(m);

  for (int j = 0; j < mp; ++j) {
    if (j == m) continue;
    push.send(grid.machine_id(p, j), Tag::FeatureBlock,
              Payload::of(detail::copy_block(dest.data, rows_of(j), {0, dest.cols.size()})));
  }

  auto wanted = columns_by_owner(block, grid, mine);
  for (int q = 0; q < grid.p_parts; ++q) {
    const auto& ids = wanted[static_cast<std::size_t>(q)];
    if (ids.empty()) continue;
    for (int j = 0; j < mp; ++j) {
      if (q == p && j == m) continue;
      req.send(grid.machine_id(q, j), Tag::IdRequest, encode_ids(ids, grid.node_count));
    }
  }

  Gathered<T> g;
  g.dest = DenseMatrix<T>(mine.size(), d);
  detail::paste_block(g.dest, {0, mine.size()}, dest.cols,
                      detail::copy_block(dest.data, mine, {0, dest.cols.size()}));
  for (int j = 0; j < mp; ++j) {
    if (j == m) continue;
    detail::paste_block(g.dest, {0, mine.size()}, column_range(d, mp, j),
                        push.recv(grid.machine_id(p, j), Tag::FeatureBlock).payload.to<T>());
  }

  g.src.resize(static_cast<std::size_t>(grid.p_parts));
  for (int q = 0; q < grid.p_parts; ++q) {
    auto& ids = wanted[static_cast<std::size_t>(q)];
    if (ids.empty()) continue;
    DenseMatrix<T> rows(ids.size(), d);
    for (int j = 0; j < mp; ++j) {
      const ColumnRange cols = column_range(d, mp, j);
      std::vector<T> vals;
      if (q == p && j == m) {
        vals = gather_rows_for_request(src, ids);
      } else {
        vals = detail::expect_values<T>(req.recv(grid.machine_id(q, j), Tag::FeatureBlock), ids.size() * cols.size());
      }
      detail::paste_block(rows, {0, ids.size()}, cols, vals);
    }
    auto& f = g.src[static_cast<std::size_t>(q)];
    f.ids = std::move(ids);
    f.width = d;
    f.values.assign(rows.values().begin(), rows.values().end());
  }
  return g;
}

template <typename T>
void score_rows(const CsrGraph& block, const GridConfig& grid, const Gathered<T>& g, IndexRange rows,
                std::size_t width, std::size_t heads, T* out) {
  for (std::uint64_t r = rows.begin; r < rows.end; ++r) {
    const T* drow = g.dest.row(r - rows.begin).data();
    for (std::uint64_t nz = block.row_offsets[r]; nz < block.row_offsets[r + 1]; ++nz) {
      const NodeId c = block.col_ids[nz];
      const T* srow = g.src[static_cast<std::size_t>(owner_row_group(grid, c))].find(c);
      kernel::sddmm_scores(drow, srow, width, heads, out + nz * heads);
    }
  }
}

}  // namespace

template <typename T>
AttnBlock<T> dist_sddmm_split(Worker& worker, const CsrGraph& block, const TensorTile<T>& dest,
                              const TensorTile<T>& src, std::size_t heads) {
  check_sddmm_inputs(worker, block, dest, src, heads);
  const GridConfig& grid = worker.grid();
  const int p = worker.p();
  const int m = worker.m();
  const int mp = grid.m_parts;
  const auto bounds = split_rows_by_nnz(block, mp);
  const IndexRange mine{bounds[static_cast<std::size_t>(m)], bounds[static_cast<std::size_t>(m) + 1]};

  Channel push = worker.open_channel();
  Channel req = worker.open_channel();
  req.serve(Tag::IdRequest, Tag::FeatureBlock, detail::row_server(src));
  const Gathered<T> g = gather_operands(worker, push, req, block, dest, src, bounds, false);

  AttnBlock<T> out{heads, std::vector<T>(block.nnz() * heads)};
  const std::uint64_t nz_begin = block.row_offsets[mine.begin];
  const std::uint64_t nz_end = block.row_offsets[mine.end];
  worker.compute(static_cast<double>((nz_end - nz_begin) * dest.width));
  score_rows(block, grid, g, mine, dest.width, heads, out.values.data());

  std::vector<T> share(out.values.begin() + static_cast<std::ptrdiff_t>(nz_begin * heads),
                       out.values.begin() + static_cast<std::ptrdiff_t>(nz_end * heads));
  for (int j = 0; j < mp; ++j) {
    if (j != m) push.send(grid.machine_id(p, j), Tag::AttnBlock, Payload::of(share));
  }
  for (int j = 0; j < mp; ++j) {
    if (j == m) continue;
    const std::uint64_t b = block.row_offsets[bounds[static_cast<std::size_t>(j)]];
    const std::uint64_t e = block.row_offsets[bounds[static_cast<std::size_t>(j) + 1]];
    const auto vals = detail::expect_values<T>(push.recv(grid.machine_id(p, j), Tag::AttnBlock), (e - b) * heads);
    std::copy(vals.begin(), vals.end(), out.values.begin() + static_cast<std::ptrdiff_t>(b * heads));
  }
  req.close();
  return out;
}

template <typename T>
AttnBlock<T> dist_sddmm_duplicate(Worker& worker, const CsrGraph& block, const TensorTile<T>& dest,
                                  const TensorTile<T>& src, std::size_t heads) {
  check_sddmm_inputs(worker, block, dest, src, heads);
  const GridConfig& grid = worker.grid();
  const std::vector<std::uint64_t> bounds{0, block.rows()};

  Channel push = worker.open_channel();
  Channel req = worker.open_channel();
  req.serve(Tag::IdRequest, Tag::FeatureBlock, detail::row_server(src));
  const Gathered<T> g = gather_operands(worker, push, req, block, dest, src, bounds, true);

  AttnBlock<T> out{heads, std::vector<T>(block.nnz() * heads)};
  worker.compute(static_cast<double>(block.nnz() * dest.width));
  score_rows(block, grid, g, {0, block.rows()}, dest.width, heads, out.values.data());
  req.close();
  return out;
}

#define ALLNODE_INSTANTIATE(T)                                                                   \
  template AttnBlock<T> dist_sddmm_split(Worker&, const CsrGraph&, const TensorTile<T>&,         \
                                         const TensorTile<T>&, std::size_t);                     \
  template AttnBlock<T> dist_sddmm_duplicate(Worker&, const CsrGraph&, const TensorTile<T>&,     \
                                             const TensorTile<T>&, std::size_t);

ALLNODE_INSTANTIATE(float)
ALLNODE_INSTANTIATE(double)

#undef ALLNODE_INSTANTIATE

}  // namespace allnode
