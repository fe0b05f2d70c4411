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

#include "allnode/pipeline.hpp"
#include "prim_common.hpp"

namespace allnode {
namespace {

// Machines asked for the columns of a group, with the column slice each
// returns.
struct Source {
  int machine = 0;
  ColumnRange cols;
};

std::vector<Source> spmm_sources(const GridConfig& grid, const NzGroup& g, int m, std::uint64_t width) {
  if (g.kind == GroupKind::Local) return {};
  return {{grid.machine_id(g.row_group, m), column_range(width, grid.m_parts, m)}};
}

std::vector<Source> sddmm_sources(const GridConfig& grid, const NzGroup& g, int m, std::uint64_t width) {
  std::vector<Source> out;
  for (int j = 0; j < grid.m_parts; ++j) {
    if (g.kind == GroupKind::Local && j == m) continue;
    out.push_back({grid.machine_id(g.row_group, j), column_range(width, grid.m_parts, j)});
  }
  return out;
}

template <typename T, typename SourcesOf, typename ComputeGroup>
void run_schedule(Worker& worker, Channel& ch, const std::vector<NzGroup>& groups,
                  const GroupSchedule& schedule, SourcesOf&& sources_of, ComputeGroup&& compute) {
  const GridConfig& grid = worker.grid();
  std::vector<std::vector<std::vector<T>>> received(groups.size());
  std::vector<std::int64_t> reserved(groups.size(), 0);
  for (const auto& task : schedule.tasks) {
    const auto gi = static_cast<std::size_t>(task.group);
    const NzGroup& g = groups[gi];
    const std::vector<Source> sources = sources_of(g);
    switch (task.kind) {
      case TaskKind::IdComm: {
        for (const auto& s : sources) {
          ch.send(s.machine, Tag::IdRequest, encode_ids(g.columns, grid.node_count));
          reserved[gi] += static_cast<std::int64_t>(g.columns.size() * s.cols.size());
        }
        worker.track_inflight(reserved[gi]);
        break;
      }
      case TaskKind::FeatComm: {
        for (const auto& s : sources) {
          received[gi].push_back(
              detail::expect_values<T>(ch.recv(s.machine, Tag::FeatureBlock), g.columns.size() * s.cols.size()));
        }
        break;
      }
      case TaskKind::Compute: {
        compute(g, sources, received[gi]);
        received[gi].clear();
        received[gi].shrink_to_fit();
        worker.track_inflight(-reserved[gi]);
        break;
      }
    }
  }
}

}  // namespace

template <typename T>
TensorTile<T> grouped_spmm(Worker& worker, const CsrGraph& block, const EdgeValues<T>& edges,
                           const TensorTile<T>& h, const GroupingOptions& options) {
  const GridConfig& grid = worker.grid();
  check_tile(grid, worker.id(), h);
  detail::check_block(worker, block);
  const std::size_t w = h.cols.size();
  edges.validate(block.nnz(), w);
  const int m = worker.m();

  const auto groups = partition_nonzeros(block, grid, worker.id(), options.target_entries);
  const GroupSchedule schedule = build_schedule(groups, options.variant);
  schedule.validate(groups);

  Channel ch = worker.open_channel();
  ch.serve(Tag::IdRequest, Tag::FeatureBlock, detail::row_server(h));
  RowAccumulator<T> acc(block.rows(), w, groups.size());

  run_schedule<T>(worker, ch, groups, schedule,
                  [&](const NzGroup& g) { return spmm_sources(grid, g, m, h.width); },
                  [&](const NzGroup& g, const std::vector<Source>&, const std::vector<std::vector<T>>& got) {
    detail::FetchedRows<T> remote;
    if (g.kind == GroupKind::Remote) remote = {g.columns, got.at(0), w};
    std::vector<std::uint64_t> rows;
    std::vector<T> products(g.nonzeros.size() * w);
    rows.reserve(g.nonzeros.size());
    std::uint64_t r = 0;
    for (std::size_t k = 0; k < g.nonzeros.size(); ++k) {
      const std::uint64_t nz = g.nonzeros[k];
      while (block.row_offsets[r + 1] <= nz) ++r;
      const NodeId c = block.col_ids[nz];
      const T* hr = g.kind == GroupKind::Local ? h.data.row(c - h.rows.begin).data() : remote.find(c);
      kernel::spmm_product(edges, nz, hr, std::span<T>(products.data() + k * w, w));
      rows.push_back(r);
    }
    worker.compute(static_cast<double>(g.nonzeros.size() * w));
    acc.stage(g.id, std::move(rows), std::move(products));
  });

  TensorTile<T> out = make_tile<T>(grid, worker.id(), h.width);
  out.data = acc.finish();
  ch.close();
  return out;
}

template <typename T>
AttnBlock<T> grouped_sddmm_split(Worker& worker, const CsrGraph& block, const TensorTile<T>& dest,
                                 const TensorTile<T>& src, std::size_t heads,
                                 const GroupingOptions& options) {
  const GridConfig& grid = worker.grid();
  check_tile(grid, worker.id(), dest);
  check_tile(grid, worker.id(), src);
  detail::check_block(worker, block);
  if (dest.width != src.width) throw ShapeError("sddmm operand widths differ");
  kernel::check_heads(dest.width, heads);
  const int p = worker.p();
  const int m = worker.m();
  const int mp = grid.m_parts;
  const std::uint64_t d = dest.width;
  const auto bounds = split_rows_by_nnz(block, mp);
  const auto rows_of = [&](int j) {
    return IndexRange{bounds[static_cast<std::size_t>(j)], bounds[static_cast<std::size_t>(j) + 1]};
  };
  const IndexRange mine = rows_of(m);

  const auto groups = partition_nonzeros(block, grid, worker.id(), options.target_entries, mine);
  const GroupSchedule schedule = build_schedule(groups, options.variant);
  schedule.validate(groups);

  Channel push = worker.open_channel();
  Channel req = worker.open_channel();
  req.serve(Tag::IdRequest, Tag::FeatureBlock, detail::row_server(src));

  for (int j = 0; j < mp; ++j) {
    if (j == m) continue;
    push.send(grid.machine_id(p, j), Tag::FeatureBlock,
              Payload::of(detail::copy_block(dest.data, rows_of(j), {0, dest.cols.size()})));
  }
  DenseMatrix<T> dest_rows(mine.size(), d);
  detail::paste_block(dest_rows, {0, mine.size()}, dest.cols,
                      detail::copy_block(dest.data, mine, {0, dest.cols.size()}));
  for (int j = 0; j < mp; ++j) {
    if (j == m) continue;
    detail::paste_block(dest_rows, {0, mine.size()}, column_range(d, mp, j),
                        push.recv(grid.machine_id(p, j), Tag::FeatureBlock).payload.to<T>());
  }

  AttnBlock<T> out{heads, std::vector<T>(block.nnz() * heads)};
  run_schedule<T>(worker, req, groups, schedule,
                  [&](const NzGroup& g) { return sddmm_sources(grid, g, m, d); },
                  [&](const NzGroup& g, const std::vector<Source>& sources, const std::vector<std::vector<T>>& got) {
    DenseMatrix<T> rows(g.columns.size(), d);
    for (std::size_t s = 0; s < sources.size(); ++s) {
      detail::paste_block(rows, {0, g.columns.size()}, sources[s].cols, got[s]);
    }
    if (g.kind == GroupKind::Local) {
      detail::paste_block(rows, {0, g.columns.size()}, src.cols, gather_rows_for_request(src, g.columns));
    }
    detail::FetchedRows<T> full{g.columns, {rows.values().begin(), rows.values().end()}, d};
    std::uint64_t r = mine.begin;
    for (const std::uint64_t nz : g.nonzeros) {
      while (block.row_offsets[r + 1] <= nz) ++r;
      kernel::sddmm_scores(dest_rows.row(r - mine.begin).data(), full.find(block.col_ids[nz]), d, heads,
                           out.values.data() + nz * heads);
    }
    worker.compute(static_cast<double>(g.nonzeros.size() * d));
  });

  const std::uint64_t nz_begin = block.row_offsets[mine.begin];
  const std::uint64_t nz_end = block.row_offsets[mine.end];
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

#define ALLNODE_INSTANTIATE(T)                                                                   \
  template TensorTile<T> grouped_spmm(Worker&, const CsrGraph&, const EdgeValues<T>&,            \
                                      const TensorTile<T>&, const GroupingOptions&);             \
  template AttnBlock<T> grouped_sddmm_split(Worker&, const CsrGraph&, const TensorTile<T>&,      \
                                            const TensorTile<T>&, std::size_t, const GroupingOptions&);

ALLNODE_INSTANTIATE(float)
ALLNODE_INSTANTIATE(double)

#undef ALLNODE_INSTANTIATE

}  // namespace allnode
