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

#include "allnode/measure.hpp"

#include <string>

#include "allnode/error.hpp"
#include "allnode/features.hpp"
#include "allnode/primitives.hpp"

namespace allnode {

PrimitiveRun measure_primitive(const CsrGraph& graph, const GridConfig& grid, Primitive primitive,
                               std::string_view variant, const MeasureOptions& options) {
  grid.validate();
  if (graph.node_count != grid.node_count || graph.rows() != graph.node_count) {
    throw ShapeError("measurement needs the full graph of the grid's node count");
  }
  const std::string v(variant);
  const bool known = (primitive == Primitive::Gemm && (v == "ours" || v == "sota")) ||
                     (primitive == Primitive::Spmm && (v == "ours" || v == "exchange_g0" || v == "grouped")) ||
                     (primitive == Primitive::Sddmm && (v == "split" || v == "duplicate" || v == "grouped"));
  if (primitive == Primitive::Spmm && v == "two_d") {
    throw UnsupportedError("spmm two_d exists only as a cost model");
  }
  if (!known) throw UnsupportedError("unknown variant " + std::string(primitive_name(primitive)) + "/" + v);

  const auto x = random_matrix<double>(grid.node_count, grid.feat_dim, options.seed);
  const auto tiles = scatter_tiles(x, grid);
  const auto w = random_matrix<double>(grid.feat_dim, options.out_dim ? options.out_dim : grid.feat_dim,
                                       options.seed + 1);
  std::vector<CsrGraph> blocks;
  for (int p = 0; p < grid.p_parts; ++p) {
    const NodeRange r = node_range(grid, p);
    blocks.push_back(slice_rows(graph, r.begin, r.end));
  }

  auto r = run_workers(
      grid,
      [&](Worker& worker) {
        const CsrGraph& block = blocks[static_cast<std::size_t>(worker.p())];
        const TensorTile<double>& h = tiles[static_cast<std::size_t>(worker.id())];
        switch (primitive) {
          case Primitive::Gemm:
            v == "ours" ? dist_gemm(worker, h, w) : dist_gemm_allreduce(worker, h, w);
            break;
          case Primitive::Spmm: {
            // Three-tensor form: one value per non-zero and feature column.
            const std::size_t width = h.cols.size();
            EdgeValues<double> ev{width, std::vector<double>(block.nnz() * width)};
            for (std::uint64_t i = 0; i < ev.values.size(); ++i) ev.values[i] = 1.0 / static_cast<double>(1 + i % 7);
            if (v == "ours") {
              dist_spmm(worker, block, ev, h);
            } else if (v == "grouped") {
              grouped_spmm(worker, block, ev, h, options.grouping);
            } else {
              dist_spmm_graph_exchange(worker, block, ev, h);
            }
            break;
          }
          case Primitive::Sddmm:
            if (v == "split") {
              dist_sddmm_split(worker, block, h, h, options.heads);
            } else if (v == "grouped") {
              grouped_sddmm_split(worker, block, h, h, options.heads, options.grouping);
            } else {
              dist_sddmm_duplicate(worker, block, h, h, options.heads);
            }
            break;
        }
        return 0;
      },
      options.run);
  return {std::move(r.stats), r.makespan, std::move(r.peak_inflight)};
}

}  // namespace allnode
