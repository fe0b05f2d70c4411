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

#include "allnode/construct.hpp"

#include <string>

namespace allnode {

CsrGraph build_csr_distributed(Worker& worker, const EdgeList& shard) {
  const GridConfig& grid = worker.grid();
  if (shard.node_count != grid.node_count) {
    throw ShapeError("edge shard has " + std::to_string(shard.node_count) + " nodes, grid has " +
                     std::to_string(grid.node_count));
  }
  shard.validate();

  std::vector<std::vector<NodeId>> outgoing(static_cast<std::size_t>(grid.p_parts));
  for (const auto& e : shard.edges) {
    auto& out = outgoing[static_cast<std::size_t>(owner_row_group(grid, e.dst))];
    out.push_back(e.src);
    out.push_back(e.dst);
  }

  Channel ch = worker.open_channel();
  const int n = grid.machines();
  for (int dst = 0; dst < n; ++dst) {
    if (dst == worker.id()) continue;
    const auto& pairs = outgoing[static_cast<std::size_t>(grid.coord(dst).p)];
    ch.send(dst, Tag::EdgeShuffle, encode_ids(pairs, grid.node_count));
  }

  std::vector<Edge> mine;
  auto append = [&](std::span<const NodeId> pairs) {
    for (std::size_t i = 0; i + 1 < pairs.size(); i += 2) mine.push_back({pairs[i], pairs[i + 1]});
  };
  for (int src = 0; src < n; ++src) {
    if (src == worker.id()) {
      append(outgoing[static_cast<std::size_t>(worker.p())]);
      continue;
    }
    const auto pairs = decode_ids(ch.recv(src, Tag::EdgeShuffle).payload);
    if (pairs.size() % 2 != 0) throw ProtocolError("edge shuffle payload has an odd length");
    append(pairs);
  }
  const NodeRange rows = node_range(grid, worker.p());
  return build_csr_rows(mine, grid.node_count, rows.begin, rows.end);
}

}  // namespace allnode
