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

#include "allnode/sampler.hpp"

#include <algorithm>
#include <array>
#include <random>

#include "allnode/error.hpp"

namespace allnode {
namespace {

std::uint64_t node_seed(std::uint64_t seed, NodeId v) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v >> 32)};
  std::uint64_t out = 0;
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  out = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  return out;
}

void append_row(CsrGraph& g, std::vector<NodeId>& row, NodeId self) {
  if (!std::binary_search(row.begin(), row.end(), self)) {
    row.insert(std::upper_bound(row.begin(), row.end(), self), self);
  }
  g.col_ids.insert(g.col_ids.end(), row.begin(), row.end());
  g.row_offsets.push_back(g.col_ids.size());
}

}  // namespace

LayerGraphs sample_layers(const CsrGraph& block, std::uint32_t k, std::uint64_t fanout, std::uint64_t seed) {
  if (k < 1) throw BoundsError("at least one layer is required");
  if (fanout < 1) throw BoundsError("fanout must be at least 1");
  std::vector<CsrGraph> layers(k);
  for (auto& g : layers) {
    g.node_count = block.node_count;
    g.row_begin = block.row_begin;
    g.row_offsets.reserve(block.rows() + 1);
  }
  std::vector<NodeId> pool;
  std::vector<NodeId> picked;
  for (std::uint64_t r = 0; r < block.rows(); ++r) {
    const NodeId v = block.row_begin + r;
    const auto nbrs = block.row(r);
    pool.assign(nbrs.begin(), nbrs.end());
    std::mt19937_64 rng(node_seed(seed, v));
    const std::size_t take = static_cast<std::size_t>(std::min<std::uint64_t>(fanout, pool.size()));
    for (std::uint32_t l = 0; l < k; ++l) {
      // Partial Fisher-Yates over the node's persistent pool.
      for (std::size_t i = 0; i < take; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
      }
      picked.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
      std::sort(picked.begin(), picked.end());
      append_row(layers[l], picked, v);
    }
  }
  LayerGraphs out;
  for (auto& g : layers) out.layers.push_back(std::make_shared<const CsrGraph>(std::move(g)));
  return out;
}

LayerGraphs full_graph_layers(const CsrGraph& block, std::uint32_t k) {
  if (k < 1) throw BoundsError("at least one layer is required");
  auto shared = std::make_shared<const CsrGraph>(with_self_loops(block));
  LayerGraphs out;
  out.layers.assign(k, shared);
  return out;
}

LayerGraphs make_layers(const CsrGraph& block, std::uint32_t k, std::uint64_t fanout, std::uint64_t seed) {
  return fanout == kFullNeighbors ? full_graph_layers(block, k) : sample_layers(block, k, fanout, seed);
}

LayerGraphs concat_layers(const std::vector<LayerGraphs>& parts) {
  if (parts.empty()) return {};
  const std::size_t k = parts.front().size();
  LayerGraphs out;
  for (std::size_t l = 0; l < k; ++l) {
    std::vector<CsrGraph> blocks;
    for (const auto& part : parts) {
      if (part.size() != k) throw ShapeError("layer counts differ between parts");
      blocks.push_back(part[l]);
    }
    out.layers.push_back(std::make_shared<const CsrGraph>(concat_row_blocks(blocks)));
  }
  return out;
}

}  // namespace allnode
