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
#include <memory>
#include <vector>

#include "allnode/graph.hpp"

namespace allnode {

/// Use every in-neighbour instead of sampling.
inline constexpr std::uint64_t kFullNeighbors = 0;

/// k per-layer 1-hop graphs over the same row range. Layer l drives GNN layer
/// l + 1. Layers may share one CSR.
struct LayerGraphs {
  std::vector<std::shared_ptr<const CsrGraph>> layers;

  std::size_t size() const noexcept { return layers.size(); }
  const CsrGraph& operator[](std::size_t l) const { return *layers.at(l); }
};

/// Draws, for every row of `block`, k independent samples of at most `fanout`
/// distinct in-neighbours. All k draws of a node come from one per-node state
/// (its neighbour list and an RNG stream keyed by (seed, node)), so results
/// do not depend on how rows are split across machines. Sampled rows are
/// sorted and carry a self-loop.
LayerGraphs sample_layers(const CsrGraph& block, std::uint32_t k, std::uint64_t fanout, std::uint64_t seed);

/// k layers sharing one CSR: the block with self-loops added.
LayerGraphs full_graph_layers(const CsrGraph& block, std::uint32_t k);

/// Layers for (fanout == kFullNeighbors ? full : sampled) inference.
LayerGraphs make_layers(const CsrGraph& block, std::uint32_t k, std::uint64_t fanout, std::uint64_t seed);

/// Concatenates per-machine layer graphs of consecutive row-blocks.
LayerGraphs concat_layers(const std::vector<LayerGraphs>& parts);

}  // namespace allnode
