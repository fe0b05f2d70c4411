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
#include <string_view>
#include <vector>

#include "allnode/graph.hpp"
#include "allnode/sampler.hpp"

namespace allnode {

enum class SharingScheme : std::uint8_t { BatchDedup, OutermostHopDedup, CacheDedup };
std::string_view scheme_name(SharingScheme s);
SharingScheme parse_scheme(std::string_view name);

struct SharingModel {
  SharingScheme scheme = SharingScheme::BatchDedup;
  std::uint64_t batch_size = 1;
  std::uint32_t layers = 1;
  std::uint64_t fanout = kFullNeighbors;
  /// Entries held by the LRU cache of CacheDedup.
  std::uint64_t cache_capacity = 0;

  void validate(std::uint64_t node_count) const;
};

/// Counts of (node, layer) computations. Each ego network is deduplicated
/// internally; `unique` applies the scheme across ego networks.
struct SharingCount {
  std::uint64_t total = 0;
  std::uint64_t unique = 0;

  double ratio() const noexcept { return total == 0 ? 0.0 : 1.0 - static_cast<double>(unique) / static_cast<double>(total); }
};

/// Nodes of v's ego network per layer; entry l lists the inputs of GNN
/// layer l+1, the last entry is {v}.
std::vector<std::vector<NodeId>> ego_levels(const LayerGraphs& layers, NodeId v);

/// Targets are batched in ascending id order.
SharingCount sharing_count(const LayerGraphs& layers, const SharingModel& model);
SharingCount sharing_count(const LayerGraphs& layers, const SharingModel& model,
                           std::span<const std::vector<NodeId>> batches);

/// Samples k layer graphs of `graph` with `seed` and returns the ratio.
double sharing_ratio(const CsrGraph& graph, const SharingModel& model, std::uint64_t seed);

}  // namespace allnode
