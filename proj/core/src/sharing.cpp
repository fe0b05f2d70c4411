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

#include "allnode/sharing.hpp"

#include <algorithm>
#include <list>
#include <string>
#include <unordered_map>

#include "allnode/error.hpp"

namespace allnode {

std::string_view scheme_name(SharingScheme s) {
  switch (s) {
    case SharingScheme::BatchDedup: return "batch_dedup";
    case SharingScheme::OutermostHopDedup: return "outermost_hop_dedup";
    case SharingScheme::CacheDedup: return "cache_dedup";
  }
  return "?";
}

SharingScheme parse_scheme(std::string_view name) {
  for (auto s : {SharingScheme::BatchDedup, SharingScheme::OutermostHopDedup, SharingScheme::CacheDedup}) {
    if (scheme_name(s) == name) return s;
  }
  throw ParseError("unknown sharing scheme '" + std::string(name) + "'");
}

void SharingModel::validate(std::uint64_t node_count) const {
  if (batch_size == 0 || batch_size > node_count) {
    throw ShapeError("batch size must be in (0, " + std::to_string(node_count) + "]");
  }
  if (layers == 0) throw ShapeError("at least one layer is required");
}

std::vector<std::vector<NodeId>> ego_levels(const LayerGraphs& layers, NodeId v) {
  const std::size_t k = layers.size();
  std::vector<std::vector<NodeId>> levels(k + 1);
  levels[k] = {v};
  for (std::size_t l = k; l-- > 0;) {
    const CsrGraph& g = layers[l];
    auto& next = levels[l];
    for (NodeId u : levels[l + 1]) {
      const auto nb = g.row(u - g.row_begin);
      next.insert(next.end(), nb.begin(), nb.end());
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
  }
  return levels;
}

namespace {

class Lru {
 public:
  explicit Lru(std::uint64_t capacity) : capacity_(capacity) {}

  bool touch(std::uint64_t key) {
    if (capacity_ == 0) return false;
    auto it = index_.find(key);
    if (it != index_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      return true;
    }
    order_.push_front(key);
    index_[key] = order_.begin();
    if (order_.size() > capacity_) {
      index_.erase(order_.back());
      order_.pop_back();
    }
    return false;
  }

 private:
  std::uint64_t capacity_;
  std::list<std::uint64_t> order_;
  std::unordered_map<std::uint64_t, std::list<std::uint64_t>::iterator> index_;
};

}  // namespace

SharingCount sharing_count(const LayerGraphs& layers, const SharingModel& model,
                           std::span<const std::vector<NodeId>> batches) {
  if (layers.size() == 0) throw ShapeError("no layer graphs");
  const std::uint64_t n = layers[0].node_count;
  const std::size_t k = layers.size();
  SharingCount count;
  Lru cache(model.scheme == SharingScheme::CacheDedup ? model.cache_capacity : 0);
  for (const auto& batch : batches) {
    std::vector<std::vector<NodeId>> merged(k + 1);
    std::uint64_t inner = 0;
    for (NodeId v : batch) {
      if (v >= n) throw BoundsError("target " + std::to_string(v) + " out of range");
      auto levels = ego_levels(layers, v);
      for (std::size_t l = 0; l <= k; ++l) {
        count.total += levels[l].size();
        if (l > 0) inner += levels[l].size();
        merged[l].insert(merged[l].end(), levels[l].begin(), levels[l].end());
      }
    }
    for (auto& level : merged) {
      std::sort(level.begin(), level.end());
      level.erase(std::unique(level.begin(), level.end()), level.end());
    }
    switch (model.scheme) {
      case SharingScheme::OutermostHopDedup:
        count.unique += merged[0].size() + inner;
        break;
      case SharingScheme::BatchDedup:
      case SharingScheme::CacheDedup:
        for (std::size_t l = 0; l <= k; ++l) {
          for (NodeId u : merged[l]) {
            if (!cache.touch(static_cast<std::uint64_t>(l) * n + u)) ++count.unique;
          }
        }
        break;
    }
  }
  return count;
}

SharingCount sharing_count(const LayerGraphs& layers, const SharingModel& model) {
  if (layers.size() == 0) throw ShapeError("no layer graphs");
  const std::uint64_t n = layers[0].node_count;
  model.validate(n);
  std::vector<std::vector<NodeId>> batches;
  for (NodeId b = 0; b < n; b += model.batch_size) {
    std::vector<NodeId>& batch = batches.emplace_back();
    for (NodeId v = b; v < std::min(n, b + model.batch_size); ++v) batch.push_back(v);
  }
  return sharing_count(layers, model, batches);
}

double sharing_ratio(const CsrGraph& graph, const SharingModel& model, std::uint64_t seed) {
  model.validate(graph.node_count);
  const LayerGraphs layers = make_layers(graph, model.layers, model.fanout, seed);
  return sharing_count(layers, model).ratio();
}

}  // namespace allnode
