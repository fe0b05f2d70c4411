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

#include <gtest/gtest.h>

#include <set>
#include <utility>

#include "allnode/error.hpp"
#include "allnode/sharing.hpp"
#include "generators.hpp"

namespace allnode {
namespace {

using Key = std::pair<std::size_t, NodeId>;

// Brute-force sets of (level, node) pairs reached from each target by
// walking every path through the layer graphs.
std::set<Key> ego_keys(const LayerGraphs& layers, NodeId v) {
  const std::size_t k = layers.size();
  std::set<Key> keys{{k, v}};
  std::set<NodeId> frontier{v};
  for (std::size_t l = k; l-- > 0;) {
    std::set<NodeId> next;
    for (NodeId u : frontier) {
      for (NodeId w : layers[l].row(u)) next.insert(w);
    }
    for (NodeId w : next) keys.insert({l, w});
    frontier = std::move(next);
  }
  return keys;
}

TEST(SharingTest, TwoNodeExample) {
  const CsrGraph g = build_csr(EdgeList{2, {{0, 1}}});
  const auto layers = full_graph_layers(g, 1);
  SharingModel model;
  model.batch_size = 2;
  const auto c = sharing_count(layers, model);
  EXPECT_EQ(c.total, 5u);
  EXPECT_EQ(c.unique, 4u);
  EXPECT_DOUBLE_EQ(c.ratio(), 0.2);
}

TEST(SharingTest, TwoSourcesIntoOneTarget) {
  const CsrGraph g = build_csr(EdgeList{3, {{0, 2}, {1, 2}}});
  SharingModel model;
  model.batch_size = 3;
  EXPECT_DOUBLE_EQ(sharing_ratio(g, model, 1), 0.25);
}

TEST(SharingTest, StarSharesHub) {
  // Nodes 1 and 2 both read node 0; with self-loops each ego has two inputs
  // and one output, and the pair shares only node 0 at the input level.
  const CsrGraph g = build_csr(EdgeList{3, {{0, 1}, {0, 2}}});
  const auto layers = full_graph_layers(g, 1);
  SharingModel model;
  model.batch_size = 2;
  const std::vector<std::vector<NodeId>> batches{{1, 2}};
  const auto c = sharing_count(layers, model, batches);
  EXPECT_EQ(c.total, 6u);
  EXPECT_EQ(c.unique, 5u);
  EXPECT_DOUBLE_EQ(1.0 - static_cast<double>(c.unique) / static_cast<double>(c.total), c.ratio());
  SharingModel outer = model;
  outer.scheme = SharingScheme::OutermostHopDedup;
  EXPECT_EQ(sharing_count(layers, outer, batches).unique, 5u);
}

TEST(SharingTest, SingleTargetBatchesShareNothing) {
  testing::Rng rng(61);
  const CsrGraph g = testing::random_graph(rng, 80, 5);
  for (auto scheme : {SharingScheme::BatchDedup, SharingScheme::OutermostHopDedup}) {
    SharingModel model;
    model.scheme = scheme;
    model.layers = 2;
    EXPECT_DOUBLE_EQ(sharing_ratio(g, model, 1), 0.0);
  }
}

// Property: counts equal the brute-force oracle for every scheme without a
// cache, and a single full batch leaves N (k + 1) unique computations.
TEST(SharingTest, MatchesBruteForce) {
  testing::Rng rng(62);
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t n = testing::uniform(rng, 1, 60);
    const CsrGraph g = testing::random_graph(rng, n, 3);
    const std::uint32_t k = static_cast<std::uint32_t>(testing::uniform(rng, 1, 3));
    const std::uint64_t fanout = testing::uniform(rng, 0, 3);
    const auto layers = make_layers(g, k, fanout, 4);
    const std::uint64_t batch = testing::uniform(rng, 1, n);

    std::uint64_t total = 0, batch_unique = 0, outer_unique = 0;
    for (NodeId b = 0; b < n; b += batch) {
      std::set<Key> merged, level0;
      for (NodeId v = b; v < std::min(n, b + batch); ++v) {
        const auto keys = ego_keys(layers, v);
        total += keys.size();
        for (const auto& key : keys) {
          merged.insert(key);
          if (key.first == 0) level0.insert(key);
          else ++outer_unique;
        }
      }
      batch_unique += merged.size();
      outer_unique += level0.size();
    }

    SharingModel model;
    model.batch_size = batch;
    model.layers = k;
    const auto bd = sharing_count(layers, model);
    EXPECT_EQ(bd.total, total);
    EXPECT_EQ(bd.unique, batch_unique);
    model.scheme = SharingScheme::OutermostHopDedup;
    EXPECT_EQ(sharing_count(layers, model).unique, outer_unique);
    model.scheme = SharingScheme::CacheDedup;
    EXPECT_EQ(sharing_count(layers, model).unique, batch_unique);

    model.scheme = SharingScheme::BatchDedup;
    model.batch_size = n;
    const auto full = sharing_count(layers, model);
    std::set<Key> all;
    for (NodeId v = 0; v < n; ++v) {
      const auto keys = ego_keys(layers, v);
      all.insert(keys.begin(), keys.end());
    }
    EXPECT_EQ(full.unique, all.size());
    if (fanout == kFullNeighbors) EXPECT_EQ(full.unique, n * (k + 1));
  }
}

TEST(SharingTest, CacheOnlyHelpsAndGrowsWithCapacity) {
  testing::Rng rng(63);
  const CsrGraph g = testing::random_graph(rng, 200, 6);
  const auto layers = make_layers(g, 2, 3, 9);
  SharingModel model;
  model.batch_size = 16;
  model.layers = 2;
  const auto base = sharing_count(layers, model).unique;
  model.scheme = SharingScheme::CacheDedup;
  std::uint64_t prev = base;
  for (std::uint64_t cap : {1ull, 16ull, 128ull, 1024ull, 100000ull}) {
    model.cache_capacity = cap;
    const auto u = sharing_count(layers, model).unique;
    EXPECT_LE(u, prev) << "capacity " << cap;
    prev = u;
  }
  // An unbounded cache computes every (node, layer) pair once.
  std::set<Key> all;
  for (NodeId v = 0; v < 200; ++v) {
    const auto keys = ego_keys(layers, v);
    all.insert(keys.begin(), keys.end());
  }
  EXPECT_EQ(prev, all.size());
}

TEST(SharingTest, ValidationAndNames) {
  const CsrGraph g = build_csr(EdgeList{3, {{0, 1}}});
  SharingModel model;
  model.batch_size = 0;
  EXPECT_THROW(sharing_ratio(g, model, 1), ShapeError);
  model.batch_size = 4;
  EXPECT_THROW(sharing_ratio(g, model, 1), ShapeError);
  for (auto s : {SharingScheme::BatchDedup, SharingScheme::OutermostHopDedup, SharingScheme::CacheDedup}) {
    EXPECT_EQ(parse_scheme(scheme_name(s)), s);
  }
  EXPECT_THROW(parse_scheme("none"), ParseError);
}

}  // namespace
}  // namespace allnode
