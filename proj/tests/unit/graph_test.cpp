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

#include <algorithm>
#include <array>
#include <filesystem>
#include <set>
#include <sstream>

#include "allnode/error.hpp"
#include "allnode/graph.hpp"
#include "generators.hpp"

namespace allnode {
namespace {

EdgeList parse(const std::string& text) {
  std::istringstream in(text);
  return parse_edge_list(in);
}

TEST(EdgeListTest, ParsesPairs) {
  const EdgeList el = parse("0 2\n1 2");
  EXPECT_EQ(el.node_count, 3u);
  ASSERT_EQ(el.edges.size(), 2u);
  EXPECT_EQ(el.edges[0].src, 0u);
  EXPECT_EQ(el.edges[0].dst, 2u);
  EXPECT_EQ(el.edges[1].src, 1u);
}

TEST(EdgeListTest, SkipsComments) {
  const EdgeList el = parse("# header\n0 1\n# more\n1 0\n");
  EXPECT_EQ(el.edges.size(), 2u);
}

TEST(EdgeListTest, MalformedTokenReportsLine) {
  try {
    parse("0 x");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  try {
    parse("0 1\n# c\n3\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(EdgeListTest, EmptyInputIsAnError) { EXPECT_THROW(parse("# nothing\n"), ParseError); }

TEST(EdgeListTest, HeaderOverridesNodeCount) {
  const EdgeList el = parse("N 10\n0 1\n");
  EXPECT_EQ(el.node_count, 10u);
  EXPECT_THROW(parse("N 1\n0 1\n").validate(), BoundsError);
}

TEST(EdgeListTest, WriteThenParseRoundTrips) {
  testing::Rng rng(3);
  const EdgeList el = testing::random_edges(rng, 40, 100);
  std::stringstream s;
  write_edge_list(el, s);
  const EdgeList back = parse_edge_list(s);
  EXPECT_EQ(back.node_count, el.node_count);
  ASSERT_EQ(back.edges.size(), el.edges.size());
  for (std::size_t i = 0; i < el.edges.size(); ++i) {
    EXPECT_EQ(back.edges[i].src, el.edges[i].src);
    EXPECT_EQ(back.edges[i].dst, el.edges[i].dst);
  }
}

TEST(BuildCsrTest, StarRows) {
  const CsrGraph g = build_csr(EdgeList{3, {{0, 2}, {1, 2}}});
  EXPECT_EQ(g.row_offsets, (std::vector<std::uint64_t>{0, 0, 0, 2}));
  EXPECT_EQ(g.col_ids, (std::vector<NodeId>{0, 1}));
}

TEST(BuildCsrTest, DeduplicatesParallelEdges) {
  const CsrGraph g = build_csr(EdgeList{2, {{0, 1}, {0, 1}}});
  EXPECT_EQ(g.nnz(), 1u);
}

TEST(BuildCsrTest, KeepsSelfLoops) {
  const CsrGraph g = build_csr(EdgeList{2, {{1, 1}, {0, 1}}});
  EXPECT_EQ(g.col_ids, (std::vector<NodeId>{0, 1}));
}

TEST(BuildCsrTest, OutOfRangeEndpointThrows) {
  EXPECT_THROW(build_csr(EdgeList{2, {{0, 2}}}), BoundsError);
}

// Property: CSR holds exactly the distinct edge set, rows sorted strictly.
TEST(BuildCsrTest, RoundTripMatchesDistinctEdgeSet) {
  testing::Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::uint64_t n = testing::uniform(rng, 1, 80);
    const EdgeList el = testing::random_edges(rng, n, testing::uniform(rng, 0, 400));
    const CsrGraph g = build_csr(el);
    g.validate();
    std::set<std::pair<NodeId, NodeId>> expected;
    for (const auto& e : el.edges) expected.insert({e.src, e.dst});
    std::set<std::pair<NodeId, NodeId>> got;
    for (const auto& e : enumerate_edges(g)) got.insert({e.src, e.dst});
    EXPECT_EQ(got, expected);
    EXPECT_EQ(g.nnz(), expected.size());
    std::uint64_t degrees = 0;
    for (std::uint64_t r = 0; r < g.rows(); ++r) {
      degrees += g.degree(r);
      const auto row = g.row(r);
      EXPECT_TRUE(std::adjacent_find(row.begin(), row.end(), std::greater_equal<>()) == row.end());
    }
    EXPECT_EQ(degrees, g.nnz());
  }
}

TEST(BuildCsrTest, SliceAndConcatRoundTrip) {
  testing::Rng rng(5);
  const CsrGraph g = testing::random_graph(rng, 50, 4);
  std::vector<CsrGraph> parts{slice_rows(g, 0, 17), slice_rows(g, 17, 17), slice_rows(g, 17, 50)};
  const CsrGraph back = concat_row_blocks(parts);
  EXPECT_EQ(back.row_offsets, g.row_offsets);
  EXPECT_EQ(back.col_ids, g.col_ids);
  EXPECT_THROW(slice_rows(g, 10, 51), BoundsError);
}

TEST(BuildCsrTest, WithSelfLoopsAddsMissingOnly) {
  const CsrGraph g = with_self_loops(build_csr(EdgeList{3, {{0, 2}, {2, 2}}}));
  EXPECT_EQ(g.row_offsets, (std::vector<std::uint64_t>{0, 1, 2, 4}));
  EXPECT_EQ(g.col_ids, (std::vector<NodeId>{0, 1, 0, 2}));
}

TEST(CsrCacheTest, BinaryRoundTrip) {
  testing::Rng rng(8);
  const CsrGraph g = testing::random_graph(rng, 64, 3);
  const auto path = std::filesystem::temp_directory_path() / "allnode_graph_test.csr";
  write_csr_binary(g, path);
  const CsrGraph back = read_csr_binary(path);
  EXPECT_EQ(back.node_count, g.node_count);
  EXPECT_EQ(back.row_offsets, g.row_offsets);
  EXPECT_EQ(back.col_ids, g.col_ids);
  std::filesystem::remove(path);
}

TEST(RmatTest, ScaleZeroIsOneNodeOfSelfLoops) {
  RmatParams p;
  p.scale = 0;
  p.avg_degree = 3;
  const EdgeList el = generate_rmat(p);
  EXPECT_EQ(el.node_count, 1u);
  EXPECT_EQ(el.edges.size(), 3u);
  for (const auto& e : el.edges) EXPECT_EQ(e.src, e.dst);
}

TEST(RmatTest, DeterministicForSeed) {
  RmatParams p;
  p.scale = 8;
  const EdgeList a = generate_rmat(p);
  const EdgeList b = generate_rmat(p);
  ASSERT_EQ(a.edges.size(), b.edges.size());
  EXPECT_TRUE(std::equal(a.edges.begin(), a.edges.end(), b.edges.begin(),
                         [](const Edge& x, const Edge& y) { return x.src == y.src && x.dst == y.dst; }));
  p.seed = 2;
  const EdgeList c = generate_rmat(p);
  EXPECT_FALSE(std::equal(a.edges.begin(), a.edges.end(), c.edges.begin(),
                          [](const Edge& x, const Edge& y) { return x.src == y.src && x.dst == y.dst; }));
}

TEST(RmatTest, EdgeCountBeforeDedup) {
  RmatParams p;
  p.scale = 10;
  const EdgeList el = generate_rmat(p);
  EXPECT_EQ(el.node_count, 1024u);
  EXPECT_EQ(el.edges.size(), 20480u);
}

// The retained fraction after dedup, from an independent reference RMAT run
// with the same quadrant probabilities: 14467 / 20480 = 0.706.
TEST(RmatTest, DedupRetainsReferenceFraction) {
  for (std::uint64_t seed : {1, 2, 3}) {
    RmatParams p;
    p.scale = 10;
    p.seed = seed;
    const double kept = static_cast<double>(build_csr(generate_rmat(p)).nnz()) / 20480.0;
    EXPECT_GE(kept, 0.66);
    EXPECT_LE(kept, 0.76);
  }
}

TEST(RmatTest, UniformProbabilitiesFillQuadrantsEvenly) {
  RmatParams p;
  p.scale = 10;
  p.probs = {0.25, 0.25, 0.25, 0.25};
  const EdgeList el = generate_rmat(p);
  std::array<double, 4> count{};
  for (const auto& e : el.edges) count[((e.src >> 9) << 1) | (e.dst >> 9)] += 1;
  const double expect = static_cast<double>(el.edges.size()) / 4;
  for (double c : count) EXPECT_NEAR(c, expect, 0.05 * expect);
}

TEST(RmatTest, RejectsBadParams) {
  RmatParams p;
  p.scale = 33;
  EXPECT_THROW(generate_rmat(p), UnsupportedError);
  p.scale = 4;
  p.probs = {0.5, 0.5, 0.5, 0.0};
  EXPECT_THROW(generate_rmat(p), UnsupportedError);
  p.probs = {0.25, 0.25, 0.25, 0.25};
  p.avg_degree = 0;
  EXPECT_THROW(generate_rmat(p), UnsupportedError);
}

}  // namespace
}  // namespace allnode
