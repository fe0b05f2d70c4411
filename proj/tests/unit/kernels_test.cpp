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

#include "allnode/error.hpp"
#include "allnode/kernels.hpp"
#include "generators.hpp"

namespace allnode {
namespace {

TEST(LocalGemmTest, MatchesTripleLoop) {
  testing::Rng rng(1);
  const auto a = testing::random_dense<double>(rng, 13, 7);
  const auto w = testing::random_dense<double>(rng, 7, 5);
  const auto out = local_gemm(a, w);
  for (std::size_t i = 0; i < 13; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 7; ++k) s += a(i, k) * w(k, j);
      EXPECT_NEAR(out(i, j), s, 1e-12);
    }
  }
  EXPECT_THROW(local_gemm(a, a), ShapeError);
}

TEST(LocalSpmmTest, StarRowSumsNeighbours) {
  const CsrGraph g = build_csr(EdgeList{3, {{0, 2}, {1, 2}}});
  const DenseMatrix<double> h(3, 1, std::vector<double>{1, 3, 0});
  const auto out = local_spmm(g, EdgeValues<double>::ones(g.nnz()), h);
  EXPECT_EQ(out(2, 0), 4.0);
  EXPECT_EQ(out(0, 0), 0.0);
}

TEST(LocalSddmmTest, EmptyRowHasNoScores) {
  const CsrGraph g = build_csr(EdgeList{3, {{0, 2}}});
  const DenseMatrix<double> h(3, 2, std::vector<double>{1, 2, 3, 4, 5, 6});
  const auto a = local_sddmm(g, h, h, 1);
  ASSERT_EQ(a.values.size(), 1u);
  EXPECT_EQ(a.values[0], 5.0 * 1 + 6.0 * 2);
}

// Dense masked oracle: the full N x N product restricted to the pattern.
TEST(LocalKernelsTest, MatchDenseOracle) {
  testing::Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const std::uint64_t n = 50;
    const CsrGraph g = testing::random_graph(rng, n, 5);
    const std::size_t d = 6;
    const auto h = testing::random_dense<double>(rng, n, d);
    const auto src = testing::random_dense<double>(rng, n, d);
    for (std::size_t width : {std::size_t{1}, d}) {
      EdgeValues<double> ev{width, std::vector<double>(g.nnz() * width)};
      std::vector<std::vector<double>> dense(n * n, std::vector<double>(d, 0.0));
      for (std::uint64_t r = 0; r < n; ++r) {
        for (auto nz = g.row_offsets[r]; nz < g.row_offsets[r + 1]; ++nz) {
          for (std::size_t i = 0; i < width; ++i) {
            const double v = std::uniform_real_distribution<double>(-1, 1)(rng);
            ev.values[nz * width + i] = v;
          }
          for (std::size_t i = 0; i < d; ++i) dense[r * n + g.col_ids[nz]][i] = ev.values[nz * width + (width == 1 ? 0 : i)];
        }
      }
      const auto out = local_spmm(g, ev, h);
      for (std::uint64_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < d; ++i) {
          double s = 0;
          for (std::uint64_t c = 0; c < n; ++c) s += dense[r * n + c][i] * h(c, i);
          EXPECT_NEAR(out(r, i), s, 1e-12 * std::max(1.0, std::abs(s)));
        }
      }
    }
    for (std::size_t heads : {std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
      const auto a = local_sddmm(g, h, src, heads);
      EXPECT_EQ(a.values.size(), g.nnz() * heads);
      const std::size_t seg = d / heads;
      for (std::uint64_t r = 0; r < n; ++r) {
        for (auto nz = g.row_offsets[r]; nz < g.row_offsets[r + 1]; ++nz) {
          for (std::size_t k = 0; k < heads; ++k) {
            double s = 0;
            for (std::size_t j = k * seg; j < (k + 1) * seg; ++j) s += h(r, j) * src(g.col_ids[nz], j);
            EXPECT_NEAR(a.at(nz, k), s, 1e-12 * std::max(1.0, std::abs(s)));
          }
        }
      }
    }
  }
}

TEST(LocalKernelsTest, ShapeErrors) {
  const CsrGraph g = build_csr(EdgeList{3, {{0, 2}}});
  const DenseMatrix<double> h(3, 4);
  EXPECT_THROW(local_spmm(g, EdgeValues<double>{4, std::vector<double>(3)}, h), ShapeError);
  EXPECT_THROW(local_spmm(g, EdgeValues<double>{1, std::vector<double>(2)}, h), ShapeError);
  EXPECT_THROW(local_sddmm(g, h, h, 3), ShapeError);
  EXPECT_THROW(local_spmm(g, EdgeValues<double>::ones(1), DenseMatrix<double>(2, 4)), ShapeError);
}

}  // namespace
}  // namespace allnode
