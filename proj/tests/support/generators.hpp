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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "allnode/dense.hpp"
#include "allnode/graph.hpp"
#include "allnode/partition.hpp"

namespace allnode::testing {

using Rng = std::mt19937_64;

inline std::uint64_t uniform(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

/// Edges drawn uniformly at random; duplicates and self-loops allowed.
inline EdgeList random_edges(Rng& rng, std::uint64_t n, std::uint64_t m) {
  EdgeList el{n, {}};
  for (std::uint64_t i = 0; i < m; ++i) el.edges.push_back({uniform(rng, 0, n - 1), uniform(rng, 0, n - 1)});
  return el;
}

inline CsrGraph random_graph(Rng& rng, std::uint64_t n, double avg_degree) {
  return build_csr(random_edges(rng, n, static_cast<std::uint64_t>(std::llround(avg_degree * static_cast<double>(n)))));
}

inline GridConfig random_grid(Rng& rng, std::uint64_t n, std::uint64_t d, int max_p = 4, int max_m = 4) {
  static const int kParts[] = {1, 2, 4};
  int p = 1, m = 1;
  do {
    p = kParts[uniform(rng, 0, 2)];
    m = kParts[uniform(rng, 0, 2)];
  } while (p > max_p || m > max_m || static_cast<std::uint64_t>(p) > n || static_cast<std::uint64_t>(m) > d);
  return GridConfig{p, m, n, d};
}

template <typename T>
DenseMatrix<T> random_dense(Rng& rng, std::size_t rows, std::size_t cols) {
  DenseMatrix<T> x(rows, cols);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : x.values()) v = static_cast<T>(u(rng));
  return x;
}

/// Max over elements of |a-b| / max(|b|, floor).
template <typename T>
double max_rel_error(const DenseMatrix<T>& a, const DenseMatrix<T>& b, double floor = 1e-12) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  double e = 0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    const double x = static_cast<double>(a.values()[i]);
    const double y = static_cast<double>(b.values()[i]);
    e = std::max(e, std::abs(x - y) / std::max(std::abs(y), floor));
  }
  return e;
}

inline double max_rel_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-12) {
  if (a.size() != b.size()) return INFINITY;
  double e = 0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), floor));
  return e;
}

/// Row blocks of `g` for every row-group of the grid.
inline std::vector<CsrGraph> row_blocks(const CsrGraph& g, const GridConfig& grid) {
  std::vector<CsrGraph> out;
  for (int p = 0; p < grid.p_parts; ++p) {
    const NodeRange r = node_range(grid, p);
    out.push_back(slice_rows(g, r.begin, r.end));
  }
  return out;
}

}  // namespace allnode::testing
