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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "allnode/dense.hpp"
#include "allnode/error.hpp"
#include "allnode/graph.hpp"

namespace allnode {

/// Per-non-zero value vectors in CSR order. Width 1 values are broadcast over
/// every feature column; otherwise the width equals the feature tile width.
template <typename T>
struct EdgeValues {
  std::size_t width = 1;
  std::vector<T> values;

  static EdgeValues ones(std::uint64_t nnz) { return {1, std::vector<T>(nnz, T{1})}; }
  void validate(std::uint64_t nnz, std::size_t tile_width) const;
};

/// One score vector (width = head count) per non-zero of a CSR block, in the
/// block's non-zero order.
template <typename T>
struct AttnBlock {
  std::size_t heads = 1;
  std::vector<T> values;

  T at(std::uint64_t nz, std::size_t head) const { return values[nz * heads + head]; }
  friend bool operator==(const AttnBlock&, const AttnBlock&) = default;
};

/// out = a * w with the inner index summed in ascending order.
template <typename T>
DenseMatrix<T> local_gemm(const DenseMatrix<T>& a, const DenseMatrix<T>& w);

/// Three-tensor SPMM over a CSR block: out[r][i] = sum over (r, c) of
/// e[(r, c)][i] * h[c][i]. `h` has one row per graph node.
template <typename T>
DenseMatrix<T> local_spmm(const CsrGraph& block, const EdgeValues<T>& edges, const DenseMatrix<T>& h);

/// Per-head masked dot products: value (r, c, head) is the dot product of
/// dest[r] and src[c] over the head's column segment. `dest` and `src` have
/// one row per graph node.
template <typename T>
AttnBlock<T> local_sddmm(const CsrGraph& block, const DenseMatrix<T>& dest, const DenseMatrix<T>& src,
                         std::size_t heads);

namespace kernel {

template <typename T>
inline void spmm_axpy(const EdgeValues<T>& edges, std::uint64_t nz, const T* h, std::span<T> out) {
  const std::size_t w = out.size();
  if (edges.width == 1) {
    const T e = edges.values[nz];
    for (std::size_t i = 0; i < w; ++i) out[i] += e * h[i];
  } else {
    const T* e = edges.values.data() + nz * w;
    for (std::size_t i = 0; i < w; ++i) out[i] += e[i] * h[i];
  }
}

template <typename T>
inline void spmm_product(const EdgeValues<T>& edges, std::uint64_t nz, const T* h, std::span<T> out) {
  const std::size_t w = out.size();
  if (edges.width == 1) {
    const T e = edges.values[nz];
    for (std::size_t i = 0; i < w; ++i) out[i] = e * h[i];
  } else {
    const T* e = edges.values.data() + nz * w;
    for (std::size_t i = 0; i < w; ++i) out[i] = e[i] * h[i];
  }
}

/// SPMM over local rows of `block`, resolving feature rows through
/// row_of(global id) -> const T*.
template <typename T, typename RowOf>
void spmm_rows(const CsrGraph& block, const EdgeValues<T>& edges, RowOf&& row_of, DenseMatrix<T>& out) {
  for (std::uint64_t r = 0; r < block.rows(); ++r) {
    auto o = out.row(r);
    for (std::uint64_t nz = block.row_offsets[r]; nz < block.row_offsets[r + 1]; ++nz) {
      spmm_axpy(edges, nz, row_of(block.col_ids[nz]), o);
    }
  }
}

/// Writes the head scores of one non-zero. `width` is the full feature width.
template <typename T>
inline void sddmm_scores(const T* dest, const T* src, std::size_t width, std::size_t heads, T* out) {
  const std::size_t seg = width / heads;
  for (std::size_t h = 0; h < heads; ++h) {
    T s{};
    for (std::size_t j = h * seg; j < (h + 1) * seg; ++j) s += dest[j] * src[j];
    out[h] = s;
  }
}

void check_heads(std::size_t width, std::size_t heads);

}  // namespace kernel

}  // namespace allnode
