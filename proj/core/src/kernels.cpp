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

#include "allnode/kernels.hpp"

#include <string>

namespace allnode {

template <typename T>
void EdgeValues<T>::validate(std::uint64_t nnz, std::size_t tile_width) const {
  if (width != 1 && width != tile_width) {
    throw ShapeError("edge value width " + std::to_string(width) + " must be 1 or " +
                     std::to_string(tile_width));
  }
  if (values.size() != nnz * width) {
    throw ShapeError("edge values hold " + std::to_string(values.size()) + " entries, expected " +
                     std::to_string(nnz * width));
  }
}

template <typename T>
DenseMatrix<T> local_gemm(const DenseMatrix<T>& a, const DenseMatrix<T>& w) {
  if (a.cols() != w.rows()) {
    throw ShapeError("gemm inner dimensions differ: " + std::to_string(a.cols()) + " vs " +
                     std::to_string(w.rows()));
  }
  DenseMatrix<T> out(a.rows(), w.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto o = out.row(r);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T x = a(r, k);
      auto wk = w.row(k);
      for (std::size_t j = 0; j < o.size(); ++j) o[j] += x * wk[j];
    }
  }
  return out;
}

template <typename T>
DenseMatrix<T> local_spmm(const CsrGraph& block, const EdgeValues<T>& edges, const DenseMatrix<T>& h) {
  if (h.rows() != block.node_count) {
    throw ShapeError("feature matrix has " + std::to_string(h.rows()) + " rows, graph has " +
                     std::to_string(block.node_count) + " nodes");
  }
  edges.validate(block.nnz(), h.cols());
  DenseMatrix<T> out(block.rows(), h.cols());
  kernel::spmm_rows(block, edges, [&](NodeId c) { return h.row(c).data(); }, out);
  return out;
}

template <typename T>
AttnBlock<T> local_sddmm(const CsrGraph& block, const DenseMatrix<T>& dest, const DenseMatrix<T>& src,
                         std::size_t heads) {
  if (dest.rows() != block.node_count || src.rows() != block.node_count) {
    throw ShapeError("sddmm operands must have one row per graph node");
  }
  if (dest.cols() != src.cols()) throw ShapeError("sddmm operand widths differ");
  kernel::check_heads(dest.cols(), heads);
  AttnBlock<T> out{heads, std::vector<T>(block.nnz() * heads)};
  for (std::uint64_t r = 0; r < block.rows(); ++r) {
    const T* d = dest.row(block.row_begin + r).data();
    for (std::uint64_t nz = block.row_offsets[r]; nz < block.row_offsets[r + 1]; ++nz) {
      kernel::sddmm_scores(d, src.row(block.col_ids[nz]).data(), dest.cols(), heads,
                           out.values.data() + nz * heads);
    }
  }
  return out;
}

void kernel::check_heads(std::size_t width, std::size_t heads) {
  if (heads == 0 || width % heads != 0) {
    throw ShapeError("head count " + std::to_string(heads) + " does not divide width " +
                     std::to_string(width));
  }
}

#define ALLNODE_INSTANTIATE(T)                                                                   \
  template struct EdgeValues<T>;                                                                 \
  template DenseMatrix<T> local_gemm(const DenseMatrix<T>&, const DenseMatrix<T>&);              \
  template DenseMatrix<T> local_spmm(const CsrGraph&, const EdgeValues<T>&, const DenseMatrix<T>&); \
  template AttnBlock<T> local_sddmm(const CsrGraph&, const DenseMatrix<T>&, const DenseMatrix<T>&, \
                                    std::size_t);

ALLNODE_INSTANTIATE(float)
ALLNODE_INSTANTIATE(double)

#undef ALLNODE_INSTANTIATE

}  // namespace allnode
