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

#include <string>

#include "allnode/collectives.hpp"
#include "prim_common.hpp"

namespace allnode {
namespace {

template <typename T>
void check_gemm_inputs(const Worker& worker, const TensorTile<T>& h, const DenseMatrix<T>& w) {
  check_tile(worker.grid(), worker.id(), h);
  if (h.width != w.rows()) {
    throw ShapeError("feature width " + std::to_string(h.width) + " does not match weight rows " +
                     std::to_string(w.rows()));
  }
}

}  // namespace

namespace detail {

template <typename T>
TensorTile<T> ring_to_column_split(Worker& worker, Channel& ch, const DenseMatrix<T>& y) {
  const GridConfig& grid = worker.grid();
  const int mp = grid.m_parts;
  const NodeRange rows = node_range(grid, worker.p());
  const auto local_rows = [&](int j) {
    return split_range(rows.size(), static_cast<std::uint64_t>(mp), static_cast<std::uint64_t>(j));
  };
  const std::uint64_t dout = y.cols();
  if (y.rows() != local_rows(worker.m()).size()) throw ShapeError("row slice has the wrong height");
  TensorTile<T> out = make_tile<T>(grid, worker.id(), dout);
  std::vector<Payload> back;
  for (int j = 0; j < mp; ++j) {
    back.push_back(Payload::of(copy_block(y, {0, y.rows()}, column_range(dout, mp, j))));
  }
  ring_exchange(ch, grid.row_group(worker.p()), worker.m(), std::move(back), Tag::FeatureBlock,
                [&](int src, const Payload& b) {
                  paste_block(out.data, local_rows(src), {0, out.cols.size()}, b.to<T>());
                });
  return out;
}

template TensorTile<float> ring_to_column_split(Worker&, Channel&, const DenseMatrix<float>&);
template TensorTile<double> ring_to_column_split(Worker&, Channel&, const DenseMatrix<double>&);

}  // namespace detail

template <typename T>
TensorTile<T> dist_gemm(Worker& worker, const TensorTile<T>& h, const DenseMatrix<T>& w) {
  check_gemm_inputs(worker, h, w);
  const GridConfig& grid = worker.grid();
  const int mp = grid.m_parts;
  const int m = worker.m();
  const auto group = grid.row_group(worker.p());
  const std::uint64_t din = w.rows();
  const std::uint64_t dout = w.cols();
  const auto local_rows = [&](int j) { return split_range(h.rows.size(), static_cast<std::uint64_t>(mp), static_cast<std::uint64_t>(j)); };
  const IndexRange mine = local_rows(m);
  Channel ch = worker.open_channel();

  std::vector<Payload> blocks;
  for (int j = 0; j < mp; ++j) {
    blocks.push_back(Payload::of(detail::copy_block(h.data, local_rows(j), {0, h.cols.size()})));
  }
  DenseMatrix<T> rows_full(mine.size(), din);
  ring_exchange(ch, group, m, std::move(blocks), Tag::FeatureBlock, [&](int src, const Payload& b) {
    detail::paste_block(rows_full, {0, mine.size()}, column_range(din, mp, src), b.to<T>());
  });

  worker.compute(static_cast<double>(mine.size() * din * dout));
  const DenseMatrix<T> y = local_gemm(rows_full, w);

  return detail::ring_to_column_split(worker, ch, y);
}

template <typename T>
TensorTile<T> dist_gemm_allreduce(Worker& worker, const TensorTile<T>& h, const DenseMatrix<T>& w) {
  check_gemm_inputs(worker, h, w);
  const GridConfig& grid = worker.grid();
  const int mp = grid.m_parts;
  const int m = worker.m();
  const auto group = grid.row_group(worker.p());
  const std::uint64_t dout = w.cols();
  Channel ch = worker.open_channel();

  worker.compute(static_cast<double>(h.rows.size() * h.cols.size() * dout));
  DenseMatrix<T> partial(h.rows.size(), dout);
  for (std::uint64_t r = 0; r < h.rows.size(); ++r) {
    auto o = partial.row(r);
    for (std::uint64_t k = 0; k < h.cols.size(); ++k) {
      const T x = h.data(r, k);
      auto wk = w.row(h.cols.begin + k);
      for (std::uint64_t j = 0; j < dout; ++j) o[j] += x * wk[j];
    }
  }

  TensorTile<T> out = make_tile<T>(grid, worker.id(), dout);
  std::vector<Payload> blocks;
  for (int j = 0; j < mp; ++j) {
    blocks.push_back(Payload::of(detail::copy_block(partial, {0, h.rows.size()}, column_range(dout, mp, j))));
  }
  std::vector<std::vector<T>> partials(static_cast<std::size_t>(mp));
  ring_exchange(ch, group, m, std::move(blocks), Tag::PartialResult, [&](int src, const Payload& b) {
    partials[static_cast<std::size_t>(src)] = b.to<T>();
  });
  auto vals = out.data.values();
  for (const auto& part : partials) {
    if (part.size() != vals.size()) throw ProtocolError("partial result has the wrong size");
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] += part[i];
  }
  return out;
}

template TensorTile<float> dist_gemm(Worker&, const TensorTile<float>&, const DenseMatrix<float>&);
template TensorTile<double> dist_gemm(Worker&, const TensorTile<double>&, const DenseMatrix<double>&);
template TensorTile<float> dist_gemm_allreduce(Worker&, const TensorTile<float>&, const DenseMatrix<float>&);
template TensorTile<double> dist_gemm_allreduce(Worker&, const TensorTile<double>&, const DenseMatrix<double>&);

}  // namespace allnode
