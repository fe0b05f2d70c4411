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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "allnode/model.hpp"

namespace allnode {

namespace {

template <typename T>
DenseMatrix<T> matmul(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  DenseMatrix<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
    }
  }
  return c;
}

}  // namespace

template <typename T>
DenseMatrix<T> serial_reference(const LayerGraphs& layers, const DenseMatrix<T>& x,
                                const ModelParams<T>& params) {
  params.validate();
  if (layers.size() != params.layers()) throw ShapeError("layer count does not match the model");
  DenseMatrix<T> h = x;
  const std::size_t heads = params.kind == ModelKind::Gat ? params.heads : 1;
  for (std::size_t l = 0; l < params.layers(); ++l) {
    const CsrGraph& g = layers[l];
    if (g.rows() != h.rows() || g.row_begin != 0) throw ShapeError("reference needs whole-graph layers");
    const DenseMatrix<T> z = matmul(h, params.weights[l]);
    const std::size_t width = z.cols();
    const std::size_t d = width / heads;
    DenseMatrix<T> out(g.rows(), width);
    for (std::size_t v = 0; v < g.rows(); ++v) {
      const auto b = g.row_offsets[v];
      const auto e = g.row_offsets[v + 1];
      if (b == e) throw IntegrityError("row " + std::to_string(v) + " is empty");
      if (params.kind == ModelKind::Gcn) {
        const T w = T{1} / static_cast<T>(e - b);
        for (auto nz = b; nz < e; ++nz) {
          for (std::size_t j = 0; j < width; ++j) out(v, j) += w * z(g.col_ids[nz], j);
        }
        continue;
      }
      for (std::size_t hd = 0; hd < heads; ++hd) {
        std::vector<T> s(e - b);
        for (auto nz = b; nz < e; ++nz) {
          T dot{};
          for (std::size_t j = hd * d; j < (hd + 1) * d; ++j) dot += z(v, j) * z(g.col_ids[nz], j);
          s[nz - b] = dot < T{0} ? dot * static_cast<T>(params.leaky_slope) : dot;
        }
        const T mx = *std::max_element(s.begin(), s.end());
        T total{};
        for (auto& a : s) {
          a = std::exp(a - mx);
          total += a;
        }
        for (auto nz = b; nz < e; ++nz) {
          const T a = s[nz - b] / total;
          for (std::size_t j = hd * d; j < (hd + 1) * d; ++j) out(v, j) += a * z(g.col_ids[nz], j);
        }
      }
    }
    if (params.kind == ModelKind::Gat && l + 1 == params.layers()) {
      DenseMatrix<T> avg(out.rows(), d);
      const T share = T{1} / static_cast<T>(heads);
      for (std::size_t v = 0; v < out.rows(); ++v) {
        for (std::size_t hd = 0; hd < heads; ++hd) {
          for (std::size_t j = 0; j < d; ++j) avg(v, j) += out(v, hd * d + j) * share;
        }
      }
      out = std::move(avg);
    }
    if (l + 1 < params.layers()) {
      for (auto& a : out.values()) a = std::max(a, T{0});
    }
    h = std::move(out);
  }
  return h;
}

template DenseMatrix<float> serial_reference(const LayerGraphs&, const DenseMatrix<float>&,
                                             const ModelParams<float>&);
template DenseMatrix<double> serial_reference(const LayerGraphs&, const DenseMatrix<double>&,
                                              const ModelParams<double>&);

}  // namespace allnode
