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
#include <string>
#include <vector>

#include "allnode/primitives.hpp"

namespace allnode::detail {

template <typename T>
std::vector<T> copy_block(const DenseMatrix<T>& a, IndexRange rows, IndexRange cols) {
  std::vector<T> out;
  out.reserve(rows.size() * cols.size());
  for (auto r = rows.begin; r < rows.end; ++r) {
    auto src = a.row(r).subspan(cols.begin, cols.size());
    out.insert(out.end(), src.begin(), src.end());
  }
  return out;
}

template <typename T>
void paste_block(DenseMatrix<T>& a, IndexRange rows, IndexRange cols, const std::vector<T>& vals) {
  if (vals.size() != rows.size() * cols.size()) {
    throw ProtocolError("received block holds " + std::to_string(vals.size()) + " values, expected " +
                        std::to_string(rows.size() * cols.size()));
  }
  auto it = vals.begin();
  for (auto r = rows.begin; r < rows.end; ++r) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(cols.size()), a.row(r).begin() + cols.begin);
    it += static_cast<std::ptrdiff_t>(cols.size());
  }
}

/// Answers IdRequest messages with the requested rows of `tile`.
template <typename T>
Handler row_server(const TensorTile<T>& tile) {
  return [&tile](const Message& msg) {
    const auto ids = decode_ids(msg.payload);
    return Payload::of(gather_rows_for_request(tile, ids));
  };
}

/// Received feature rows for a sorted id list.
template <typename T>
struct FetchedRows {
  std::vector<NodeId> ids;
  std::vector<T> values;
  std::size_t width = 0;

  const T* find(NodeId id) const {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) throw ProtocolError("feature row " + std::to_string(id) + " was not fetched");
    return values.data() + static_cast<std::size_t>(it - ids.begin()) * width;
  }
};

template <typename T>
std::vector<T> expect_values(const Message& msg, std::size_t count) {
  auto v = msg.payload.to<T>();
  if (v.size() != count) {
    throw ProtocolError("message from machine " + std::to_string(msg.src) + " holds " +
                        std::to_string(v.size()) + " values, expected " + std::to_string(count));
  }
  return v;
}

void check_block(const Worker& worker, const CsrGraph& block);

/// Phase three of dist_gemm: `y` holds full-width rows of this machine's row
/// slice; returns the output tile in the canonical column split.
template <typename T>
TensorTile<T> ring_to_column_split(Worker& worker, Channel& ch, const DenseMatrix<T>& y);

}  // namespace allnode::detail
