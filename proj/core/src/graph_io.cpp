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

#include <fstream>

#include "allnode/error.hpp"
#include "allnode/graph.hpp"
#include "binary_io.hpp"

namespace allnode {

namespace {
constexpr std::string_view kCsrMagic = "DEALCSR1";
}

void write_csr_binary(const CsrGraph& g, const std::filesystem::path& path) {
  if (g.row_begin != 0 || g.rows() != g.node_count) {
    throw ShapeError("only full graphs can be written to the CSR cache");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  detail::write_magic(out, kCsrMagic);
  detail::write_le<std::uint64_t>(out, g.node_count);
  detail::write_le<std::uint64_t>(out, g.nnz());
  for (auto v : g.row_offsets) detail::write_le<std::uint64_t>(out, v);
  for (auto v : g.col_ids) detail::write_le<std::uint64_t>(out, v);
  if (!out) throw Error("write failed for " + path.string());
}

CsrGraph read_csr_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open CSR cache " + path.string());
  detail::expect_magic(in, kCsrMagic);
  CsrGraph g;
  g.node_count = detail::read_le<std::uint64_t>(in, "node_count");
  const auto nnz = detail::read_le<std::uint64_t>(in, "nnz");
  g.row_offsets.resize(g.node_count + 1);
  for (auto& v : g.row_offsets) v = detail::read_le<std::uint64_t>(in, "row_offsets");
  g.col_ids.resize(nnz);
  for (auto& v : g.col_ids) v = detail::read_le<std::uint64_t>(in, "col_ids");
  try {
    g.validate();
  } catch (const IntegrityError& e) {
    throw ParseError(std::string("corrupt CSR cache: ") + e.what());
  }
  return g;
}

}  // namespace allnode
