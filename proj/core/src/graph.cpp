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
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <string_view>

#include "allnode/error.hpp"
#include "allnode/graph.hpp"

namespace allnode {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Splits on blanks; at most `max_tokens` + 1 tokens are returned so callers
// can detect trailing garbage.
std::vector<std::string_view> tokens(std::string_view s, std::size_t max_tokens) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size() && out.size() <= max_tokens) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i == s.size()) break;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_u64(std::string_view tok, std::uint64_t& value) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

void EdgeList::validate() const {
  for (const auto& e : edges) {
    if (e.src >= node_count || e.dst >= node_count) {
      throw BoundsError("edge (" + std::to_string(e.src) + "," +
                        std::to_string(e.dst) + ") outside node_count " +
                        std::to_string(node_count));
    }
  }
}

void CsrGraph::validate() const {
  if (row_offsets.empty() || row_offsets.front() != 0) {
    throw IntegrityError("row_offsets must start at 0");
  }
  if (row_offsets.back() != col_ids.size()) {
    throw IntegrityError("row_offsets must end at nnz");
  }
  if (row_end() > node_count) throw IntegrityError("rows exceed node_count");
  for (std::uint64_t r = 0; r < rows(); ++r) {
    if (row_offsets[r] > row_offsets[r + 1]) {
      throw IntegrityError("row_offsets not monotone at row " + std::to_string(r));
    }
    auto nbrs = row(r);
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      if (nbrs[k] >= node_count) throw IntegrityError("column id out of range");
      if (k > 0 && nbrs[k - 1] >= nbrs[k]) {
        throw IntegrityError("row " + std::to_string(row_begin + r) +
                             " not strictly increasing");
      }
    }
  }
}

void RmatParams::validate() const {
  if (scale > 32) {
    throw UnsupportedError("RMAT scale " + std::to_string(scale) +
                           " exceeds the supported maximum of 32");
  }
  if (avg_degree < 1) throw UnsupportedError("avg_degree must be >= 1");
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw UnsupportedError("RMAT probabilities must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw UnsupportedError("RMAT probabilities must sum to 1");
  }
}

EdgeList parse_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge list " + path.string());
  return parse_edge_list(in);
}

EdgeList parse_edge_list(std::istream& in) {
  EdgeList el;
  bool have_header = false;
  std::uint64_t header_count = 0;
  std::uint64_t max_id = 0;
  std::uint64_t lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto toks = tokens(body, 2);
    if (toks.size() == 2 && toks[0] == "N") {
      if (have_header) throw ParseError("duplicate N header", lineno);
      if (!parse_u64(toks[1], header_count)) {
        throw ParseError("malformed node count '" + std::string(toks[1]) + "'", lineno);
      }
      have_header = true;
      continue;
    }
    if (toks.size() != 2) {
      throw ParseError("expected two integer tokens", lineno);
    }
    Edge e;
    if (!parse_u64(toks[0], e.src) || !parse_u64(toks[1], e.dst)) {
      throw ParseError("malformed token in '" + std::string(body) + "'", lineno);
    }
    max_id = std::max({max_id, e.src, e.dst});
    el.edges.push_back(e);
  }
  if (el.edges.empty() && !have_header) throw ParseError("empty edge list");
  el.node_count = have_header ? header_count : max_id + 1;
  return el;
}

void write_edge_list(const EdgeList& el, std::ostream& out) {
  out << "N " << el.node_count << '\n';
  for (const auto& e : el.edges) out << e.src << ' ' << e.dst << '\n';
}

CsrGraph build_csr(const EdgeList& el) {
  el.validate();
  return build_csr_rows(el.edges, el.node_count, 0, el.node_count);
}

CsrGraph build_csr_rows(std::span<const Edge> edges, std::uint64_t node_count, NodeId begin,
                        NodeId end) {
  if (begin > end || end > node_count) throw BoundsError("row range outside the graph");
  const std::uint64_t n = end - begin;
  CsrGraph g;
  g.node_count = node_count;
  g.row_begin = begin;
  g.row_offsets.assign(n + 1, 0);
  for (const auto& e : edges) {
    if (e.src >= node_count || e.dst < begin || e.dst >= end) {
      throw BoundsError("edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) +
                        ") outside rows [" + std::to_string(begin) + ", " + std::to_string(end) + ")");
    }
    ++g.row_offsets[e.dst - begin + 1];
  }
  std::partial_sum(g.row_offsets.begin(), g.row_offsets.end(), g.row_offsets.begin());

  std::vector<NodeId> cols(edges.size());
  std::vector<std::uint64_t> cursor(g.row_offsets.begin(), g.row_offsets.end() - 1);
  for (const auto& e : edges) cols[cursor[e.dst - begin]++] = e.src;

  // Sort and dedup each row in place, then compact.
  std::uint64_t out = 0;
  std::uint64_t first = 0;
  for (std::uint64_t r = 0; r < n; ++r) {
    const std::uint64_t last_in = g.row_offsets[r + 1];
    std::sort(cols.begin() + static_cast<std::ptrdiff_t>(first), cols.begin() + static_cast<std::ptrdiff_t>(last_in));
    const auto last = std::unique(cols.begin() + static_cast<std::ptrdiff_t>(first),
                                  cols.begin() + static_cast<std::ptrdiff_t>(last_in));
    const auto len = static_cast<std::uint64_t>(last - (cols.begin() + static_cast<std::ptrdiff_t>(first)));
    std::move(cols.begin() + static_cast<std::ptrdiff_t>(first), last, cols.begin() + static_cast<std::ptrdiff_t>(out));
    first = last_in;
    out += len;
    g.row_offsets[r + 1] = out;
  }
  cols.resize(out);
  g.col_ids = std::move(cols);
  return g;
}

std::vector<Edge> enumerate_edges(const CsrGraph& g) {
  std::vector<Edge> out;
  out.reserve(g.nnz());
  for (std::uint64_t r = 0; r < g.rows(); ++r) {
    for (NodeId c : g.row(r)) out.push_back({c, g.row_begin + r});
  }
  return out;
}

EdgeList generate_rmat(const RmatParams& params) {
  params.validate();
  EdgeList el;
  el.node_count = std::uint64_t{1} << params.scale;
  const std::uint64_t m = el.node_count * params.avg_degree;
  el.edges.reserve(m);

  const double a = params.probs[0];
  const double ab = a + params.probs[1];
  const double abc = ab + params.probs[2];
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::uint64_t i = 0; i < m; ++i) {
    NodeId src = 0;
    NodeId dst = 0;
    for (unsigned level = 0; level < params.scale; ++level) {
      const double u = unit(rng);
      const unsigned q = u < a ? 0u : u < ab ? 1u : u < abc ? 2u : 3u;
      src = (src << 1) | (q >> 1);
      dst = (dst << 1) | (q & 1u);
    }
    el.edges.push_back({src, dst});
  }
  return el;
}

CsrGraph slice_rows(const CsrGraph& g, NodeId begin, NodeId end) {
  if (begin < g.row_begin || end > g.row_end() || begin > end) {
    throw BoundsError("row slice [" + std::to_string(begin) + "," +
                      std::to_string(end) + ") outside block");
  }
  CsrGraph out;
  out.node_count = g.node_count;
  out.row_begin = begin;
  const std::uint64_t lb = begin - g.row_begin;
  const std::uint64_t le = end - g.row_begin;
  const std::uint64_t base = g.row_offsets[lb];
  out.row_offsets.resize(le - lb + 1);
  for (std::uint64_t r = lb; r <= le; ++r) out.row_offsets[r - lb] = g.row_offsets[r] - base;
  out.col_ids.assign(g.col_ids.begin() + static_cast<std::ptrdiff_t>(base),
                     g.col_ids.begin() + static_cast<std::ptrdiff_t>(g.row_offsets[le]));
  return out;
}

CsrGraph concat_row_blocks(std::span<const CsrGraph> blocks) {
  CsrGraph out;
  if (blocks.empty()) return out;
  out.node_count = blocks.front().node_count;
  out.row_begin = blocks.front().row_begin;
  NodeId expect = out.row_begin;
  for (const auto& b : blocks) {
    if (b.row_begin != expect || b.node_count != out.node_count) {
      throw IntegrityError("row-blocks are not contiguous");
    }
    const std::uint64_t base = out.col_ids.size();
    for (std::uint64_t r = 1; r <= b.rows(); ++r) out.row_offsets.push_back(base + b.row_offsets[r]);
    out.col_ids.insert(out.col_ids.end(), b.col_ids.begin(), b.col_ids.end());
    expect = b.row_end();
  }
  return out;
}

CsrGraph with_self_loops(const CsrGraph& g) {
  CsrGraph out;
  out.node_count = g.node_count;
  out.row_begin = g.row_begin;
  out.row_offsets.reserve(g.row_offsets.size());
  out.col_ids.reserve(g.nnz() + g.rows());
  for (std::uint64_t r = 0; r < g.rows(); ++r) {
    const NodeId self = g.row_begin + r;
    auto nbrs = g.row(r);
    auto pos = std::lower_bound(nbrs.begin(), nbrs.end(), self);
    out.col_ids.insert(out.col_ids.end(), nbrs.begin(), pos);
    out.col_ids.push_back(self);
    if (pos != nbrs.end() && *pos == self) ++pos;
    out.col_ids.insert(out.col_ids.end(), pos, nbrs.end());
    out.row_offsets.push_back(out.col_ids.size());
  }
  return out;
}

}  // namespace allnode
