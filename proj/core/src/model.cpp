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

#include "allnode/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "allnode/primitives.hpp"
#include "binary_io.hpp"
#include "json.hpp"
#include "prim_common.hpp"

namespace allnode {

std::string_view model_name(ModelKind kind) { return kind == ModelKind::Gcn ? "gcn" : "gat"; }

ModelKind parse_model(std::string_view name) {
  if (name == "gcn") return ModelKind::Gcn;
  if (name == "gat") return ModelKind::Gat;
  throw ParseError("unknown model '" + std::string(name) + "'");
}

template <typename T>
std::uint64_t ModelParams<T>::projection_width(std::size_t layer) const {
  if (kind == ModelKind::Gat && layer + 1 == layers()) return heads * dims.at(layer + 1);
  return dims.at(layer + 1);
}

template <typename T>
void ModelParams<T>::validate() const {
  if (weights.empty()) throw ShapeError("a model needs at least one layer");
  if (dims.size() != weights.size() + 1) {
    throw ShapeError("expected " + std::to_string(weights.size() + 1) + " dims, got " + std::to_string(dims.size()));
  }
  if (kind == ModelKind::Gat && heads == 0) throw ShapeError("GAT needs at least one head");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const auto& w = weights[l];
    if (w.rows() != dims[l] || w.cols() != projection_width(l)) {
      throw ShapeError("layer " + std::to_string(l) + " weight is " + std::to_string(w.rows()) + "x" +
                       std::to_string(w.cols()) + ", expected " + std::to_string(dims[l]) + "x" +
                       std::to_string(projection_width(l)));
    }
    if (kind == ModelKind::Gat) kernel::check_heads(projection_width(l), heads);
  }
}

template <typename T>
ModelParams<T> init_params(ModelKind kind, std::vector<std::uint64_t> dims, std::size_t heads,
                           std::uint64_t seed) {
  ModelParams<T> p;
  p.kind = kind;
  p.heads = kind == ModelKind::Gat ? heads : 1;
  p.dims = std::move(dims);
  if (p.dims.size() < 2) throw ShapeError("dims must list the input and at least one layer width");
  for (std::size_t l = 0; l + 1 < p.dims.size(); ++l) {
    const std::uint64_t cols =
        (kind == ModelKind::Gat && l + 2 == p.dims.size()) ? p.heads * p.dims[l + 1] : p.dims[l + 1];
    p.weights.push_back(random_matrix<T>(p.dims[l], cols, seed * 1000003ULL + l, -0.1, 0.1));
  }
  p.validate();
  return p;
}

namespace {
constexpr std::string_view kParamMagic = "DEALPARM";
}

void write_params(const std::filesystem::path& path, const ModelParams<float>& params, std::uint64_t seed) {
  params.validate();
  nlohmann::json header = {{"model", model_name(params.kind)},
                           {"layers", params.layers()},
                           {"dims", params.dims},
                           {"heads", params.heads},
                           {"seed", seed}};
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  detail::write_magic(out, kParamMagic);
  detail::write_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& w : params.weights) {
    for (float v : w.values()) detail::write_le(out, v);
  }
  if (!out) throw Error("failed writing " + path.string());
}

template <typename T>
ModelParams<T> read_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  detail::expect_magic(in, kParamMagic);
  const auto len = detail::read_le<std::uint64_t>(in, "header length");
  if (len > (1U << 20)) throw ParseError("parameter header is implausibly large");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw ParseError("truncated parameter header");
  ModelParams<T> p;
  try {
    const auto header = nlohmann::json::parse(text);
    p.kind = parse_model(header.at("model").get<std::string>());
    p.dims = header.at("dims").get<std::vector<std::uint64_t>>();
    p.heads = header.value("heads", std::size_t{1});
    const auto layers = header.at("layers").get<std::size_t>();
    if (p.dims.size() != layers + 1) throw ParseError("header dims do not match the layer count");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad parameter header: ") + e.what());
  }
  for (std::size_t l = 0; l + 1 < p.dims.size(); ++l) {
    const std::uint64_t cols =
        (p.kind == ModelKind::Gat && l + 2 == p.dims.size()) ? p.heads * p.dims[l + 1] : p.dims[l + 1];
    DenseMatrix<T> w(p.dims[l], cols);
    for (auto& v : w.values()) v = static_cast<T>(detail::read_le<float>(in, "weight"));
    p.weights.push_back(std::move(w));
  }
  p.validate();
  return p;
}

template <typename T>
EdgeValues<T> normalize_adjacency(const CsrGraph& block) {
  EdgeValues<T> ev{1, std::vector<T>(block.nnz())};
  for (std::uint64_t r = 0; r < block.rows(); ++r) {
    const std::uint64_t deg = block.degree(r);
    if (deg == 0) throw IntegrityError("row " + std::to_string(block.row_begin + r) + " is empty");
    const T w = T{1} / static_cast<T>(deg);
    std::fill(ev.values.begin() + static_cast<std::ptrdiff_t>(block.row_offsets[r]),
              ev.values.begin() + static_cast<std::ptrdiff_t>(block.row_offsets[r + 1]), w);
  }
  return ev;
}

template <typename T>
void leaky_relu(AttnBlock<T>& scores, double slope) {
  const T s = static_cast<T>(slope);
  for (auto& v : scores.values) v = v < T{0} ? v * s : v;
}

template <typename T>
AttnBlock<T> edge_softmax(const CsrGraph& block, const AttnBlock<T>& scores) {
  const std::size_t heads = scores.heads;
  if (scores.values.size() != block.nnz() * heads) throw ShapeError("scores do not match the block");
  AttnBlock<T> out{heads, std::vector<T>(scores.values.size())};
  for (std::uint64_t r = 0; r < block.rows(); ++r) {
    const std::uint64_t b = block.row_offsets[r];
    const std::uint64_t e = block.row_offsets[r + 1];
    for (std::size_t h = 0; h < heads; ++h) {
      T mx = -std::numeric_limits<T>::infinity();
      for (auto nz = b; nz < e; ++nz) mx = std::max(mx, scores.at(nz, h));
      T sum{};
      for (auto nz = b; nz < e; ++nz) {
        const T x = std::exp(scores.at(nz, h) - mx);
        out.values[nz * heads + h] = x;
        sum += x;
      }
      for (auto nz = b; nz < e; ++nz) out.values[nz * heads + h] /= sum;
    }
  }
  return out;
}

namespace {

// Records of `shard` grouped by receiving machine, ascending node id.
template <typename T>
std::vector<std::vector<std::pair<NodeId, std::size_t>>> route_records(
    const FeatureShard<T>& shard, int machines, const auto& receiver_of) {
  std::vector<std::vector<std::pair<NodeId, std::size_t>>> out(static_cast<std::size_t>(machines));
  for (std::size_t k = 0; k < shard.ids.size(); ++k) {
    for (int dst : receiver_of(shard.ids[k])) out[static_cast<std::size_t>(dst)].emplace_back(shard.ids[k], k);
  }
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

// Nodes loaded by each machine that fall in `range`, ascending.
std::vector<std::vector<NodeId>> loaded_in_range(const FeatureLocationTable& table, IndexRange range) {
  std::vector<std::vector<NodeId>> out(static_cast<std::size_t>(table.machines()));
  for (int i = 0; i < table.machines(); ++i) {
    for (NodeId v : table.shard(i)) {
      if (range.contains(v)) out[static_cast<std::size_t>(i)].push_back(v);
    }
    std::sort(out[static_cast<std::size_t>(i)].begin(), out[static_cast<std::size_t>(i)].end());
  }
  return out;
}

template <typename T>
void check_shard(const Worker& worker, const FeatureShard<T>& shard, const FeatureLocationTable& table) {
  const GridConfig& grid = worker.grid();
  if (table.machines() != grid.machines() || table.node_count() != grid.node_count) {
    throw ShapeError("location table does not match the grid");
  }
  if (shard.ids.size() != shard.rows.rows() || (shard.rows.rows() > 0 && shard.rows.cols() != grid.feat_dim)) {
    throw ShapeError("feature shard of machine " + std::to_string(worker.id()) + " has the wrong shape");
  }
  if (shard.ids != table.shard(worker.id())) {
    throw IntegrityError("feature shard of machine " + std::to_string(worker.id()) + " disagrees with the table");
  }
}

// Moves records to receivers. `slice_of(dst)` is the column range shipped to
// dst; `place(v, values)` stores one received or local row slice.
template <typename T, typename ReceiverOf, typename SliceOf, typename Place>
void push_records(Worker& worker, Channel& ch, const FeatureShard<T>& shard, const FeatureLocationTable& table,
                  IndexRange my_nodes, ColumnRange my_cols, ReceiverOf&& receiver_of, SliceOf&& slice_of,
                  Place&& place) {
  const GridConfig& grid = worker.grid();
  const int me = worker.id();
  const auto routed = route_records(shard, grid.machines(), receiver_of);
  for (int dst = 0; dst < grid.machines(); ++dst) {
    const auto& recs = routed[static_cast<std::size_t>(dst)];
    if (dst == me || recs.empty()) continue;
    const ColumnRange cols = slice_of(dst);
    std::vector<T> vals;
    vals.reserve(recs.size() * cols.size());
    for (const auto& [v, k] : recs) {
      auto row = shard.rows.row(k).subspan(cols.begin, cols.size());
      vals.insert(vals.end(), row.begin(), row.end());
    }
    ch.send(dst, Tag::FeatureBlock, Payload::of(vals));
  }
  const auto expected = loaded_in_range(table, my_nodes);
  for (int src = 0; src < grid.machines(); ++src) {
    const auto& nodes = expected[static_cast<std::size_t>(src)];
    if (nodes.empty()) continue;
    if (src == me) {
      for (NodeId v : nodes) {
        auto row = shard.rows.row(table.at(v).offset).subspan(my_cols.begin, my_cols.size());
        place(v, row.data());
      }
      continue;
    }
    const auto vals = detail::expect_values<T>(ch.recv(src, Tag::FeatureBlock), nodes.size() * my_cols.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) place(nodes[i], vals.data() + i * my_cols.size());
  }
}

}  // namespace

template <typename T>
TensorTile<T> redistribute_features(Worker& worker, const FeatureShard<T>& shard,
                                    const FeatureLocationTable& table) {
  check_shard(worker, shard, table);
  const GridConfig& grid = worker.grid();
  TensorTile<T> tile = make_tile<T>(grid, worker.id(), grid.feat_dim);
  Channel ch = worker.open_channel();
  push_records(
      worker, ch, shard, table, tile.rows, tile.cols,
      [&](NodeId v) { return grid.row_group(owner_row_group(grid, v)); },
      [&](int dst) { return column_range(grid.feat_dim, grid.m_parts, grid.coord(dst).m); },
      [&](NodeId v, const T* vals) {
        std::copy(vals, vals + tile.cols.size(), tile.data.row(v - tile.rows.begin).begin());
      });
  return tile;
}

template <typename T>
TensorTile<T> fused_first_gemm(Worker& worker, const FeatureShard<T>& shard,
                               const FeatureLocationTable& table, const DenseMatrix<T>& w) {
  check_shard(worker, shard, table);
  const GridConfig& grid = worker.grid();
  if (w.rows() != grid.feat_dim) throw ShapeError("first-layer weight does not match the feature width");
  const auto mp = static_cast<std::uint64_t>(grid.m_parts);
  auto slice_of_machine = [&](int machine) {
    const GridCoord c = grid.coord(machine);
    const NodeRange rows = node_range(grid, c.p);
    const IndexRange sub = split_range(rows.size(), mp, static_cast<std::uint64_t>(c.m));
    return IndexRange{rows.begin + sub.begin, rows.begin + sub.end};
  };
  const IndexRange mine = slice_of_machine(worker.id());
  DenseMatrix<T> rows_full(mine.size(), grid.feat_dim);
  Channel ch = worker.open_channel();
  push_records(
      worker, ch, shard, table, mine, {0, grid.feat_dim},
      [&](NodeId v) {
        const int p = owner_row_group(grid, v);
        const NodeRange rows = node_range(grid, p);
        const auto j = static_cast<int>(split_owner(rows.size(), mp, v - rows.begin));
        return std::vector<int>{grid.machine_id(p, j)};
      },
      [&](int) { return ColumnRange{0, grid.feat_dim}; },
      [&](NodeId v, const T* vals) {
        std::copy(vals, vals + grid.feat_dim, rows_full.row(v - mine.begin).begin());
      });
  worker.compute(static_cast<double>(mine.size() * w.rows() * w.cols()));
  const DenseMatrix<T> y = local_gemm(rows_full, w);
  return detail::ring_to_column_split(worker, ch, y);
}

namespace {

template <typename T>
void relu(TensorTile<T>& t) {
  for (auto& v : t.data.values()) v = v < T{0} ? T{0} : v;
}

template <typename T>
DenseMatrix<T> head_average(std::size_t heads, std::uint64_t d) {
  DenseMatrix<T> a(heads * d, d);
  const T share = T{1} / static_cast<T>(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::uint64_t j = 0; j < d; ++j) a(h * d + j, j) = share;
  }
  return a;
}

}  // namespace

template <typename T>
TensorTile<T> infer_worker(Worker& worker, const LayerGraphs& layers, const FeatureShard<T>& shard,
                           const FeatureLocationTable& table, const ModelParams<T>& params,
                           const InferenceOptions& options) {
  params.validate();
  const std::size_t k = params.layers();
  if (layers.size() != k) {
    throw ShapeError("model has " + std::to_string(k) + " layers but " + std::to_string(layers.size()) +
                     " layer graphs were given");
  }
  if (params.dims[0] != worker.grid().feat_dim) throw ShapeError("feature width does not match the model");

  auto spmm = [&](const CsrGraph& g, const EdgeValues<T>& ev, const TensorTile<T>& z) {
    return options.grouping ? grouped_spmm(worker, g, ev, z, *options.grouping) : dist_spmm(worker, g, ev, z);
  };

  TensorTile<T> h;
  for (std::size_t l = 0; l < k; ++l) {
    const CsrGraph& g = layers[l];
    const DenseMatrix<T>& w = params.weights[l];
    TensorTile<T> z;
    if (l == 0) {
      z = options.fuse_first_layer ? fused_first_gemm(worker, shard, table, w)
                                   : dist_gemm(worker, redistribute_features(worker, shard, table), w);
    } else {
      z = dist_gemm(worker, h, w);
    }
    if (params.kind == ModelKind::Gcn) {
      h = spmm(g, normalize_adjacency<T>(g), z);
    } else {
      const std::size_t heads = params.heads;
      AttnBlock<T> scores = options.grouping
                                ? grouped_sddmm_split(worker, g, z, z, heads, *options.grouping)
                                : dist_sddmm_split(worker, g, z, z, heads);
      leaky_relu(scores, params.leaky_slope);
      const AttnBlock<T> attn = edge_softmax(g, scores);
      const std::uint64_t d = z.width / heads;
      const std::size_t cw = z.cols.size();
      EdgeValues<T> ev{cw, std::vector<T>(g.nnz() * cw)};
      for (std::uint64_t nz = 0; nz < g.nnz(); ++nz) {
        for (std::size_t i = 0; i < cw; ++i) ev.values[nz * cw + i] = attn.at(nz, (z.cols.begin + i) / d);
      }
      h = spmm(g, ev, z);
      if (l + 1 == k) h = dist_gemm(worker, h, head_average<T>(heads, d));
    }
    if (l + 1 < k) relu(h);
    worker.barrier();
  }
  return h;
}

template <typename T>
InferenceResult<T> run_inference(const CsrGraph& graph, std::span<const FeatureShard<T>> shards,
                                 const ModelParams<T>& params, const GridConfig& grid,
                                 const InferenceOptions& options, const RunOptions& run) {
  grid.validate();
  params.validate();
  if (graph.node_count != grid.node_count || graph.row_begin != 0 || graph.rows() != graph.node_count) {
    throw ShapeError("inference needs the full graph of the grid's node count");
  }
  if (shards.size() != static_cast<std::size_t>(grid.machines())) throw ShapeError("one feature shard per machine is required");
  const FeatureLocationTable table = location_table(shards, grid.node_count);
  std::vector<CsrGraph> blocks;
  for (int p = 0; p < grid.p_parts; ++p) {
    const NodeRange r = node_range(grid, p);
    blocks.push_back(slice_rows(graph, r.begin, r.end));
  }
  const auto k = static_cast<std::uint32_t>(params.layers());
  auto r = run_workers(
      grid,
      [&](Worker& w) {
        const LayerGraphs layers = make_layers(blocks[static_cast<std::size_t>(w.p())], k, options.fanout, options.seed);
        return infer_worker(w, layers, shards[static_cast<std::size_t>(w.id())], table, params, options);
      },
      run);
  InferenceResult<T> out;
  out.embeddings = gather_tiles<T>(r.outputs, grid);
  out.stats = std::move(r.stats);
  out.makespan = r.makespan;
  out.peak_inflight = std::move(r.peak_inflight);
  return out;
}

#define ALLNODE_INSTANTIATE(T)                                                                           \
  template struct ModelParams<T>;                                                                        \
  template ModelParams<T> init_params(ModelKind, std::vector<std::uint64_t>, std::size_t, std::uint64_t); \
  template ModelParams<T> read_params(const std::filesystem::path&);                                     \
  template EdgeValues<T> normalize_adjacency(const CsrGraph&);                                           \
  template void leaky_relu(AttnBlock<T>&, double);                                                       \
  template AttnBlock<T> edge_softmax(const CsrGraph&, const AttnBlock<T>&);                              \
  template TensorTile<T> redistribute_features(Worker&, const FeatureShard<T>&, const FeatureLocationTable&); \
  template TensorTile<T> fused_first_gemm(Worker&, const FeatureShard<T>&, const FeatureLocationTable&,  \
                                          const DenseMatrix<T>&);                                        \
  template TensorTile<T> infer_worker(Worker&, const LayerGraphs&, const FeatureShard<T>&,               \
                                      const FeatureLocationTable&, const ModelParams<T>&,                \
                                      const InferenceOptions&);                                          \
  template InferenceResult<T> run_inference(const CsrGraph&, std::span<const FeatureShard<T>>,          \
                                            const ModelParams<T>&, const GridConfig&,                    \
                                            const InferenceOptions&, const RunOptions&);

ALLNODE_INSTANTIATE(float)
ALLNODE_INSTANTIATE(double)

#undef ALLNODE_INSTANTIATE

}  // namespace allnode
