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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "allnode/features.hpp"
#include "allnode/kernels.hpp"
#include "allnode/pipeline.hpp"
#include "allnode/sampler.hpp"
#include "allnode/transport.hpp"

namespace allnode {

enum class ModelKind { Gcn, Gat };
std::string_view model_name(ModelKind kind);
ModelKind parse_model(std::string_view name);

/// Layer weights. dims = {D0, ..., Dk} are the per-layer output widths seen by
/// the next layer. GCN layer l multiplies by a D(l-1) x D(l) matrix. GAT
/// layer l projects to D(l) columns split evenly among the heads, except the
/// last layer, which projects to heads * D(k) columns and averages the heads.
template <typename T>
struct ModelParams {
  ModelKind kind = ModelKind::Gcn;
  std::size_t heads = 1;
  std::vector<std::uint64_t> dims;
  std::vector<DenseMatrix<T>> weights;
  double leaky_slope = 0.2;

  std::size_t layers() const noexcept { return weights.size(); }
  std::uint64_t projection_width(std::size_t layer) const;
  /// Throws ShapeError on inconsistent dimensions.
  void validate() const;
};

/// Deterministic uniform[-0.1, 0.1] weights.
template <typename T>
ModelParams<T> init_params(ModelKind kind, std::vector<std::uint64_t> dims, std::size_t heads,
                           std::uint64_t seed);

/// "DEALPARM", u64 header length, JSON header {model, layers, dims, heads,
/// seed}, then every weight matrix as row-major f32.
void write_params(const std::filesystem::path& path, const ModelParams<float>& params, std::uint64_t seed);
template <typename T>
ModelParams<T> read_params(const std::filesystem::path& path);

/// Mean aggregation weights: 1 / |row| for every non-zero of the row.
/// Throws IntegrityError on an empty row.
template <typename T>
EdgeValues<T> normalize_adjacency(const CsrGraph& block);

/// Leaky ReLU of every score.
template <typename T>
void leaky_relu(AttnBlock<T>& scores, double slope);

/// Softmax over the non-zeros of each row, per head, with max subtraction.
template <typename T>
AttnBlock<T> edge_softmax(const CsrGraph& block, const AttnBlock<T>& scores);

/// Baseline feature preparation: every loader pushes each record's column
/// slices to the tiles that own it. Records travel in ascending node order
/// per (loader, receiver) pair, so no ids are sent.
template <typename T>
TensorTile<T> redistribute_features(Worker& worker, const FeatureShard<T>& shard,
                                    const FeatureLocationTable& table);

/// First-layer GEMM served straight from the loaders: each loader pushes full
/// rows to the machine that multiplies them (phase two of dist_gemm), then
/// the result is redistributed to the canonical column split.
template <typename T>
TensorTile<T> fused_first_gemm(Worker& worker, const FeatureShard<T>& shard,
                               const FeatureLocationTable& table, const DenseMatrix<T>& w);

struct InferenceOptions {
  std::uint64_t fanout = 50;
  std::uint64_t seed = 1;
  bool fuse_first_layer = true;
  std::optional<GroupingOptions> grouping;
};

/// Worker program for one machine. `layers` hold this machine's row-block.
template <typename T>
TensorTile<T> infer_worker(Worker& worker, const LayerGraphs& layers, const FeatureShard<T>& shard,
                           const FeatureLocationTable& table, const ModelParams<T>& params,
                           const InferenceOptions& options);

template <typename T>
struct InferenceResult {
  DenseMatrix<T> embeddings;
  TrafficStats stats;
  double makespan = 0.0;
  std::vector<std::uint64_t> peak_inflight;
};

/// Runs inference over the grid. shards[i] is what machine i loaded.
template <typename T>
InferenceResult<T> run_inference(const CsrGraph& graph, std::span<const FeatureShard<T>> shards,
                                 const ModelParams<T>& params, const GridConfig& grid,
                                 const InferenceOptions& options, const RunOptions& run = {});

/// Single-machine reference over whole-graph layers, written with plain loops.
template <typename T>
DenseMatrix<T> serial_reference(const LayerGraphs& layers, const DenseMatrix<T>& x,
                                const ModelParams<T>& params);

}  // namespace allnode
