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

#include <optional>
#include <string_view>

#include "allnode/costmodel.hpp"
#include "allnode/graph.hpp"
#include "allnode/partition.hpp"
#include "allnode/pipeline.hpp"
#include "allnode/transport.hpp"

namespace allnode {

struct MeasureOptions {
  std::size_t heads = 1;
  std::uint64_t seed = 1;
  /// GEMM output width; 0 keeps the input width.
  std::uint64_t out_dim = 0;
  /// Used by the "grouped" SPMM and SDDMM variants.
  GroupingOptions grouping;
  RunOptions run;
};

struct PrimitiveRun {
  TrafficStats stats;
  double makespan = 0;
  std::vector<std::uint64_t> peak_inflight;
};

/// Runs one primitive variant on seeded random inputs over `graph` (used
/// as given) and reports its traffic. Variants: gemm ours|sota, spmm
/// ours|exchange_g0|grouped, sddmm split|duplicate|grouped. Throws
/// UnsupportedError for a variant that exists only as a model (spmm two_d).
PrimitiveRun measure_primitive(const CsrGraph& graph, const GridConfig& grid, Primitive primitive,
                               std::string_view variant, const MeasureOptions& options = {});

}  // namespace allnode
