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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "allnode/graph.hpp"
#include "allnode/partition.hpp"
#include "allnode/transport.hpp"

namespace allnode {

/// Symbols of the closed-form models. Z is the mean non-zeros per column.
struct CostParams {
  double n = 0;
  double d = 0;
  double p = 1;
  double m = 1;
  double z = 0;

  /// Throws ShapeError unless all sizes are positive and Z <= N.
  void validate() const;
};

/// Z taken from the graph actually multiplied (nnz / N).
CostParams derive_params(const CsrGraph& graph, std::uint64_t feat_dim, int p_parts, int m_parts);

enum class Primitive : std::uint8_t { Gemm, Spmm, Sddmm };
std::string_view primitive_name(Primitive p);

enum class GemmVariant : std::uint8_t { Ours, Sota };
enum class SpmmVariant : std::uint8_t { Ours, ExchangeG0, TwoD };
enum class SddmmVariant : std::uint8_t { Duplicate, Split };

std::string_view variant_name(GemmVariant v);
std::string_view variant_name(SpmmVariant v);
std::string_view variant_name(SddmmVariant v);

/// One additive piece of a formula and the message tags that carry it.
struct CostTerm {
  std::string name;
  std::vector<Tag> tags;
  double entries = 0;
};

/// Per-machine entries received. Memory is empty where the model equates it
/// with communication.
struct Cost {
  double comm = 0;
  std::optional<double> memory;
  std::vector<CostTerm> terms;
};

Cost gemm_cost(const CostParams& params, GemmVariant variant);
Cost spmm_cost(const CostParams& params, SpmmVariant variant);
Cost sddmm_cost(const CostParams& params, SddmmVariant variant);

struct CostEntry {
  Primitive primitive = Primitive::Gemm;
  std::string variant;
  Cost cost;
  std::optional<double> measured;
};

struct CostReport {
  CostParams params;
  std::vector<CostEntry> entries;

  /// Every primitive and variant evaluated at params.
  static CostReport all(const CostParams& params);
  const CostEntry& find(Primitive primitive, std::string_view variant) const;

  /// primitive,variant,N,D,P,M,Z,modeled,measured,ratio
  std::string to_csv() const;
};

/// Mean over machines of entries received under the given tags.
double measured_per_machine(const TrafficStats& stats, const std::vector<Tag>& tags);

struct Deviation {
  Primitive primitive = Primitive::Gemm;
  std::string variant;
  std::string term;
  double modeled = 0;
  double measured = 0;
  double ratio = 0;
  bool flagged = false;
};

/// Measured/modeled per term and in total. Throws ShapeError when the stats
/// come from a different machine count than the params describe.
std::vector<Deviation> compare(const TrafficStats& measured, const CostReport& report, Primitive primitive,
                               std::string_view variant, double tolerance = 0.1);

}  // namespace allnode
