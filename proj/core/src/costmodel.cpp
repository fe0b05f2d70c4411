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

#include "allnode/costmodel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "allnode/error.hpp"

namespace allnode {

void CostParams::validate() const {
  if (!(n > 0 && d > 0 && p >= 1 && m >= 1 && z >= 0)) throw ShapeError("cost parameters must be positive");
  if (z > n) throw ShapeError("Z cannot exceed N");
}

CostParams derive_params(const CsrGraph& graph, std::uint64_t feat_dim, int p_parts, int m_parts) {
  if (graph.node_count == 0) throw ShapeError("empty graph");
  CostParams c{static_cast<double>(graph.node_count), static_cast<double>(feat_dim), static_cast<double>(p_parts),
               static_cast<double>(m_parts), static_cast<double>(graph.nnz()) / static_cast<double>(graph.node_count)};
  c.validate();
  return c;
}

std::string_view primitive_name(Primitive p) {
  switch (p) {
    case Primitive::Gemm: return "gemm";
    case Primitive::Spmm: return "spmm";
    case Primitive::Sddmm: return "sddmm";
  }
  return "?";
}

std::string_view variant_name(GemmVariant v) { return v == GemmVariant::Ours ? "ours" : "sota"; }

std::string_view variant_name(SpmmVariant v) {
  switch (v) {
    case SpmmVariant::Ours: return "ours";
    case SpmmVariant::ExchangeG0: return "exchange_g0";
    case SpmmVariant::TwoD: return "two_d";
  }
  return "?";
}

std::string_view variant_name(SddmmVariant v) { return v == SddmmVariant::Duplicate ? "duplicate" : "split"; }

namespace {

Cost sum_terms(std::vector<CostTerm> terms, std::optional<double> memory = std::nullopt) {
  Cost c;
  for (const auto& t : terms) c.comm += t.entries;
  c.terms = std::move(terms);
  c.memory = memory;
  return c;
}

}  // namespace

Cost gemm_cost(const CostParams& c, GemmVariant variant) {
  c.validate();
  if (variant == GemmVariant::Ours) {
    const double block = c.n * c.d / (c.p * c.m * c.m);
    return sum_terms({{"redistribute", {Tag::FeatureBlock}, 2 * block * (c.m - 1)}}, block);
  }
  return sum_terms({{"reduce", {Tag::PartialResult}, c.n * c.d / (c.p * c.m) * (c.m - 1)}}, c.n * c.d / c.p);
}

Cost spmm_cost(const CostParams& c, SpmmVariant variant) {
  c.validate();
  const double remote = c.n * (c.p - 1) / (c.p * c.p);
  switch (variant) {
    case SpmmVariant::Ours:
      return sum_terms({{"ids", {Tag::IdRequest}, c.z * remote}, {"features", {Tag::FeatureBlock}, remote * c.d / c.m}});
    case SpmmVariant::ExchangeG0:
      return sum_terms({{"graph", {Tag::EdgeShuffle, Tag::FeatureBlock}, c.z * remote * c.d / c.m},
                        {"partials", {Tag::PartialResult}, c.n * c.d / (c.p * c.m)}});
    case SpmmVariant::TwoD:
      return sum_terms({{"features", {Tag::FeatureBlock}, remote * c.d / c.m},
                        {"partials", {Tag::PartialResult}, c.n * c.d * (c.m - 1) / (c.p * c.m)}});
  }
  return {};
}

Cost sddmm_cost(const CostParams& c, SddmmVariant variant) {
  c.validate();
  const double peers = c.m + c.m * c.p - 2;
  if (variant == SddmmVariant::Duplicate) {
    return sum_terms({{"features", {Tag::FeatureBlock}, peers * c.n * c.d / (c.m * c.p)}});
  }
  return sum_terms({{"features", {Tag::FeatureBlock}, peers * c.n * c.d / (c.m * c.m * c.p)},
                    {"scores", {Tag::AttnBlock}, c.n * c.z * (c.m - 1) / (c.p * c.m)}});
}

CostReport CostReport::all(const CostParams& params) {
  CostReport r{params, {}};
  for (auto v : {GemmVariant::Ours, GemmVariant::Sota}) {
    r.entries.push_back({Primitive::Gemm, std::string(variant_name(v)), gemm_cost(params, v), std::nullopt});
  }
  for (auto v : {SpmmVariant::Ours, SpmmVariant::ExchangeG0, SpmmVariant::TwoD}) {
    r.entries.push_back({Primitive::Spmm, std::string(variant_name(v)), spmm_cost(params, v), std::nullopt});
  }
  for (auto v : {SddmmVariant::Duplicate, SddmmVariant::Split}) {
    r.entries.push_back({Primitive::Sddmm, std::string(variant_name(v)), sddmm_cost(params, v), std::nullopt});
  }
  return r;
}

const CostEntry& CostReport::find(Primitive primitive, std::string_view variant) const {
  for (const auto& e : entries) {
    if (e.primitive == primitive && e.variant == variant) return e;
  }
  throw ShapeError("no cost entry for " + std::string(primitive_name(primitive)) + "/" + std::string(variant));
}

std::string CostReport::to_csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "primitive,variant,N,D,P,M,Z,modeled,measured,ratio\n";
  for (const auto& e : entries) {
    out << primitive_name(e.primitive) << ',' << e.variant << ',' << params.n << ',' << params.d << ',' << params.p
        << ',' << params.m << ',' << params.z << ',' << e.cost.comm << ',';
    if (e.measured) {
      out << *e.measured << ',';
      if (e.cost.comm > 0) out << *e.measured / e.cost.comm;
    } else {
      out << ',';
    }
    out << '\n';
  }
  return out.str();
}

double measured_per_machine(const TrafficStats& stats, const std::vector<Tag>& tags) {
  if (stats.machines() == 0) return 0;
  double total = 0;
  for (int i = 0; i < stats.machines(); ++i) {
    for (Tag t : tags) total += static_cast<double>(stats.at(i, t).recv_entries);
  }
  return total / stats.machines();
}

std::vector<Deviation> compare(const TrafficStats& measured, const CostReport& report, Primitive primitive,
                               std::string_view variant, double tolerance) {
  const auto expected = static_cast<int>(std::lround(report.params.p * report.params.m));
  if (measured.machines() != expected) {
    throw ShapeError("traffic from " + std::to_string(measured.machines()) + " machines cannot be compared with a " +
                     std::to_string(expected) + "-machine model");
  }
  const CostEntry& entry = report.find(primitive, variant);
  auto make = [&](std::string term, double modeled, double got) {
    Deviation d{primitive, std::string(variant), std::move(term), modeled, got, 0, false};
    if (modeled > 0) {
      d.ratio = got / modeled;
      d.flagged = std::abs(d.ratio - 1) > tolerance;
    } else {
      d.ratio = got == 0 ? 1 : std::numeric_limits<double>::infinity();
      d.flagged = got != 0;
    }
    return d;
  };
  std::vector<Deviation> out;
  std::vector<Tag> all;
  for (const auto& t : entry.cost.terms) {
    out.push_back(make(t.name, t.entries, measured_per_machine(measured, t.tags)));
    for (Tag tag : t.tags) {
      if (std::find(all.begin(), all.end(), tag) == all.end()) all.push_back(tag);
    }
  }
  out.push_back(make("total", entry.cost.comm, measured_per_machine(measured, all)));
  return out;
}

}  // namespace allnode
