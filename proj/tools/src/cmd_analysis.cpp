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
#include <sstream>

#include "allnode/costmodel.hpp"
#include "allnode/error.hpp"
#include "allnode/measure.hpp"
#include "allnode/sharing.hpp"
#include "commands.hpp"

namespace allnode::cli {

namespace {

Primitive parse_primitive(const std::string& s) {
  if (s == "gemm") return Primitive::Gemm;
  if (s == "spmm") return Primitive::Spmm;
  if (s == "sddmm") return Primitive::Sddmm;
  throw ParseError("unknown primitive '" + s + "'");
}

std::vector<std::string> runnable_variants(Primitive p) {
  switch (p) {
    case Primitive::Gemm: return {"ours", "sota"};
    case Primitive::Spmm: return {"ours", "exchange_g0", "grouped"};
    case Primitive::Sddmm: return {"split", "duplicate", "grouped"};
  }
  return {};
}

struct BenchArgs {
  std::string graph, primitive = "spmm", variant = "all", machines = "2x2", out, schedule = "local-first";
  std::uint64_t dim = 16, seed = 1, group_entries = kDefaultGroupEntries;
  std::size_t heads = 1;
  bool self_loops = false;
  SimFlags sim;
};

void add_bench_primitive(CLI::App& app) {
  auto* cmd = app.add_subcommand("bench-primitive", "Run a primitive and its baselines; one CSV row each");
  auto a = std::make_shared<BenchArgs>();
  cmd->add_option("--graph", a->graph, "edge list or binary CSR")->required();
  cmd->add_option("--primitive", a->primitive)->check(CLI::IsMember({"gemm", "spmm", "sddmm"}));
  cmd->add_option("--variant", a->variant, "variant name or 'all'");
  cmd->add_option("--machines", a->machines, "PxM grid");
  cmd->add_option("--dim", a->dim, "feature width");
  cmd->add_option("--heads", a->heads, "SDDMM heads");
  cmd->add_option("--seed", a->seed, "input seed");
  cmd->add_option("--group-entries", a->group_entries, "target entries per group for 'grouped'");
  cmd->add_option("--schedule", a->schedule)->check(CLI::IsMember({"naive", "prefetch", "local-first"}));
  cmd->add_flag("--self-loops", a->self_loops, "add self-loops before running");
  cmd->add_option("--out", a->out, "CSV path (stdout if omitted)");
  a->sim.attach(*cmd);
  cmd->callback([a] {
    CsrGraph g = load_graph(a->graph);
    if (a->self_loops) g = with_self_loops(g);
    const auto [p, m] = parse_machines(a->machines);
    const GridConfig grid{p, m, g.node_count, a->dim};
    const Primitive prim = parse_primitive(a->primitive);
    MeasureOptions opt;
    opt.heads = a->heads;
    opt.seed = a->seed;
    opt.grouping = GroupingOptions{a->group_entries, parse_schedule(a->schedule)};
    opt.run = a->sim.options();
    const auto variants = a->variant == "all" ? runnable_variants(prim) : std::vector<std::string>{a->variant};
    std::ostringstream out;
    out.precision(12);
    out << "primitive,variant,P,M,N,D,nnz,entries_sent,bytes_sent,makespan,peak_inflight_entries\n";
    for (const auto& v : variants) {
      const PrimitiveRun r = measure_primitive(g, grid, prim, v, opt);
      std::uint64_t peak = 0;
      for (auto x : r.peak_inflight) peak = std::max(peak, x);
      const TagCounters t = r.stats.total();
      out << a->primitive << ',' << v << ',' << p << ',' << m << ',' << g.node_count << ',' << a->dim << ','
          << g.nnz() << ',' << t.sent_entries << ',' << t.sent_bytes << ',' << r.makespan << ',' << peak << '\n';
    }
    write_text(a->out, out.str());
  });
}

struct CostArgs {
  std::string graph, machines = "2x2", out;
  double nodes = 0, z = 0;
  std::uint64_t dim = 16, seed = 1;
  bool measure = false;
  SimFlags sim;
};

void add_cost_model(CLI::App& app) {
  auto* cmd = app.add_subcommand("cost-model", "Closed-form traffic per machine, optionally against measurement");
  auto a = std::make_shared<CostArgs>();
  cmd->add_option("--graph", a->graph, "derive N and Z from this graph");
  cmd->add_option("--nodes", a->nodes, "N when no graph is given");
  cmd->add_option("--z", a->z, "mean non-zeros per column when no graph is given");
  cmd->add_option("--dim", a->dim, "feature width");
  cmd->add_option("--machines", a->machines, "PxM grid");
  cmd->add_flag("--measure", a->measure, "run every runnable variant and fill the measured column");
  cmd->add_option("--seed", a->seed, "input seed for measurement");
  cmd->add_option("--out", a->out, "CSV path (stdout if omitted)");
  a->sim.attach(*cmd);
  cmd->callback([a] {
    const auto [p, m] = parse_machines(a->machines);
    std::optional<CsrGraph> g;
    CostParams params;
    if (!a->graph.empty()) {
      g = load_graph(a->graph);
      params = derive_params(*g, a->dim, p, m);
    } else {
      if (a->measure) throw ShapeError("--measure needs --graph");
      params = CostParams{a->nodes, static_cast<double>(a->dim), static_cast<double>(p), static_cast<double>(m), a->z};
      params.validate();
    }
    CostReport report = CostReport::all(params);
    if (a->measure) {
      const GridConfig grid{p, m, g->node_count, a->dim};
      MeasureOptions opt;
      opt.seed = a->seed;
      opt.run = a->sim.options();
      for (auto& e : report.entries) {
        if (e.primitive == Primitive::Spmm && e.variant == "two_d") continue;
        const PrimitiveRun r = measure_primitive(*g, grid, e.primitive, e.variant, opt);
        e.measured = compare(r.stats, report, e.primitive, e.variant).back().measured;
      }
    }
    write_text(a->out, report.to_csv());
  });
}

struct SharingArgs {
  std::string graph, scheme = "batch_dedup", out;
  std::uint64_t batch = 1024, fanout = 50, capacity = 0, seed = 1;
  std::uint32_t layers = 3;
  bool full_neighbor = false;
};

void add_sharing(CLI::App& app) {
  auto* cmd = app.add_subcommand("sharing", "Sharing ratio of per-target ego-network computation");
  auto a = std::make_shared<SharingArgs>();
  cmd->add_option("--graph", a->graph, "edge list or binary CSR")->required();
  cmd->add_option("--scheme", a->scheme)
      ->check(CLI::IsMember({"batch_dedup", "outermost_hop_dedup", "cache_dedup", "all"}));
  cmd->add_option("--batch-size", a->batch);
  cmd->add_option("--layers", a->layers);
  cmd->add_option("--fanout", a->fanout);
  cmd->add_flag("--full-neighbor", a->full_neighbor);
  cmd->add_option("--capacity", a->capacity, "LRU entries for cache_dedup");
  cmd->add_option("--seed", a->seed, "sampling seed");
  cmd->add_option("--out", a->out, "CSV path (stdout if omitted)");
  cmd->callback([a] {
    const CsrGraph g = load_graph(a->graph);
    const std::uint64_t fanout = a->full_neighbor ? kFullNeighbors : a->fanout;
    const std::uint64_t batch = std::min<std::uint64_t>(a->batch, g.node_count);
    const LayerGraphs layers = make_layers(g, a->layers, fanout, a->seed);
    std::vector<SharingScheme> schemes;
    if (a->scheme == "all") {
      schemes = {SharingScheme::BatchDedup, SharingScheme::OutermostHopDedup, SharingScheme::CacheDedup};
    } else {
      schemes = {parse_scheme(a->scheme)};
    }
    std::ostringstream out;
    out << "scheme,batch_size,k,fanout,ratio\n";
    for (auto s : schemes) {
      const SharingModel model{s, batch, a->layers, fanout, a->capacity};
      model.validate(g.node_count);
      out << scheme_name(s) << ',' << batch << ',' << a->layers << ',' << fanout << ','
          << sharing_count(layers, model).ratio() << '\n';
    }
    write_text(a->out, out.str());
  });
}

}  // namespace

void add_analysis_commands(CLI::App& app) {
  add_bench_primitive(app);
  add_cost_model(app);
  add_sharing(app);
}

}  // namespace allnode::cli
