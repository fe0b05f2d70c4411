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

#include <benchmark/benchmark.h>

#include <string>

#include "allnode/measure.hpp"

namespace {

using namespace allnode;

// Wall time of one distributed primitive over the thread transport. Counters
// report per-run traffic and the simulated makespan is not used.
void run_primitive(benchmark::State& state, Primitive prim, const char* variant) {
  RmatParams p;
  p.scale = static_cast<unsigned>(state.range(0));
  p.avg_degree = 16;
  p.seed = 5;
  const CsrGraph g = build_csr(generate_rmat(p));
  const GridConfig grid{static_cast<int>(state.range(1)), static_cast<int>(state.range(2)), g.node_count, 64};
  MeasureOptions opt;
  opt.run.kind = TransportKind::Threads;
  opt.heads = 4;
  std::uint64_t entries = 0;
  for (auto _ : state) entries = measure_primitive(g, grid, prim, variant, opt).stats.total().sent_entries;
  state.counters["entries_sent"] = static_cast<double>(entries);
}

void GridArgs(benchmark::internal::Benchmark* b) {
  for (auto [pp, mm] : {std::pair{2, 2}, std::pair{4, 2}, std::pair{2, 4}}) b->Args({12, pp, mm});
  b->Unit(benchmark::kMillisecond)->UseRealTime();
}

void BM_GemmOurs(benchmark::State& s) { run_primitive(s, Primitive::Gemm, "ours"); }
void BM_GemmSota(benchmark::State& s) { run_primitive(s, Primitive::Gemm, "sota"); }
void BM_SpmmOurs(benchmark::State& s) { run_primitive(s, Primitive::Spmm, "ours"); }
void BM_SpmmExchange(benchmark::State& s) { run_primitive(s, Primitive::Spmm, "exchange_g0"); }
void BM_SpmmGrouped(benchmark::State& s) { run_primitive(s, Primitive::Spmm, "grouped"); }
void BM_SddmmSplit(benchmark::State& s) { run_primitive(s, Primitive::Sddmm, "split"); }
void BM_SddmmDuplicate(benchmark::State& s) { run_primitive(s, Primitive::Sddmm, "duplicate"); }

BENCHMARK(BM_GemmOurs)->Apply(GridArgs);
BENCHMARK(BM_GemmSota)->Apply(GridArgs);
BENCHMARK(BM_SpmmOurs)->Apply(GridArgs);
BENCHMARK(BM_SpmmExchange)->Apply(GridArgs);
BENCHMARK(BM_SpmmGrouped)->Apply(GridArgs);
BENCHMARK(BM_SddmmSplit)->Apply(GridArgs);
BENCHMARK(BM_SddmmDuplicate)->Apply(GridArgs);

}  // namespace

BENCHMARK_MAIN();
