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
#include <iostream>
#include <numeric>
#include <random>

#include "allnode/construct.hpp"
#include "allnode/error.hpp"
#include "allnode/features.hpp"
#include "commands.hpp"
#include "json.hpp"

namespace allnode::cli {

namespace {

void add_generate(CLI::App& app) {
  auto* cmd = app.add_subcommand("generate", "RMAT edge list");
  auto params = std::make_shared<RmatParams>();
  auto out = std::make_shared<std::string>();
  auto csr = std::make_shared<std::string>();
  cmd->add_option("--scale", params->scale, "log2 of the node count");
  cmd->add_option("--degree", params->avg_degree, "average degree");
  cmd->add_option("--seed", params->seed);
  cmd->add_option("--out", *out, "edge-list text file (stdout if omitted)");
  cmd->add_option("--csr", *csr, "also write the binary CSR cache");
  cmd->callback([=] {
    const EdgeList el = generate_rmat(*params);
    if (out->empty() || *out == "-") {
      write_edge_list(el, std::cout);
    } else {
      std::ofstream f(*out, std::ios::trunc);
      if (!f) throw Error("cannot write " + *out);
      write_edge_list(el, f);
    }
    if (!csr->empty()) write_csr_binary(build_csr(el), *csr);
  });
}

void add_build_csr(CLI::App& app) {
  auto* cmd = app.add_subcommand("build-csr", "Edge list to binary CSR");
  struct Args {
    std::string edges, out, machines;
    SimFlags sim;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--edges", a->edges, "edge-list text file")->required();
  cmd->add_option("--out", a->out, "binary CSR output")->required();
  cmd->add_option("--machines", a->machines, "build distributedly on a PxM grid");
  a->sim.attach(*cmd);
  cmd->callback([=] {
    const EdgeList el = parse_edge_list(a->edges);
    if (a->machines.empty()) {
      write_csr_binary(build_csr(el), a->out);
      return;
    }
    const auto [p, m] = parse_machines(a->machines);
    const GridConfig grid{p, m, el.node_count, 1};
    grid.validate();
    const auto machines = static_cast<std::uint64_t>(grid.machines());
    auto r = run_workers(
        grid,
        [&](Worker& w) {
          const IndexRange mine = split_range(el.edges.size(), machines, static_cast<std::uint64_t>(w.id()));
          EdgeList shard{el.node_count, {el.edges.begin() + static_cast<std::ptrdiff_t>(mine.begin),
                                         el.edges.begin() + static_cast<std::ptrdiff_t>(mine.end)}};
          return build_csr_distributed(w, shard);
        },
        a->sim.options());
    std::vector<CsrGraph> blocks;
    for (int q = 0; q < p; ++q) blocks.push_back(std::move(r.outputs[static_cast<std::size_t>(grid.machine_id(q, 0))]));
    write_csr_binary(concat_row_blocks(blocks), a->out);
    std::cerr << "edge shuffle entries: " << r.stats.tag_total(Tag::EdgeShuffle).sent_entries << '\n';
  });
}

void add_partition(CLI::App& app) {
  auto* cmd = app.add_subcommand("partition", "Grid layout manifest as JSON");
  struct Args {
    std::string graph, machines = "1x1", out;
    std::uint64_t nodes = 0, dim = 0;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--graph", a->graph, "graph file; gives N and per-block nnz");
  cmd->add_option("--nodes", a->nodes, "node count when no graph is given");
  cmd->add_option("--dim", a->dim, "feature width")->required();
  cmd->add_option("--machines", a->machines, "PxM");
  cmd->add_option("--out", a->out, "manifest path (stdout if omitted)");
  cmd->callback([=] {
    std::optional<CsrGraph> g;
    if (!a->graph.empty()) g = load_graph(a->graph);
    const auto [p, m] = parse_machines(a->machines);
    const GridConfig grid{p, m, g ? g->node_count : a->nodes, a->dim};
    grid.validate();
    nlohmann::json doc = {{"P", p}, {"M", m}, {"N", grid.node_count}, {"D", grid.feat_dim}};
    for (int q = 0; q < p; ++q) {
      const NodeRange r = node_range(grid, q);
      nlohmann::json row = {{"p", q}, {"begin", r.begin}, {"end", r.end}};
      if (g) row["nnz"] = g->row_offsets[r.end] - g->row_offsets[r.begin];
      doc["ranges"]["rows"].push_back(row);
    }
    for (int j = 0; j < m; ++j) {
      const ColumnRange c = feature_range(grid, j);
      doc["ranges"]["cols"].push_back({{"m", j}, {"begin", c.begin}, {"end", c.end}});
    }
    for (int i = 0; i < grid.machines(); ++i) {
      const GridCoord c = grid.coord(i);
      doc["machines"].push_back({{"machine", i}, {"p", c.p}, {"m", c.m}});
    }
    write_text(a->out, doc.dump(2) + "\n");
  });
}

void add_features(CLI::App& app) {
  auto* cmd = app.add_subcommand("features", "Random feature file with records in shuffled order");
  struct Args {
    std::string graph, out;
    std::uint64_t nodes = 0, dim = 0, seed = 1;
    bool sorted = false;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--graph", a->graph, "take N from this graph");
  cmd->add_option("--nodes", a->nodes, "node count when no graph is given");
  cmd->add_option("--dim", a->dim, "feature width")->required();
  cmd->add_option("--seed", a->seed);
  cmd->add_flag("--sorted", a->sorted, "write records in ascending id order");
  cmd->add_option("--out", a->out, "feature file")->required();
  cmd->callback([=] {
    const std::uint64_t n = a->graph.empty() ? a->nodes : load_graph(a->graph).node_count;
    if (n == 0 || a->dim == 0) throw ShapeError("features need a positive node count and width");
    const DenseMatrix<float> x = random_matrix<float>(n, a->dim, a->seed);
    std::vector<NodeId> ids(n);
    std::iota(ids.begin(), ids.end(), NodeId{0});
    if (!a->sorted) {
      std::mt19937_64 rng(a->seed ^ 0x9e3779b97f4a7c15ULL);
      std::shuffle(ids.begin(), ids.end(), rng);
    }
    DenseMatrix<float> rows(n, a->dim);
    for (std::uint64_t k = 0; k < n; ++k) std::copy(x.row(ids[k]).begin(), x.row(ids[k]).end(), rows.row(k).begin());
    write_features(a->out, ids, rows);
  });
}

}  // namespace

void add_graph_commands(CLI::App& app) {
  add_generate(app);
  add_build_csr(app);
  add_partition(app);
  add_features(app);
}

}  // namespace allnode::cli
