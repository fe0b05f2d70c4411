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

#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>

#include "allnode/error.hpp"
#include "allnode/features.hpp"
#include "allnode/model.hpp"
#include "commands.hpp"
#include "json.hpp"

namespace allnode::cli {

namespace {

struct InferArgs {
  std::string graph, features, params_file, machines = "1x1", model = "gcn";
  std::string fuse = "on", schedule = "local-first", precision = "f32";
  std::string metrics_out, embeddings_out;
  std::uint32_t layers = 3;
  std::uint64_t fanout = 50, seed = 1, param_seed = 1, hidden = 0, out_dim = 0, group_entries = 0;
  std::size_t heads = 4;
  bool full_neighbor = false;
  SimFlags sim;
};

std::string metrics_csv(const TrafficStats& stats, double makespan, const std::vector<std::uint64_t>& peaks) {
  std::ostringstream out;
  out.precision(12);
  out << "machine,tag,sent_bytes,recv_bytes,sent_entries,recv_entries,makespan,peak_inflight_entries\n";
  for (int i = 0; i < stats.machines(); ++i) {
    for (std::size_t t = 0; t < kTagCount; ++t) {
      const TagCounters& c = stats.at(i, static_cast<Tag>(t));
      out << i << ',' << tag_name(static_cast<Tag>(t)) << ',' << c.sent_bytes << ',' << c.recv_bytes << ','
          << c.sent_entries << ',' << c.recv_entries << ',' << makespan << ','
          << (static_cast<std::size_t>(i) < peaks.size() ? peaks[static_cast<std::size_t>(i)] : 0) << '\n';
    }
  }
  return out.str();
}

std::string metrics_json(const TrafficStats& stats, double makespan, const std::vector<std::uint64_t>& peaks) {
  nlohmann::json doc = {{"makespan", makespan}, {"peak_inflight_entries", peaks}, {"conserved", stats.conserved()}};
  for (std::size_t t = 0; t < kTagCount; ++t) {
    const TagCounters c = stats.tag_total(static_cast<Tag>(t));
    doc["tags"][std::string(tag_name(static_cast<Tag>(t)))] = {
        {"sent_bytes", c.sent_bytes}, {"recv_bytes", c.recv_bytes}, {"sent_entries", c.sent_entries},
        {"recv_entries", c.recv_entries}};
  }
  return doc.dump(2) + "\n";
}

template <typename T>
void run(const InferArgs& a) {
  const CsrGraph graph = load_graph(a.graph);
  const FeatureFileHeader header = read_feature_header(a.features);
  if (header.node_count != graph.node_count) {
    throw ShapeError("feature file has " + std::to_string(header.node_count) + " nodes, graph has " +
                     std::to_string(graph.node_count));
  }
  const auto [p, m] = parse_machines(a.machines);
  const GridConfig grid{p, m, graph.node_count, header.dim};
  grid.validate();

  ModelParams<T> params;
  if (!a.params_file.empty() && std::filesystem::exists(a.params_file)) {
    params = read_params<T>(a.params_file);
    if (params.layers() != a.layers) std::cerr << "using " << params.layers() << " layers from the parameter file\n";
  } else {
    const std::uint64_t hidden = a.hidden ? a.hidden : header.dim;
    std::vector<std::uint64_t> dims{header.dim};
    for (std::uint32_t l = 1; l < a.layers; ++l) dims.push_back(hidden);
    dims.push_back(a.out_dim ? a.out_dim : hidden);
    params = init_params<T>(parse_model(a.model), dims, a.heads, a.param_seed);
    if constexpr (std::is_same_v<T, float>) {
      if (!a.params_file.empty()) write_params(a.params_file, params, a.param_seed);
    }
  }

  std::vector<FeatureShard<T>> shards;
  for (int i = 0; i < grid.machines(); ++i) shards.push_back(read_feature_shard<T>(a.features, i, grid.machines()));

  InferenceOptions opt;
  opt.fanout = a.full_neighbor ? kFullNeighbors : a.fanout;
  opt.seed = a.seed;
  opt.fuse_first_layer = a.fuse == "on";
  if (a.group_entries > 0) opt.grouping = GroupingOptions{a.group_entries, parse_schedule(a.schedule)};

  const auto r = run_inference<T>(graph, shards, params, grid, opt, a.sim.options());
  std::cerr << "makespan " << r.makespan << ", " << r.stats.total().sent_entries << " entries sent\n";

  if (!a.metrics_out.empty()) {
    const bool json = std::filesystem::path(a.metrics_out).extension() == ".json";
    write_text(a.metrics_out, json ? metrics_json(r.stats, r.makespan, r.peak_inflight)
                                   : metrics_csv(r.stats, r.makespan, r.peak_inflight));
  }
  if (!a.embeddings_out.empty()) {
    std::vector<NodeId> ids(graph.node_count);
    std::iota(ids.begin(), ids.end(), NodeId{0});
    DenseMatrix<float> out(r.embeddings.rows(), r.embeddings.cols());
    std::transform(r.embeddings.values().begin(), r.embeddings.values().end(), out.values().begin(),
                   [](T v) { return static_cast<float>(v); });
    write_features(a.embeddings_out, ids, out);
  }
}

}  // namespace

void add_infer_command(CLI::App& app) {
  auto* cmd = app.add_subcommand("infer", "Layer-wise inference for every node");
  auto a = std::make_shared<InferArgs>();
  cmd->add_option("--graph", a->graph, "edge list or binary CSR")->required();
  cmd->add_option("--features", a->features, "feature file")->required();
  cmd->add_option("--model", a->model)->check(CLI::IsMember({"gcn", "gat"}));
  cmd->add_option("--layers", a->layers)->check(CLI::Range(1, 16));
  cmd->add_option("--fanout", a->fanout, "sampled in-neighbours per node and layer");
  cmd->add_flag("--full-neighbor", a->full_neighbor, "use every in-neighbour");
  cmd->add_option("--seed", a->seed, "sampling seed");
  cmd->add_option("--heads", a->heads, "GAT attention heads");
  cmd->add_option("--hidden", a->hidden, "hidden width (default: feature width)");
  cmd->add_option("--out-dim", a->out_dim, "output width (default: hidden width)");
  cmd->add_option("--params", a->params_file, "parameter file; written from --param-seed if absent");
  cmd->add_option("--param-seed", a->param_seed);
  cmd->add_option("--machines", a->machines, "PxM grid");
  cmd->add_option("--fuse-first-layer", a->fuse)->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--group-entries", a->group_entries, "partitioned communication target (0 disables)");
  cmd->add_option("--schedule", a->schedule)->check(CLI::IsMember({"naive", "prefetch", "local-first"}));
  cmd->add_option("--precision", a->precision)->check(CLI::IsMember({"f32", "f64"}));
  cmd->add_option("--metrics-out", a->metrics_out, "traffic metrics, CSV or .json");
  cmd->add_option("--embeddings-out", a->embeddings_out, "output embeddings in feature-file format");
  a->sim.attach(*cmd);
  cmd->callback([a] {
    if (a->precision == "f64") {
      run<double>(*a);
    } else {
      run<float>(*a);
    }
  });
}

}  // namespace allnode::cli
