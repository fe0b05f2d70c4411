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
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "allnode/graph.hpp"
#include "allnode/partition.hpp"
#include "allnode/transport.hpp"

namespace allnode::cli {

void add_graph_commands(CLI::App& app);
void add_infer_command(CLI::App& app);
void add_analysis_commands(CLI::App& app);

/// "PxM", e.g. "2x4".
std::pair<int, int> parse_machines(const std::string& text);

/// Binary CSR cache when the file starts with its magic, edge-list text otherwise.
CsrGraph load_graph(const std::filesystem::path& path);

struct SimFlags {
  std::string transport = "sim";
  double latency = SimParams{}.latency;
  double bandwidth = SimParams{}.bandwidth;
  double compute_time_per_op = SimParams{}.compute_time_per_op;

  void attach(CLI::App& cmd);
  RunOptions options() const;
};

/// Writes to `path`, or stdout when it is empty or "-".
void write_text(const std::string& path, const std::string& text);

}  // namespace allnode::cli
