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

#include "allnode/error.hpp"
#include "commands.hpp"

namespace allnode::cli {

std::pair<int, int> parse_machines(const std::string& text) {
  const auto x = text.find_first_of("xX");
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const int p = std::stoi(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    const std::string rest = text.substr(x + 1);
    const int m = std::stoi(rest, &used);
    if (used != rest.size() || p < 1 || m < 1) throw std::invalid_argument(text);
    return {p, m};
  } catch (const std::logic_error&) {
    throw ParseError("--machines expects PxM with positive P and M, got '" + text + "'");
  }
}

CsrGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  char magic[8] = {};
  in.read(magic, sizeof magic);
  if (in.gcount() == sizeof magic && std::string(magic, sizeof magic) == "DEALCSR1") return read_csr_binary(path);
  return build_csr(parse_edge_list(path));
}

void SimFlags::attach(CLI::App& cmd) {
  cmd.add_option("--transport", transport, "sim or threads")->check(CLI::IsMember({"sim", "threads"}));
  cmd.add_option("--latency", latency, "simulated per-message latency");
  cmd.add_option("--bandwidth", bandwidth, "simulated bytes per time unit");
  cmd.add_option("--time-per-op", compute_time_per_op, "simulated time per multiply-add");
}

RunOptions SimFlags::options() const {
  RunOptions r;
  r.kind = parse_transport(transport);
  r.sim = SimParams{latency, bandwidth, compute_time_per_op};
  r.sim.validate();
  return r;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

}  // namespace allnode::cli
