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

#include <iostream>

#include "allnode/error.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"allnode: distributed all-node GNN inference"};
  app.require_subcommand(1);
  allnode::cli::add_graph_commands(app);
  allnode::cli::add_infer_command(app);
  allnode::cli::add_analysis_commands(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const allnode::Error& e) {
    std::cerr << "allnode: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
