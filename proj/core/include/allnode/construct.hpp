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

#include "allnode/graph.hpp"
#include "allnode/transport.hpp"

namespace allnode {

/// Worker program: shuffles the edges of this machine's shard to the
/// row-groups owning their destinations and builds the local CSR row-block.
/// Every replica of a row-group ends with the same block.
CsrGraph build_csr_distributed(Worker& worker, const EdgeList& shard);

}  // namespace allnode
