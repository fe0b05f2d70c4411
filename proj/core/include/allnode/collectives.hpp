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

#include <functional>
#include <span>
#include <vector>

#include "allnode/transport.hpp"

namespace allnode {

/// Called once per block that reaches this member, including its own block,
/// with the index (within the group) of the member that produced it.
using RingCallback = std::function<void(int source_index, const Payload& block)>;

/// All-to-all personalised exchange over a logical ring. blocks[j] is
/// addressed to group[j]; blocks[self_index] stays local. At stage s a member
/// sends to its s-th successor and receives from its s-th predecessor. The
/// next stage is posted before the callback for the current one runs, so the
/// callback overlaps with the transfer in flight.
void ring_exchange(Channel& channel, std::span<const int> group, int self_index,
                   std::vector<Payload> blocks, Tag tag, const RingCallback& on_block);

}  // namespace allnode
