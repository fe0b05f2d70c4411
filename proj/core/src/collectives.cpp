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

#include "allnode/collectives.hpp"

#include <string>

namespace allnode {

void ring_exchange(Channel& channel, std::span<const int> group, int self_index,
                   std::vector<Payload> blocks, Tag tag, const RingCallback& on_block) {
  const int n = static_cast<int>(group.size());
  if (self_index < 0 || self_index >= n) throw BoundsError("ring member index out of range");
  if (static_cast<int>(blocks.size()) != n) {
    throw ShapeError("ring exchange needs " + std::to_string(n) + " blocks, got " +
                     std::to_string(blocks.size()));
  }
  if (group[static_cast<std::size_t>(self_index)] != channel.worker().id()) {
    throw BoundsError("ring member index does not match the calling machine");
  }
  auto to = [&](int s) { return (self_index + s) % n; };
  auto from = [&](int s) { return (self_index - s + n) % n; };
  auto post = [&](int s) {
    const int j = to(s);
    channel.send(group[static_cast<std::size_t>(j)], tag, std::move(blocks[static_cast<std::size_t>(j)]));
  };
  if (n > 1) post(1);
  on_block(self_index, blocks[static_cast<std::size_t>(self_index)]);
  for (int s = 1; s < n; ++s) {
    const int src = from(s);
    Message msg = channel.recv(group[static_cast<std::size_t>(src)], tag);
    if (s + 1 < n) post(s + 1);
    on_block(src, msg.payload);
  }
}

}  // namespace allnode
