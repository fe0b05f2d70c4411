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

#include <memory>
#include <string>

#include "allnode/transport.hpp"

namespace allnode::detail {

struct MailKey {
  int src = 0;
  Tag tag = Tag::Control;
  ChannelId channel = 0;
  auto operator<=>(const MailKey&) const = default;
};

struct ServiceKey {
  Tag tag = Tag::Control;
  ChannelId channel = 0;
  auto operator<=>(const ServiceKey&) const = default;
};

inline std::string describe(const MailKey& k) {
  return "src=" + std::to_string(k.src) + " tag=" + std::string(tag_name(k.tag)) +
         " channel=" + std::to_string(k.channel);
}

void check_endpoints(const Message& msg, int machines);

std::unique_ptr<Transport> make_thread_transport(int machines);
std::unique_ptr<Transport> make_sim_transport(int machines, const SimParams& params);

}  // namespace allnode::detail
