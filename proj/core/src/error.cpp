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

#include "allnode/error.hpp"

namespace allnode {

ParseError::ParseError(const std::string& what, std::uint64_t line)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

WorkerFailure::WorkerFailure(int machine, std::exception_ptr cause,
                             const std::string& what)
    : Error("machine " + std::to_string(machine) + " failed: " + what),
      machine_(machine),
      cause_(std::move(cause)) {}

void WorkerFailure::rethrow_cause() const {
  if (cause_) std::rethrow_exception(cause_);
  throw Error(what());
}

}  // namespace allnode
