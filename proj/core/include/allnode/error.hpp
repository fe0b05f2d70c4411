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
#include <exception>
#include <stdexcept>
#include <string>

namespace allnode {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed textual or binary input. Carries the 1-based line number for
/// text inputs (0 when not applicable).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::uint64_t line = 0);
  std::uint64_t line() const noexcept { return line_; }

 private:
  std::uint64_t line_;
};

/// An index (node id, partition index, machine id) outside its valid range.
class BoundsError : public Error {
 public:
  using Error::Error;
};

/// Operand shapes do not conform.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Parameters outside what the generator or model supports.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

/// Raised by the simulated transport when every live worker is blocked and no
/// message or event can make progress.
class DeadlockError : public TransportError {
 public:
  using TransportError::TransportError;
};

/// A peer sent a request that violates the primitive's protocol, e.g. asking
/// for a row the owner does not hold.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent bookkeeping such as a node missing from a location table.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// A worker program failed. The original exception is kept and can be
/// rethrown with rethrow_cause().
class WorkerFailure : public Error {
 public:
  WorkerFailure(int machine, std::exception_ptr cause, const std::string& what);
  int machine() const noexcept { return machine_; }
  [[noreturn]] void rethrow_cause() const;

 private:
  int machine_;
  std::exception_ptr cause_;
};

}  // namespace allnode
