// Copyright 2026 The adforge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace adforge {

// Base of every error raised by the library. `code()` is a stable,
// machine-readable identifier used on the wire and in CLI diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& message)
      : Error("parse_error", "line " + std::to_string(line) + ", column " +
                                 std::to_string(column) + ": " + message),
        line_(line),
        column_(column),
        detail_(message) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  int line_;
  int column_;
  std::string detail_;
};

enum class StructureFault {
  kCycle,
  kNoRoot,
  kMultipleRoots,
  kUnreachable,
  kInDegree,
  kDuplicateEdge,
  kMissingNode,
  kInvalidAnnotation,
  kEmptyId,
};

class StructureError : public Error {
 public:
  StructureError(StructureFault fault, std::string subject,
                 const std::string& message)
      : Error("structure_error", message),
        fault_(fault),
        subject_(std::move(subject)) {}

  StructureFault fault() const noexcept { return fault_; }
  // Offending node id, or "parent->child" for edges.
  const std::string& subject() const noexcept { return subject_; }

 private:
  StructureFault fault_;
  std::string subject_;
};

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& message) : Error("not_found", message) {}
};

class EmptyTree : public Error {
 public:
  EmptyTree() : Error("empty_tree", "tree has no attack nodes") {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error("validation_error", message) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& message)
      : Error("precondition_failed", message) {}
};

class IllegalTransition : public Error {
 public:
  explicit IllegalTransition(const std::string& message)
      : Error("illegal_transition", message) {}
};

class BackendError : public Error {
 public:
  BackendError(int status, std::string body, const std::string& message)
      : Error("backend_error", message), status_(status), body_(std::move(body)) {}

  // HTTP status of the last attempt; 0 when no response was received.
  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

class NoDotFound : public Error {
 public:
  NoDotFound() : Error("no_dot_found", "reply contains no DOT digraph block") {}
};

// Wraps a ParseError/StructureError raised while ingesting an LLM reply,
// carrying the raw DOT block that failed.
class CandidateRejected : public Error {
 public:
  CandidateRejected(std::string inner_code, const std::string& message,
                    std::string raw_block)
      : Error(std::move(inner_code), message), raw_block_(std::move(raw_block)) {}

  const std::string& raw_block() const noexcept { return raw_block_; }

 private:
  std::string raw_block_;
};

class UnusableBranch : public Error {
 public:
  explicit UnusableBranch(std::vector<std::string> nodes)
      : Error("unusable_branch", Describe(nodes)), nodes_(std::move(nodes)) {}

  const std::vector<std::string>& nodes() const noexcept { return nodes_; }

 private:
  static std::string Describe(const std::vector<std::string>& nodes) {
    std::string out = "branch nodes without commands:";
    for (const auto& n : nodes) out += " " + n;
    return out;
  }

  std::vector<std::string> nodes_;
};

class UnknownCheck : public Error {
 public:
  explicit UnknownCheck(const std::string& name)
      : Error("unknown_check", "unknown steady-state check '" + name + "'") {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io_error", message) {}
};

}  // namespace adforge
