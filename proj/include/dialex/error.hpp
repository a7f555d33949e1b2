// Copyright 2026 The dialex Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dialex {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input bytes are not valid UTF-8.
class DecodeError : public Error {
 public:
  DecodeError(std::size_t byte_offset, const std::string& what)
      : Error("invalid UTF-8 at byte " + std::to_string(byte_offset) + ": " + what),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// A line of a structured file does not match its schema.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Raised inside the candidate pipeline when an invariant of its inputs is broken.
class PipelineError : public Error {
 public:
  using Error::Error;
};

// A required stage artifact is missing on disk.
class DependencyError : public Error {
 public:
  DependencyError(std::string artifact)
      : Error("missing stage input: " + artifact), artifact_(std::move(artifact)) {}

  const std::string& artifact() const noexcept { return artifact_; }

 private:
  std::string artifact_;
};

// Network failure that survived all retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

// The endpoint answered, but not with a chat-completion body.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Prompt selection stopped part-way; completed scores are kept and the
// run can be resumed from `resume_token`.
class PartialResultsError : public Error {
 public:
  PartialResultsError(const std::string& what, std::string resume_token)
      : Error(what), resume_token_(std::move(resume_token)) {}

  const std::string& resume_token() const noexcept { return resume_token_; }

 private:
  std::string resume_token_;
};

// Scoring was asked for items that have no prediction record.
class MissingPredictionsError : public Error {
 public:
  explicit MissingPredictionsError(std::vector<std::string> pair_ids)
      : Error(describe(pair_ids)), pair_ids_(std::move(pair_ids)) {}

  const std::vector<std::string>& pair_ids() const noexcept { return pair_ids_; }

 private:
  static std::string describe(const std::vector<std::string>& ids) {
    std::string s = "missing predictions for " + std::to_string(ids.size()) + " item(s):";
    for (std::size_t i = 0; i < ids.size() && i < 20; ++i) s += " " + ids[i];
    if (ids.size() > 20) s += " ...";
    return s;
  }

  std::vector<std::string> pair_ids_;
};

}  // namespace dialex
