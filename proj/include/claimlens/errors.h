// Copyright 2026 The ClaimLens Authors.
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

#ifndef CLAIMLENS_ERRORS_H_
#define CLAIMLENS_ERRORS_H_

#include <stdexcept>
#include <string>
#include <utility>

namespace claimlens {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file could not be opened, read or written.
class FileError : public Error {
 public:
  using Error::Error;
};

// Input rows do not match the expected dataset schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Malformed serialized data (embedding files, checkpoints, JSON lines).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Invalid argument to an operation.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// The entity linking backend failed or is unreachable.
class LinkerError : public Error {
 public:
  using Error::Error;
};

// An object was used before it was ready (e.g. encoder not loaded).
class StateError : public Error {
 public:
  using Error::Error;
};

// The model does not provide the requested capability.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// Experiment configuration is invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage needs an artifact that an earlier stage has not produced.
class MissingArtifactError : public Error {
 public:
  MissingArtifactError(const std::string &what, std::string stage)
      : Error(what), stage_(std::move(stage)) {}
  const std::string &stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace claimlens

#endif  // CLAIMLENS_ERRORS_H_
