// Copyright 2026 The tkg Authors. All Rights Reserved.
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

namespace tkg {

// Base of every error raised by the library. The CLI maps the subclasses
// below onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input that a caller could have checked (empty label, k = 0, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Filesystem or stream failure, unparseable input files.
class IoError : public Error {
 public:
  using Error::Error;
};

// Graph or metagraph contract violated.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A staged topic label has no entry in the canonical map.
class UnmappedLabel : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

// Transport failed after all retries.
class BackendUnavailable : public BackendError {
 public:
  using BackendError::BackendError;
};

// Backend answered, but not with the JSON shape the request kind requires.
class MalformedResponse : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace tkg
