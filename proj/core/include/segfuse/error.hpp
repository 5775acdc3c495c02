// Copyright 2026 The Segfuse Authors.
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

#ifndef SEGFUSE_ERROR_HPP_
#define SEGFUSE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace segfuse {

// Base class for every error the engine reports. The CLI maps the concrete
// subclass to an exit code and a machine-readable `kind` string.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept = 0;
};

// An in-memory or decoded value violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation"; }
};

// Bytes do not follow the container layout (magic, version, trailing data).
class FormatError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "format"; }
};

// The byte source or sink failed, including short reads.
class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

// An operation was invoked outside its contract (wrong stitcher, etc.).
class UsageError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "usage"; }
};

}  // namespace segfuse

#endif  // SEGFUSE_ERROR_HPP_
