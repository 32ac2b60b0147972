// Copyright (c) 2026 The nbrs Authors
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

namespace nbrs {

// Base of every error thrown by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad command line or configuration value.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Missing, unreadable or malformed input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Shape mismatch between arrays.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite values in a loss, gradient or parameter.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace nbrs
