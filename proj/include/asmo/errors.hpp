// Copyright (c) 2026 the asmo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
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

namespace asmo {

// Base for all errors raised by this library. `BadInput` groups the
// conditions a CLI maps to exit code 2; everything else maps to 3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class BadInput : public Error {
 public:
  explicit BadInput(const std::string& msg) : Error(msg) {}
};

class MalformedFile : public BadInput {
 public:
  explicit MalformedFile(const std::string& msg) : BadInput("malformed file: " + msg) {}
};

class UnsupportedFormat : public BadInput {
 public:
  explicit UnsupportedFormat(const std::string& msg) : BadInput("unsupported format: " + msg) {}
};

class DimensionMismatch : public BadInput {
 public:
  explicit DimensionMismatch(const std::string& msg) : BadInput("dimension mismatch: " + msg) {}
};

class MissingMap : public BadInput {
 public:
  explicit MissingMap(const std::string& msg) : BadInput("missing map: " + msg) {}
};

class EmptyDataset : public BadInput {
 public:
  explicit EmptyDataset(const std::string& msg) : BadInput("empty dataset: " + msg) {}
};

class EmptyCurve : public BadInput {
 public:
  explicit EmptyCurve(const std::string& msg) : BadInput("empty curve: " + msg) {}
};

class IndexError : public BadInput {
 public:
  explicit IndexError(const std::string& msg) : BadInput("index error: " + msg) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& msg) : Error("shape error: " + msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error("i/o error: " + msg) {}
};

class ConfigError : public BadInput {
 public:
  explicit ConfigError(const std::string& msg) : BadInput("config error: " + msg) {}
};

}  // namespace asmo
