// Copyright 2026 The gbdmap Authors
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

#ifndef GBDMAP_ERRORS_H_
#define GBDMAP_ERRORS_H_

#include <stdexcept>
#include <string>

namespace gbdmap {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed graph: bad variable ids, empty scopes, duplicated scope entries.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A value lies outside its declared domain, or inputs have wrong shape.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A gradient or value is undefined at a point on the domain boundary.
class BoundaryError : public Error {
 public:
  BoundaryError(const std::string& variable, const std::string& what)
      : Error(what), variable_(variable) {}
  const std::string& variable() const { return variable_; }

 private:
  std::string variable_;
};

// A tilted supremum is +infinity, so no finite cut exists.
class UnboundedCutError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Hard constraints admit no assignment.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class AcquisitionError : public Error {
 public:
  using Error::Error;
};

class CacheCorruptionError : public Error {
 public:
  using Error::Error;
};

}  // namespace gbdmap

#endif  // GBDMAP_ERRORS_H_
