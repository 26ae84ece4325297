// Copyright 2026 The vsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VSIM_ERRORS_H_
#define VSIM_ERRORS_H_

#include <stdexcept>
#include <string>

namespace vsim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Inputs that violate an operation's preconditions (e.g. size mismatch).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed serialized input (JSON syntax, table format, binary framing).
class ParseError : public Error {
 public:
  using Error::Error;
};

// A well-formed value that breaks a documented constraint. `field` is the
// dotted path of the offending value, e.g. "cvd.severity".
class ValidationError : public Error {
 public:
  ValidationError(std::string field, std::string constraint)
      : Error(field + ": " + constraint),
        field_(std::move(field)),
        constraint_(std::move(constraint)) {}

  const std::string& field() const { return field_; }
  const std::string& constraint() const { return constraint_; }

 private:
  std::string field_;
  std::string constraint_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace vsim

#endif  // VSIM_ERRORS_H_
