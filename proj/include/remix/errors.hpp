// Copyright 2026 The Remix Authors
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

#ifndef REMIX_ERRORS_HPP
#define REMIX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace remix {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside its documented domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Plan or command-line configuration is invalid.
class ConfigError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A class index is out of range.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Input data is missing, short, or malformed.
class DataError : public Error {
 public:
  using Error::Error;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

/// Training produced non-finite values or otherwise cannot continue.
class TrainingFault : public Error {
 public:
  using Error::Error;
};

}  // namespace remix

#endif  // REMIX_ERRORS_HPP
