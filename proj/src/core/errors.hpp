//
// Copyright 2026 The Minifair Authors
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
//

#ifndef MINIFAIR_CORE_ERRORS_HPP_
#define MINIFAIR_CORE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace minifair {

// Base class for every error raised by the library. The C API maps each
// concrete subclass to a status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message) : Error(message), line_(-1) {}
  ParseError(const std::string& message, long line)
      : Error(message + " (line " + std::to_string(line) + ")"), line_(line) {}
  // Line number the parse failed on, or -1 when not tied to a line.
  long line() const { return line_; }

 private:
  long line_;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

class DuplicateEntryError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class UnknownUserError : public Error {
 public:
  using Error::Error;
};

class DegenerateUserError : public Error {
 public:
  using Error::Error;
};

class EmptyTrainingSetError : public Error {
 public:
  using Error::Error;
};

class EmptyTestSetError : public Error {
 public:
  using Error::Error;
};

class EmptyGroupError : public Error {
 public:
  using Error::Error;
};

class EmptyValidationSetError : public Error {
 public:
  using Error::Error;
};

class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

class MissingModelError : public Error {
 public:
  using Error::Error;
};

class ExhaustedError : public Error {
 public:
  using Error::Error;
};

}  // namespace minifair

#endif  // MINIFAIR_CORE_ERRORS_HPP_
