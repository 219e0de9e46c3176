/*
 * Copyright 2026 The fedst Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDST_ERRORS_H_
#define FEDST_ERRORS_H_

#include <stdexcept>
#include <string>

namespace fedst {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched matrix/vector dimensions or index lists.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, off-simplex probability rows.
class NumericError : public Error {
 public:
  using Error::Error;
};

// An argument outside its documented domain (beta > 1, alpha <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed on-disk data: bad magic, truncated payload, wrong version.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration document.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedst

#endif  // FEDST_ERRORS_H_
