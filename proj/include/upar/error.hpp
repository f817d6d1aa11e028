/*
 * Copyright 2026 The UP-AR Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef UPAR_ERROR_HPP
#define UPAR_ERROR_HPP

#include <stdexcept>
#include <string>

namespace upar {

// Exception hierarchy used by the C++ core. The C API maps each class onto a
// distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument shapes, dimension mismatches, unknown feature names.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// File access and parse failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// A caller-side precondition does not hold (e.g. the instance is already
// classified favourably).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown (non-finite loss during training and similar).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace upar

#endif  // UPAR_ERROR_HPP
