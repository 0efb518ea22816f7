// Copyright 2026 The warpfield Authors
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

namespace warpfield {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation outside a function's domain (e.g. a Möbius pole).
class DomainError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimensionError : public Error {
 public:
  using Error::Error;
};

/// Homogenization anchors are coincident or colinear after warping.
class AnchorDegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Parameters outside their validity region (e.g. an indefinite Σ_G).
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefiniteError : public Error {
 public:
  using Error::Error;
};

class SingularDesignError : public Error {
 public:
  using Error::Error;
};

class BootstrapUnstableError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data, configuration or arguments.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace warpfield
