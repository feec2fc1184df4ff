// Copyright 2026 The wvlab Authors
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

#ifndef WVLAB_ERROR_HPP_
#define WVLAB_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace wvlab {

enum class ErrorKind {
  kInvalidModeIndex,
  kLossNotExpanded,
  kDimensionMismatch,
  kNotUnitary,
  kDomainError,
  kPostSelectionTooRare,
  kSizeLimitExceeded,
  kTailTooLarge,
  kDecompositionFailed,
  kNotFactorizable,
  kEmptyPopulation,
  kInvalidArgument,
};

const char* to_string(ErrorKind kind);

/// Exception thrown by every fallible operation in the core library. The
/// kind is stable and is what the C API maps onto status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace wvlab

#endif  // WVLAB_ERROR_HPP_
