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

#include "wvlab/error.hpp"

namespace wvlab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidModeIndex: return "InvalidModeIndex";
    case ErrorKind::kLossNotExpanded: return "LossNotExpanded";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kNotUnitary: return "NotUnitary";
    case ErrorKind::kDomainError: return "DomainError";
    case ErrorKind::kPostSelectionTooRare: return "PostSelectionTooRare";
    case ErrorKind::kSizeLimitExceeded: return "SizeLimitExceeded";
    case ErrorKind::kTailTooLarge: return "TailTooLarge";
    case ErrorKind::kDecompositionFailed: return "DecompositionFailed";
    case ErrorKind::kNotFactorizable: return "NotFactorizable";
    case ErrorKind::kEmptyPopulation: return "EmptyPopulation";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace wvlab
