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

#ifndef WVLAB_DSL_HPP_
#define WVLAB_DSL_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wvlab/linear_optics.hpp"
#include "wvlab/weak_value.hpp"

namespace wvlab {

/// 1-based position of a token's first character.
struct SourceSpan {
  int line = 1;
  int column = 1;
  bool operator==(const SourceSpan&) const = default;
};

enum class ParseErrorKind {
  kUnknownDirective,
  kBadArity,
  kBadNumber,
  kIndexOutOfRange,
  kDuplicateDirective,
  kMissingDirective,
};

const char* to_string(ParseErrorKind kind);

struct ParseError {
  SourceSpan span;
  ParseErrorKind kind = ParseErrorKind::kBadArity;
  std::string message;
};

/// A circuit together with the state injected on its input mode.
struct Experiment {
  Circuit circuit;
  InputState input = input::SinglePhoton{};
  bool operator==(const Experiment&) const = default;
};

struct ParseResult {
  std::optional<Experiment> experiment;
  std::vector<ParseError> errors;

  bool ok() const { return errors.empty() && experiment.has_value(); }
};

/// Parses the line-oriented circuit format:
///
///   modes <N>
///   input <mode> coherent <re> <im> | input <mode> single-photon
///   bs <a> <b> theta=<rad> phi=<rad>
///   phase <mode> <rad>
///   loss <mode> eta=<val>
///   probe <mode> [<mode> ...]
///   detect <mode>
///
/// '#' starts a comment. Elements before `probe` form the pre-probe stage,
/// elements after it the post-probe stage. All errors are collected.
ParseResult parse(std::string_view text);

/// Canonical text form; numbers carry 17 significant digits so that
/// parse(serialize(x)) reproduces x bit for bit. Loss stays unexpanded.
std::string serialize(const Experiment& experiment);

/// Hex SHA-256 of serialize(experiment).
std::string digest(const Experiment& experiment);

}  // namespace wvlab

#endif  // WVLAB_DSL_HPP_
