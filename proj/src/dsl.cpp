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

#include "wvlab/dsl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <openssl/evp.h>

namespace wvlab {
namespace {

struct Token {
  std::string_view text;
  SourceSpan span;
};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

std::vector<Token> tokenize(std::string_view line, int line_no) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    if (is_space(line[i])) {
      ++i;
      continue;
    }
    if (line[i] == '#') break;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i]) && line[i] != '#') ++i;
    tokens.push_back({line.substr(start, i - start),
                      {line_no, static_cast<int>(start) + 1}});
  }
  return tokens;
}

// A mode index whose range can only be checked once `modes` is known.
struct PendingIndex {
  int value;
  SourceSpan span;
};

class Parser {
 public:
  ParseResult run(std::string_view text) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t end = std::min(text.find('\n', pos), text.size());
      ++line_no;
      handle_line(tokenize(text.substr(pos, end - pos), line_no));
      if (end == text.size()) break;
      pos = end + 1;
    }
    finish();
    ParseResult result;
    result.errors = std::move(errors_);
    if (result.errors.empty()) result.experiment = std::move(experiment_);
    return result;
  }

 private:
  void error(SourceSpan span, ParseErrorKind kind, std::string message) {
    errors_.push_back({span, kind, std::move(message)});
  }

  std::optional<int> parse_index(const Token& t) {
    int value = 0;
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      error(t.span, ParseErrorKind::kBadNumber,
            "expected a mode index, got '" + std::string(t.text) + "'");
      return std::nullopt;
    }
    if (value < 0) {
      error(t.span, ParseErrorKind::kIndexOutOfRange,
            "mode index must be non-negative");
      return std::nullopt;
    }
    pending_.push_back({value, t.span});
    return value;
  }

  std::optional<double> parse_real(std::string_view text, SourceSpan span) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
      error(span, ParseErrorKind::kBadNumber,
            "expected a finite number, got '" + std::string(text) + "'");
      return std::nullopt;
    }
    return value;
  }

  std::optional<double> parse_keyed(const Token& t, std::string_view key) {
    if (t.text.size() <= key.size() || t.text.substr(0, key.size()) != key ||
        t.text[key.size()] != '=') {
      error(t.span, ParseErrorKind::kBadArity,
            "expected " + std::string(key) + "=<value>");
      return std::nullopt;
    }
    if (t.text.size() == key.size() + 1) {
      error(t.span, ParseErrorKind::kBadNumber,
            "missing value after '" + std::string(key) + "='");
      return std::nullopt;
    }
    SourceSpan value_span = t.span;
    value_span.column += static_cast<int>(key.size()) + 1;
    return parse_real(t.text.substr(key.size() + 1), value_span);
  }

  bool arity(const std::vector<Token>& tokens, std::size_t expected,
             const char* usage) {
    if (tokens.size() == expected) return true;
    const SourceSpan span =
        tokens.size() > expected ? tokens[expected].span : tokens[0].span;
    error(span, ParseErrorKind::kBadArity, std::string("usage: ") + usage);
    return false;
  }

  bool once(bool& seen, const Token& t) {
    if (seen) {
      error(t.span, ParseErrorKind::kDuplicateDirective,
            "duplicate '" + std::string(t.text) + "' directive");
      return false;
    }
    seen = true;
    return true;
  }

  void add_element(CircuitElement element) {
    (seen_probe_ ? experiment_.circuit.post_probe
                 : experiment_.circuit.pre_probe)
        .push_back(std::move(element));
  }

  void handle_line(const std::vector<Token>& tokens) {
    if (tokens.empty()) return;
    const Token& head = tokens[0];
    const std::string_view d = head.text;
    if (d == "modes") {
      if (!arity(tokens, 2, "modes <N>")) return;
      if (!once(seen_modes_, head)) return;
      int n = 0;
      const char* first = tokens[1].text.data();
      const char* last = first + tokens[1].text.size();
      const auto [ptr, ec] = std::from_chars(first, last, n);
      if (ec != std::errc() || ptr != last || n < 1) {
        error(tokens[1].span, ParseErrorKind::kBadNumber,
              "mode count must be a positive integer");
        return;
      }
      n_modes_ = n;
      experiment_.circuit.n_modes = n;
    } else if (d == "input") {
      const char* usage =
          "input <mode> coherent <re> <im> | input <mode> single-photon";
      if (tokens.size() < 3) {
        arity(tokens, 3, usage);
        return;
      }
      if (!once(seen_input_, head)) return;
      if (tokens[2].text == "coherent") {
        if (!arity(tokens, 5, usage)) return;
        const auto mode = parse_index(tokens[1]);
        const auto re = parse_real(tokens[3].text, tokens[3].span);
        const auto im = parse_real(tokens[4].text, tokens[4].span);
        if (!mode || !re || !im) return;
        experiment_.circuit.input_mode = *mode;
        experiment_.input = input::Coherent{Complex(*re, *im)};
      } else if (tokens[2].text == "single-photon") {
        if (!arity(tokens, 3, usage)) return;
        const auto mode = parse_index(tokens[1]);
        if (!mode) return;
        experiment_.circuit.input_mode = *mode;
        experiment_.input = input::SinglePhoton{};
      } else {
        error(tokens[2].span, ParseErrorKind::kBadArity,
              std::string("usage: ") + usage);
      }
    } else if (d == "bs") {
      if (!arity(tokens, 5, "bs <a> <b> theta=<rad> phi=<rad>")) return;
      const auto a = parse_index(tokens[1]);
      const auto b = parse_index(tokens[2]);
      const auto theta = parse_keyed(tokens[3], "theta");
      const auto phi = parse_keyed(tokens[4], "phi");
      if (a && b && *a == *b) {
        error(tokens[2].span, ParseErrorKind::kIndexOutOfRange,
              "beam splitter modes must be distinct");
        return;
      }
      if (theta && !(*theta >= 0.0 && *theta <= std::numbers::pi / 2)) {
        SourceSpan span = tokens[3].span;
        span.column += 6;
        error(span, ParseErrorKind::kBadNumber, "theta must lie in [0, pi/2]");
        return;
      }
      if (a && b && theta && phi) add_element(BeamSplitter{*a, *b, *theta, *phi});
    } else if (d == "phase") {
      if (!arity(tokens, 3, "phase <mode> <rad>")) return;
      const auto mode = parse_index(tokens[1]);
      const auto phi = parse_real(tokens[2].text, tokens[2].span);
      if (mode && phi) add_element(PhaseShifter{*mode, *phi});
    } else if (d == "loss") {
      if (!arity(tokens, 3, "loss <mode> eta=<val>")) return;
      const auto mode = parse_index(tokens[1]);
      const auto eta = parse_keyed(tokens[2], "eta");
      if (eta && !(*eta >= 0.0 && *eta <= 1.0)) {
        SourceSpan span = tokens[2].span;
        span.column += 4;
        error(span, ParseErrorKind::kBadNumber, "eta must lie in [0, 1]");
        return;
      }
      if (mode && eta) add_element(Loss{*mode, *eta});
    } else if (d == "probe") {
      if (tokens.size() < 2) {
        error(head.span, ParseErrorKind::kBadArity,
              "usage: probe <mode> [<mode> ...]");
        return;
      }
      if (!once(seen_probe_, head)) return;
      std::vector<int> modes;
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        const auto mode = parse_index(tokens[i]);
        if (!mode) continue;
        if (std::find(modes.begin(), modes.end(), *mode) != modes.end()) {
          error(tokens[i].span, ParseErrorKind::kIndexOutOfRange,
                "probe mode listed twice");
          continue;
        }
        modes.push_back(*mode);
      }
      experiment_.circuit.probe_modes = std::move(modes);
    } else if (d == "detect") {
      if (!arity(tokens, 2, "detect <mode>")) return;
      if (!once(seen_detect_, head)) return;
      if (const auto mode = parse_index(tokens[1])) {
        experiment_.circuit.detect_mode = *mode;
      }
    } else {
      error(head.span, ParseErrorKind::kUnknownDirective,
            "unknown directive '" + std::string(d) + "'");
    }
  }

  void finish() {
    const std::pair<bool, const char*> required[] = {
        {seen_modes_, "modes"},
        {seen_input_, "input"},
        {seen_probe_, "probe"},
        {seen_detect_, "detect"}};
    for (const auto& [seen, name] : required) {
      if (!seen) {
        error({1, 1}, ParseErrorKind::kMissingDirective,
              std::string("missing '") + name + "' directive");
      }
    }
    if (n_modes_ > 0) {
      for (const auto& p : pending_) {
        if (p.value >= n_modes_) {
          error(p.span, ParseErrorKind::kIndexOutOfRange,
                "mode " + std::to_string(p.value) + " out of range for " +
                    std::to_string(n_modes_) + " modes");
        }
      }
    }
    std::stable_sort(errors_.begin(), errors_.end(),
                     [](const ParseError& a, const ParseError& b) {
                       return a.span.line != b.span.line
                                  ? a.span.line < b.span.line
                                  : a.span.column < b.span.column;
                     });
  }

  Experiment experiment_;
  std::vector<ParseError> errors_;
  std::vector<PendingIndex> pending_;
  int n_modes_ = 0;
  bool seen_modes_ = false;
  bool seen_input_ = false;
  bool seen_probe_ = false;
  bool seen_detect_ = false;
};

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_elements(std::string& out, const std::vector<CircuitElement>& elements) {
  for (const auto& element : elements) {
    if (const auto* bs = std::get_if<BeamSplitter>(&element)) {
      out += "bs " + std::to_string(bs->mode_a) + " " + std::to_string(bs->mode_b) +
             " theta=" + number(bs->theta) + " phi=" + number(bs->phi) + "\n";
    } else if (const auto* ps = std::get_if<PhaseShifter>(&element)) {
      out += "phase " + std::to_string(ps->mode) + " " + number(ps->phi) + "\n";
    } else {
      const auto& loss = std::get<Loss>(element);
      out += "loss " + std::to_string(loss.mode) + " eta=" + number(loss.eta) + "\n";
    }
  }
}

}  // namespace

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::kUnknownDirective: return "UnknownDirective";
    case ParseErrorKind::kBadArity: return "BadArity";
    case ParseErrorKind::kBadNumber: return "BadNumber";
    case ParseErrorKind::kIndexOutOfRange: return "IndexOutOfRange";
    case ParseErrorKind::kDuplicateDirective: return "DuplicateDirective";
    case ParseErrorKind::kMissingDirective: return "MissingDirective";
  }
  return "Unknown";
}

ParseResult parse(std::string_view text) { return Parser().run(text); }

std::string serialize(const Experiment& experiment) {
  const Circuit& c = experiment.circuit;
  std::string out = "modes " + std::to_string(c.n_modes) + "\n";
  out += "input " + std::to_string(c.input_mode);
  if (const auto* coherent = std::get_if<input::Coherent>(&experiment.input)) {
    out += " coherent " + number(coherent->alpha.real()) + " " +
           number(coherent->alpha.imag()) + "\n";
  } else {
    out += " single-photon\n";
  }
  write_elements(out, c.pre_probe);
  out += "probe";
  for (int mode : c.probe_modes) out += " " + std::to_string(mode);
  out += "\n";
  write_elements(out, c.post_probe);
  out += "detect " + std::to_string(c.detect_mode) + "\n";
  return out;
}

std::string digest(const Experiment& experiment) {
  const std::string text = serialize(experiment);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 0xF];
  }
  return hex;
}

}  // namespace wvlab
