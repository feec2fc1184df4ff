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

#include <gtest/gtest.h>

#include <cstring>
#include <numbers>
#include <random>

#include "test_support.hpp"

namespace wvlab {
namespace {

const char* const kIdentity = "modes 1\ninput 0 coherent 1 0\nprobe 0\ndetect 0";
const char* const kMachZehnder =
    "modes 2\ninput 0 single-photon\nbs 0 1 theta=0.7853981634 phi=0\nprobe 0\n"
    "bs 0 1 theta=0.7853981634 phi=0\ndetect 1";

Experiment parse_ok(std::string_view text) {
  ParseResult r = parse(text);
  EXPECT_TRUE(r.ok());
  for (const auto& e : r.errors) {
    ADD_FAILURE() << e.span.line << ":" << e.span.column << " " << to_string(e.kind)
                  << " " << e.message;
  }
  return r.experiment.value_or(Experiment{});
}

std::vector<ParseError> parse_errors(std::string_view text) {
  ParseResult r = parse(text);
  EXPECT_FALSE(r.ok());
  EXPECT_FALSE(r.experiment.has_value());
  return r.errors;
}

TEST(Parse, IdentityCircuit) {
  const Experiment e = parse_ok(kIdentity);
  EXPECT_EQ(e.circuit.n_modes, 1);
  EXPECT_TRUE(e.circuit.pre_probe.empty());
  EXPECT_TRUE(e.circuit.post_probe.empty());
  EXPECT_EQ(e.circuit.probe_modes, std::vector<int>{0});
  EXPECT_EQ(e.circuit.detect_mode, 0);
  EXPECT_EQ(std::get<input::Coherent>(e.input).alpha, Complex(1.0, 0.0));
}

TEST(Parse, MachZehnderArm) {
  const Experiment e = parse_ok(kMachZehnder);
  EXPECT_EQ(e.circuit.n_modes, 2);
  ASSERT_EQ(e.circuit.pre_probe.size(), 1u);
  ASSERT_EQ(e.circuit.post_probe.size(), 1u);
  EXPECT_EQ(std::get<BeamSplitter>(e.circuit.pre_probe[0]),
            (BeamSplitter{0, 1, 0.7853981634, 0.0}));
  EXPECT_EQ(e.circuit.detect_mode, 1);
  EXPECT_TRUE(std::holds_alternative<input::SinglePhoton>(e.input));
  EXPECT_EQ(parse_ok(serialize(e)), e);
}

TEST(Parse, CommentsBlankLinesAndWhitespace) {
  const Experiment e = parse_ok(
      "# header\n\n  modes   3   # three\n\tinput 2 coherent -0.5 1e-3\n"
      "phase 1 -3.25\nloss 2 eta=0.5\nprobe 0 2\nbs 1 0 theta=1.5 phi=-2\ndetect 1\n");
  EXPECT_EQ(e.circuit.n_modes, 3);
  EXPECT_EQ(e.circuit.input_mode, 2);
  EXPECT_EQ(std::get<input::Coherent>(e.input).alpha, Complex(-0.5, 1e-3));
  EXPECT_EQ(std::get<PhaseShifter>(e.circuit.pre_probe[0]), (PhaseShifter{1, -3.25}));
  EXPECT_EQ(std::get<Loss>(e.circuit.pre_probe[1]), (Loss{2, 0.5}));
  EXPECT_EQ((e.circuit.probe_modes), (std::vector<int>{0, 2}));
  EXPECT_EQ(std::get<BeamSplitter>(e.circuit.post_probe[0]), (BeamSplitter{1, 0, 1.5, -2}));
}

TEST(Parse, IndexOutOfRangeReportsSpan) {
  const auto errors = parse_errors(
      "modes 2\nbs 0 5 theta=1 phi=0\ninput 0 single-photon\nprobe 0\ndetect 1\n");
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0].kind, ParseErrorKind::kIndexOutOfRange);
  EXPECT_EQ(errors[0].span, (SourceSpan{2, 6}));
}

TEST(Parse, IndicesCheckedEvenWhenModesComesLater) {
  const auto errors =
      parse_errors("detect 4\ninput 0 single-photon\nprobe 0\nmodes 2\n");
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0].kind, ParseErrorKind::kIndexOutOfRange);
  EXPECT_EQ(errors[0].span, (SourceSpan{1, 8}));
}

TEST(Parse, CollectsEveryError) {
  const auto errors = parse_errors(
      "modes 2\n"
      "input 0 coherent x 0\n"
      "frobnicate 1\n"
      "bs 0 1 theta=2 phi=0\n"
      "phase 0\n"
      "loss 1 eta=1.5\n"
      "modes 3\n"
      "bs 1 1 theta=0.1 phi=0\n"
      "bs 0 1 angle=0.1 phi=0\n");
  std::vector<std::pair<ParseErrorKind, SourceSpan>> got;
  for (const auto& e : errors) got.emplace_back(e.kind, e.span);
  const std::vector<std::pair<ParseErrorKind, SourceSpan>> expected{
      {ParseErrorKind::kMissingDirective, {1, 1}},
      {ParseErrorKind::kMissingDirective, {1, 1}},
      {ParseErrorKind::kBadNumber, {2, 18}},
      {ParseErrorKind::kUnknownDirective, {3, 1}},
      {ParseErrorKind::kBadNumber, {4, 14}},
      {ParseErrorKind::kBadArity, {5, 1}},
      {ParseErrorKind::kBadNumber, {6, 12}},
      {ParseErrorKind::kDuplicateDirective, {7, 1}},
      {ParseErrorKind::kIndexOutOfRange, {8, 6}},
      {ParseErrorKind::kBadArity, {9, 8}},
  };
  EXPECT_EQ(got, expected);
  for (const auto& e : errors) EXPECT_FALSE(e.message.empty());
}

TEST(Parse, EmptyKeyedValuePointsAtKey) {
  const auto errors = parse_errors(
      "modes 2\ninput 0 single-photon\nbs 0 1 theta=0.1 phi=\nloss 1 eta=# gone\n"
      "probe 0\ndetect 1\n");
  ASSERT_EQ(errors.size(), 2u);
  EXPECT_EQ(errors[0].kind, ParseErrorKind::kBadNumber);
  EXPECT_EQ(errors[0].span, (SourceSpan{3, 18}));
  EXPECT_EQ(errors[1].span, (SourceSpan{4, 8}));
}

TEST(Parse, MissingDirectives) {
  const auto errors = parse_errors("");
  ASSERT_EQ(errors.size(), 4u);
  for (const auto& e : errors) {
    EXPECT_EQ(e.kind, ParseErrorKind::kMissingDirective);
    EXPECT_EQ(e.span, (SourceSpan{1, 1}));
  }
}

TEST(Parse, CaseSensitive) {
  const auto errors = parse_errors("Modes 1\ninput 0 single-photon\nprobe 0\ndetect 0\n");
  ASSERT_EQ(errors.size(), 2u);
  EXPECT_EQ(errors[0].kind, ParseErrorKind::kUnknownDirective);
  EXPECT_EQ(errors[1].kind, ParseErrorKind::kMissingDirective);
}

TEST(Parse, RepeatedProbeMode) {
  const auto errors =
      parse_errors("modes 2\ninput 0 single-photon\nprobe 1 1\ndetect 0\n");
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0].span, (SourceSpan{3, 9}));
}

TEST(Parse, RejectsNonFiniteNumbers) {
  for (const char* bad : {"nan", "inf", "-inf", "1e999", "0x10", "1.0.0", ""}) {
    const std::string text = std::string("modes 1\ninput 0 coherent 1 0\nphase 0 ") + bad +
                             "\nprobe 0\ndetect 0\n";
    const ParseResult r = parse(text);
    EXPECT_FALSE(r.ok()) << bad;
  }
}

TEST(Serialize, RoundTripsExamples) {
  for (const char* text : {kIdentity, kMachZehnder}) {
    const Experiment e = parse_ok(text);
    EXPECT_EQ(parse_ok(serialize(e)), e);
  }
}

TEST(Serialize, CanonicalForm) {
  const Experiment e = parse_ok(
      "detect 0\nprobe 0\nmodes 2 # late\ninput 1 coherent 0.1 -0.2\nloss 1 eta=0.25\n");
  EXPECT_EQ(serialize(e),
            "modes 2\n"
            "input 1 coherent 0.10000000000000001 -0.20000000000000001\n"
            "probe 0\n"
            "loss 1 eta=0.25\n"
            "detect 0\n");
  EXPECT_EQ(serialize(parse_ok(serialize(e))), serialize(e));
}

TEST(Serialize, NumbersSurviveBitForBit) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> phase(-10.0, 10.0);
  for (int i = 0; i < 500; ++i) {
    const double phi = phase(rng) * std::pow(10.0, double(i % 30) - 15);
    Experiment e;
    e.circuit.n_modes = 1;
    e.circuit.pre_probe = {PhaseShifter{0, phi}};
    const Experiment back = parse_ok(serialize(e));
    const double got = std::get<PhaseShifter>(back.circuit.pre_probe[0]).phi;
    EXPECT_EQ(std::memcmp(&got, &phi, sizeof phi), 0);
  }
}

TEST(Serialize, KeepsLossUnexpanded) {
  const Experiment e =
      parse_ok("modes 1\ninput 0 coherent 1 0\nprobe 0\nloss 0 eta=0.3\ndetect 0\n");
  const Experiment back = parse_ok(serialize(e));
  EXPECT_EQ(back.circuit.n_modes, 1);
  EXPECT_EQ(std::get<Loss>(back.circuit.post_probe[0]), (Loss{0, 0.3}));
}

TEST(Serialize, RandomCircuitsRoundTrip) {
  std::mt19937_64 rng(7);
  testing::RandomCircuitOptions opts;
  opts.allow_loss = true;
  opts.max_modes = 6;
  opts.min_elements = 0;
  opts.max_elements = 12;
  for (int i = 0; i < 200; ++i) {
    opts.probe_count = 1 + i % 3;
    Experiment e;
    e.circuit = testing::random_circuit(rng, opts);
    if (i % 2) e.input = input::Coherent{2.0 * testing::random_phase(rng)};
    EXPECT_EQ(parse_ok(serialize(e)), e);
  }
}

TEST(Parse, RandomBytesNeverCrash) {
  std::mt19937_64 rng(11);
  const std::string alphabet = "modesinputcoherentsingle-photonbsthetaphiphaselossetaprobedetect"
                               "0123456789.-+e= \t\n#\r";
  std::uniform_int_distribution<int> len(0, 120);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int i = 0; i < 10000; ++i) {
    std::string text(std::size_t(len(rng)), '\0');
    for (auto& ch : text) ch = (i % 2) ? char(byte(rng)) : alphabet[pick(rng)];
    const ParseResult r = parse(text);
    EXPECT_TRUE(r.ok() || !r.errors.empty());
    for (const auto& e : r.errors) {
      EXPECT_GE(e.span.line, 1);
      EXPECT_GE(e.span.column, 1);
    }
  }
}

TEST(Digest, StableAndSensitive) {
  const Experiment a = parse_ok(kMachZehnder);
  const Experiment b = parse_ok(std::string(kMachZehnder) + "\n# trailing comment\n");
  EXPECT_EQ(digest(a), digest(b));
  EXPECT_EQ(digest(a).size(), 64u);
  Experiment c = a;
  c.circuit.detect_mode = 0;
  EXPECT_NE(digest(a), digest(c));
  EXPECT_EQ(digest(parse_ok(kIdentity)).find_first_not_of("0123456789abcdef"),
            std::string::npos);
}

}  // namespace
}  // namespace wvlab
