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

#include "wvlab/pointer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <random>

#include "test_support.hpp"
#include "wvlab/error.hpp"

namespace wvlab {
namespace {

constexpr double kPi = std::numbers::pi;
const double kLn2 = std::log(2.0);

Circuit identity_circuit() {
  Circuit c;
  c.n_modes = 1;
  return c;
}

Circuit mach_zehnder(double phase) {
  Circuit c;
  c.n_modes = 2;
  c.pre_probe = {BeamSplitter{0, 1, kPi / 4, 0}};
  c.post_probe = {PhaseShifter{1, phase}, BeamSplitter{0, 1, kPi / 4, 0}};
  c.probe_modes = {0};
  c.detect_mode = 1;
  return c;
}

SectorAmplitudes single_level(int n) {
  SectorAmplitudes s;
  s.amplitudes.assign(std::size_t(n) + 1, 0.0);
  s.amplitudes[std::size_t(n)] = 1.0;
  s.gram = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  s.gram(n, n) = 1.0;
  return s;
}

double normal_cdf(double x, double mu, double sigma) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0)));
}

class ScopedThreads {
 public:
  explicit ScopedThreads(const char* n) {
    if (const char* old = std::getenv("WVLAB_THREADS")) old_ = old;
    setenv("WVLAB_THREADS", n, 1);
  }
  ~ScopedThreads() {
    if (old_.empty()) {
      unsetenv("WVLAB_THREADS");
    } else {
      setenv("WVLAB_THREADS", old_.c_str(), 1);
    }
  }

 private:
  std::string old_;
};

TEST(PointerConfig, Validation) {
  PointerConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_DOUBLE_EQ(cfg.sigma_p(), 0.5);
  EXPECT_DOUBLE_EQ(cfg.momentum_gain(), 0.5);
  EXPECT_TRUE(cfg.is_weak(4));
  EXPECT_FALSE(cfg.is_weak(5));
  cfg.g = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.g = 0.1;
  cfg.sigma_x = -1.0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(SectorAmplitudes, IdentitySinglePhoton) {
  const SectorAmplitudes s =
      sector_amplitudes(identity_circuit(), input::SinglePhoton{}, postselect::Fock{1});
  ASSERT_GE(s.levels(), 2);
  EXPECT_LT(std::abs(s.amplitudes[1] - 1.0), 1e-15);
  for (int n = 0; n < s.levels(); ++n) {
    if (n != 1) EXPECT_EQ(s.amplitudes[std::size_t(n)], Complex(0.0));
  }
}

TEST(SectorAmplitudes, VacuumInput) {
  std::mt19937_64 rng(5);
  const Circuit c = testing::random_circuit(rng);
  const SectorAmplitudes s = sector_amplitudes(c, input::Coherent{0.0}, postselect::None{});
  EXPECT_LT(std::abs(s.amplitudes[0] - 1.0), 1e-15);
  for (int n = 1; n < s.levels(); ++n) EXPECT_EQ(s.amplitudes[std::size_t(n)], Complex(0.0));
}

TEST(SectorAmplitudes, ReproduceWeakValueAndProbability) {
  std::mt19937_64 rng(7);
  int checked = 0;
  while (checked < 20) {
    testing::RandomCircuitOptions opts;
    opts.probe_count = 1 + checked % 2;
    const Circuit c = testing::random_circuit(rng, opts);
    if (transmittance(c) < 0.05) continue;
    const input::Coherent in{1.3 * testing::random_phase(rng)};
    for (const auto& ps : std::vector<PostSelection>{postselect::Click{},
                                                     postselect::NoClick{},
                                                     postselect::Fock{2}}) {
      const SectorAmplitudes s = sector_amplitudes(c, in, ps);
      EXPECT_LT(std::abs(s.weak_value() - oracle_weak_value(c, in, ps)), 1e-10);
      const auto e = to_operator(ps, c.detect_mode);
      const OracleRun run(c, prepare_input(c, in), observable::PhotonNumber{c.probe_modes});
      EXPECT_NEAR(s.probability(), run.probability(e), 1e-12);
      // Columns of the gram matrix sum to the amplitudes.
      for (int n = 0; n < s.levels(); ++n) {
        EXPECT_LT(std::abs(s.gram.col(n).sum() - s.amplitudes[std::size_t(n)]), 1e-12);
      }
    }
    ++checked;
  }
}

TEST(PointerPosterior, SingleLevelIsShiftedGaussian) {
  PointerConfig cfg;
  cfg.g = 0.3;
  const PointerPosterior x(single_level(3), cfg, PointerVariable::kPosition);
  EXPECT_NEAR(x.mass(), 1.0, 1e-15);
  EXPECT_NEAR(x.mean(), 0.9, 1e-14);
  for (double v : {-2.0, 0.0, 0.9, 2.5}) {
    const double expected = std::exp(-0.5 * (v - 0.9) * (v - 0.9)) / std::sqrt(2 * kPi);
    EXPECT_NEAR(x.density(v), expected, 1e-12);
    EXPECT_NEAR(x.cdf(v), normal_cdf(v, 0.9, 1.0), 1e-9);
  }
  const PointerPosterior p(single_level(3), cfg, PointerVariable::kMomentum);
  EXPECT_NEAR(p.mean(), 0.0, 1e-15);
  EXPECT_NEAR(p.cdf(0.2), normal_cdf(0.2, 0.0, 0.5), 1e-9);
}

TEST(PointerPosterior, InverseCdfIsAccurate) {
  const SectorAmplitudes s = sector_amplitudes(mach_zehnder(0.3), input::Coherent{1.5},
                                               postselect::Click{});
  PointerConfig cfg;
  cfg.g = 0.2;
  for (auto variable : {PointerVariable::kPosition, PointerVariable::kMomentum}) {
    const PointerPosterior post(s, cfg, variable);
    EXPECT_NEAR(post.cdf(post.lower()), 0.0, 1e-12);
    EXPECT_NEAR(post.cdf(post.upper()), 1.0, 1e-12);
    double previous = -std::numeric_limits<double>::infinity();
    for (int i = 1; i < 1000; ++i) {
      const double u = i / 1000.0;
      const double v = post.sample(u);
      EXPECT_NEAR(post.cdf(v), u, 1e-9);
      EXPECT_GE(v, previous);
      previous = v;
    }
  }
}

TEST(PointerPosterior, ExactMeanMatchesQuadrature) {
  const SectorAmplitudes s = sector_amplitudes(mach_zehnder(2.0), input::Coherent{1.2},
                                               postselect::NoClick{});
  PointerConfig cfg;
  cfg.g = 0.5;
  for (auto variable : {PointerVariable::kPosition, PointerVariable::kMomentum}) {
    const PointerPosterior post(s, cfg, variable);
    const int steps = 200000;
    const double h = (post.upper() - post.lower()) / steps;
    double mass = 0.0, first = 0.0;
    for (int i = 0; i <= steps; ++i) {
      const double v = post.lower() + h * i;
      const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
      mass += w * post.density(v) * h;
      first += w * v * post.density(v) * h;
    }
    EXPECT_NEAR(mass, 1.0, 1e-9);
    EXPECT_NEAR(first, post.mean(), 1e-9);
  }
}

TEST(PointerPosterior, WeakLimitIsSecondOrder) {
  std::mt19937_64 rng(13);
  int checked = 0;
  while (checked < 5) {
    const Circuit c = testing::random_circuit(rng);
    if (transmittance(c) < 0.1) continue;
    const input::Coherent in{1.0};
    const SectorAmplitudes s = sector_amplitudes(c, in, postselect::Click{});
    const WeakValue wv = oracle_weak_value(c, in, postselect::Click{});
    auto err = [&](double g) {
      PointerConfig cfg;
      cfg.g = g;
      return std::abs(PointerPosterior(s, cfg, PointerVariable::kPosition).mean() / g -
                      wv.real());
    };
    // Some circuits have no g^2 term at all; those say nothing about the order.
    if (err(0.1) < 1e-9) continue;
    const double ratio = err(0.1) / err(0.05);
    EXPECT_GT(ratio, 3.0);
    EXPECT_LT(ratio, 5.0);
    ++checked;
  }
}

TEST(PointerPosterior, MomentumCarriesImaginaryPart) {
  const Circuit c = mach_zehnder(1.0);
  const input::Coherent in{0.8};
  const SectorAmplitudes s = sector_amplitudes(c, in, postselect::Click{});
  const WeakValue wv = oracle_weak_value(c, in, postselect::Click{});
  ASSERT_GT(std::abs(wv.imag()), 0.1);
  PointerConfig cfg;
  cfg.g = 1e-3;
  const PointerPosterior p(s, cfg, PointerVariable::kMomentum);
  EXPECT_NEAR(p.mean() / (cfg.g * cfg.momentum_gain()), wv.imag(), 1e-4);
}

TEST(ShotStream, Deterministic) {
  ShotStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int i = 0; i < 10; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
  }
  ShotStream u(1, 0);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(RunShots, ReproducibleAcrossThreadCounts) {
  PointerConfig cfg;
  const Circuit c = mach_zehnder(0.4);
  std::vector<ShotRecord> one, many;
  {
    ScopedThreads threads("1");
    one = run_shots(c, input::Coherent{1.0}, cfg, 20000, 99, PointerVariable::kPosition);
  }
  {
    ScopedThreads threads("3");
    many = run_shots(c, input::Coherent{1.0}, cfg, 20000, 99, PointerVariable::kPosition);
  }
  ASSERT_EQ(one.size(), many.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].outcome, many[i].outcome);
    EXPECT_EQ(one[i].x_sample, many[i].x_sample);
    EXPECT_FALSE(one[i].p_sample.has_value());
    EXPECT_EQ(one[i].stream, i);
  }
  const auto single = run_shots(c, input::Coherent{1.0}, cfg, 1, 99, PointerVariable::kPosition);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].x_sample, one[0].x_sample);
}

TEST(RunShots, ClickFractionMatchesProbability) {
  PointerConfig cfg;
  const Circuit c = mach_zehnder(0.4);
  const input::Coherent in{1.0};
  const std::size_t n = 1000000;
  const auto shots = run_shots(c, in, cfg, n, 5, PointerVariable::kPosition);
  std::size_t clicks = 0;
  for (const auto& s : shots) clicks += s.outcome == Outcome::kClick;
  const double p = click_probability(c, in.alpha);
  const double sigma = std::sqrt(p * (1 - p) / double(n));
  EXPECT_LT(std::abs(double(clicks) / double(n) - p), 4 * sigma);
}

TEST(RunShots, ConditionalMeansSeparateByWeakValueDifference) {
  PointerConfig cfg;
  cfg.g = 0.01;
  const Circuit c = identity_circuit();
  const input::Coherent in{std::sqrt(kLn2)};
  const auto shots = run_shots(c, in, cfg, 400000, 17, PointerVariable::kPosition);
  double sum[2] = {0, 0}, sq[2] = {0, 0};
  double count[2] = {0, 0};
  for (const auto& s : shots) {
    const int k = s.outcome == Outcome::kClick;
    sum[k] += *s.x_sample;
    sq[k] += *s.x_sample * *s.x_sample;
    count[k] += 1;
  }
  const double diff = sum[1] / count[1] - sum[0] / count[0];
  double var = 0;
  for (int k = 0; k < 2; ++k) {
    const double mean = sum[k] / count[k];
    var += (sq[k] / count[k] - mean * mean) / count[k];
  }
  const WeakValue click = wv_coherent(c, in.alpha, postselect::Click{});
  const WeakValue no_click = wv_coherent(c, in.alpha, postselect::NoClick{});
  EXPECT_LT(std::abs(diff - cfg.g * (click - no_click).real()), 4 * std::sqrt(var));
}

TEST(EstimateProtocol, EmptyPopulation) {
  PointerConfig cfg;
  std::vector<ShotRecord> records(3);
  for (auto& r : records) {
    r.outcome = Outcome::kClick;
    r.x_sample = 0.1;
  }
  try {
    estimate_protocol(records, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyPopulation);
  }
  EXPECT_NO_THROW(estimate_protocol(records, cfg, Protocol::kClickOnly));
  records.clear();
  EXPECT_THROW(estimate_protocol(records, cfg, Protocol::kClickOnly), Error);
}

TEST(EstimateProtocol, StandardErrorIsSampleSpreadOverRootN) {
  PointerConfig cfg;
  std::vector<ShotRecord> records;
  const double xs[] = {0.1, -0.3, 0.7, 0.2};
  for (double x : xs) {
    ShotRecord r;
    r.outcome = Outcome::kClick;
    r.x_sample = x;
    records.push_back(r);
  }
  const ProtocolEstimate est = estimate_protocol(records, cfg, Protocol::kClickOnly);
  ASSERT_TRUE(est.real_part.has_value());
  EXPECT_FALSE(est.imag_part.has_value());
  double mean = 0.0;
  for (double x : xs) mean += x / 4;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean) / 3;
  EXPECT_NEAR(est.real_part->mean, mean / cfg.g, 1e-12);
  EXPECT_NEAR(est.real_part->std_error, std::sqrt(var / 4) / cfg.g, 1e-12);
  EXPECT_EQ(est.real_part->n_samples, 4u);
}

TEST(EstimateProtocol, SinglePhotonClickOnly) {
  PointerConfig cfg;
  const Circuit c = mach_zehnder(0.3);
  const auto shots = run_shots(c, input::SinglePhoton{}, cfg, 400000, 23,
                               PointerVariable::kPosition);
  const ProtocolEstimate est = estimate_protocol(shots, cfg, Protocol::kClickOnly);
  const double target = wv_single_photon(c, postselect::Fock{1}).real();
  EXPECT_LT(std::abs(est.real_part->mean - target), 4 * est.real_part->std_error);
}

TEST(EstimateProtocol, CoherentMomentumRun) {
  PointerConfig cfg;
  const Circuit c = mach_zehnder(1.0);
  const input::Coherent in{0.8};
  const auto shots = run_shots(c, in, cfg, 1000000, 29, PointerVariable::kMomentum);
  const ProtocolEstimate est = estimate_protocol(shots, cfg);
  ASSERT_TRUE(est.imag_part.has_value());
  EXPECT_FALSE(est.real_part.has_value());
  const double target = wv_single_photon(c, postselect::Fock{1}).imag();
  EXPECT_LT(std::abs(est.imag_part->mean - target), 4 * est.imag_part->std_error);
}

TEST(RunShots, BrightInputRaisesClickRate) {
  // Clicks per shot at |alpha|^2 = 9 versus a single photon: ratio p_click / T.
  Circuit c;
  c.n_modes = 2;
  c.pre_probe = {BeamSplitter{0, 1, 0.3, 0.0}};
  c.post_probe = {BeamSplitter{0, 1, 0.9, 1.0}};
  c.detect_mode = 1;
  const double t = transmittance(c);
  PointerConfig cfg;
  cfg.g = 1e-3;
  const std::size_t n = 200000;
  auto rate = [&](const InputState& in) {
    const auto shots = run_shots(c, in, cfg, n, 31, PointerVariable::kPosition);
    double clicks = 0;
    for (const auto& s : shots) clicks += s.outcome == Outcome::kClick;
    return clicks / double(n);
  };
  const double bright = rate(input::Coherent{3.0});
  const double single = rate(input::SinglePhoton{});
  const double p_star = click_probability(c, 3.0);
  const double sd_bright = std::sqrt(p_star * (1 - p_star) / double(n));
  const double sd_single = std::sqrt(t * (1 - t) / double(n));
  const double ratio = bright / single;
  const double sd_ratio = ratio * std::hypot(sd_bright / bright, sd_single / single);
  EXPECT_GT(ratio, 1.0);
  EXPECT_LT(std::abs(ratio - p_star / t), 4 * sd_ratio + 1e-3);
}

TEST(Histogram, CountsEveryShotInRange) {
  PointerConfig cfg;
  const auto shots = run_shots(identity_circuit(), input::Coherent{1.0}, cfg, 5000, 3,
                               PointerVariable::kPosition);
  const Histogram h = pointer_histogram(shots, PointerVariable::kPosition, 50, -10, 10);
  std::size_t total = 0;
  for (std::size_t i = 0; i < 50; ++i) total += h.click[i] + h.no_click[i];
  EXPECT_EQ(total, 5000u);
  EXPECT_EQ(h.lower, -10.0);
  EXPECT_EQ(h.upper, 10.0);
}

}  // namespace
}  // namespace wvlab
