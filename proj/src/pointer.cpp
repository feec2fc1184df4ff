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

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "wvlab/error.hpp"
#include "wvlab/parallel.hpp"

namespace wvlab {
namespace {

constexpr int kCellsPerSpread = 128;
constexpr std::size_t kMaxCells = std::size_t{1} << 20;
constexpr double kRangeSpreads = 8.0;
constexpr std::size_t kShotChunk = 4096;

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kGaussNodes = {
    -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
    0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights = {
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
    0.4786286704993665, 0.2369268850561891};

double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

// Probe-photon-number sectors evolved to the final time.
struct EvolvedSectors {
  std::vector<FockState> states;  // psi_n, n = 0..levels-1
};

EvolvedSectors evolve_sectors(const Circuit& circuit, const InputState& input,
                              const OracleOptions& opts) {
  circuit.validate();
  if (circuit.has_loss()) {
    throw Error(ErrorKind::kLossNotExpanded,
                "loss element present; expand losses first");
  }
  const FockState initial = prepare_input(circuit, input, opts);
  const FockState at_probe = lift_and_apply(circuit.pre_probe, initial);
  const FockBasis& basis = *at_probe.basis;

  std::vector<int> counts(basis.size());
  int top = 0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    int count = 0;
    for (int mode : circuit.probe_modes) count += basis.occupation(i, mode);
    counts[i] = count;
    if (at_probe.amplitudes[i] != Complex(0.0)) top = std::max(top, count);
  }

  EvolvedSectors out;
  for (int n = 0; n <= top; ++n) {
    FockState projected{at_probe.basis,
                        std::vector<Complex>(basis.size(), Complex(0.0)),
                        at_probe.truncation_tail};
    bool any = false;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if (counts[i] == n && at_probe.amplitudes[i] != Complex(0.0)) {
        projected.amplitudes[i] = at_probe.amplitudes[i];
        any = true;
      }
    }
    out.states.push_back(any ? lift_and_apply(circuit.post_probe,
                                              std::move(projected))
                             : std::move(projected));
  }
  return out;
}

SectorAmplitudes contract_sectors(const EvolvedSectors& sectors,
                                  const PostSelectionOperator& e) {
  const auto k = static_cast<Eigen::Index>(sectors.states.size());
  SectorAmplitudes out;
  out.gram = Eigen::MatrixXcd::Zero(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a; b < k; ++b) {
      const Complex v = OracleRun::contract(
          sectors.states[static_cast<std::size_t>(a)], e,
          sectors.states[static_cast<std::size_t>(b)]);
      out.gram(a, b) = v;
      out.gram(b, a) = std::conj(v);
    }
    out.gram(a, a) = out.gram(a, a).real();
  }
  out.amplitudes.resize(static_cast<std::size_t>(k));
  for (Eigen::Index n = 0; n < k; ++n) {
    out.amplitudes[static_cast<std::size_t>(n)] = out.gram.col(n).sum();
  }
  return out;
}

}  // namespace

void PointerConfig::validate() const {
  if (!(sigma_x > 0.0) || !std::isfinite(sigma_x) || !(g > 0.0) ||
      !std::isfinite(g)) {
    throw Error(ErrorKind::kDomainError,
                "pointer needs finite sigma_x > 0 and g > 0");
  }
}

double SectorAmplitudes::probability() const {
  Complex total = 0.0;
  for (const auto& a : amplitudes) total += a;
  return total.real();
}

WeakValue SectorAmplitudes::weak_value() const {
  Complex num = 0.0;
  Complex den = 0.0;
  for (std::size_t n = 0; n < amplitudes.size(); ++n) {
    num += static_cast<double>(n) * amplitudes[n];
    den += amplitudes[n];
  }
  return num / den;
}

int SectorAmplitudes::max_relevant_n(double threshold) const {
  const double total = gram.diagonal().real().sum();
  int top = 0;
  for (Eigen::Index n = 0; n < gram.rows(); ++n) {
    if (gram(n, n).real() > threshold * total) top = static_cast<int>(n);
  }
  return top;
}

SectorAmplitudes sector_amplitudes(const Circuit& circuit,
                                   const InputState& input,
                                   const PostSelection& ps,
                                   const OracleOptions& opts) {
  const EvolvedSectors sectors = evolve_sectors(circuit, input, opts);
  SectorAmplitudes out =
      contract_sectors(sectors, to_operator(ps, circuit.detect_mode));
  const double p = out.probability();
  if (!(p > opts.p_min)) {
    throw Error(ErrorKind::kPostSelectionTooRare,
                "post-selection probability " + std::to_string(p) +
                    " is below p_min (dark-port condition)");
  }
  return out;
}

PointerPosterior::PointerPosterior(const SectorAmplitudes& sectors,
                                   const PointerConfig& cfg,
                                   PointerVariable variable)
    : variable_(variable), g_(cfg.g) {
  cfg.validate();
  const int k = sectors.levels();
  if (k == 0) {
    throw Error(ErrorKind::kInvalidArgument, "no sector amplitudes");
  }
  max_level_ = k - 1;
  const double sigma_x = cfg.sigma_x;
  const double sigma_p = cfg.sigma_p();
  auto overlap = [&](int d) {
    return std::exp(-g_ * g_ * d * d / (8.0 * sigma_x * sigma_x));
  };

  if (variable == PointerVariable::kPosition) {
    spread_ = sigma_x;
    position_weights_.assign(static_cast<std::size_t>(2 * k - 1), 0.0);
    for (int n = 0; n < k; ++n) {
      for (int m = 0; m < k; ++m) {
        position_weights_[static_cast<std::size_t>(n + m)] +=
            sectors.gram(n, m).real() * overlap(n - m);
      }
    }
    double moment = 0.0;
    for (std::size_t s = 0; s < position_weights_.size(); ++s) {
      mass_ += position_weights_[s];
      moment += position_weights_[s] * g_ * static_cast<double>(s) / 2.0;
    }
    mean_ = moment / mass_;
  } else {
    spread_ = sigma_p;
    coherences_.assign(static_cast<std::size_t>(2 * k - 1), Complex(0.0));
    for (int n = 0; n < k; ++n) {
      for (int m = 0; m < k; ++m) {
        coherences_[static_cast<std::size_t>(n - m + max_level_)] +=
            sectors.gram(n, m);
      }
    }
    double moment = 0.0;
    for (int d = -max_level_; d <= max_level_; ++d) {
      const Complex h = coherences_[static_cast<std::size_t>(d + max_level_)];
      mass_ += h.real() * overlap(d);
      // E[p e^{i p g d}] = i sigma_p^2 g d e^{-sigma_p^2 g^2 d^2 / 2}
      moment += -h.imag() * sigma_p * sigma_p * g_ * d * overlap(d);
    }
    mean_ = moment / mass_;
  }
  if (!(mass_ > 0.0)) {
    throw Error(ErrorKind::kPostSelectionTooRare,
                "pointer posterior has no probability mass");
  }

  double lo = -kRangeSpreads * spread_;
  double hi = kRangeSpreads * spread_;
  if (variable == PointerVariable::kPosition) {
    lo -= g_ * max_level_;
    hi += g_ * max_level_;
  }
  const double step = spread_ / kCellsPerSpread;
  const auto cells = std::min(
      kMaxCells, static_cast<std::size_t>(std::ceil((hi - lo) / step)));
  nodes_.resize(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) {
    nodes_[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cells);
  }
  cdf_.assign(cells + 1, 0.0);
  node_density_.resize(cells + 1);
  for (std::size_t i = 0; i < cells; ++i) {
    cdf_[i + 1] = cdf_[i] + integrate(nodes_[i], nodes_[i + 1]);
  }
  grid_total_ = cdf_.back();
  for (std::size_t i = 0; i <= cells; ++i) {
    cdf_[i] /= grid_total_;
    node_density_[i] = raw_density(nodes_[i]) / grid_total_;
  }
}

double PointerPosterior::raw_density(double v) const {
  double total = 0.0;
  if (variable_ == PointerVariable::kPosition) {
    for (std::size_t s = 0; s < position_weights_.size(); ++s) {
      if (position_weights_[s] == 0.0) continue;
      total += position_weights_[s] *
               normal_pdf(v, g_ * static_cast<double>(s) / 2.0, spread_);
    }
  } else {
    for (int d = -max_level_; d <= max_level_; ++d) {
      const Complex h = coherences_[static_cast<std::size_t>(d + max_level_)];
      total += (h * std::polar(1.0, v * g_ * d)).real();
    }
    total *= normal_pdf(v, 0.0, spread_);
  }
  return std::max(0.0, total);
}

double PointerPosterior::integrate(double a, double b) const {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double total = 0.0;
  for (std::size_t i = 0; i < kGaussNodes.size(); ++i) {
    total += kGaussWeights[i] * raw_density(mid + half * kGaussNodes[i]);
  }
  return total * half;
}

double PointerPosterior::density(double v) const { return raw_density(v) / mass_; }

double PointerPosterior::cdf(double v) const {
  if (v <= nodes_.front()) return 0.0;
  if (v >= nodes_.back()) return 1.0;
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), v);
  const auto i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  return std::min(1.0, cdf_[i] + integrate(nodes_[i], v) / grid_total_);
}

double PointerPosterior::mean() const { return mean_; }

double PointerPosterior::sample(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t i = it == cdf_.begin() ? 0 : static_cast<std::size_t>(it - cdf_.begin()) - 1;
  i = std::min(i, nodes_.size() - 2);
  const double x0 = nodes_[i];
  const double h = nodes_[i + 1] - x0;
  const double f0 = cdf_[i];
  const double f1 = cdf_[i + 1];
  if (!(f1 > f0)) return x0;
  const double d0 = node_density_[i] * h;
  const double d1 = node_density_[i + 1] * h;
  // Cubic Hermite model of the CDF on the cell, solved by safeguarded Newton.
  auto model = [&](double t) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * d0 +
           (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * d1;
  };
  auto slope = [&](double t) {
    const double t2 = t * t;
    return (6 * t2 - 6 * t) * f0 + (3 * t2 - 4 * t + 1) * d0 +
           (-6 * t2 + 6 * t) * f1 + (3 * t2 - 2 * t) * d1;
  };
  double a = 0.0;
  double b = 1.0;
  double t = std::clamp((u - f0) / (f1 - f0), 0.0, 1.0);
  for (int iter = 0; iter < 50; ++iter) {
    const double r = model(t) - u;
    if (r > 0.0) {
      b = t;
    } else {
      a = t;
    }
    const double s = slope(t);
    double next = s > 0.0 ? t - r / s : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - t) < 1e-15) {
      t = next;
      break;
    }
    t = next;
  }
  return x0 + t * h;
}

PointerPosterior pointer_posterior(const SectorAmplitudes& sectors,
                                   const PointerConfig& cfg,
                                   PointerVariable variable) {
  return PointerPosterior(sectors, cfg, variable);
}

ShotStream::ShotStream(std::uint64_t seed, std::uint64_t stream) : state_(seed) {
  state_ ^= 0x6A09E667F3BCC909ULL;
  (*this)();
  state_ ^= stream * 0xD1B54A32D192ED03ULL + 0x9E3779B97F4A7C15ULL;
  (*this)();
}

ShotStream::result_type ShotStream::operator()() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double ShotStream::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

ShotModel build_shot_model(const Circuit& circuit, const InputState& input,
                           const PointerConfig& cfg, PointerVariable variable,
                           const OracleOptions& opts) {
  cfg.validate();
  const EvolvedSectors sectors = evolve_sectors(circuit, input, opts);
  const SectorAmplitudes click =
      contract_sectors(sectors, effect::ClickOperator{circuit.detect_mode});
  const SectorAmplitudes no_click =
      contract_sectors(sectors, effect::FockProjector{circuit.detect_mode, 0});
  ShotModel model;
  model.max_relevant_n = std::max(click.max_relevant_n(), no_click.max_relevant_n());
  if (click.probability() > opts.p_min) model.click.emplace(click, cfg, variable);
  if (no_click.probability() > opts.p_min) {
    model.no_click.emplace(no_click, cfg, variable);
  }
  const double click_mass = model.click ? model.click->mass() : 0.0;
  const double no_click_mass = model.no_click ? model.no_click->mass() : 0.0;
  if (!(click_mass + no_click_mass > 0.0)) {
    throw Error(ErrorKind::kPostSelectionTooRare, "both outcomes have zero weight");
  }
  model.click_probability = click_mass / (click_mass + no_click_mass);
  return model;
}

std::vector<ShotRecord> run_shots(const ShotModel& model, std::size_t n_shots,
                                  std::uint64_t seed,
                                  PointerVariable variable) {
  if (n_shots == 0) {
    throw Error(ErrorKind::kInvalidArgument, "need at least one shot");
  }
  std::vector<ShotRecord> records(n_shots);
  const std::size_t chunks = (n_shots + kShotChunk - 1) / kShotChunk;
  parallel_for(chunks, [&](std::size_t chunk) {
    const std::size_t begin = chunk * kShotChunk;
    const std::size_t end = std::min(n_shots, begin + kShotChunk);
    for (std::size_t i = begin; i < end; ++i) {
      ShotStream stream(seed, i);
      ShotRecord& r = records[i];
      r.stream = i;
      r.outcome = stream.uniform() < model.click_probability ? Outcome::kClick
                                                            : Outcome::kNoClick;
      const auto& posterior =
          r.outcome == Outcome::kClick ? model.click : model.no_click;
      const double value = posterior->sample(stream.uniform());
      if (variable == PointerVariable::kPosition) {
        r.x_sample = value;
      } else {
        r.p_sample = value;
      }
    }
  });
  return records;
}

std::vector<ShotRecord> run_shots(const Circuit& circuit,
                                  const InputState& input,
                                  const PointerConfig& cfg,
                                  std::size_t n_shots, std::uint64_t seed,
                                  PointerVariable variable,
                                  const OracleOptions& opts) {
  return run_shots(build_shot_model(circuit, input, cfg, variable, opts),
                   n_shots, seed, variable);
}

namespace {

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  double std_error() const {
    if (n < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  }
};

}  // namespace

ProtocolEstimate estimate_protocol(std::span<const ShotRecord> records,
                                   const PointerConfig& cfg,
                                   Protocol protocol) {
  cfg.validate();
  // [outcome][variable]
  Moments moments[2][2];
  std::size_t clicks = 0;
  for (const auto& r : records) {
    const int o = r.outcome == Outcome::kClick ? 1 : 0;
    clicks += static_cast<std::size_t>(o);
    if (r.x_sample) moments[o][0].add(*r.x_sample);
    if (r.p_sample) moments[o][1].add(*r.p_sample);
  }
  if (records.empty()) {
    throw Error(ErrorKind::kEmptyPopulation, "no shot records");
  }

  ProtocolEstimate out;
  out.n_click = clicks;
  out.n_no_click = records.size() - clicks;
  const double n_total = static_cast<double>(records.size());
  const double p_hat = static_cast<double>(clicks) / n_total;
  out.click_fraction = p_hat;

  const double gains[2] = {cfg.g, cfg.g * cfg.momentum_gain()};
  bool any = false;
  for (int v = 0; v < 2; ++v) {
    const Moments& c = moments[1][v];
    const Moments& nc = moments[0][v];
    if (c.n + nc.n == 0) continue;
    any = true;
    if (c.n == 0 || (protocol == Protocol::kSubtractAndScale && nc.n == 0)) {
      throw Error(ErrorKind::kEmptyPopulation,
                  c.n == 0 ? "no click shots recorded"
                           : "no no-click shots recorded");
    }
    const double wc = c.mean / gains[v];
    const double se_c = c.std_error() / gains[v];
    Estimate e;
    e.n_samples = c.n + nc.n;
    double wn = 0.0;
    if (protocol == Protocol::kClickOnly) {
      e.mean = wc;
      e.std_error = se_c;
    } else {
      wn = nc.mean / gains[v];
      const double se_n = nc.std_error() / gains[v];
      if (!(p_hat < 1.0)) {
        throw Error(ErrorKind::kEmptyPopulation, "no no-click shots recorded");
      }
      const double f = scaling_function(-p_hat);
      const double df = scaling_function_derivative(-p_hat);
      const double diff = wc - wn;
      const double var_p = p_hat * (1.0 - p_hat) / n_total;
      e.mean = diff * f;
      e.std_error = std::sqrt(f * f * (se_c * se_c + se_n * se_n) +
                              diff * diff * df * df * var_p);
    }
    if (v == 0) {
      out.real_part = e;
      out.click_wv.real(wc);
      out.no_click_wv.real(wn);
    } else {
      out.imag_part = e;
      out.click_wv.imag(wc);
      out.no_click_wv.imag(wn);
    }
  }
  if (!any) {
    throw Error(ErrorKind::kEmptyPopulation, "no pointer samples recorded");
  }
  out.value = WeakValue(out.real_part ? out.real_part->mean : 0.0,
                        out.imag_part ? out.imag_part->mean : 0.0);
  return out;
}

Histogram pointer_histogram(std::span<const ShotRecord> records,
                            PointerVariable variable, std::size_t bins,
                            double lower, double upper) {
  if (bins == 0 || !(upper > lower)) {
    throw Error(ErrorKind::kInvalidArgument, "histogram needs bins > 0 and upper > lower");
  }
  Histogram h{lower, upper, std::vector<std::size_t>(bins, 0),
              std::vector<std::size_t>(bins, 0)};
  const double width = (upper - lower) / static_cast<double>(bins);
  for (const auto& r : records) {
    const auto& value = variable == PointerVariable::kPosition ? r.x_sample : r.p_sample;
    if (!value || *value < lower || *value >= upper) continue;
    const auto bin = std::min(bins - 1, static_cast<std::size_t>((*value - lower) / width));
    (r.outcome == Outcome::kClick ? h.click : h.no_click)[bin]++;
  }
  return h;
}

}  // namespace wvlab
