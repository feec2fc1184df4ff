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

#ifndef WVLAB_POINTER_HPP_
#define WVLAB_POINTER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wvlab/fock.hpp"
#include "wvlab/weak_value.hpp"

namespace wvlab {

/// Gaussian pointer coupled through exp(-i g L p): each photon on the probe
/// modes shifts the pointer position by g. sigma_x is the spread of |phi(x)|^2.
struct PointerConfig {
  double sigma_x = 1.0;
  double g = 0.02;

  double sigma_p() const { return 0.5 / sigma_x; }
  /// Momentum mean per unit g per unit Im(WV) in the weak limit, 2 sigma_p^2.
  double momentum_gain() const { return 2.0 * sigma_p() * sigma_p(); }
  double weakness_ratio(int max_n) const { return g * max_n / sigma_x; }
  bool is_weak(int max_n) const { return weakness_ratio(max_n) < 0.1; }

  void validate() const;
};

/// Post-selected transition amplitudes resolved by the eigenvalue n of the
/// probe photon number at the probe time. With psi_n = U2 P_n U1 |psi> and
/// chi = E U |psi>:
///   amplitudes[n] = <chi | psi_n>,   gram(n, n') = <psi_n| E |psi_n'>.
/// The amplitudes sum to the post-selection probability and the gram matrix
/// fixes the pointer state exactly for any rank of E.
struct SectorAmplitudes {
  std::vector<Complex> amplitudes;
  Eigen::MatrixXcd gram;

  int levels() const { return static_cast<int>(amplitudes.size()); }
  double probability() const;
  /// sum_n n A_n / sum_n A_n
  WeakValue weak_value() const;
  /// Largest n whose diagonal weight exceeds `threshold` of the total.
  int max_relevant_n(double threshold = 1e-9) const;
};

/// Throws kPostSelectionTooRare when the post-selection probability is not
/// above opts.p_min.
SectorAmplitudes sector_amplitudes(const Circuit& circuit,
                                   const InputState& input,
                                   const PostSelection& ps,
                                   const OracleOptions& opts = {});

enum class PointerVariable { kPosition, kMomentum };

/// Pointer distribution conditioned on one post-selection outcome.
class PointerPosterior {
 public:
  PointerPosterior(const SectorAmplitudes& sectors, const PointerConfig& cfg,
                   PointerVariable variable);

  PointerVariable variable() const { return variable_; }
  /// Unnormalized mass: the outcome probability under the finite coupling.
  double mass() const { return mass_; }
  double lower() const { return nodes_.front(); }
  double upper() const { return nodes_.back(); }

  double density(double v) const;
  double cdf(double v) const;
  /// Exact first moment.
  double mean() const;
  /// Inverse CDF of u in [0, 1).
  double sample(double u) const;

 private:
  double raw_density(double v) const;
  double integrate(double a, double b) const;

  PointerVariable variable_;
  double g_;
  double spread_;
  double mass_ = 0.0;
  double mean_ = 0.0;
  double grid_total_ = 1.0;
  // Position: weights by (n + n'); momentum: coherences by (n - n').
  std::vector<double> position_weights_;
  std::vector<Complex> coherences_;
  int max_level_ = 0;
  std::vector<double> nodes_;
  std::vector<double> cdf_;
  std::vector<double> node_density_;
};

PointerPosterior pointer_posterior(const SectorAmplitudes& sectors,
                                   const PointerConfig& cfg,
                                   PointerVariable variable);

enum class Outcome { kNoClick = 0, kClick = 1 };

struct ShotRecord {
  Outcome outcome = Outcome::kNoClick;
  std::optional<double> x_sample;
  std::optional<double> p_sample;
  std::uint64_t stream = 0;
};

/// Counter-based splittable generator: stream `i` of master seed `s` is a
/// SplitMix64 sequence started from a hash of (s, i).
class ShotStream {
 public:
  using result_type = std::uint64_t;
  ShotStream(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

struct ShotModel {
  double click_probability = 0.0;
  /// Largest probe photon number with non-negligible weight.
  int max_relevant_n = 0;
  std::optional<PointerPosterior> click;
  std::optional<PointerPosterior> no_click;
};

/// Exact outcome probabilities and conditional pointer posteriors under the
/// g-coupled joint state.
ShotModel build_shot_model(const Circuit& circuit, const InputState& input,
                           const PointerConfig& cfg, PointerVariable variable,
                           const OracleOptions& opts = {});

std::vector<ShotRecord> run_shots(const ShotModel& model, std::size_t n_shots,
                                  std::uint64_t seed,
                                  PointerVariable variable);

std::vector<ShotRecord> run_shots(const Circuit& circuit,
                                  const InputState& input,
                                  const PointerConfig& cfg,
                                  std::size_t n_shots, std::uint64_t seed,
                                  PointerVariable variable,
                                  const OracleOptions& opts = {});

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

enum class Protocol {
  /// (WV_click - WV_noclick) f(-p_click), for coherent inputs.
  kSubtractAndScale,
  /// WV_click alone, for single-photon inputs where a click is one photon.
  kClickOnly,
};

struct ProtocolEstimate {
  WeakValue value;
  std::optional<Estimate> real_part;
  std::optional<Estimate> imag_part;
  double click_fraction = 0.0;
  std::size_t n_click = 0;
  std::size_t n_no_click = 0;
  WeakValue click_wv;
  WeakValue no_click_wv;
};

/// Throws kEmptyPopulation if a population the protocol needs is empty.
ProtocolEstimate estimate_protocol(std::span<const ShotRecord> records,
                                   const PointerConfig& cfg,
                                   Protocol protocol = Protocol::kSubtractAndScale);

struct Histogram {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::size_t> click;
  std::vector<std::size_t> no_click;
};

Histogram pointer_histogram(std::span<const ShotRecord> records,
                            PointerVariable variable, std::size_t bins,
                            double lower, double upper);

}  // namespace wvlab

#endif  // WVLAB_POINTER_HPP_
