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

#ifndef WVLAB_WEAK_VALUE_HPP_
#define WVLAB_WEAK_VALUE_HPP_

#include <variant>

#include "wvlab/linear_optics.hpp"

namespace wvlab {

/// Complex weak value. The real part is what a position pointer reads; the
/// imaginary part is carried by the conjugate pointer variable.
using WeakValue = std::complex<double>;

namespace postselect {
struct None {
  bool operator==(const None&) const = default;
};
struct Fock {
  int m = 0;
  bool operator==(const Fock&) const = default;
};
struct Click {
  bool operator==(const Click&) const = default;
};
struct NoClick {
  bool operator==(const NoClick&) const = default;
};
}  // namespace postselect

/// Outcome conditioned on at the detect mode. Fock(0) and NoClick are the
/// same event.
using PostSelection = std::variant<postselect::None, postselect::Fock,
                                   postselect::Click, postselect::NoClick>;

namespace input {
struct Coherent {
  Complex alpha;
  bool operator==(const Coherent&) const = default;
};
struct SinglePhoton {
  bool operator==(const SinglePhoton&) const = default;
};
}  // namespace input

using InputState = std::variant<input::Coherent, input::SinglePhoton>;

struct EngineOptions {
  /// Post-selections rarer than this are rejected (dark-port guard).
  double p_min = 1e-12;
};

/// f(x) = x / ln(1 + x), continued to f(0) = 1. Throws kDomainError for
/// x <= -1.
double scaling_function(double x);

/// df/dx, used for error propagation.
double scaling_function_derivative(double x);

/// p_click = 1 - exp(-T |alpha|^2)
double click_probability(const CompiledCircuit& circuit, Complex alpha);
double click_probability(const Circuit& circuit, Complex alpha);

/// Weak value of the total photon number on the probe modes for a coherent
/// input |alpha> on the input mode, conditioned on `ps` at the detect mode.
WeakValue wv_coherent(const CompiledCircuit& circuit, Complex alpha,
                      const PostSelection& ps, const EngineOptions& opts = {});
WeakValue wv_coherent(const Circuit& circuit, Complex alpha,
                      const PostSelection& ps, const EngineOptions& opts = {});

/// Same observable for a single photon on the input mode. Only None,
/// Fock(0), Fock(1) and their Click/NoClick aliases are meaningful.
WeakValue wv_single_photon(const CompiledCircuit& circuit,
                           const PostSelection& ps,
                           const EngineOptions& opts = {});
WeakValue wv_single_photon(const Circuit& circuit, const PostSelection& ps,
                           const EngineOptions& opts = {});

/// (WV_click - WV_noclick) * f(-p_click) from a coherent-state experiment.
/// Equals the single-photon click weak value for every finite alpha != 0.
WeakValue reconstruct_single_photon_wv(const CompiledCircuit& circuit,
                                       Complex alpha,
                                       const EngineOptions& opts = {});
WeakValue reconstruct_single_photon_wv(const Circuit& circuit, Complex alpha,
                                       const EngineOptions& opts = {});

struct Proportionality {
  /// <n>_alpha / |alpha|^2
  double mean_per_intensity = 0.0;
  /// WV_noclick(alpha) / |alpha|^2
  WeakValue noclick_per_intensity;
  /// (1 - T) * WV_0 for the single-photon input; should equal
  /// noclick_per_intensity.
  WeakValue noclick_single_photon_prediction;
};

/// Both ratios are exactly independent of alpha.
Proportionality proportionality_constants(const CompiledCircuit& circuit,
                                          Complex alpha = 1.0,
                                          const EngineOptions& opts = {});
Proportionality proportionality_constants(const Circuit& circuit,
                                          Complex alpha = 1.0,
                                          const EngineOptions& opts = {});

}  // namespace wvlab

#endif  // WVLAB_WEAK_VALUE_HPP_
