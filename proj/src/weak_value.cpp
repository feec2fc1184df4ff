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

#include "wvlab/weak_value.hpp"

#include <cmath>
#include <string>

#include "wvlab/error.hpp"

namespace wvlab {
namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// Coherent amplitudes at the probe time (beta) and at the end (gamma).
struct CoherentPaths {
  std::vector<Complex> beta;
  std::vector<Complex> gamma;
};

CoherentPaths coherent_paths(const CompiledCircuit& c, Complex alpha) {
  const std::size_t n = c.n_modes();
  CoherentPaths out{std::vector<Complex>(n), std::vector<Complex>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.beta[k] = c.pre(k, idx(c.input_mode)) * alpha;
    out.gamma[k] = c.total(k, idx(c.input_mode)) * alpha;
  }
  return out;
}

// Poisson(m; mean), zero when mean == 0 and m > 0.
double poisson(int m, double mean) {
  if (mean == 0.0) return m == 0 ? 1.0 : 0.0;
  return std::exp(-mean + m * std::log(mean) - std::lgamma(m + 1.0));
}

// Closed form of the m-photon post-selected weak value, no rarity guard.
// b^dag on probe mode p is transported through the post-probe stage into
// sum_k M2(k, p) a_k^dag; on the detect mode <m| a^dag |gamma> / <m|gamma>
// contributes m / gamma, on the others the coherent bra gives conj(gamma_k).
WeakValue fock_weak_value(const CompiledCircuit& c, const CoherentPaths& paths,
                          int m) {
  const std::size_t d = idx(c.detect_mode);
  const Complex gamma_d = paths.gamma[d];
  WeakValue total = 0.0;
  for (int p : c.probe_modes) {
    Complex transported = 0.0;
    for (std::size_t k = 0; k < c.n_modes(); ++k) {
      if (k == d) continue;
      transported += c.post(k, idx(p)) * std::conj(paths.gamma[k]);
    }
    if (m > 0) transported += c.post(d, idx(p)) * (static_cast<double>(m) / gamma_d);
    total += paths.beta[idx(p)] * transported;
  }
  return total;
}

double mean_probe_occupation(const CoherentPaths& paths,
                             const std::vector<int>& probe_modes) {
  double total = 0.0;
  for (int p : probe_modes) total += std::norm(paths.beta[idx(p)]);
  return total;
}

void require_rate(double probability, double p_min, const std::string& what) {
  if (!(probability > p_min)) {
    throw Error(ErrorKind::kPostSelectionTooRare,
                what + " post-selection probability " +
                    std::to_string(probability) +
                    " is below p_min (dark-port condition)");
  }
}

}  // namespace

double scaling_function(double x) {
  if (!(x > -1.0)) {
    throw Error(ErrorKind::kDomainError,
                "scaling function needs x > -1, got " + std::to_string(x));
  }
  if (std::abs(x) < 1e-4) {
    return 1.0 + x / 2.0 - x * x / 12.0 + x * x * x / 24.0;
  }
  return x / std::log1p(x);
}

double scaling_function_derivative(double x) {
  if (!(x > -1.0)) {
    throw Error(ErrorKind::kDomainError,
                "scaling function needs x > -1, got " + std::to_string(x));
  }
  if (std::abs(x) < 1e-4) return 0.5 - x / 6.0 + x * x / 8.0;
  const double l = std::log1p(x);
  return (l - x / (1.0 + x)) / (l * l);
}

double click_probability(const CompiledCircuit& circuit, Complex alpha) {
  return -std::expm1(-transmittance(circuit) * std::norm(alpha));
}

double click_probability(const Circuit& circuit, Complex alpha) {
  return click_probability(compile(circuit), alpha);
}

WeakValue wv_coherent(const CompiledCircuit& c, Complex alpha,
                      const PostSelection& ps, const EngineOptions& opts) {
  const CoherentPaths paths = coherent_paths(c, alpha);
  const double detected_mean = std::norm(paths.gamma[idx(c.detect_mode)]);
  return std::visit(
      [&](const auto& sel) -> WeakValue {
        using T = std::decay_t<decltype(sel)>;
        if constexpr (std::is_same_v<T, postselect::None>) {
          return mean_probe_occupation(paths, c.probe_modes);
        } else if constexpr (std::is_same_v<T, postselect::Fock>) {
          if (sel.m < 0) {
            throw Error(ErrorKind::kDomainError, "photon count must be >= 0");
          }
          require_rate(poisson(sel.m, detected_mean), opts.p_min,
                       "fock:" + std::to_string(sel.m));
          return fock_weak_value(c, paths, sel.m);
        } else if constexpr (std::is_same_v<T, postselect::NoClick>) {
          require_rate(std::exp(-detected_mean), opts.p_min, "no-click");
          return fock_weak_value(c, paths, 0);
        } else {
          const double p_click = -std::expm1(-detected_mean);
          require_rate(p_click, opts.p_min, "click");
          const WeakValue unconditioned =
              mean_probe_occupation(paths, c.probe_modes);
          const WeakValue no_click = fock_weak_value(c, paths, 0);
          return (unconditioned - (1.0 - p_click) * no_click) / p_click;
        }
      },
      ps);
}

WeakValue wv_coherent(const Circuit& circuit, Complex alpha,
                      const PostSelection& ps, const EngineOptions& opts) {
  return wv_coherent(compile(circuit), alpha, ps, opts);
}

WeakValue wv_single_photon(const CompiledCircuit& c, const PostSelection& ps,
                           const EngineOptions& opts) {
  const std::size_t n = c.n_modes();
  const std::size_t d = idx(c.detect_mode);
  const std::size_t in = idx(c.input_mode);

  // Single-photon amplitudes after n_probe and the post-probe stage.
  std::vector<Complex> probed(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (int p : c.probe_modes) probed[k] += c.post(k, idx(p)) * c.pre(idx(p), in);
  }
  const Complex detect_amp = c.total(d, in);
  const double t = std::norm(detect_amp);

  auto one = [&]() -> WeakValue {
    require_rate(t, opts.p_min, "single-photon click");
    return probed[d] / detect_amp;
  };
  auto zero = [&]() -> WeakValue {
    require_rate(1.0 - t, opts.p_min, "single-photon no-click");
    Complex num = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != d) num += std::conj(c.total(k, in)) * probed[k];
    }
    return num / (1.0 - t);
  };

  return std::visit(
      [&](const auto& sel) -> WeakValue {
        using T = std::decay_t<decltype(sel)>;
        if constexpr (std::is_same_v<T, postselect::None>) {
          Complex num = 0.0;
          for (std::size_t k = 0; k < n; ++k) {
            num += std::conj(c.total(k, in)) * probed[k];
          }
          return num;
        } else if constexpr (std::is_same_v<T, postselect::Fock>) {
          if (sel.m < 0) {
            throw Error(ErrorKind::kDomainError, "photon count must be >= 0");
          }
          if (sel.m == 0) return zero();
          if (sel.m == 1) return one();
          throw Error(ErrorKind::kPostSelectionTooRare,
                      "a single photon cannot produce " +
                          std::to_string(sel.m) + " counts");
        } else if constexpr (std::is_same_v<T, postselect::NoClick>) {
          return zero();
        } else {
          return one();
        }
      },
      ps);
}

WeakValue wv_single_photon(const Circuit& circuit, const PostSelection& ps,
                           const EngineOptions& opts) {
  return wv_single_photon(compile(circuit), ps, opts);
}

WeakValue reconstruct_single_photon_wv(const CompiledCircuit& c, Complex alpha,
                                       const EngineOptions& opts) {
  const double p_click = click_probability(c, alpha);
  if (!(p_click < 1.0)) {
    throw Error(ErrorKind::kDomainError,
                "click probability rounds to 1; reduce |alpha|^2");
  }
  const WeakValue click = wv_coherent(c, alpha, postselect::Click{}, opts);
  const WeakValue no_click = wv_coherent(c, alpha, postselect::NoClick{}, opts);
  return (click - no_click) * scaling_function(-p_click);
}

WeakValue reconstruct_single_photon_wv(const Circuit& circuit, Complex alpha,
                                       const EngineOptions& opts) {
  return reconstruct_single_photon_wv(compile(circuit), alpha, opts);
}

Proportionality proportionality_constants(const CompiledCircuit& c,
                                          Complex alpha,
                                          const EngineOptions& opts) {
  const double intensity = std::norm(alpha);
  if (!(intensity > 0.0)) {
    throw Error(ErrorKind::kDomainError, "alpha must be nonzero");
  }
  Proportionality out;
  out.mean_per_intensity =
      wv_coherent(c, alpha, postselect::None{}, opts).real() / intensity;
  out.noclick_per_intensity =
      wv_coherent(c, alpha, postselect::NoClick{}, opts) / intensity;
  const double t = transmittance(c);
  out.noclick_single_photon_prediction =
      t < 1.0 ? (1.0 - t) * wv_single_photon(c, postselect::Fock{0},
                                             EngineOptions{0.0})
              : WeakValue{0.0};
  return out;
}

Proportionality proportionality_constants(const Circuit& circuit,
                                          Complex alpha,
                                          const EngineOptions& opts) {
  return proportionality_constants(compile(circuit), alpha, opts);
}

}  // namespace wvlab
