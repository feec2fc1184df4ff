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

#ifndef WVLAB_FOCK_HPP_
#define WVLAB_FOCK_HPP_

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <variant>
#include <vector>

#include "wvlab/linear_optics.hpp"
#include "wvlab/weak_value.hpp"

namespace wvlab {

inline constexpr std::size_t kDefaultMaxBasisSize = 2'000'000;
inline constexpr int kMaxFockModes = 10;
inline constexpr int kMaxFockCutoff = 63;

/// Occupation-number basis of `n_modes` modes with at most `cutoff` photons
/// in total. States are ordered by total photon number, then
/// lexicographically by occupation tuple.
class FockBasis {
 public:
  FockBasis(int n_modes, int cutoff,
            std::size_t max_size = kDefaultMaxBasisSize);

  FockBasis(const FockBasis&) = delete;
  FockBasis& operator=(const FockBasis&) = delete;

  int n_modes() const { return n_modes_; }
  int cutoff() const { return cutoff_; }
  std::size_t size() const { return totals_.size(); }

  std::span<const std::uint8_t> occupation(std::size_t index) const {
    return {occupations_.data() + index * static_cast<std::size_t>(n_modes_),
            static_cast<std::size_t>(n_modes_)};
  }
  int occupation(std::size_t index, int mode) const {
    return occupations_[index * static_cast<std::size_t>(n_modes_) +
                        static_cast<std::size_t>(mode)];
  }
  int total(std::size_t index) const { return totals_[index]; }

  std::optional<std::size_t> index_of(std::span<const int> occupation) const;

  /// States grouped by the occupation of every mode except (a, b). Each
  /// group lists indices of |N - k, k> on (a, b) for k = 0..N.
  struct PairGroups {
    std::vector<std::uint32_t> indices;
    std::vector<std::uint32_t> offsets;  // size groups + 1
  };
  const PairGroups& pair_groups(int mode_a, int mode_b) const;

 private:
  std::uint64_t pack(std::span<const std::uint8_t> occupation) const;

  int n_modes_;
  int cutoff_;
  std::vector<std::uint8_t> occupations_;
  std::vector<int> totals_;
  std::unordered_map<std::uint64_t, std::uint32_t> index_;
  mutable std::vector<PairGroups> pair_groups_;
  mutable std::unique_ptr<std::once_flag[]> pair_once_;
};

using FockBasisPtr = std::shared_ptr<const FockBasis>;

/// Throws kSizeLimitExceeded when C(cutoff + n_modes, n_modes) > max_size.
FockBasisPtr enumerate_basis(int n_modes, int cutoff,
                             std::size_t max_size = kDefaultMaxBasisSize);

/// Number of states with at most `cutoff` photons in `n_modes` modes.
std::size_t basis_size(int n_modes, int cutoff);

/// Cutoff rule: ceil(S + 10 sqrt(S + 1)) clamped to >= 4, S = total mean
/// photon number of the input.
int cutoff_for(double total_mean_photons);

struct FockState {
  FockBasisPtr basis;
  std::vector<Complex> amplitudes;
  /// Probability mass that did not fit under the cutoff.
  double truncation_tail = 0.0;

  double norm_squared() const;
};

Complex inner_product(const FockState& bra, const FockState& ket);

/// Product of coherent states, truncated; the tail is reported, not
/// renormalized away. Throws kTailTooLarge above `tail_tolerance`.
FockState prepare_coherent(FockBasisPtr basis, const CoherentVector& alpha,
                           double tail_tolerance = 1e-12);

FockState prepare_single_photon(FockBasisPtr basis, int mode);

/// Applies a loss-free element list (first element first). Each two-mode
/// element acts exactly inside every fixed-total-photon block.
FockState lift_and_apply(const std::vector<CircuitElement>& elements,
                         FockState state);

/// Decomposes `m` into beam splitters and phases, then applies them.
FockState lift_and_apply(const ModeMatrix& m, FockState state);

namespace observable {
struct PhotonNumber {
  std::vector<int> modes;
};
struct Identity {};
}  // namespace observable

using Observable = std::variant<observable::PhotonNumber, observable::Identity>;

namespace effect {
struct NoneOp {};
struct FockProjector {
  int detect_mode = 0;
  int m = 0;
};
/// I - |0><0| on the detect mode.
struct ClickOperator {
  int detect_mode = 0;
};
/// Rank-one projector onto `target` (need not be normalized).
struct Full {
  FockState target;
};
/// A detector effect on the detect mode tensored with the projector onto a
/// coherent state of all other modes. `rest` has one entry per mode; the
/// detect-mode entry is ignored.
struct RestProjected {
  int detect_mode = 0;
  PostSelection local;
  CoherentVector rest;
};
}  // namespace effect

using PostSelectionOperator =
    std::variant<effect::NoneOp, effect::FockProjector, effect::ClickOperator,
                 effect::Full, effect::RestProjected>;

PostSelectionOperator to_operator(const PostSelection& ps, int detect_mode);

struct OracleOptions {
  double p_min = 1e-12;
  double tail_tolerance = 1e-12;
  std::size_t max_basis_size = kDefaultMaxBasisSize;
  /// Overrides cutoff_for() when set.
  std::optional<int> cutoff;
};

/// Builds the truncated input state for `input` on the circuit's modes.
FockState prepare_input(const Circuit& circuit, const InputState& input,
                        const OracleOptions& opts = {});

/// Holds the two evolved states that every weak value of one
/// (circuit, input, observable) triple is contracted from:
///   final  = U(tf, ti) |psi>
///   probed = U(tf, tp) L U(tp, ti) |psi>
class OracleRun {
 public:
  OracleRun(const Circuit& circuit, const FockState& input,
            const Observable& obs);

  const FockState& final_state() const { return final_; }
  const FockState& probed_state() const { return probed_; }

  /// <psi| U^dag E U L |psi>
  Complex numerator(const PostSelectionOperator& e) const;
  /// <psi| U^dag E U |psi>
  double probability(const PostSelectionOperator& e) const;
  WeakValue weak_value(const PostSelectionOperator& e,
                       double p_min = 1e-12) const;

  /// Generic contraction <a| E |b>.
  static Complex contract(const FockState& a, const PostSelectionOperator& e,
                          const FockState& b);

 private:
  FockState final_;
  FockState probed_;
};

WeakValue generalized_weak_value(const Circuit& circuit, const FockState& input,
                                 const Observable& obs,
                                 const PostSelectionOperator& ps,
                                 double p_min = 1e-12);

/// Oracle weak value of the probe-mode photon number, the quantity the
/// analytic engine computes in closed form.
WeakValue oracle_weak_value(const Circuit& circuit, const InputState& input,
                            const PostSelection& ps,
                            const OracleOptions& opts = {});

struct Lemma1Result {
  WeakValue rest_ignored;
  WeakValue rest_projected;
  double difference = 0.0;
};

/// Compares post-selecting with E_A (x) I against E_A (x) |psi_B><psi_B|,
/// where psi_B is the actual final state of the non-detected modes. Needs a
/// final state that factorizes across detect | rest: any coherent input, or
/// a single photon with T = 1. Otherwise throws kNotFactorizable.
Lemma1Result lemma1_check(const Circuit& circuit, const InputState& input,
                          const Observable& obs,
                          const PostSelection& detector_effect,
                          const OracleOptions& opts = {});

}  // namespace wvlab

#endif  // WVLAB_FOCK_HPP_
