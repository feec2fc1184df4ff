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

#include "wvlab/fock.hpp"

#include <cmath>
#include <string>

#include "wvlab/error.hpp"

namespace wvlab {
namespace {

constexpr int kBitsPerMode = 6;

// Matrix of a two-mode unitary restricted to the N-photon block, for every
// N up to the cutoff. Entry (k_out, k_in) = <N-k_out, k_out| U |N-k_in, k_in>
// with k the occupation of the second mode. Built column by column from the
// (N-1)-photon block using U a^dag U^dag = u_aa a^dag + u_ba b^dag and
// U b^dag U^dag = u_ab a^dag + u_bb b^dag.
class SectorMatrices {
 public:
  SectorMatrices(const Eigen::Matrix2cd& u, int cutoff) {
    blocks_.resize(static_cast<std::size_t>(cutoff) + 1);
    blocks_[0] = {Complex(1.0)};
    for (int n = 1; n <= cutoff; ++n) {
      const auto& prev = blocks_[static_cast<std::size_t>(n - 1)];
      auto& cur = blocks_[static_cast<std::size_t>(n)];
      cur.assign(static_cast<std::size_t>((n + 1) * (n + 1)), Complex(0.0));
      for (int k_in = 0; k_in <= n; ++k_in) {
        const int src_col = k_in >= 1 ? k_in - 1 : 0;
        const Complex ca = k_in >= 1 ? u(0, 1) : u(0, 0);
        const Complex cb = k_in >= 1 ? u(1, 1) : u(1, 0);
        const double norm = 1.0 / std::sqrt(static_cast<double>(k_in >= 1 ? k_in : n));
        for (int j = 0; j < n; ++j) {
          const Complex s = prev[static_cast<std::size_t>(j * n + src_col)] * norm;
          if (s == Complex(0.0)) continue;
          cur[static_cast<std::size_t>(j * (n + 1) + k_in)] +=
              ca * std::sqrt(static_cast<double>(n - j)) * s;
          cur[static_cast<std::size_t>((j + 1) * (n + 1) + k_in)] +=
              cb * std::sqrt(static_cast<double>(j + 1)) * s;
        }
      }
    }
  }

  const std::vector<Complex>& block(int n) const {
    return blocks_[static_cast<std::size_t>(n)];
  }

 private:
  std::vector<std::vector<Complex>> blocks_;
};

void apply_two_mode(const Eigen::Matrix2cd& u, int a, int b, FockState& state) {
  const FockBasis& basis = *state.basis;
  const SectorMatrices sectors(u, basis.cutoff());
  const auto& groups = basis.pair_groups(a, b);
  std::vector<Complex> in;
  std::vector<Complex> out;
  auto& amp = state.amplitudes;
  for (std::size_t g = 0; g + 1 < groups.offsets.size(); ++g) {
    const std::uint32_t begin = groups.offsets[g];
    const std::uint32_t end = groups.offsets[g + 1];
    const int size = static_cast<int>(end - begin);
    in.resize(static_cast<std::size_t>(size));
    bool any = false;
    for (int k = 0; k < size; ++k) {
      in[static_cast<std::size_t>(k)] = amp[groups.indices[begin + static_cast<std::uint32_t>(k)]];
      any = any || in[static_cast<std::size_t>(k)] != Complex(0.0);
    }
    if (!any) continue;
    const auto& w = sectors.block(size - 1);
    out.assign(static_cast<std::size_t>(size), Complex(0.0));
    for (int r = 0; r < size; ++r) {
      Complex acc = 0.0;
      const Complex* row = w.data() + static_cast<std::size_t>(r * size);
      for (int c = 0; c < size; ++c) acc += row[c] * in[static_cast<std::size_t>(c)];
      out[static_cast<std::size_t>(r)] = acc;
    }
    for (int k = 0; k < size; ++k) {
      amp[groups.indices[begin + static_cast<std::uint32_t>(k)]] = out[static_cast<std::size_t>(k)];
    }
  }
}

void apply_phase(int mode, double phi, FockState& state) {
  const FockBasis& basis = *state.basis;
  std::vector<Complex> powers(static_cast<std::size_t>(basis.cutoff()) + 1);
  for (std::size_t n = 0; n < powers.size(); ++n) {
    powers[n] = std::polar(1.0, phi * static_cast<double>(n));
  }
  for (std::size_t i = 0; i < basis.size(); ++i) {
    state.amplitudes[i] *= powers[static_cast<std::size_t>(basis.occupation(i, mode))];
  }
}

// Per-mode coherent amplitudes <n|a> for n = 0..cutoff.
std::vector<Complex> coherent_table(Complex a, int cutoff) {
  std::vector<Complex> t(static_cast<std::size_t>(cutoff) + 1);
  t[0] = std::exp(-0.5 * std::norm(a));
  for (int n = 1; n <= cutoff; ++n) {
    t[static_cast<std::size_t>(n)] =
        t[static_cast<std::size_t>(n - 1)] * a / std::sqrt(static_cast<double>(n));
  }
  return t;
}

bool accepts(const PostSelection& local, int count) {
  return std::visit(
      [count](const auto& sel) {
        using T = std::decay_t<decltype(sel)>;
        if constexpr (std::is_same_v<T, postselect::None>) {
          return true;
        } else if constexpr (std::is_same_v<T, postselect::Fock>) {
          return count == sel.m;
        } else if constexpr (std::is_same_v<T, postselect::Click>) {
          return count >= 1;
        } else {
          return count == 0;
        }
      },
      local);
}

void check_same_basis(const FockState& a, const FockState& b) {
  if (a.basis == nullptr || b.basis == nullptr ||
      a.basis->n_modes() != b.basis->n_modes() ||
      a.basis->cutoff() != b.basis->cutoff()) {
    throw Error(ErrorKind::kDimensionMismatch, "states live on different bases");
  }
}

void check_circuit(const Circuit& circuit, const FockState& state) {
  circuit.validate();
  if (circuit.has_loss()) {
    throw Error(ErrorKind::kLossNotExpanded,
                "loss element present; expand losses first");
  }
  if (state.basis == nullptr || state.basis->n_modes() != circuit.n_modes) {
    throw Error(ErrorKind::kDimensionMismatch,
                "state basis does not match the circuit's mode count");
  }
}

}  // namespace

std::size_t basis_size(int n_modes, int cutoff) {
  // C(cutoff + n_modes, n_modes), saturating.
  long double c = 1.0L;
  for (int i = 1; i <= n_modes; ++i) {
    c = c * static_cast<long double>(cutoff + i) / static_cast<long double>(i);
  }
  if (c > 1e18L) return static_cast<std::size_t>(1e18);
  return static_cast<std::size_t>(std::llround(static_cast<double>(c)));
}

FockBasis::FockBasis(int n_modes, int cutoff, std::size_t max_size)
    : n_modes_(n_modes), cutoff_(cutoff) {
  if (n_modes < 1 || cutoff < 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "basis needs n_modes >= 1 and cutoff >= 0");
  }
  if (n_modes > kMaxFockModes || cutoff > kMaxFockCutoff) {
    throw Error(ErrorKind::kSizeLimitExceeded,
                "basis supports at most " + std::to_string(kMaxFockModes) +
                    " modes and cutoff " + std::to_string(kMaxFockCutoff));
  }
  const std::size_t expected = basis_size(n_modes, cutoff);
  if (expected > max_size) {
    throw Error(ErrorKind::kSizeLimitExceeded,
                "basis dimension " + std::to_string(expected) +
                    " exceeds limit " + std::to_string(max_size));
  }
  occupations_.reserve(expected * static_cast<std::size_t>(n_modes));
  totals_.reserve(expected);
  index_.reserve(expected);

  std::vector<std::uint8_t> occ(static_cast<std::size_t>(n_modes), 0);
  // Lexicographic enumeration of tuples summing to `remaining` from `mode` on.
  auto emit = [&](auto&& self, int mode, int remaining, int total) -> void {
    if (mode == n_modes - 1) {
      occ[static_cast<std::size_t>(mode)] = static_cast<std::uint8_t>(remaining);
      const auto index = static_cast<std::uint32_t>(totals_.size());
      occupations_.insert(occupations_.end(), occ.begin(), occ.end());
      totals_.push_back(total);
      index_.emplace(pack(occ), index);
      return;
    }
    for (int n = 0; n <= remaining; ++n) {
      occ[static_cast<std::size_t>(mode)] = static_cast<std::uint8_t>(n);
      self(self, mode + 1, remaining - n, total);
    }
  };
  for (int total = 0; total <= cutoff; ++total) emit(emit, 0, total, total);

  const auto pairs = static_cast<std::size_t>(n_modes * n_modes);
  pair_groups_.resize(pairs);
  pair_once_ = std::make_unique<std::once_flag[]>(pairs);
}

std::uint64_t FockBasis::pack(std::span<const std::uint8_t> occupation) const {
  std::uint64_t key = 0;
  for (std::uint8_t n : occupation) key = (key << kBitsPerMode) | n;
  return key;
}

std::optional<std::size_t> FockBasis::index_of(
    std::span<const int> occupation) const {
  if (occupation.size() != static_cast<std::size_t>(n_modes_)) return std::nullopt;
  std::vector<std::uint8_t> occ;
  occ.reserve(occupation.size());
  int total = 0;
  for (int n : occupation) {
    if (n < 0 || n > cutoff_) return std::nullopt;
    total += n;
    occ.push_back(static_cast<std::uint8_t>(n));
  }
  if (total > cutoff_) return std::nullopt;
  const auto it = index_.find(pack(occ));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const FockBasis::PairGroups& FockBasis::pair_groups(int mode_a,
                                                    int mode_b) const {
  if (mode_a == mode_b || mode_a < 0 || mode_b < 0 || mode_a >= n_modes_ ||
      mode_b >= n_modes_) {
    throw Error(ErrorKind::kInvalidModeIndex, "invalid mode pair");
  }
  const auto slot = static_cast<std::size_t>(mode_a * n_modes_ + mode_b);
  std::call_once(pair_once_[slot], [&] {
    PairGroups groups;
    groups.indices.reserve(size());
    groups.offsets.push_back(0);
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(n_modes_));
    for (std::size_t i = 0; i < size(); ++i) {
      if (occupation(i, mode_b) != 0) continue;
      const auto head = occupation(i);
      occ.assign(head.begin(), head.end());
      const int n = occ[static_cast<std::size_t>(mode_a)];
      for (int k = 0; k <= n; ++k) {
        occ[static_cast<std::size_t>(mode_a)] = static_cast<std::uint8_t>(n - k);
        occ[static_cast<std::size_t>(mode_b)] = static_cast<std::uint8_t>(k);
        groups.indices.push_back(index_.at(pack(occ)));
      }
      groups.offsets.push_back(static_cast<std::uint32_t>(groups.indices.size()));
    }
    pair_groups_[slot] = std::move(groups);
  });
  return pair_groups_[slot];
}

FockBasisPtr enumerate_basis(int n_modes, int cutoff, std::size_t max_size) {
  return std::make_shared<const FockBasis>(n_modes, cutoff, max_size);
}

int cutoff_for(double total_mean_photons) {
  const double s = std::max(0.0, total_mean_photons);
  const int rule = static_cast<int>(std::ceil(s + 10.0 * std::sqrt(s + 1.0)));
  return std::max(4, rule);
}

double FockState::norm_squared() const {
  double total = 0.0;
  for (const auto& a : amplitudes) total += std::norm(a);
  return total;
}

Complex inner_product(const FockState& bra, const FockState& ket) {
  check_same_basis(bra, ket);
  Complex total = 0.0;
  for (std::size_t i = 0; i < bra.amplitudes.size(); ++i) {
    total += std::conj(bra.amplitudes[i]) * ket.amplitudes[i];
  }
  return total;
}

FockState prepare_coherent(FockBasisPtr basis, const CoherentVector& alpha,
                           double tail_tolerance) {
  if (basis == nullptr ||
      alpha.amplitudes.size() != static_cast<std::size_t>(basis->n_modes())) {
    throw Error(ErrorKind::kDimensionMismatch,
                "coherent vector does not match the basis mode count");
  }
  std::vector<std::vector<Complex>> tables;
  for (const auto& a : alpha.amplitudes) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw Error(ErrorKind::kDomainError, "coherent amplitude is not finite");
    }
    tables.push_back(coherent_table(a, basis->cutoff()));
  }
  FockState state{basis, std::vector<Complex>(basis->size()), 0.0};
  for (std::size_t i = 0; i < basis->size(); ++i) {
    Complex amp = 1.0;
    for (int j = 0; j < basis->n_modes(); ++j) {
      amp *= tables[static_cast<std::size_t>(j)]
                   [static_cast<std::size_t>(basis->occupation(i, j))];
    }
    state.amplitudes[i] = amp;
  }
  state.truncation_tail = std::max(0.0, 1.0 - state.norm_squared());
  if (state.truncation_tail > tail_tolerance) {
    throw Error(ErrorKind::kTailTooLarge,
                "truncation tail " + std::to_string(state.truncation_tail) +
                    " exceeds tolerance; raise the cutoff");
  }
  return state;
}

FockState prepare_single_photon(FockBasisPtr basis, int mode) {
  if (basis == nullptr || mode < 0 || mode >= basis->n_modes()) {
    throw Error(ErrorKind::kInvalidModeIndex, "single-photon mode out of range");
  }
  if (basis->cutoff() < 1) {
    throw Error(ErrorKind::kTailTooLarge, "cutoff 0 cannot hold a photon");
  }
  std::vector<int> occ(static_cast<std::size_t>(basis->n_modes()), 0);
  occ[static_cast<std::size_t>(mode)] = 1;
  FockState state{basis, std::vector<Complex>(basis->size()), 0.0};
  state.amplitudes[*basis->index_of(occ)] = 1.0;
  return state;
}

FockState lift_and_apply(const std::vector<CircuitElement>& elements,
                         FockState state) {
  if (state.basis == nullptr) {
    throw Error(ErrorKind::kDimensionMismatch, "state has no basis");
  }
  const int n_modes = state.basis->n_modes();
  for (const auto& element : elements) {
    if (const auto* bs = std::get_if<BeamSplitter>(&element)) {
      if (bs->mode_a < 0 || bs->mode_b < 0 || bs->mode_a >= n_modes ||
          bs->mode_b >= n_modes || bs->mode_a == bs->mode_b) {
        throw Error(ErrorKind::kInvalidModeIndex, "beam splitter mode out of range");
      }
      apply_two_mode(beam_splitter_block(bs->theta, bs->phi), bs->mode_a,
                     bs->mode_b, state);
    } else if (const auto* ps = std::get_if<PhaseShifter>(&element)) {
      if (ps->mode < 0 || ps->mode >= n_modes) {
        throw Error(ErrorKind::kInvalidModeIndex, "phase shifter mode out of range");
      }
      apply_phase(ps->mode, ps->phi, state);
    } else {
      throw Error(ErrorKind::kLossNotExpanded,
                  "loss element present; expand losses first");
    }
  }
  return state;
}

FockState lift_and_apply(const ModeMatrix& m, FockState state) {
  if (state.basis == nullptr ||
      m.dim() != static_cast<std::size_t>(state.basis->n_modes())) {
    throw Error(ErrorKind::kDimensionMismatch,
                "mode matrix does not match the basis mode count");
  }
  return lift_and_apply(decompose(m), std::move(state));
}

PostSelectionOperator to_operator(const PostSelection& ps, int detect_mode) {
  return std::visit(
      [detect_mode](const auto& sel) -> PostSelectionOperator {
        using T = std::decay_t<decltype(sel)>;
        if constexpr (std::is_same_v<T, postselect::None>) {
          return effect::NoneOp{};
        } else if constexpr (std::is_same_v<T, postselect::Fock>) {
          return effect::FockProjector{detect_mode, sel.m};
        } else if constexpr (std::is_same_v<T, postselect::Click>) {
          return effect::ClickOperator{detect_mode};
        } else {
          return effect::FockProjector{detect_mode, 0};
        }
      },
      ps);
}

FockState prepare_input(const Circuit& circuit, const InputState& input,
                        const OracleOptions& opts) {
  circuit.validate();
  if (const auto* coherent = std::get_if<input::Coherent>(&input)) {
    CoherentVector alpha{std::vector<Complex>(
        static_cast<std::size_t>(circuit.n_modes), Complex(0.0))};
    alpha.amplitudes[static_cast<std::size_t>(circuit.input_mode)] = coherent->alpha;
    const int cutoff =
        opts.cutoff.value_or(cutoff_for(std::norm(coherent->alpha)));
    return prepare_coherent(
        enumerate_basis(circuit.n_modes, cutoff, opts.max_basis_size), alpha,
        opts.tail_tolerance);
  }
  const int cutoff = opts.cutoff.value_or(1);
  return prepare_single_photon(
      enumerate_basis(circuit.n_modes, cutoff, opts.max_basis_size),
      circuit.input_mode);
}

OracleRun::OracleRun(const Circuit& circuit, const FockState& input,
                     const Observable& obs) {
  check_circuit(circuit, input);
  FockState at_probe = lift_and_apply(circuit.pre_probe, input);
  FockState observed = at_probe;
  if (const auto* number = std::get_if<observable::PhotonNumber>(&obs)) {
    if (number->modes.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "photon-number mode set is empty");
    }
    for (int mode : number->modes) {
      if (mode < 0 || mode >= circuit.n_modes) {
        throw Error(ErrorKind::kInvalidModeIndex, "observable mode out of range");
      }
    }
    const FockBasis& basis = *input.basis;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      int count = 0;
      for (int mode : number->modes) count += basis.occupation(i, mode);
      observed.amplitudes[i] *= static_cast<double>(count);
    }
  }
  final_ = lift_and_apply(circuit.post_probe, std::move(at_probe));
  probed_ = lift_and_apply(circuit.post_probe, std::move(observed));
}

Complex OracleRun::contract(const FockState& a, const PostSelectionOperator& e,
                            const FockState& b) {
  check_same_basis(a, b);
  const FockBasis& basis = *a.basis;
  const auto& x = a.amplitudes;
  const auto& y = b.amplitudes;
  auto check_detect = [&](int mode) {
    if (mode < 0 || mode >= basis.n_modes()) {
      throw Error(ErrorKind::kInvalidModeIndex, "detect mode out of range");
    }
  };
  return std::visit(
      [&](const auto& op) -> Complex {
        using T = std::decay_t<decltype(op)>;
        Complex total = 0.0;
        if constexpr (std::is_same_v<T, effect::NoneOp>) {
          for (std::size_t i = 0; i < x.size(); ++i) total += std::conj(x[i]) * y[i];
        } else if constexpr (std::is_same_v<T, effect::FockProjector>) {
          check_detect(op.detect_mode);
          for (std::size_t i = 0; i < x.size(); ++i) {
            if (basis.occupation(i, op.detect_mode) == op.m) {
              total += std::conj(x[i]) * y[i];
            }
          }
        } else if constexpr (std::is_same_v<T, effect::ClickOperator>) {
          check_detect(op.detect_mode);
          for (std::size_t i = 0; i < x.size(); ++i) {
            if (basis.occupation(i, op.detect_mode) >= 1) {
              total += std::conj(x[i]) * y[i];
            }
          }
        } else if constexpr (std::is_same_v<T, effect::Full>) {
          total = inner_product(a, op.target) * inner_product(op.target, b);
        } else {
          check_detect(op.detect_mode);
          if (op.rest.amplitudes.size() != static_cast<std::size_t>(basis.n_modes())) {
            throw Error(ErrorKind::kDimensionMismatch,
                        "rest coherent vector does not match the basis");
          }
          std::vector<std::vector<Complex>> tables;
          for (const auto& amp : op.rest.amplitudes) {
            tables.push_back(coherent_table(amp, basis.cutoff()));
          }
          const auto levels = static_cast<std::size_t>(basis.cutoff()) + 1;
          std::vector<Complex> proj_x(levels, 0.0);
          std::vector<Complex> proj_y(levels, 0.0);
          for (std::size_t i = 0; i < x.size(); ++i) {
            Complex rest = 1.0;
            for (int j = 0; j < basis.n_modes(); ++j) {
              if (j == op.detect_mode) continue;
              rest *= tables[static_cast<std::size_t>(j)]
                            [static_cast<std::size_t>(basis.occupation(i, j))];
            }
            const auto n_d = static_cast<std::size_t>(basis.occupation(i, op.detect_mode));
            proj_x[n_d] += std::conj(rest) * x[i];
            proj_y[n_d] += std::conj(rest) * y[i];
          }
          for (std::size_t n = 0; n < levels; ++n) {
            if (accepts(op.local, static_cast<int>(n))) {
              total += std::conj(proj_x[n]) * proj_y[n];
            }
          }
        }
        return total;
      },
      e);
}

Complex OracleRun::numerator(const PostSelectionOperator& e) const {
  return contract(final_, e, probed_);
}

double OracleRun::probability(const PostSelectionOperator& e) const {
  return contract(final_, e, final_).real();
}

WeakValue OracleRun::weak_value(const PostSelectionOperator& e,
                                double p_min) const {
  const double p = probability(e);
  if (!(p > p_min)) {
    throw Error(ErrorKind::kPostSelectionTooRare,
                "post-selection probability " + std::to_string(p) +
                    " is below p_min (dark-port condition)");
  }
  return numerator(e) / p;
}

WeakValue generalized_weak_value(const Circuit& circuit, const FockState& input,
                                 const Observable& obs,
                                 const PostSelectionOperator& ps,
                                 double p_min) {
  return OracleRun(circuit, input, obs).weak_value(ps, p_min);
}

WeakValue oracle_weak_value(const Circuit& circuit, const InputState& input,
                            const PostSelection& ps, const OracleOptions& opts) {
  const FockState state = prepare_input(circuit, input, opts);
  const OracleRun run(circuit, state,
                      observable::PhotonNumber{circuit.probe_modes});
  return run.weak_value(to_operator(ps, circuit.detect_mode), opts.p_min);
}

Lemma1Result lemma1_check(const Circuit& circuit, const InputState& input,
                          const Observable& obs,
                          const PostSelection& detector_effect,
                          const OracleOptions& opts) {
  const CompiledCircuit compiled = compile(circuit);
  CoherentVector rest{std::vector<Complex>(compiled.n_modes(), Complex(0.0))};
  if (const auto* coherent = std::get_if<input::Coherent>(&input)) {
    CoherentVector in{std::vector<Complex>(compiled.n_modes(), Complex(0.0))};
    in.amplitudes[static_cast<std::size_t>(circuit.input_mode)] = coherent->alpha;
    rest = apply_to_coherent(compiled.total, in);
  } else {
    const double t = transmittance(compiled);
    if (std::abs(1.0 - t) > 1e-12) {
      throw Error(ErrorKind::kNotFactorizable,
                  "a single photon split between the detect mode and the "
                  "rest (T = " + std::to_string(t) +
                      ") leaves an entangled final state");
    }
  }
  const FockState state = prepare_input(circuit, input, opts);
  const OracleRun run(circuit, state, obs);
  Lemma1Result out;
  out.rest_ignored =
      run.weak_value(to_operator(detector_effect, circuit.detect_mode), opts.p_min);
  out.rest_projected = run.weak_value(
      effect::RestProjected{circuit.detect_mode, detector_effect, rest},
      opts.p_min);
  out.difference = std::abs(out.rest_ignored - out.rest_projected);
  return out;
}

}  // namespace wvlab
