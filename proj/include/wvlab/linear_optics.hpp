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

#ifndef WVLAB_LINEAR_OPTICS_HPP_
#define WVLAB_LINEAR_OPTICS_HPP_

#include <complex>
#include <cstddef>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace wvlab {

using Complex = std::complex<double>;

inline constexpr double kUnitarityTolerance = 1e-12;

/// Unitary transformation of mode amplitudes: a_out = M a_in. Equivalently
/// the creation operators transform as U a_k^dag U^dag = sum_j M(j, k) a_j^dag.
class ModeMatrix {
 public:
  /// Identity on `dim` modes.
  explicit ModeMatrix(std::size_t dim);

  /// Validates unitarity; throws Error(kNotUnitary) or kDimensionMismatch.
  static ModeMatrix from_matrix(Eigen::MatrixXcd m,
                                double tolerance = kUnitarityTolerance);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  Complex operator()(std::size_t row, std::size_t col) const {
    return m_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }
  const Eigen::MatrixXcd& matrix() const { return m_; }

  /// max |(M^dag M - I)_{ij}|
  double unitarity_error() const;

  ModeMatrix operator*(const ModeMatrix& rhs) const;

 private:
  explicit ModeMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {}

  Eigen::MatrixXcd m_;
};

struct BeamSplitter {
  int mode_a = 0;
  int mode_b = 1;
  double theta = 0.0;
  double phi = 0.0;
  bool operator==(const BeamSplitter&) const = default;
};

struct PhaseShifter {
  int mode = 0;
  double phi = 0.0;
  bool operator==(const PhaseShifter&) const = default;
};

struct Loss {
  int mode = 0;
  double eta = 1.0;
  bool operator==(const Loss&) const = default;
};

using CircuitElement = std::variant<BeamSplitter, PhaseShifter, Loss>;

/// 2x2 block of a beam splitter on (mode_a, mode_b):
///   [[cos t, -e^{-i p} sin t], [e^{i p} sin t, cos t]]
Eigen::Matrix2cd beam_splitter_block(double theta, double phi);

struct Circuit {
  int n_modes = 1;
  std::vector<CircuitElement> pre_probe;
  std::vector<CircuitElement> post_probe;
  int input_mode = 0;
  std::vector<int> probe_modes{0};
  int detect_mode = 0;

  bool operator==(const Circuit&) const = default;

  bool has_loss() const;
  /// Throws Error(kInvalidModeIndex) on any out-of-range or repeated index
  /// and Error(kDomainError) on theta/eta outside their ranges.
  void validate() const;
};

struct CoherentVector {
  std::vector<Complex> amplitudes;

  double mean_photon_number() const;
};

/// Ordered product of the elementary matrices: the last element is applied
/// last, so the result is E_k ... E_2 E_1.
ModeMatrix compile_stage(const std::vector<CircuitElement>& elements,
                         int n_modes);

/// Replaces every Loss(mode, eta) by a beam splitter onto a fresh vacuum
/// ancilla appended after the existing modes, with cos^2(theta) = eta.
Circuit expand_loss(const Circuit& circuit);

CoherentVector apply_to_coherent(const ModeMatrix& m, const CoherentVector& a);

/// Both stages compiled once, plus the total transformation M2 * M1.
struct CompiledCircuit {
  ModeMatrix pre;
  ModeMatrix post;
  ModeMatrix total;
  int input_mode = 0;
  std::vector<int> probe_modes;
  int detect_mode = 0;

  std::size_t n_modes() const { return total.dim(); }
};

CompiledCircuit compile(const Circuit& circuit);

/// |(M2 M1)_{detect, input}|^2
double transmittance(const Circuit& circuit);
double transmittance(const CompiledCircuit& compiled);

/// Givens (Reck-style) decomposition of a unitary into beam splitters and
/// phase shifters such that compile_stage(result, dim) reproduces `m`.
/// Throws Error(kDecompositionFailed) if the recomposition misses by more
/// than `tolerance` in max-norm.
std::vector<CircuitElement> decompose(const ModeMatrix& m,
                                      double tolerance = 1e-10);

}  // namespace wvlab

#endif  // WVLAB_LINEAR_OPTICS_HPP_
