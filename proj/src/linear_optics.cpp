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

#include "wvlab/linear_optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wvlab/error.hpp"

namespace wvlab {
namespace {

void check_mode(int mode, int n_modes, const char* what) {
  if (mode < 0 || mode >= n_modes) {
    throw Error(ErrorKind::kInvalidModeIndex,
                std::string(what) + " mode " + std::to_string(mode) +
                    " out of range for " + std::to_string(n_modes) + " modes");
  }
}

void apply_block_to_rows(Eigen::MatrixXcd& m, int a, int b,
                         const Eigen::Matrix2cd& block) {
  const Eigen::RowVectorXcd row_a = m.row(a);
  const Eigen::RowVectorXcd row_b = m.row(b);
  m.row(a) = block(0, 0) * row_a + block(0, 1) * row_b;
  m.row(b) = block(1, 0) * row_a + block(1, 1) * row_b;
}

void validate_elements(const std::vector<CircuitElement>& elements,
                       int n_modes) {
  for (const auto& element : elements) {
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, BeamSplitter>) {
            check_mode(e.mode_a, n_modes, "beam splitter");
            check_mode(e.mode_b, n_modes, "beam splitter");
            if (e.mode_a == e.mode_b) {
              throw Error(ErrorKind::kInvalidModeIndex,
                          "beam splitter modes must be distinct");
            }
            if (!(e.theta >= 0.0 && e.theta <= std::numbers::pi / 2) ||
                !std::isfinite(e.phi)) {
              throw Error(ErrorKind::kDomainError,
                          "beam splitter theta must lie in [0, pi/2]");
            }
          } else if constexpr (std::is_same_v<T, PhaseShifter>) {
            check_mode(e.mode, n_modes, "phase shifter");
            if (!std::isfinite(e.phi)) {
              throw Error(ErrorKind::kDomainError, "phase must be finite");
            }
          } else {
            check_mode(e.mode, n_modes, "loss");
            if (!(e.eta >= 0.0 && e.eta <= 1.0)) {
              throw Error(ErrorKind::kDomainError,
                          "loss eta must lie in [0, 1]");
            }
          }
        },
        element);
  }
}

}  // namespace

ModeMatrix::ModeMatrix(std::size_t dim)
    : m_(Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(dim),
                                    static_cast<Eigen::Index>(dim))) {
  if (dim == 0) {
    throw Error(ErrorKind::kDimensionMismatch, "mode matrix needs dim >= 1");
  }
}

ModeMatrix ModeMatrix::from_matrix(Eigen::MatrixXcd m, double tolerance) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "mode matrix must be square with dim >= 1");
  }
  if (!m.allFinite()) {
    throw Error(ErrorKind::kNotUnitary, "mode matrix has non-finite entries");
  }
  ModeMatrix out(std::move(m));
  const double err = out.unitarity_error();
  if (!(err < tolerance)) {
    throw Error(ErrorKind::kNotUnitary,
                "matrix is not unitary (max deviation " + std::to_string(err) +
                    ")");
  }
  return out;
}

double ModeMatrix::unitarity_error() const {
  const auto n = m_.rows();
  return (m_.adjoint() * m_ - Eigen::MatrixXcd::Identity(n, n))
      .cwiseAbs()
      .maxCoeff();
}

ModeMatrix ModeMatrix::operator*(const ModeMatrix& rhs) const {
  if (dim() != rhs.dim()) {
    throw Error(ErrorKind::kDimensionMismatch, "mode matrix dims differ");
  }
  return ModeMatrix(Eigen::MatrixXcd(m_ * rhs.m_));
}

Eigen::Matrix2cd beam_splitter_block(double theta, double phi) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2cd b;
  b << c, -std::polar(s, -phi), std::polar(s, phi), c;
  return b;
}

bool Circuit::has_loss() const {
  auto is_loss = [](const CircuitElement& e) {
    return std::holds_alternative<Loss>(e);
  };
  return std::any_of(pre_probe.begin(), pre_probe.end(), is_loss) ||
         std::any_of(post_probe.begin(), post_probe.end(), is_loss);
}

void Circuit::validate() const {
  if (n_modes < 1) {
    throw Error(ErrorKind::kInvalidModeIndex, "circuit needs at least 1 mode");
  }
  check_mode(input_mode, n_modes, "input");
  check_mode(detect_mode, n_modes, "detect");
  if (probe_modes.empty()) {
    throw Error(ErrorKind::kInvalidModeIndex, "probe mode set is empty");
  }
  for (std::size_t i = 0; i < probe_modes.size(); ++i) {
    check_mode(probe_modes[i], n_modes, "probe");
    for (std::size_t j = 0; j < i; ++j) {
      if (probe_modes[i] == probe_modes[j]) {
        throw Error(ErrorKind::kInvalidModeIndex, "probe mode repeated");
      }
    }
  }
  validate_elements(pre_probe, n_modes);
  validate_elements(post_probe, n_modes);
}

double CoherentVector::mean_photon_number() const {
  double total = 0.0;
  for (const auto& a : amplitudes) total += std::norm(a);
  return total;
}

ModeMatrix compile_stage(const std::vector<CircuitElement>& elements,
                         int n_modes) {
  if (n_modes < 1) {
    throw Error(ErrorKind::kInvalidModeIndex, "stage needs at least 1 mode");
  }
  validate_elements(elements, n_modes);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(n_modes, n_modes);
  for (const auto& element : elements) {
    if (const auto* bs = std::get_if<BeamSplitter>(&element)) {
      apply_block_to_rows(m, bs->mode_a, bs->mode_b,
                          beam_splitter_block(bs->theta, bs->phi));
    } else if (const auto* ps = std::get_if<PhaseShifter>(&element)) {
      m.row(ps->mode) *= std::polar(1.0, ps->phi);
    } else {
      throw Error(ErrorKind::kLossNotExpanded,
                  "loss element present; expand losses before compiling");
    }
  }
  return ModeMatrix::from_matrix(std::move(m));
}

Circuit expand_loss(const Circuit& circuit) {
  Circuit out = circuit;
  int next_ancilla = circuit.n_modes;
  auto expand = [&](std::vector<CircuitElement>& stage) {
    for (auto& element : stage) {
      if (const auto* loss = std::get_if<Loss>(&element)) {
        const double theta = std::acos(std::sqrt(std::clamp(loss->eta, 0.0, 1.0)));
        element = BeamSplitter{loss->mode, next_ancilla++, theta, 0.0};
      }
    }
  };
  expand(out.pre_probe);
  expand(out.post_probe);
  out.n_modes = next_ancilla;
  return out;
}

CoherentVector apply_to_coherent(const ModeMatrix& m, const CoherentVector& a) {
  if (a.amplitudes.size() != m.dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "coherent vector has " + std::to_string(a.amplitudes.size()) +
                    " modes, matrix has " + std::to_string(m.dim()));
  }
  const Eigen::Map<const Eigen::VectorXcd> in(
      a.amplitudes.data(), static_cast<Eigen::Index>(a.amplitudes.size()));
  const Eigen::VectorXcd out = m.matrix() * in;
  return CoherentVector{std::vector<Complex>(out.begin(), out.end())};
}

CompiledCircuit compile(const Circuit& circuit) {
  circuit.validate();
  if (circuit.has_loss()) {
    throw Error(ErrorKind::kLossNotExpanded,
                "loss element present; expand losses before compiling");
  }
  ModeMatrix pre = compile_stage(circuit.pre_probe, circuit.n_modes);
  ModeMatrix post = compile_stage(circuit.post_probe, circuit.n_modes);
  ModeMatrix total = post * pre;
  return CompiledCircuit{std::move(pre), std::move(post), std::move(total),
                         circuit.input_mode, circuit.probe_modes,
                         circuit.detect_mode};
}

double transmittance(const CompiledCircuit& compiled) {
  return std::norm(compiled.total(static_cast<std::size_t>(compiled.detect_mode),
                                  static_cast<std::size_t>(compiled.input_mode)));
}

double transmittance(const Circuit& circuit) {
  return transmittance(compile(circuit));
}

std::vector<CircuitElement> decompose(const ModeMatrix& m, double tolerance) {
  const int n = static_cast<int>(m.dim());
  Eigen::MatrixXcd work = m.matrix();

  struct Rotation {
    int row;  // acts on (row - 1, row)
    Eigen::Matrix2cd g;
  };
  std::vector<Rotation> rotations;

  for (int col = 0; col + 1 < n; ++col) {
    for (int row = n - 1; row > col; --row) {
      const Complex x = work(row - 1, col);
      const Complex y = work(row, col);
      if (std::abs(y) == 0.0) continue;
      const double rho = std::hypot(std::abs(x), std::abs(y));
      Eigen::Matrix2cd g;
      g << std::conj(x) / rho, std::conj(y) / rho, -y / rho, x / rho;
      apply_block_to_rows(work, row - 1, row, g);
      work(row, col) = 0.0;
      rotations.push_back({row, g});
    }
  }

  // work is now diagonal: M = G_1^dag ... G_K^dag D.
  std::vector<CircuitElement> out;
  for (int j = 0; j < n; ++j) {
    const double phase = std::arg(work(j, j));
    if (phase != 0.0) out.push_back(PhaseShifter{j, phase});
  }
  for (auto it = rotations.rbegin(); it != rotations.rend(); ++it) {
    const Eigen::Matrix2cd h = it->g.adjoint();
    const int a = it->row - 1;
    const int b = it->row;
    // h = diag(e^{i alpha}, e^{i beta}) * B(theta, phi)
    const double c = std::abs(h(0, 0));
    const double s = std::abs(h(0, 1));
    const double theta = std::atan2(s, c);
    double alpha = 0.0;
    double phi = 0.0;
    double beta = 0.0;
    if (c > 1e-300) {
      alpha = std::arg(h(0, 0));
      beta = std::arg(h(1, 1));
      if (s > 1e-300) phi = alpha - std::arg(-h(0, 1));
    } else {
      alpha = std::arg(-h(0, 1));
      beta = std::arg(h(1, 0));
    }
    out.push_back(BeamSplitter{a, b, theta, phi});
    if (alpha != 0.0) out.push_back(PhaseShifter{a, alpha});
    if (beta != 0.0) out.push_back(PhaseShifter{b, beta});
  }

  const ModeMatrix recomposed = compile_stage(out, n);
  const double miss =
      (recomposed.matrix() - m.matrix()).cwiseAbs().maxCoeff();
  if (!(miss < tolerance)) {
    throw Error(ErrorKind::kDecompositionFailed,
                "Givens recomposition misses by " + std::to_string(miss));
  }
  return out;
}

}  // namespace wvlab
