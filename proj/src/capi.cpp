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

#include "wvlab/wvlab.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <memory>
#include <fstream>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "wvlab/dsl.hpp"
#include "wvlab/error.hpp"
#include "wvlab/fock.hpp"
#include "wvlab/parallel.hpp"
#include "wvlab/pointer.hpp"
#include "wvlab/weak_value.hpp"

struct wvlab_experiment {
  wvlab::Experiment raw;
  wvlab::Circuit expanded;
};

struct wvlab_diagnostics {
  std::vector<wvlab::ParseError> errors;
};

struct wvlab_shots {
  std::vector<wvlab::ShotRecord> records;
  wvlab_mc_summary summary{};
};

namespace {

thread_local std::string last_error;

wvlab_status status_for(wvlab::ErrorKind kind) {
  using wvlab::ErrorKind;
  switch (kind) {
    case ErrorKind::kInvalidModeIndex:
    case ErrorKind::kLossNotExpanded:
    case ErrorKind::kDimensionMismatch:
    case ErrorKind::kNotUnitary:
      return WVLAB_ERR_INVALID_CIRCUIT;
    case ErrorKind::kDomainError:
      return WVLAB_ERR_DOMAIN;
    case ErrorKind::kPostSelectionTooRare:
      return WVLAB_ERR_POSTSELECTION_TOO_RARE;
    case ErrorKind::kSizeLimitExceeded:
    case ErrorKind::kTailTooLarge:
    case ErrorKind::kDecompositionFailed:
      return WVLAB_ERR_SIZE_LIMIT;
    case ErrorKind::kNotFactorizable:
      return WVLAB_ERR_NOT_FACTORIZABLE;
    case ErrorKind::kEmptyPopulation:
      return WVLAB_ERR_EMPTY_POPULATION;
    case ErrorKind::kInvalidArgument:
      return WVLAB_ERR_INVALID_ARGUMENT;
  }
  return WVLAB_ERR_INTERNAL;
}

wvlab_status fail(wvlab_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <typename Body>
wvlab_status guarded(Body&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const wvlab::Error& e) {
    return fail(status_for(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(WVLAB_ERR_SIZE_LIMIT, "out of memory");
  } catch (const std::exception& e) {
    return fail(WVLAB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(WVLAB_ERR_INTERNAL, "unknown failure");
  }
}

wvlab_complex to_c(wvlab::Complex z) { return {z.real(), z.imag()}; }

wvlab::PostSelection to_postselection(wvlab_postselect ps) {
  switch (ps.kind) {
    case WVLAB_PS_NONE: return wvlab::postselect::None{};
    case WVLAB_PS_FOCK:
      if (ps.m < 0) {
        throw wvlab::Error(wvlab::ErrorKind::kInvalidArgument,
                           "photon count must be >= 0");
      }
      return wvlab::postselect::Fock{ps.m};
    case WVLAB_PS_CLICK: return wvlab::postselect::Click{};
    case WVLAB_PS_NOCLICK: return wvlab::postselect::NoClick{};
  }
  throw wvlab::Error(wvlab::ErrorKind::kInvalidArgument,
                     "unknown post-selection kind");
}

wvlab::EngineOptions engine_options(const wvlab_options* opts) {
  wvlab::EngineOptions out;
  if (opts != nullptr) out.p_min = opts->p_min;
  return out;
}

wvlab::OracleOptions oracle_options(const wvlab_options* opts) {
  wvlab::OracleOptions out;
  if (opts != nullptr) {
    out.p_min = opts->p_min;
    out.tail_tolerance = opts->tail_tolerance;
    if (opts->cutoff > 0) out.cutoff = opts->cutoff;
  }
  return out;
}

void require(bool condition, const char* what) {
  if (!condition) {
    throw wvlab::Error(wvlab::ErrorKind::kInvalidArgument, what);
  }
}

const wvlab::input::Coherent& require_coherent(const wvlab_experiment* e) {
  const auto* coherent = std::get_if<wvlab::input::Coherent>(&e->raw.input);
  if (coherent == nullptr) {
    throw wvlab::Error(wvlab::ErrorKind::kDomainError,
                       "this command needs a coherent input");
  }
  return *coherent;
}

// Probability of `ps` under the analytic model.
double analytic_probability(const wvlab::CompiledCircuit& c,
                            const wvlab::InputState& input,
                            const wvlab::PostSelection& ps) {
  const double t = wvlab::transmittance(c);
  const auto* coherent = std::get_if<wvlab::input::Coherent>(&input);
  const double mean = coherent ? t * std::norm(coherent->alpha) : 0.0;
  return std::visit(
      [&](const auto& sel) -> double {
        using T = std::decay_t<decltype(sel)>;
        if constexpr (std::is_same_v<T, wvlab::postselect::None>) {
          return 1.0;
        } else if constexpr (std::is_same_v<T, wvlab::postselect::Fock>) {
          if (!coherent) return sel.m == 0 ? 1.0 - t : (sel.m == 1 ? t : 0.0);
          if (mean == 0.0) return sel.m == 0 ? 1.0 : 0.0;
          return std::exp(-mean + sel.m * std::log(mean) - std::lgamma(sel.m + 1.0));
        } else if constexpr (std::is_same_v<T, wvlab::postselect::Click>) {
          return coherent ? -std::expm1(-mean) : t;
        } else {
          return coherent ? std::exp(-mean) : 1.0 - t;
        }
      },
      ps);
}

wvlab_status parse_into(std::string_view text, wvlab_experiment** out,
                        wvlab_diagnostics** diagnostics) {
  if (diagnostics != nullptr) *diagnostics = nullptr;
  wvlab::ParseResult result = wvlab::parse(text);
  if (!result.ok()) {
    std::string message = "parse failed with " +
                          std::to_string(result.errors.size()) + " error(s)";
    if (!result.errors.empty()) {
      const auto& first = result.errors.front();
      message += "; first at " + std::to_string(first.span.line) + ":" +
                 std::to_string(first.span.column) + ": " + first.message;
    }
    if (diagnostics != nullptr) {
      *diagnostics = new wvlab_diagnostics{std::move(result.errors)};
    }
    return fail(WVLAB_ERR_PARSE, message);
  }
  auto* handle = new wvlab_experiment{*result.experiment, {}};
  try {
    handle->expanded = wvlab::expand_loss(handle->raw.circuit);
  } catch (...) {
    delete handle;
    throw;
  }
  *out = handle;
  return WVLAB_OK;
}

}  // namespace

extern "C" {

const char* wvlab_version(void) { return "1.0.0"; }

const char* wvlab_last_error(void) { return last_error.c_str(); }

const char* wvlab_status_name(wvlab_status status) {
  switch (status) {
    case WVLAB_OK: return "ok";
    case WVLAB_ERR_PARSE: return "parse error";
    case WVLAB_ERR_IO: return "io error";
    case WVLAB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case WVLAB_ERR_INVALID_CIRCUIT: return "invalid circuit";
    case WVLAB_ERR_POSTSELECTION_TOO_RARE: return "post-selection too rare";
    case WVLAB_ERR_EMPTY_POPULATION: return "empty population";
    case WVLAB_ERR_NOT_FACTORIZABLE: return "not factorizable";
    case WVLAB_ERR_DOMAIN: return "domain error";
    case WVLAB_ERR_SIZE_LIMIT: return "size limit";
    case WVLAB_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

int wvlab_thread_count(void) { return wvlab::worker_count(); }

wvlab_status wvlab_experiment_parse(const char* text, size_t len,
                                    wvlab_experiment** out,
                                    wvlab_diagnostics** diagnostics) {
  return guarded([&] {
    require(out != nullptr && (text != nullptr || len == 0), "null argument");
    *out = nullptr;
    return parse_into(std::string_view(text == nullptr ? "" : text, len), out,
                      diagnostics);
  });
}

wvlab_status wvlab_experiment_load(const char* path, wvlab_experiment** out,
                                   wvlab_diagnostics** diagnostics) {
  return guarded([&] {
    require(out != nullptr && path != nullptr, "null argument");
    *out = nullptr;
    if (diagnostics != nullptr) *diagnostics = nullptr;
    std::ifstream file(path, std::ios::binary);
    if (!file) {
      return fail(WVLAB_ERR_IO, std::string("cannot open '") + path + "'");
    }
    std::ostringstream buffer;
    buffer << file.rdbuf();
    if (file.bad()) {
      return fail(WVLAB_ERR_IO, std::string("cannot read '") + path + "'");
    }
    return parse_into(buffer.str(), out, diagnostics);
  });
}

void wvlab_experiment_free(wvlab_experiment* experiment) { delete experiment; }

size_t wvlab_diagnostics_count(const wvlab_diagnostics* d) {
  return d == nullptr ? 0 : d->errors.size();
}

wvlab_status wvlab_diagnostics_get(const wvlab_diagnostics* d, size_t index,
                                   wvlab_diagnostic* out) {
  return guarded([&] {
    require(d != nullptr && out != nullptr, "null argument");
    require(index < d->errors.size(), "diagnostic index out of range");
    const auto& err = d->errors[index];
    *out = {err.span.line, err.span.column, wvlab::to_string(err.kind),
            err.message.c_str()};
    return WVLAB_OK;
  });
}

void wvlab_diagnostics_free(wvlab_diagnostics* d) { delete d; }

wvlab_status wvlab_experiment_info_get(const wvlab_experiment* e,
                                       wvlab_experiment_info* out) {
  return guarded([&] {
    require(e != nullptr && out != nullptr, "null argument");
    const wvlab::CompiledCircuit c = wvlab::compile(e->expanded);
    wvlab_experiment_info info{};
    info.n_modes = e->raw.circuit.n_modes;
    info.n_modes_expanded = e->expanded.n_modes;
    info.n_loss = e->expanded.n_modes - e->raw.circuit.n_modes;
    info.input_mode = e->raw.circuit.input_mode;
    info.detect_mode = e->raw.circuit.detect_mode;
    info.n_probe_modes = static_cast<int>(e->raw.circuit.probe_modes.size());
    if (const auto* coherent = std::get_if<wvlab::input::Coherent>(&e->raw.input)) {
      info.input_kind = WVLAB_INPUT_COHERENT;
      info.alpha = to_c(coherent->alpha);
    } else {
      info.input_kind = WVLAB_INPUT_SINGLE_PHOTON;
    }
    info.transmittance = wvlab::transmittance(c);
    info.unitarity_error =
        std::max(c.pre.unitarity_error(), c.post.unitarity_error());
    *out = info;
    return WVLAB_OK;
  });
}

wvlab_status wvlab_experiment_serialize(const wvlab_experiment* e, char* buffer,
                                        size_t capacity, size_t* needed) {
  return guarded([&] {
    require(e != nullptr, "null argument");
    const std::string text = wvlab::serialize(e->raw);
    if (needed != nullptr) *needed = text.size() + 1;
    if (buffer != nullptr && capacity > 0) {
      const std::size_t n = std::min(capacity - 1, text.size());
      std::memcpy(buffer, text.data(), n);
      buffer[n] = '\0';
    }
    return WVLAB_OK;
  });
}

wvlab_status wvlab_experiment_digest(const wvlab_experiment* e, char out[65]) {
  return guarded([&] {
    require(e != nullptr && out != nullptr, "null argument");
    const std::string hex = wvlab::digest(e->raw);
    std::memcpy(out, hex.c_str(), 65);
    return WVLAB_OK;
  });
}

void wvlab_options_default(wvlab_options* out) {
  if (out != nullptr) *out = {1e-12, 1e-12, 0};
}

wvlab_status wvlab_weak_value(const wvlab_experiment* e, wvlab_postselect ps,
                              wvlab_engine engine, const wvlab_options* opts,
                              wvlab_wv_result* out) {
  return guarded([&] {
    require(e != nullptr && out != nullptr, "null argument");
    const wvlab::PostSelection sel = to_postselection(ps);
    wvlab_wv_result result{};
    if (engine == WVLAB_ENGINE_ANALYTIC) {
      const wvlab::CompiledCircuit c = wvlab::compile(e->expanded);
      const wvlab::EngineOptions eo = engine_options(opts);
      wvlab::WeakValue wv;
      if (const auto* coherent = std::get_if<wvlab::input::Coherent>(&e->raw.input)) {
        wv = wvlab::wv_coherent(c, coherent->alpha, sel, eo);
      } else {
        wv = wvlab::wv_single_photon(c, sel, eo);
      }
      result.value = to_c(wv);
      result.probability = analytic_probability(c, e->raw.input, sel);
    } else if (engine == WVLAB_ENGINE_ORACLE) {
      const wvlab::OracleOptions oo = oracle_options(opts);
      const wvlab::FockState state =
          wvlab::prepare_input(e->expanded, e->raw.input, oo);
      const wvlab::OracleRun run(
          e->expanded, state,
          wvlab::observable::PhotonNumber{e->expanded.probe_modes});
      const auto op = wvlab::to_operator(sel, e->expanded.detect_mode);
      result.value = to_c(run.weak_value(op, oo.p_min));
      result.probability = run.probability(op);
      result.truncation_tail = state.truncation_tail;
      result.cutoff = state.basis->cutoff();
    } else {
      require(false, "unknown engine");
    }
    *out = result;
    return WVLAB_OK;
  });
}

wvlab_status wvlab_theorem_sweep(const wvlab_experiment* e,
                                 const double* alpha_sq, size_t n,
                                 const wvlab_options* opts,
                                 wvlab_theorem_row* rows) {
  return guarded([&] {
    require(e != nullptr && (n == 0 || (alpha_sq != nullptr && rows != nullptr)),
            "null argument");
    const auto& coherent = require_coherent(e);
    for (size_t i = 0; i < n; ++i) {
      if (!(alpha_sq[i] > 0.0) || !std::isfinite(alpha_sq[i])) {
        char value[32];
        std::snprintf(value, sizeof value, "%g", alpha_sq[i]);
        throw wvlab::Error(wvlab::ErrorKind::kDomainError,
                           std::string("|alpha|^2 = ") + value +
                               " gives p_star = 0; the reconstruction needs "
                               "a positive finite intensity");
      }
    }
    const double phase =
        std::abs(coherent.alpha) > 0.0 ? std::arg(coherent.alpha) : 0.0;
    const wvlab::CompiledCircuit c = wvlab::compile(e->expanded);
    const wvlab::EngineOptions eo = engine_options(opts);
    const wvlab::WeakValue single =
        wvlab::wv_single_photon(c, wvlab::postselect::Fock{1}, eo);
    wvlab::parallel_for(n, [&](std::size_t i) {
      const wvlab::Complex alpha = std::polar(std::sqrt(alpha_sq[i]), phase);
      wvlab_theorem_row row{};
      row.alpha_sq = alpha_sq[i];
      row.p_star = wvlab::click_probability(c, alpha);
      const auto click = wvlab::wv_coherent(c, alpha, wvlab::postselect::Click{}, eo);
      const auto no_click =
          wvlab::wv_coherent(c, alpha, wvlab::postselect::NoClick{}, eo);
      row.click = to_c(click);
      row.no_click = to_c(no_click);
      row.f = wvlab::scaling_function(-row.p_star);
      const wvlab::WeakValue reconstructed = (click - no_click) * row.f;
      row.reconstructed = to_c(reconstructed);
      row.single_photon = to_c(single);
      row.residual = std::abs(reconstructed - single);
      rows[i] = row;
    });
    return WVLAB_OK;
  });
}

wvlab_status wvlab_lemma(const wvlab_experiment* e, wvlab_postselect ps,
                         const wvlab_options* opts, wvlab_lemma_result* out) {
  return guarded([&] {
    require(e != nullptr && out != nullptr, "null argument");
    const wvlab::OracleOptions oo = oracle_options(opts);
    const auto result = wvlab::lemma1_check(
        e->expanded, e->raw.input,
        wvlab::observable::PhotonNumber{e->expanded.probe_modes},
        to_postselection(ps), oo);
    wvlab_lemma_result r{};
    r.rest_ignored = to_c(result.rest_ignored);
    r.rest_projected = to_c(result.rest_projected);
    r.difference = result.difference;
    const wvlab::FockState state =
        wvlab::prepare_input(e->expanded, e->raw.input, oo);
    r.truncation_tail = state.truncation_tail;
    r.cutoff = state.basis->cutoff();
    *out = r;
    return WVLAB_OK;
  });
}

void wvlab_mc_config_default(wvlab_mc_config* out) {
  if (out != nullptr) *out = {1000000, 0.02, 1.0, 1, WVLAB_POSITION};
}

wvlab_status wvlab_montecarlo_run(const wvlab_experiment* e,
                                  const wvlab_mc_config* cfg,
                                  const wvlab_options* opts,
                                  wvlab_shots** out) {
  return guarded([&] {
    require(e != nullptr && cfg != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    require(cfg->shots >= 1, "need at least one shot");
    const wvlab::PointerConfig pointer{cfg->sigma_x, cfg->g};
    pointer.validate();
    const auto variable = cfg->variable == WVLAB_MOMENTUM
                              ? wvlab::PointerVariable::kMomentum
                              : wvlab::PointerVariable::kPosition;
    const wvlab::OracleOptions oo = oracle_options(opts);
    const wvlab::ShotModel model = wvlab::build_shot_model(
        e->expanded, e->raw.input, pointer, variable, oo);

    auto shots = std::make_unique<wvlab_shots>();
    shots->records = wvlab::run_shots(model, cfg->shots, cfg->seed, variable);
    const bool coherent =
        std::holds_alternative<wvlab::input::Coherent>(e->raw.input);
    const auto protocol = coherent ? wvlab::Protocol::kSubtractAndScale
                                   : wvlab::Protocol::kClickOnly;
    const wvlab::ProtocolEstimate est =
        wvlab::estimate_protocol(shots->records, pointer, protocol);
    const wvlab::WeakValue target = wvlab::wv_single_photon(
        wvlab::compile(e->expanded), wvlab::postselect::Fock{1},
        engine_options(opts));

    wvlab_mc_summary& s = shots->summary;
    s.protocol = coherent ? WVLAB_PROTOCOL_SUBTRACT_AND_SCALE
                          : WVLAB_PROTOCOL_CLICK_ONLY;
    s.variable = cfg->variable == WVLAB_MOMENTUM ? WVLAB_MOMENTUM : WVLAB_POSITION;
    s.n_click = est.n_click;
    s.n_no_click = est.n_no_click;
    s.click_fraction = est.click_fraction;
    s.exact_click_probability = model.click_probability;
    s.click_wv = to_c(est.click_wv);
    s.no_click_wv = to_c(est.no_click_wv);
    const auto& part =
        variable == wvlab::PointerVariable::kPosition ? est.real_part : est.imag_part;
    s.estimate = part->mean;
    s.std_error = part->std_error;
    s.target = variable == wvlab::PointerVariable::kPosition ? target.real()
                                                              : target.imag();
    s.z_score = s.std_error > 0.0 ? (s.estimate - s.target) / s.std_error
                                  : std::numeric_limits<double>::infinity();
    s.weakness_ratio = pointer.weakness_ratio(model.max_relevant_n);
    s.posterior_lower = std::numeric_limits<double>::infinity();
    s.posterior_upper = -std::numeric_limits<double>::infinity();
    for (const auto* posterior : {&model.click, &model.no_click}) {
      if (!posterior->has_value()) continue;
      s.posterior_lower = std::min(s.posterior_lower, (*posterior)->lower());
      s.posterior_upper = std::max(s.posterior_upper, (*posterior)->upper());
    }
    *out = shots.release();
    return WVLAB_OK;
  });
}

wvlab_status wvlab_shots_summary(const wvlab_shots* shots,
                                 wvlab_mc_summary* out) {
  return guarded([&] {
    require(shots != nullptr && out != nullptr, "null argument");
    *out = shots->summary;
    return WVLAB_OK;
  });
}

size_t wvlab_shots_count(const wvlab_shots* shots) {
  return shots == nullptr ? 0 : shots->records.size();
}

wvlab_status wvlab_shots_get(const wvlab_shots* shots, size_t index,
                             int* outcome, double* value) {
  return guarded([&] {
    require(shots != nullptr, "null argument");
    require(index < shots->records.size(), "shot index out of range");
    const auto& r = shots->records[index];
    if (outcome != nullptr) *outcome = r.outcome == wvlab::Outcome::kClick ? 1 : 0;
    if (value != nullptr) *value = r.x_sample ? *r.x_sample : r.p_sample.value_or(0.0);
    return WVLAB_OK;
  });
}

wvlab_status wvlab_shots_histogram(const wvlab_shots* shots, size_t bins,
                                   double lower, double upper,
                                   uint64_t* click_counts,
                                   uint64_t* no_click_counts) {
  return guarded([&] {
    require(shots != nullptr && click_counts != nullptr &&
                no_click_counts != nullptr,
            "null argument");
    const auto variable = shots->summary.variable == WVLAB_MOMENTUM
                              ? wvlab::PointerVariable::kMomentum
                              : wvlab::PointerVariable::kPosition;
    const wvlab::Histogram h =
        wvlab::pointer_histogram(shots->records, variable, bins, lower, upper);
    for (size_t i = 0; i < bins; ++i) {
      click_counts[i] = h.click[i];
      no_click_counts[i] = h.no_click[i];
    }
    return WVLAB_OK;
  });
}

void wvlab_shots_free(wvlab_shots* shots) { delete shots; }

}  // extern "C"
