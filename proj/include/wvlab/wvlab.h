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

/* C interface to wvlab: weak values of photon number on linear-optical
 * circuits, their truncated-Fock cross-check, and the pointer Monte-Carlo.
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns a wvlab_status; on
 * failure wvlab_last_error() describes the problem (thread-local, valid until
 * the next call on the same thread). */

#ifndef WVLAB_WVLAB_H_
#define WVLAB_WVLAB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define WVLAB_API __declspec(dllexport)
#else
#define WVLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wvlab_status {
  WVLAB_OK = 0,
  WVLAB_ERR_PARSE = 1,
  WVLAB_ERR_IO = 2,
  WVLAB_ERR_INVALID_ARGUMENT = 3,
  WVLAB_ERR_INVALID_CIRCUIT = 4,
  WVLAB_ERR_POSTSELECTION_TOO_RARE = 5,
  WVLAB_ERR_EMPTY_POPULATION = 6,
  WVLAB_ERR_NOT_FACTORIZABLE = 7,
  WVLAB_ERR_DOMAIN = 8,
  WVLAB_ERR_SIZE_LIMIT = 9,
  WVLAB_ERR_INTERNAL = 10
} wvlab_status;

typedef struct wvlab_experiment wvlab_experiment;
typedef struct wvlab_diagnostics wvlab_diagnostics;
typedef struct wvlab_shots wvlab_shots;

typedef struct wvlab_complex {
  double re;
  double im;
} wvlab_complex;

WVLAB_API const char* wvlab_version(void);
WVLAB_API const char* wvlab_last_error(void);
WVLAB_API const char* wvlab_status_name(wvlab_status status);
/* Worker threads used for sweeps and shots (honours WVLAB_THREADS). */
WVLAB_API int wvlab_thread_count(void);

/* ---- circuits ---------------------------------------------------------- */

typedef struct wvlab_diagnostic {
  int line;
  int column;
  const char* kind;    /* e.g. "IndexOutOfRange" */
  const char* message;
} wvlab_diagnostic;

/* On WVLAB_ERR_PARSE *diagnostics (if non-null) receives the full error
 * list; *out is set only on success. */
WVLAB_API wvlab_status wvlab_experiment_parse(const char* text, size_t len,
                                              wvlab_experiment** out,
                                              wvlab_diagnostics** diagnostics);
/* As above, reading a file; WVLAB_ERR_IO if it cannot be read. */
WVLAB_API wvlab_status wvlab_experiment_load(const char* path,
                                             wvlab_experiment** out,
                                             wvlab_diagnostics** diagnostics);
WVLAB_API void wvlab_experiment_free(wvlab_experiment* experiment);

WVLAB_API size_t wvlab_diagnostics_count(const wvlab_diagnostics* d);
/* Strings stay valid for the lifetime of the diagnostics handle. */
WVLAB_API wvlab_status wvlab_diagnostics_get(const wvlab_diagnostics* d,
                                             size_t index,
                                             wvlab_diagnostic* out);
WVLAB_API void wvlab_diagnostics_free(wvlab_diagnostics* d);

typedef enum wvlab_input_kind {
  WVLAB_INPUT_COHERENT = 0,
  WVLAB_INPUT_SINGLE_PHOTON = 1
} wvlab_input_kind;

typedef struct wvlab_experiment_info {
  int n_modes;          /* as written */
  int n_modes_expanded; /* including one vacuum ancilla per loss */
  int n_loss;
  int input_mode;
  int detect_mode;
  int n_probe_modes;
  wvlab_input_kind input_kind;
  wvlab_complex alpha;
  double transmittance;
  double unitarity_error; /* worst of the two compiled stages */
} wvlab_experiment_info;

/* Compiles the circuit; fails with WVLAB_ERR_INVALID_CIRCUIT if a stage is
 * not unitary within 1e-12. */
WVLAB_API wvlab_status wvlab_experiment_info_get(const wvlab_experiment* e,
                                                 wvlab_experiment_info* out);
/* Canonical text. Writes at most `capacity` bytes including the NUL;
 * *needed receives the full size including the NUL. */
WVLAB_API wvlab_status wvlab_experiment_serialize(const wvlab_experiment* e,
                                                  char* buffer,
                                                  size_t capacity,
                                                  size_t* needed);
/* 64 hex digits + NUL. */
WVLAB_API wvlab_status wvlab_experiment_digest(const wvlab_experiment* e,
                                               char out[65]);

/* ---- weak values ------------------------------------------------------- */

typedef enum wvlab_postselect_kind {
  WVLAB_PS_NONE = 0,
  WVLAB_PS_FOCK = 1,
  WVLAB_PS_CLICK = 2,
  WVLAB_PS_NOCLICK = 3
} wvlab_postselect_kind;

typedef struct wvlab_postselect {
  wvlab_postselect_kind kind;
  int m; /* photon count for WVLAB_PS_FOCK */
} wvlab_postselect;

typedef enum wvlab_engine {
  WVLAB_ENGINE_ANALYTIC = 0,
  WVLAB_ENGINE_ORACLE = 1
} wvlab_engine;

typedef struct wvlab_options {
  double p_min;          /* default 1e-12 */
  double tail_tolerance; /* default 1e-12 */
  int cutoff;            /* <= 0 selects the cutoff rule */
} wvlab_options;

WVLAB_API void wvlab_options_default(wvlab_options* out);

typedef struct wvlab_wv_result {
  wvlab_complex value;
  double probability;     /* of the post-selection */
  double truncation_tail; /* oracle only, else 0 */
  int cutoff;             /* oracle only, else 0 */
} wvlab_wv_result;

/* opts may be NULL for defaults. */
WVLAB_API wvlab_status wvlab_weak_value(const wvlab_experiment* e,
                                        wvlab_postselect ps,
                                        wvlab_engine engine,
                                        const wvlab_options* opts,
                                        wvlab_wv_result* out);

typedef struct wvlab_theorem_row {
  double alpha_sq;
  double p_star;
  wvlab_complex click;
  wvlab_complex no_click;
  double f;
  wvlab_complex reconstructed;
  wvlab_complex single_photon;
  double residual;
} wvlab_theorem_row;

/* Evaluates the click/no-click reconstruction at each |alpha|^2 (keeping the
 * phase of the file's alpha). Needs a coherent input and alpha_sq > 0.
 * rows[i] corresponds to alpha_sq[i]. */
WVLAB_API wvlab_status wvlab_theorem_sweep(const wvlab_experiment* e,
                                           const double* alpha_sq, size_t n,
                                           const wvlab_options* opts,
                                           wvlab_theorem_row* rows);

typedef struct wvlab_lemma_result {
  wvlab_complex rest_ignored;
  wvlab_complex rest_projected;
  double difference;
  double truncation_tail;
  int cutoff;
} wvlab_lemma_result;

/* Detector effect `ps` on the detect mode; the rest of the modes are either
 * ignored or projected on their final coherent state. */
WVLAB_API wvlab_status wvlab_lemma(const wvlab_experiment* e,
                                   wvlab_postselect ps,
                                   const wvlab_options* opts,
                                   wvlab_lemma_result* out);

/* ---- pointer Monte-Carlo ----------------------------------------------- */

typedef enum wvlab_variable {
  WVLAB_POSITION = 0,
  WVLAB_MOMENTUM = 1
} wvlab_variable;

typedef struct wvlab_mc_config {
  uint64_t shots;
  double g;       /* pointer shift per photon */
  double sigma_x; /* pointer position spread */
  uint64_t seed;
  wvlab_variable variable;
} wvlab_mc_config;

WVLAB_API void wvlab_mc_config_default(wvlab_mc_config* out);

typedef enum wvlab_protocol {
  WVLAB_PROTOCOL_SUBTRACT_AND_SCALE = 0, /* coherent input */
  WVLAB_PROTOCOL_CLICK_ONLY = 1          /* single-photon input */
} wvlab_protocol;

typedef struct wvlab_mc_summary {
  wvlab_protocol protocol;
  wvlab_variable variable;
  uint64_t n_click;
  uint64_t n_no_click;
  double click_fraction;
  double exact_click_probability; /* under the finite coupling */
  wvlab_complex click_wv;         /* conditional mean / gain */
  wvlab_complex no_click_wv;
  double estimate;   /* Re for position runs, Im for momentum runs */
  double std_error;
  double target;     /* exact single-photon click weak value component */
  double z_score;
  double weakness_ratio;
  double posterior_lower; /* pointer range used by the sampler */
  double posterior_upper;
} wvlab_mc_summary;

WVLAB_API wvlab_status wvlab_montecarlo_run(const wvlab_experiment* e,
                                            const wvlab_mc_config* cfg,
                                            const wvlab_options* opts,
                                            wvlab_shots** out);
WVLAB_API wvlab_status wvlab_shots_summary(const wvlab_shots* shots,
                                           wvlab_mc_summary* out);
WVLAB_API size_t wvlab_shots_count(const wvlab_shots* shots);
/* outcome: 1 click, 0 no click. */
WVLAB_API wvlab_status wvlab_shots_get(const wvlab_shots* shots, size_t index,
                                       int* outcome, double* value);
/* Counts per bin over [lower, upper); arrays hold `bins` entries. */
WVLAB_API wvlab_status wvlab_shots_histogram(const wvlab_shots* shots,
                                             size_t bins, double lower,
                                             double upper,
                                             uint64_t* click_counts,
                                             uint64_t* no_click_counts);
WVLAB_API void wvlab_shots_free(wvlab_shots* shots);

#ifdef __cplusplus
}
#endif

#endif /* WVLAB_WVLAB_H_ */
