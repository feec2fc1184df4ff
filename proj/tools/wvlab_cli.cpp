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

// wvlab command-line front end. Everything goes through the C API.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wvlab/wvlab.h"

namespace {

using nlohmann::ordered_json;

enum ExitCode : int {
  kExitOk = 0,
  kExitTolerance = 1,
  kExitParse = 2,
  kExitIo = 3,
  kExitDomain = 4,
};

int exit_code_for(wvlab_status status) {
  switch (status) {
    case WVLAB_OK: return kExitOk;
    case WVLAB_ERR_PARSE:
    case WVLAB_ERR_INVALID_CIRCUIT: return kExitParse;
    case WVLAB_ERR_IO: return kExitIo;
    default: return kExitDomain;
  }
}

// Raised inside a command; carries the exit code and a message for stderr.
struct Failure {
  int code;
  std::string message;
};

void check(wvlab_status status) {
  if (status != WVLAB_OK) {
    throw Failure{exit_code_for(status), std::string(wvlab_status_name(status)) +
                                             ": " + wvlab_last_error()};
  }
}

struct ExperimentDeleter {
  void operator()(wvlab_experiment* e) const { wvlab_experiment_free(e); }
};
struct ShotsDeleter {
  void operator()(wvlab_shots* s) const { wvlab_shots_free(s); }
};
using ExperimentPtr = std::unique_ptr<wvlab_experiment, ExperimentDeleter>;
using ShotsPtr = std::unique_ptr<wvlab_shots, ShotsDeleter>;

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}
std::string num(double v) { return fmt("%.17g", v); }
std::string short_num(double v) { return fmt("%.10g", v); }

void print_diagnostics(const std::string& file, const wvlab_diagnostics* d) {
  const std::size_t n = wvlab_diagnostics_count(d);
  for (std::size_t i = 0; i < n; ++i) {
    wvlab_diagnostic diag;
    if (wvlab_diagnostics_get(d, i, &diag) != WVLAB_OK) continue;
    std::cerr << file << ":" << diag.line << ":" << diag.column << ": "
              << diag.kind << ": " << diag.message << "\n";
  }
}

ExperimentPtr load(const std::string& file) {
  wvlab_experiment* raw = nullptr;
  wvlab_diagnostics* diags = nullptr;
  const wvlab_status status = wvlab_experiment_load(file.c_str(), &raw, &diags);
  const std::string error = wvlab_last_error();
  if (diags != nullptr) {
    print_diagnostics(file, diags);
    wvlab_diagnostics_free(diags);
  }
  if (status != WVLAB_OK) {
    throw Failure{exit_code_for(status),
                  std::string(wvlab_status_name(status)) + ": " + error};
  }
  return ExperimentPtr(raw);
}

std::string digest_of(const wvlab_experiment* e) {
  char hex[65];
  check(wvlab_experiment_digest(e, hex));
  return hex;
}

ordered_json complex_json(wvlab_complex z) {
  return ordered_json{{"re", z.re}, {"im", z.im}};
}

// Plain table: header row plus data rows, columns padded to width.
std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << "  ";
      out << row[c] << std::string(width[c] - row[c].size(), ' ');
    }
    out << "\n";
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  return out.str();
}

std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << "\n";
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  return out.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure{kExitIo, "cannot write '" + path + "'"};
}

struct Common {
  std::string file;
  std::string format = "table";
  std::string out;
  double p_min = 1e-12;
  double tail_tolerance = 1e-12;
  int cutoff = 0;

  wvlab_options options() const {
    wvlab_options o;
    wvlab_options_default(&o);
    o.p_min = p_min;
    o.tail_tolerance = tail_tolerance;
    o.cutoff = cutoff;
    return o;
  }
};

void add_common(CLI::App* cmd, Common& c, bool with_format = true) {
  cmd->add_option("file", c.file, "Circuit description (.wvc)")->required();
  if (with_format) {
    cmd->add_option("--format", c.format, "table, csv or json")
        ->check(CLI::IsMember({"table", "csv", "json"}));
    cmd->add_option("--out", c.out, "Write the report here instead of stdout");
  }
  cmd->add_option("--p-min", c.p_min, "Smallest accepted post-selection probability")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--tail-tolerance", c.tail_tolerance,
                  "Largest accepted Fock truncation tail")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--cutoff", c.cutoff, "Fock cutoff (0 selects it automatically)")
      ->check(CLI::NonNegativeNumber);
}

ordered_json report_header(const std::string& command, const wvlab_experiment* e,
                           const Common& c) {
  ordered_json j;
  j["schema"] = 1;
  j["command"] = command;
  j["file"] = c.file;
  j["digest"] = digest_of(e);
  return j;
}

void finish_json(ordered_json& j, std::chrono::steady_clock::time_point start) {
  j["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

wvlab_postselect parse_postselect(const std::string& text) {
  if (text == "none") return {WVLAB_PS_NONE, 0};
  if (text == "click") return {WVLAB_PS_CLICK, 0};
  if (text == "noclick") return {WVLAB_PS_NOCLICK, 0};
  if (text.rfind("fock:", 0) == 0) {
    const std::string digits = text.substr(5);
    int m = -1;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), m);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && m >= 0) {
      return {WVLAB_PS_FOCK, m};
    }
  }
  throw Failure{kExitParse, "bad --postselect '" + text +
                                "' (expected none, fock:<m>, click or noclick)"};
}

// ---- validate -------------------------------------------------------------

int run_validate(const Common& c) {
  ExperimentPtr e = load(c.file);
  wvlab_experiment_info info;
  check(wvlab_experiment_info_get(e.get(), &info));
  std::cout << c.file << ": ok, " << info.n_modes << " modes";
  if (info.n_loss) std::cout << " (+" << info.n_loss << " loss ancillas)";
  std::cout << ", T = " << short_num(info.transmittance)
            << ", unitarity error " << fmt("%.3g", info.unitarity_error)
            << ", digest " << digest_of(e.get()) << "\n";
  return kExitOk;
}

// ---- wv -------------------------------------------------------------------

struct WvArgs {
  std::string postselect = "click";
  std::string engine = "analytic";
  double tolerance = 1e-6;
};

int run_wv(const Common& c, const WvArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentPtr e = load(c.file);
  const wvlab_postselect ps = parse_postselect(a.postselect);
  const wvlab_options opts = c.options();

  std::vector<std::pair<std::string, wvlab_wv_result>> results;
  if (a.engine == "analytic" || a.engine == "both") {
    wvlab_wv_result r;
    check(wvlab_weak_value(e.get(), ps, WVLAB_ENGINE_ANALYTIC, &opts, &r));
    results.emplace_back("analytic", r);
  }
  if (a.engine == "oracle" || a.engine == "both") {
    wvlab_wv_result r;
    check(wvlab_weak_value(e.get(), ps, WVLAB_ENGINE_ORACLE, &opts, &r));
    results.emplace_back("oracle", r);
  }
  double discrepancy = 0.0;
  const bool compared = results.size() == 2;
  if (compared) {
    discrepancy = std::hypot(results[0].second.value.re - results[1].second.value.re,
                             results[0].second.value.im - results[1].second.value.im);
  }
  const bool ok = !compared || discrepancy <= a.tolerance;

  std::string text;
  if (c.format == "json") {
    ordered_json j = report_header("wv", e.get(), c);
    j["parameters"] = {{"postselect", a.postselect}, {"engine", a.engine},
                       {"p_min", c.p_min}, {"cutoff", c.cutoff}};
    j["tolerances"] = {{"discrepancy", a.tolerance},
                       {"tail", c.tail_tolerance}};
    ordered_json rows = ordered_json::array();
    double tail = 0.0;
    for (const auto& [name, r] : results) {
      rows.push_back({{"engine", name},
                      {"weak_value", complex_json(r.value)},
                      {"probability", r.probability},
                      {"truncation_tail", r.truncation_tail},
                      {"cutoff", r.cutoff}});
      tail = std::max(tail, r.truncation_tail);
    }
    j["results"] = rows;
    if (compared) j["discrepancy"] = discrepancy;
    j["truncation_tail"] = tail;
    j["status"] = ok ? "ok" : "tolerance_exceeded";
    finish_json(j, start);
    text = j.dump(2) + "\n";
  } else {
    std::vector<std::string> header{"engine", "re", "im", "probability",
                                    "truncation_tail", "cutoff"};
    std::vector<std::vector<std::string>> rows;
    const bool csv = c.format == "csv";
    for (const auto& [name, r] : results) {
      rows.push_back({name, csv ? num(r.value.re) : short_num(r.value.re),
                      csv ? num(r.value.im) : short_num(r.value.im),
                      csv ? num(r.probability) : short_num(r.probability),
                      fmt("%.3g", r.truncation_tail), std::to_string(r.cutoff)});
    }
    text = csv ? render_csv(header, rows) : render_table(header, rows);
    if (compared && !csv) {
      text += "discrepancy " + fmt("%.3g", discrepancy) + " (tolerance " +
              fmt("%.3g", a.tolerance) + ")\n";
    }
  }
  write_output(c.out, text);
  if (!ok) {
    std::cerr << "engines disagree by " << fmt("%.3g", discrepancy)
              << " > " << fmt("%.3g", a.tolerance) << "\n";
    return kExitTolerance;
  }
  return kExitOk;
}

// ---- theorem --------------------------------------------------------------

struct TheoremArgs {
  std::vector<double> alpha_sq{0.01, 0.5, 1.0, 4.0, 9.0};
  double tolerance = 1e-10;
};

int run_theorem(const Common& c, TheoremArgs a) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentPtr e = load(c.file);
  std::sort(a.alpha_sq.begin(), a.alpha_sq.end());
  const wvlab_options opts = c.options();
  std::vector<wvlab_theorem_row> rows(a.alpha_sq.size());
  check(wvlab_theorem_sweep(e.get(), a.alpha_sq.data(), a.alpha_sq.size(), &opts,
                            rows.data()));
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.residual);
  const bool ok = worst <= a.tolerance;

  std::string text;
  if (c.format == "json") {
    ordered_json j = report_header("theorem", e.get(), c);
    j["parameters"] = {{"alpha_sq", a.alpha_sq}, {"p_min", c.p_min}};
    j["tolerances"] = {{"residual", a.tolerance}};
    ordered_json out = ordered_json::array();
    for (const auto& r : rows) {
      out.push_back({{"alpha_sq", r.alpha_sq},
                     {"p_star", r.p_star},
                     {"wv_click", complex_json(r.click)},
                     {"wv_noclick", complex_json(r.no_click)},
                     {"f", r.f},
                     {"reconstructed", complex_json(r.reconstructed)},
                     {"single_photon", complex_json(r.single_photon)},
                     {"residual", r.residual}});
    }
    j["results"] = out;
    j["max_residual"] = worst;
    j["truncation_tail"] = 0.0;
    j["status"] = ok ? "ok" : "tolerance_exceeded";
    finish_json(j, start);
    text = j.dump(2) + "\n";
  } else {
    const bool csv = c.format == "csv";
    auto n = [&](double v) { return csv ? num(v) : short_num(v); };
    std::vector<std::string> header{
        "alpha_sq",         "p_star",           "wv_click_re",   "wv_click_im",
        "wv_noclick_re",    "wv_noclick_im",    "f",             "reconstructed_re",
        "reconstructed_im", "single_photon_re", "single_photon_im", "residual"};
    std::vector<std::vector<std::string>> table;
    for (const auto& r : rows) {
      table.push_back({n(r.alpha_sq), n(r.p_star), n(r.click.re), n(r.click.im),
                       n(r.no_click.re), n(r.no_click.im), n(r.f),
                       n(r.reconstructed.re), n(r.reconstructed.im),
                       n(r.single_photon.re), n(r.single_photon.im),
                       csv ? num(r.residual) : fmt("%.3g", r.residual)});
    }
    text = csv ? render_csv(header, table) : render_table(header, table);
  }
  write_output(c.out, text);
  if (!ok) {
    std::cerr << "largest residual " << fmt("%.3g", worst) << " exceeds "
              << fmt("%.3g", a.tolerance) << "\n";
    return kExitTolerance;
  }
  return kExitOk;
}

// ---- montecarlo -----------------------------------------------------------

struct MonteCarloArgs {
  std::uint64_t shots = 1000000;
  double g = 0.02;
  double sigma_x = 1.0;
  std::uint64_t seed = 1;
  std::string variable = "position";
  std::string hist;
  std::size_t bins = 200;
  double z_max = 4.0;
};

int run_montecarlo(const Common& c, const MonteCarloArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentPtr e = load(c.file);
  wvlab_mc_config cfg;
  wvlab_mc_config_default(&cfg);
  cfg.shots = a.shots;
  cfg.g = a.g;
  cfg.sigma_x = a.sigma_x;
  cfg.seed = a.seed;
  cfg.variable = a.variable == "momentum" ? WVLAB_MOMENTUM : WVLAB_POSITION;
  const wvlab_options opts = c.options();
  wvlab_shots* raw = nullptr;
  check(wvlab_montecarlo_run(e.get(), &cfg, &opts, &raw));
  ShotsPtr shots(raw);
  wvlab_mc_summary s;
  check(wvlab_shots_summary(shots.get(), &s));
  const bool ok = std::abs(s.z_score) <= a.z_max;
  const char* protocol =
      s.protocol == WVLAB_PROTOCOL_CLICK_ONLY ? "click-only" : "subtract-and-scale";

  if (!a.hist.empty()) {
    std::vector<std::uint64_t> click(a.bins), no_click(a.bins);
    check(wvlab_shots_histogram(shots.get(), a.bins, s.posterior_lower,
                                s.posterior_upper, click.data(), no_click.data()));
    std::ostringstream csv;
    csv << "bin_lower,bin_upper,click,no_click\n";
    const double width = (s.posterior_upper - s.posterior_lower) / double(a.bins);
    for (std::size_t i = 0; i < a.bins; ++i) {
      csv << num(s.posterior_lower + width * double(i)) << ","
          << num(s.posterior_lower + width * double(i + 1)) << "," << click[i]
          << "," << no_click[i] << "\n";
    }
    write_output(a.hist, csv.str());
  }

  std::string text;
  if (c.format == "json") {
    ordered_json j = report_header("montecarlo", e.get(), c);
    j["parameters"] = {{"shots", a.shots}, {"g", a.g}, {"sigma_x", a.sigma_x},
                       {"seed", a.seed}, {"variable", a.variable}};
    j["tolerances"] = {{"z_max", a.z_max}, {"tail", c.tail_tolerance}};
    j["results"] = {{"protocol", protocol},
                    {"n_click", s.n_click},
                    {"n_no_click", s.n_no_click},
                    {"click_fraction", s.click_fraction},
                    {"exact_click_probability", s.exact_click_probability},
                    {"wv_click", complex_json(s.click_wv)},
                    {"wv_noclick", complex_json(s.no_click_wv)},
                    {"estimate", s.estimate},
                    {"std_error", s.std_error},
                    {"target", s.target},
                    {"z_score", s.z_score},
                    {"weakness_ratio", s.weakness_ratio}};
    j["truncation_tail"] = 0.0;
    j["status"] = ok ? "ok" : "tolerance_exceeded";
    finish_json(j, start);
    text = j.dump(2) + "\n";
  } else {
    const bool csv = c.format == "csv";
    auto n = [&](double v) { return csv ? num(v) : short_num(v); };
    std::vector<std::string> header{"variable", "protocol", "n_click", "n_no_click",
                                    "estimate", "std_error", "target", "z_score"};
    std::vector<std::vector<std::string>> rows{
        {a.variable, protocol, std::to_string(s.n_click),
         std::to_string(s.n_no_click), n(s.estimate), n(s.std_error), n(s.target),
         n(s.z_score)}};
    text = csv ? render_csv(header, rows) : render_table(header, rows);
    if (!csv && s.weakness_ratio > 0.1) {
      text += "warning: g * n_max / sigma = " + short_num(s.weakness_ratio) +
              "; the pointer is not in the weak regime\n";
    }
  }
  write_output(c.out, text);
  if (!ok) {
    std::cerr << "estimate is " << fmt("%.3g", s.z_score)
              << " standard errors from the target\n";
    return kExitTolerance;
  }
  return kExitOk;
}

// ---- lemma ----------------------------------------------------------------

struct LemmaArgs {
  int m = 0;
  double tolerance = 1e-8;
};

int run_lemma(const Common& c, const LemmaArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentPtr e = load(c.file);
  const wvlab_options opts = c.options();
  wvlab_lemma_result r;
  check(wvlab_lemma(e.get(), {WVLAB_PS_FOCK, a.m}, &opts, &r));
  const bool ok = r.difference <= a.tolerance;

  std::string text;
  if (c.format == "json") {
    ordered_json j = report_header("lemma", e.get(), c);
    j["parameters"] = {{"m", a.m}, {"cutoff", r.cutoff}};
    j["tolerances"] = {{"difference", a.tolerance}, {"tail", c.tail_tolerance}};
    j["results"] = {{"rest_ignored", complex_json(r.rest_ignored)},
                    {"rest_projected", complex_json(r.rest_projected)},
                    {"difference", r.difference}};
    j["truncation_tail"] = r.truncation_tail;
    j["status"] = ok ? "ok" : "tolerance_exceeded";
    finish_json(j, start);
    text = j.dump(2) + "\n";
  } else {
    const bool csv = c.format == "csv";
    auto n = [&](double v) { return csv ? num(v) : short_num(v); };
    std::vector<std::string> header{"m", "rest_ignored_re", "rest_ignored_im",
                                    "rest_projected_re", "rest_projected_im",
                                    "difference"};
    std::vector<std::vector<std::string>> rows{
        {std::to_string(a.m), n(r.rest_ignored.re), n(r.rest_ignored.im),
         n(r.rest_projected.re), n(r.rest_projected.im),
         csv ? num(r.difference) : fmt("%.3g", r.difference)}};
    text = csv ? render_csv(header, rows) : render_table(header, rows);
  }
  write_output(c.out, text);
  if (!ok) {
    std::cerr << "formulations differ by " << fmt("%.3g", r.difference) << "\n";
    return kExitTolerance;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak values of photon number in linear-optical circuits"};
  app.set_version_flag("--version", std::string(wvlab_version()));
  app.require_subcommand(1);

  Common validate_opts;
  auto* validate = app.add_subcommand("validate", "Parse and check a circuit file");
  add_common(validate, validate_opts, false);

  Common wv_opts;
  WvArgs wv_args;
  auto* wv = app.add_subcommand("wv", "Weak value of the probe photon number");
  add_common(wv, wv_opts);
  wv->add_option("--postselect", wv_args.postselect, "none, fock:<m>, click or noclick");
  wv->add_option("--engine", wv_args.engine, "analytic, oracle or both")
      ->check(CLI::IsMember({"analytic", "oracle", "both"}));
  wv->add_option("--tolerance", wv_args.tolerance, "Largest accepted engine discrepancy")
      ->check(CLI::NonNegativeNumber);

  Common theorem_opts;
  TheoremArgs theorem_args;
  auto* theorem = app.add_subcommand(
      "theorem", "Reconstruct the single-photon weak value from click/no-click data");
  add_common(theorem, theorem_opts);
  theorem->add_option("--alpha-sq", theorem_args.alpha_sq, "Comma-separated |alpha|^2 values")
      ->delimiter(',');
  theorem->add_option("--tolerance", theorem_args.tolerance, "Largest accepted residual")
      ->check(CLI::NonNegativeNumber);

  Common mc_opts;
  MonteCarloArgs mc_args;
  auto* mc = app.add_subcommand("montecarlo", "Simulate the pointer experiment shot by shot");
  add_common(mc, mc_opts);
  mc->add_option("--shots", mc_args.shots, "Number of shots")->check(CLI::PositiveNumber);
  mc->add_option("--g", mc_args.g, "Pointer shift per photon")->check(CLI::PositiveNumber);
  mc->add_option("--sigma-x", mc_args.sigma_x, "Pointer position spread")
      ->check(CLI::PositiveNumber);
  mc->add_option("--seed", mc_args.seed, "Random seed");
  mc->add_option("--variable", mc_args.variable, "position or momentum")
      ->check(CLI::IsMember({"position", "momentum"}));
  mc->add_option("--hist", mc_args.hist, "Write conditional pointer histograms (CSV) here");
  mc->add_option("--bins", mc_args.bins, "Histogram bins")->check(CLI::PositiveNumber);
  mc->add_option("--z-max", mc_args.z_max, "Largest accepted |z| against the target")
      ->check(CLI::NonNegativeNumber);

  Common lemma_opts;
  LemmaArgs lemma_args;
  auto* lemma = app.add_subcommand(
      "lemma", "Compare post-selecting on the detector alone vs. all modes");
  add_common(lemma, lemma_opts);
  lemma->add_option("--m", lemma_args.m, "Detected photon number")
      ->check(CLI::NonNegativeNumber);
  lemma->add_option("--tolerance", lemma_args.tolerance, "Largest accepted difference")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  try {
    if (*validate) return run_validate(validate_opts);
    if (*wv) return run_wv(wv_opts, wv_args);
    if (*theorem) return run_theorem(theorem_opts, theorem_args);
    if (*mc) return run_montecarlo(mc_opts, mc_args);
    if (*lemma) return run_lemma(lemma_opts, lemma_args);
  } catch (const Failure& f) {
    std::cerr << "wvlab: " << f.message << "\n";
    return f.code;
  }
  return kExitOk;
}
