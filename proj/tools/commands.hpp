//------------------------------------------------------------------------------
//
//   Copyright 2026 The qmachine Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#pragma once

// Subcommand bodies for the qmachine CLI. Each takes parsed options and the
// output streams and returns the process exit code.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qmachine/qmachine.hpp"

namespace qmachine::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_validation = 2,
  exit_invariant = 3,
  exit_resource = 4,
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::cap_exceeded: return exit_resource;
    case ErrorKind::singular:
    case ErrorKind::numerical:
    case ErrorKind::undefined_ratio: return exit_invariant;
    default: return exit_validation;
  }
}

/// Where a machine comes from: a document on disk or a named family.
struct MachineSource {
  std::string machine_file;
  ProcessFamily family{.id = ""};
  bool minimize_first = false;

  bool from_file() const { return !machine_file.empty(); }

  EpsilonMachine load() const {
    EpsilonMachine m = from_file() ? load_machine(machine_file) : build_family(family);
    return minimize_first ? minimize(m) : m;
  }

  std::string param() const {
    if (from_file()) return "";
    if (family.id == "random") return std::to_string(family.seed);
    return format_double(family.p);
  }
};

/// Writes to `path`, or to `fallback` when the path is empty.
template <typename Fn>
int with_output(const std::string& path, std::ostream& fallback, std::ostream& err, Fn&& fn) {
  if (path.empty()) {
    fn(fallback);
    return exit_ok;
  }
  std::ofstream file(path);
  if (!file) {
    err << "error: cannot write '" << path << "'\n";
    return exit_resource;
  }
  fn(file);
  return exit_ok;
}

struct AnalyzeOptions {
  MachineSource source;
  std::size_t max_length = 6;
  bool infinite = true;
  std::string method = "gram";
  std::string format = "kv";
  std::string out;
};

inline int cmd_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err) {
  const EpsilonMachine m = o.source.load();
  const auto validation = validate(m);
  if (!validation.ok) {
    for (const auto& v : validation.violations)
      err << "violation: " << v.rule << " at " << v.context << " (" << v.measured << ")\n";
    return exit_validation;
  }
  if (!validation.minimal) err << "warning: machine '" << m.name() << "' is not minimal\n";

  AnalysisOptions ao;
  ao.max_length = o.max_length;
  ao.infinite = o.infinite;
  ao.method = parse_method(o.method);
  const auto report = analyze(m, ao);
  return with_output(o.out, out, err, [&](std::ostream& os) {
    if (o.format == "csv") {
      os << measure_csv_header() << "\n" << measure_csv_row(report, o.source.param()) << "\n";
      os << cq_csv_header() << "\n";
      for (const auto& pt : report.cq)
        os << csv_field(report.name) << "," << o.source.param() << "," << to_string(pt.horizon) << ","
           << format_double(pt.value) << "," << pt.method << "," << format_double(pt.err_bound) << "\n";
    } else {
      os << to_json(report).dump(2) << "\n";
    }
  });
}

struct SweepOptions {
  MachineSource source;
  double p_start = 0.01;
  double p_stop = 0.99;
  std::size_t steps = 99;
  std::size_t max_length = 5;
  bool infinite = false;
  std::string method = "gram";
  std::string out;
};

inline int cmd_sweep(const SweepOptions& o, std::ostream& out, std::ostream& err) {
  if (!(o.p_start > 0.0 && o.p_stop < 1.0 && o.p_start <= o.p_stop) && !o.source.from_file()) {
    err << "error: sweep grid must lie inside (0,1)\n";
    return exit_validation;
  }
  SweepSpec spec;
  spec.family = o.source.family;
  if (o.source.from_file()) spec.machine = load_machine(o.source.machine_file);
  spec.p_start = o.p_start;
  spec.p_stop = o.p_stop;
  spec.steps = o.steps;
  spec.max_length = o.max_length;
  spec.infinite = o.infinite;
  spec.method = parse_method(o.method);
  spec.minimize_first = o.source.minimize_first;
  const auto rows = run_sweep(spec);
  std::size_t failures = 0;
  const int code = with_output(o.out, out, err, [&](std::ostream& os) {
    os << sweep_csv_header() << "\n";
    for (const auto& r : rows) {
      os << sweep_csv_row(r) << "\n";
      if (r.status != "ok") ++failures;
    }
  });
  if (failures > 0) err << "warning: " << failures << " grid point(s) failed\n";
  return code;
}

struct VerifyCommandOptions {
  bool examples = true;
  std::size_t random = 0;
  std::size_t random_max_states = 6;
  std::vector<std::string> machine_files;
  VerifyOptions checks;
};

inline int cmd_verify(const VerifyCommandOptions& o, std::ostream& out, std::ostream& err) {
  std::vector<EpsilonMachine> corpus;
  std::vector<CheckResult> results;
  if (o.examples)
    for (auto& m : example_corpus()) corpus.push_back(std::move(m));
  if (o.random > 0)
    for (auto& m : random_corpus(o.random, o.random_max_states, o.checks.seed)) corpus.push_back(std::move(m));
  for (const auto& path : o.machine_files) {
    try {
      corpus.push_back(load_machine(path));
    } catch (const Error& e) {
      results.push_back({path, to_string(e.kind()), false, e.what()});
    }
  }
  for (const auto& m : corpus) {
    try {
      for (auto& r : verify_machine(m, o.checks)) results.push_back(std::move(r));
    } catch (const Error& e) {
      results.push_back({m.name(), to_string(e.kind()), false, e.what()});
    }
  }
  std::size_t failed = 0;
  for (const auto& r : results) {
    if (r.passed) continue;
    ++failed;
    out << "FAIL " << r.machine << " " << r.invariant << ": " << r.detail << "\n";
  }
  out << "verified " << corpus.size() << " machine(s), " << results.size() << " check(s), " << failed
      << " failure(s)\n";
  (void)err;
  return failed == 0 ? exit_ok : exit_invariant;
}

struct SurveyCommandOptions {
  SurveyOptions survey;
  std::string out;       // per-machine CSV
  std::string manifest;  // seed, n_states, digest
};

inline int cmd_survey(const SurveyCommandOptions& o, std::ostream& out, std::ostream& err) {
  const auto report = run_survey(o.survey);
  int code = exit_ok;
  if (!o.out.empty()) {
    code = with_output(o.out, out, err, [&](std::ostream& os) {
      os << "index,seed,requested_states,states,R,k,monotone,worst_increase,ratio_positive,min_ratio_eigenvalue\n";
      for (const auto& e : report.entries)
        os << e.index << "," << e.seed << "," << e.requested_states << "," << e.states << "," << to_string(e.markov)
           << "," << to_string(e.cryptic) << "," << (e.monotone ? "yes" : "no") << ","
           << format_double(e.worst_increase) << "," << (e.ratio_positive ? "yes" : "no") << ","
           << format_double(e.min_ratio_eigenvalue) << "\n";
    });
    if (code != exit_ok) return code;
  }
  if (!o.manifest.empty()) {
    code = with_output(o.manifest, out, err, [&](std::ostream& os) {
      os << "seed,n_states,digest\n";
      for (const auto& e : report.entries) {
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(e.digest));
        os << e.seed << "," << e.requested_states << "," << hex << "\n";
      }
    });
    if (code != exit_ok) return code;
  }

  std::size_t finite_both = 0;
  for (const auto& e : report.entries)
    if (e.markov.is_finite() && e.cryptic.is_finite()) ++finite_both;
  out << "machines: " << report.entries.size() << "\n";
  out << "monotonicity violations: " << report.monotonicity_violations << "\n";
  out << "non-positive ratio matrices: " << report.nonpositive_ratio << "\n";
  out << "finite R and k: " << finite_both << ", cryptic > markov: " << report.order_violations << "\n";
  for (const auto& e : report.entries)
    if (!e.ratio_positive)
      out << "  non-positive ratio: index " << e.index << " seed " << e.seed << " at L="
          << *e.first_nonpositive_length << " (min eigenvalue " << format_double(e.min_ratio_eigenvalue) << ")\n";
  for (const auto& e : report.entries)
    if (!e.monotone)
      out << "  MONOTONICITY VIOLATION: index " << e.index << " seed " << e.seed << " increase "
          << format_double(e.worst_increase) << "\n";
  return report.monotonicity_violations == 0 && report.order_violations == 0 ? exit_ok : exit_invariant;
}

struct SampleOptions {
  MachineSource source;
  std::size_t length = 20;
  std::uint64_t seed = 1;
  std::string start;
  bool quantum = false;  // one projective measurement of |eta_start(L)>
};

inline int cmd_sample(const SampleOptions& o, std::ostream& out, std::ostream&) {
  const EpsilonMachine m = o.source.load();
  std::optional<std::size_t> start;
  if (!o.start.empty()) start = m.state_index(o.start);
  if (o.quantum) {
    const auto r = measure_simulate(m, o.length, start.value_or(0), o.seed);
    out << "word " << m.decode_word(r.word) << "\nstate " << m.states()[r.state] << "\n";
    return exit_ok;
  }
  const auto path = sample(m, o.length, o.seed, start);
  out << "word " << m.decode_word(path.symbols) << "\nstates";
  for (std::size_t s : path.states) out << " " << m.states()[s];
  out << "\n";
  return exit_ok;
}

struct ExportOptions {
  MachineSource source;
  std::string what = "machine";  // machine | pmm
  std::string out;
};

inline int cmd_export(const ExportOptions& o, std::ostream& out, std::ostream& err) {
  const EpsilonMachine m = o.source.load();
  return with_output(o.out, out, err, [&](std::ostream& os) {
    if (o.what == "pmm")
      os << pmm_to_json(build_pmm(m), m).dump(2) << "\n";
    else
      os << to_document(m) << "\n";
  });
}

struct TraceOptions {
  MachineSource source;
  std::string word;
  std::string final_state;
};

inline int cmd_trace(const TraceOptions& o, std::ostream& out, std::ostream&) {
  const EpsilonMachine m = o.source.load();
  const auto sets = backward_inference(m, m.encode_word(o.word), m.state_index(o.final_state));
  for (std::size_t t = 0; t < sets.size(); ++t) {
    out << "t=" << t << ":";
    for (std::size_t s : sets[t]) out << " " << m.states()[s];
    out << "\n";
  }
  return exit_ok;
}

/// Runs `fn`, translating library errors into exit codes.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
}

}  // namespace qmachine::cli
