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

#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace qmachine::cli;

void add_source_options(CLI::App* cmd, MachineSource& src) {
  src.family.p = 0.5;
  cmd->add_option("--family", src.family.id, "biased-coins | rk-golden-mean | nemo | random")
      ->check(CLI::IsMember({"biased-coins", "rk-golden-mean", "nemo", "random"}));
  cmd->add_option("--machine", src.machine_file, "machine document (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--p", src.family.p, "family probability parameter");
  cmd->add_option("--R", src.family.markov, "Markov order for rk-golden-mean");
  cmd->add_option("--k", src.family.cryptic, "cryptic order for rk-golden-mean");
  cmd->add_option("--states", src.family.num_states, "state count for random");
  cmd->add_option("--alphabet", src.family.alphabet_size, "alphabet size for random");
  cmd->add_option("--machine-seed", src.family.seed, "seed for random");
  cmd->add_flag("--minimize", src.minimize_first, "merge predictively equivalent states first");
}

bool require_source(const MachineSource& src) {
  if (src.from_file() == !src.family.id.empty()) {
    std::cerr << "error: give exactly one of --family or --machine\n";
    return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qmachine: complexity measures and quantum compression of epsilon-machines"};
  app.require_subcommand(1);

  AnalyzeOptions analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "h_mu, C_mu, E, R, k and the C_q curve");
  add_source_options(analyze_cmd, analyze.source);
  analyze_cmd->add_option("--Lmax,--L", analyze.max_length, "largest finite L for C_q");
  analyze_cmd->add_flag("--inf,!--no-inf", analyze.infinite, "include C_q(inf)");
  analyze_cmd->add_option("--method", analyze.method)->check(CLI::IsMember({"gram", "brute", "both"}));
  analyze_cmd->add_option("--format", analyze.format)->check(CLI::IsMember({"kv", "csv"}));
  analyze_cmd->add_option("--out", analyze.out);

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "C_q(L) over a parameter grid as CSV");
  add_source_options(sweep_cmd, sweep.source);
  sweep_cmd->add_option("--pstart", sweep.p_start);
  sweep_cmd->add_option("--pstop", sweep.p_stop);
  sweep_cmd->add_option("--steps", sweep.steps);
  sweep_cmd->add_option("--Lmax,--L", sweep.max_length);
  sweep_cmd->add_flag("--inf", sweep.infinite, "add a C_q(inf) row per grid point");
  sweep_cmd->add_option("--method", sweep.method)->check(CLI::IsMember({"gram", "brute", "both"}));
  sweep_cmd->add_option("--out", sweep.out);

  VerifyCommandOptions verify;
  bool skip_examples = false;
  auto* verify_cmd = app.add_subcommand("verify", "oracle cross-checks and invariants over a corpus");
  verify_cmd->add_flag("--no-examples", skip_examples, "skip the built-in example families");
  verify_cmd->add_option("--random", verify.random, "number of seed-pinned random machines");
  verify_cmd->add_option("--max-states", verify.random_max_states);
  verify_cmd->add_option("--machine", verify.machine_files, "additional machine documents");
  verify_cmd->add_option("--Lmax", verify.checks.max_length);
  verify_cmd->add_option("--draws", verify.checks.measurement_draws, "quantum-measurement draws per state");
  verify_cmd->add_option("--seed", verify.checks.seed);

  SurveyCommandOptions survey;
  auto* survey_cmd = app.add_subcommand("survey", "C_q monotonicity and ratio-matrix survey of random machines");
  survey_cmd->add_option("--n", survey.survey.num_machines);
  survey_cmd->add_option("--nmin", survey.survey.min_states);
  survey_cmd->add_option("--nmax", survey.survey.max_states);
  survey_cmd->add_option("--alphabet", survey.survey.alphabet_size);
  survey_cmd->add_option("--seed", survey.survey.seed);
  survey_cmd->add_option("--Lmax", survey.survey.max_length);
  survey_cmd->add_option("--out", survey.out, "per-machine CSV");
  survey_cmd->add_option("--manifest", survey.manifest, "corpus manifest CSV (seed, n_states, digest)");

  SampleOptions sample;
  auto* sample_cmd = app.add_subcommand("sample", "generate a symbol sequence");
  add_source_options(sample_cmd, sample.source);
  sample_cmd->add_option("--length,--L", sample.length);
  sample_cmd->add_option("--seed", sample.seed);
  sample_cmd->add_option("--start", sample.start);
  sample_cmd->add_flag("--quantum", sample.quantum, "measure the length-L signal state instead");

  ExportOptions exporter;
  auto* export_cmd = app.add_subcommand("export", "write a machine document or its pairwise-merger machine");
  add_source_options(export_cmd, exporter.source);
  export_cmd->add_option("--what", exporter.what)->check(CLI::IsMember({"machine", "pmm"}));
  export_cmd->add_option("--out", exporter.out);

  TraceOptions trace;
  auto* trace_cmd = app.add_subcommand("trace", "states consistent with a word ending in a given state");
  add_source_options(trace_cmd, trace.source);
  trace_cmd->add_option("--word", trace.word)->required();
  trace_cmd->add_option("--final", trace.final_state)->required();

  CLI11_PARSE(app, argc, argv);

  auto& out = std::cout;
  auto& err = std::cerr;
  if (*analyze_cmd) {
    if (!require_source(analyze.source)) return exit_validation;
    return guarded(err, [&] { return cmd_analyze(analyze, out, err); });
  }
  if (*sweep_cmd) {
    if (!require_source(sweep.source)) return exit_validation;
    return guarded(err, [&] { return cmd_sweep(sweep, out, err); });
  }
  if (*verify_cmd) {
    verify.examples = !skip_examples;
    return guarded(err, [&] { return cmd_verify(verify, out, err); });
  }
  if (*survey_cmd) return guarded(err, [&] { return cmd_survey(survey, out, err); });
  if (*sample_cmd) {
    if (!require_source(sample.source)) return exit_validation;
    return guarded(err, [&] { return cmd_sample(sample, out, err); });
  }
  if (*export_cmd) {
    if (!require_source(exporter.source)) return exit_validation;
    return guarded(err, [&] { return cmd_export(exporter, out, err); });
  }
  if (*trace_cmd) {
    if (!require_source(trace.source)) return exit_validation;
    return guarded(err, [&] { return cmd_trace(trace, out, err); });
  }
  return exit_ok;
}
