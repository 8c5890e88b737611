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

// Corpus-level studies: oracle cross-checks and the C_q monotonicity survey.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "qmachine/analysis.hpp"
#include "qmachine/classical.hpp"
#include "qmachine/document.hpp"
#include "qmachine/machine.hpp"
#include "qmachine/pair_merger.hpp"
#include "qmachine/processes.hpp"
#include "qmachine/q_machine.hpp"

namespace qmachine {

/// The three example families at five parameter points each.
inline std::vector<EpsilonMachine> example_corpus() {
  std::vector<EpsilonMachine> out;
  for (double p : {0.1, 0.3, 0.505, 0.666, 0.9}) {
    out.push_back(biased_coins(p));
    out.push_back(rk_golden_mean(4, 3, p));
    out.push_back(nemo(p));
  }
  return out;
}

/// `count` seed-pinned random machines with 1..max_states states, binary.
inline std::vector<EpsilonMachine> random_corpus(std::size_t count, std::size_t max_states, std::uint64_t seed) {
  std::vector<EpsilonMachine> out;
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(random_machine(1 + i % max_states, 2, seed + i));
  return out;
}

struct CheckResult {
  std::string machine;
  std::string invariant;
  bool passed = true;
  std::string detail;
};

struct VerifyOptions {
  std::size_t max_length = 5;
  std::size_t measurement_draws = 100'000;
  std::size_t measurement_length = 3;
  double measurement_tv = 0.01;
  std::uint64_t seed = 1;
};

/// Total variation between empirical word counts and Pr(w | start).
inline double measurement_total_variation(const EpsilonMachine& m, std::size_t length, std::size_t start,
                                          std::size_t draws, std::uint64_t seed) {
  QuantumMeasurementSampler sampler(m, length, start);
  std::mt19937_64 rng(seed);
  std::map<Word, std::size_t> counts;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto outcome = sampler.draw(rng);
    const auto expected = word_probability(m, start, outcome.word);
    if (!expected.successor || *expected.successor != outcome.state) return 1.0;
    ++counts[outcome.word];
  }
  double tv = 0.0;
  std::size_t words = 1;
  for (std::size_t i = 0; i < length; ++i) words *= m.num_symbols();
  Word w(length, 0);
  for (std::size_t index = 0; index < words; ++index) {
    std::size_t rest = index;
    for (std::size_t pos = length; pos-- > 0;) {
      w[pos] = rest % m.num_symbols();
      rest /= m.num_symbols();
    }
    const double p = word_probability(m, start, w).probability;
    const auto it = counts.find(w);
    const double f = it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(draws);
    tv += std::abs(p - f);
  }
  return 0.5 * tv;
}

/**
 * Runs every cross-check on one machine: Gram-route vs explicit C_q and
 * overlaps, E <= C_q(L) <= C_mu, C_q(0) = C_mu, overlap monotonicity,
 * k <= R, and quantum-measurement word statistics.
 */
inline std::vector<CheckResult> verify_machine(const EpsilonMachine& m, const VerifyOptions& opts) {
  std::vector<CheckResult> out;
  auto record = [&](const std::string& inv, bool ok, const std::string& detail) {
    out.push_back({m.name(), inv, ok, detail});
  };

  const auto pmm = build_pmm(m);
  const double c_mu = statistical_complexity(m);
  const auto excess = excess_entropy(m);

  double worst_cq = 0.0, worst_gram = 0.0, worst_upper = -1.0, worst_lower = -1.0, worst_mono = 0.0;
  double cq0_gap = 0.0;
  Eigen::MatrixXd previous;
  for (std::size_t len = 0; len <= opts.max_length; ++len) {
    const auto g = gram_matrix(pmm, len);
    const double fast = cq_from_gram(m, g);
    const auto set = signal_states(m, len);
    worst_gram = std::max(worst_gram, (signal_state_overlaps(set) - g.entries).cwiseAbs().maxCoeff());
    worst_cq = std::max(worst_cq, std::abs(fast - cq_bruteforce(m, len)));
    worst_upper = std::max(worst_upper, fast - (c_mu + 1e-9));
    worst_lower = std::max(worst_lower, (excess.value - 1e-6) - fast);
    if (len == 0) cq0_gap = std::abs(fast - c_mu);
    if (len > 0) worst_mono = std::max(worst_mono, (previous - g.entries).maxCoeff());
    previous = g.entries;
  }
  record("oracle-cq", worst_cq <= 1e-10, "max |cq - cq_brute| = " + format_double(worst_cq));
  record("oracle-gram", worst_gram <= 1e-12, "max overlap error = " + format_double(worst_gram));
  record("bound-upper", worst_upper <= 0.0, "max C_q - C_mu = " + format_double(worst_upper + 1e-9));
  record("bound-lower", worst_lower <= 0.0, "max E - C_q = " + format_double(worst_lower + 1e-6));
  record("cq0-equals-cmu", cq0_gap <= 1e-10, "|C_q(0) - C_mu| = " + format_double(cq0_gap));
  record("overlap-monotone", worst_mono <= 1e-12, "max overlap decrease = " + format_double(worst_mono));

  const Order r = markov_order(m);
  const Order k = cryptic_order(pmm);
  const bool order_ok = !(r.is_finite() && k.is_finite()) || k.value <= r.value;
  record("cryptic-le-markov", order_ok, "R=" + to_string(r) + " k=" + to_string(k));

  if (opts.measurement_draws > 0) {
    double worst_tv = 0.0;
    for (std::size_t s = 0; s < m.num_states(); ++s)
      worst_tv = std::max(worst_tv, measurement_total_variation(m, opts.measurement_length, s,
                                                                opts.measurement_draws, opts.seed + s));
    record("measurement-statistics", worst_tv <= opts.measurement_tv, "max TV = " + format_double(worst_tv));
  }
  return out;
}

struct SurveyOptions {
  std::size_t num_machines = 1000;
  std::size_t min_states = 2;
  std::size_t max_states = 7;
  std::size_t alphabet_size = 2;
  std::uint64_t seed = 1;
  std::size_t max_length = 8;  // checks C_q(L+1) <= C_q(L) for L = 0..max_length
};

struct SurveyEntry {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t requested_states = 0;
  std::size_t states = 0;
  std::uint64_t digest = 0;
  Order markov;
  Order cryptic;
  bool monotone = true;
  double worst_increase = 0.0;      // max over L of C_q(L+1) - C_q(L)
  bool ratio_positive = true;
  double min_ratio_eigenvalue = 1.0;
  std::optional<std::size_t> first_nonpositive_length;
};

struct SurveyReport {
  std::vector<SurveyEntry> entries;
  std::size_t monotonicity_violations = 0;
  std::size_t nonpositive_ratio = 0;
  std::size_t order_violations = 0;  // k > R with both finite
};

inline SurveyEntry survey_machine(const EpsilonMachine& m, std::size_t max_length) {
  SurveyEntry e;
  e.states = m.num_states();
  e.digest = digest(m);
  e.markov = markov_order(m);
  const auto pmm = build_pmm(m);
  e.cryptic = cryptic_order(pmm);

  GramMatrix previous = gram_matrix(pmm, 0);
  double previous_cq = cq_from_gram(m, previous);
  e.worst_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t len = 0; len <= max_length; ++len) {
    GramMatrix next = gram_matrix(pmm, len + 1);
    const double next_cq = cq_from_gram(m, next);
    e.worst_increase = std::max(e.worst_increase, next_cq - previous_cq);
    if (next_cq > previous_cq + 1e-10) e.monotone = false;
    const auto check = jozsa_ratio_check(next, previous);
    if (check.min_eigenvalue < e.min_ratio_eigenvalue) e.min_ratio_eigenvalue = check.min_eigenvalue;
    if (!check.positive && !e.first_nonpositive_length) {
      e.ratio_positive = false;
      e.first_nonpositive_length = len;
    }
    previous = std::move(next);
    previous_cq = next_cq;
  }
  return e;
}

/// Machine i gets N = min + (i mod span) requested states and seed + i.
inline SurveyReport run_survey(const SurveyOptions& opts) {
  SurveyReport report;
  const std::size_t span = opts.max_states - opts.min_states + 1;
  for (std::size_t i = 0; i < opts.num_machines; ++i) {
    const std::size_t n = opts.min_states + i % span;
    const std::uint64_t seed = opts.seed + i;
    const auto m = random_machine(n, opts.alphabet_size, seed);
    SurveyEntry e = survey_machine(m, opts.max_length);
    e.index = i;
    e.seed = seed;
    e.requested_states = n;
    if (!e.monotone) ++report.monotonicity_violations;
    if (!e.ratio_positive) ++report.nonpositive_ratio;
    if (e.markov.is_finite() && e.cryptic.is_finite() && e.cryptic.value > e.markov.value)
      ++report.order_violations;
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace qmachine
