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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qmachine/common.hpp"
#include "qmachine/machine.hpp"
#include "qmachine/pair_merger.hpp"

namespace qmachine {

/// Word budget |A|^L for explicit signal states. Overridden by the
/// QMACHINE_ORACLE_MAX_WORDS environment variable.
inline std::size_t oracle_word_budget() {
  if (const char* env = std::getenv("QMACHINE_ORACLE_MAX_WORDS")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return 4096;
}

/// Largest explicit density matrix the oracle will diagonalize.
inline constexpr std::size_t oracle_max_dimension = 2048;

/// Von Neumann entropy in bits of a symmetric PSD unit-trace matrix.
inline double vn_entropy(const Eigen::MatrixXd& rho) {
  if (rho.rows() != rho.cols()) throw Error(ErrorKind::parameter, "density matrix must be square");
  if (rho.rows() == 0) return 0.0;
  if ((rho - rho.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error(ErrorKind::parameter, "density matrix is not symmetric");
  if (std::abs(rho.trace() - 1.0) > 1e-9)
    throw Error(ErrorKind::parameter, "density matrix trace is " + std::to_string(rho.trace()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(rho, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::numerical, "eigensolver failed");
  double s = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const double lambda = solver.eigenvalues()(i);
    if (lambda < -tolerance::negative_eigen)
      throw Error(ErrorKind::numerical, "negative eigenvalue " + std::to_string(lambda));
    if (lambda > tolerance::eigen_clip) s += entropy_term(lambda);
  }
  return s;
}

/**
 * Explicit q-machine signal states |eta_j(L)>.
 *
 * Basis element (w, k) has index word_index(w) * |S| + k with words in
 * lexicographic order of symbol indices. Each state's vector is stored
 * sparsely; by unifilarity a word contributes to at most one k per state.
 */
struct SignalStateSet {
  std::size_t horizon = 0;
  std::size_t num_states = 0;
  std::size_t num_words = 1;
  std::vector<std::map<std::size_t, double>> amplitudes;

  std::size_t dimension() const { return num_words * num_states; }
};

inline SignalStateSet signal_states(const EpsilonMachine& m, std::size_t length) {
  const std::size_t budget = oracle_word_budget();
  std::size_t words = 1;
  for (std::size_t i = 0; i < length; ++i) {
    words *= m.num_symbols();
    if (words > budget)
      throw Error(ErrorKind::cap_exceeded, "|A|^L exceeds the oracle budget of " + std::to_string(budget) +
                                               " words; use the Gram route");
  }
  SignalStateSet set;
  set.horizon = length;
  set.num_states = m.num_states();
  set.num_words = words;
  set.amplitudes.resize(m.num_states());

  Word w(length, 0);
  for (std::size_t index = 0; index < words; ++index) {
    // index -> word, most significant symbol first
    std::size_t rest = index;
    for (std::size_t pos = length; pos-- > 0;) {
      w[pos] = rest % m.num_symbols();
      rest /= m.num_symbols();
    }
    for (std::size_t j = 0; j < m.num_states(); ++j) {
      const auto wp = word_probability(m, j, w);
      if (wp.probability > 0.0)
        set.amplitudes[j][index * m.num_states() + *wp.successor] = std::sqrt(wp.probability);
    }
  }
  return set;
}

/// Overlaps <eta_i|eta_j> by explicit inner products of the signal states.
inline Eigen::MatrixXd signal_state_overlaps(const SignalStateSet& set) {
  const auto n = static_cast<Eigen::Index>(set.num_states);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      double dot = 0.0;
      const auto& a = set.amplitudes[static_cast<std::size_t>(i)];
      const auto& b = set.amplitudes[static_cast<std::size_t>(j)];
      for (const auto& [index, value] : a)
        if (auto it = b.find(index); it != b.end()) dot += value * it->second;
      g(i, j) = dot;
      g(j, i) = dot;
    }
  }
  return g;
}

/// C_q(L) by assembling rho(L) = sum_j pi_j |eta_j><eta_j| on the support of
/// the signal states and diagonalizing it. Reference route for small L.
inline double cq_bruteforce(const EpsilonMachine& m, std::size_t length) {
  const auto set = signal_states(m, length);
  std::map<std::size_t, Eigen::Index> support;
  for (const auto& amp : set.amplitudes)
    for (const auto& [index, value] : amp) support.emplace(index, 0);
  if (support.size() > oracle_max_dimension)
    throw Error(ErrorKind::cap_exceeded, "explicit density matrix of dimension " +
                                             std::to_string(support.size()) + " exceeds the oracle limit");
  Eigen::Index next = 0;
  for (auto& [index, slot] : support) slot = next++;

  Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(next, next);
  for (std::size_t j = 0; j < set.num_states; ++j) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(next);
    for (const auto& [index, value] : set.amplitudes[j]) v(support.at(index)) = value;
    rho += m.stationary()[j] * v * v.transpose();
  }
  rho = 0.5 * (rho + rho.transpose());
  return vn_entropy(rho);
}

/// sqrt(pi) sqrt(pi)^T o G: shares its nonzero spectrum with rho.
inline Eigen::MatrixXd weighted_gram(const EpsilonMachine& m, const GramMatrix& g) {
  const auto n = static_cast<Eigen::Index>(m.num_states());
  Eigen::VectorXd root(n);
  for (Eigen::Index i = 0; i < n; ++i) root(i) = std::sqrt(m.stationary()[static_cast<std::size_t>(i)]);
  Eigen::MatrixXd w = (root * root.transpose()).cwiseProduct(g.entries);
  return 0.5 * (w + w.transpose());
}

inline double cq_from_gram(const EpsilonMachine& m, const GramMatrix& g) {
  return vn_entropy(weighted_gram(m, g));
}

/// C_q(L) from the pair-merger Gram matrix; `infinite_horizon` gives C_q(inf).
inline double cq(const EpsilonMachine& m, const PairMergerMachine& pmm, Horizon horizon) {
  if (!horizon) return cq_from_gram(m, gram_matrix_asymptotic(pmm));
  return cq_from_gram(m, gram_matrix(pmm, *horizon));
}

inline double cq(const EpsilonMachine& m, Horizon horizon) {
  return cq(m, build_pmm(m), horizon);
}

/// C_q(0), ..., C_q(max_length) by the Gram route, one PMM for all lengths.
inline std::vector<double> cq_curve(const EpsilonMachine& m, std::size_t max_length) {
  const auto pmm = build_pmm(m);
  std::vector<double> out;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(pmm.merger_mass().size());
  for (std::size_t len = 0; len <= max_length; ++len) {
    out.push_back(cq_from_gram(m, detail::gram_from_pairs(pmm, len, x)));
    x = pmm.pair_weights() * x + pmm.merger_mass();
  }
  return out;
}

struct Measurement {
  Word word;
  std::size_t state = 0;
};

/**
 * Projective measurement of |eta_start(L)> in the word-then-state basis.
 *
 * Outcome (w, k) is drawn with probability equal to its squared amplitude,
 * so the word marginal is the classical Pr(w | start) and k is the unique
 * successor. Built once per (machine, L, start) to serve many draws.
 */
class QuantumMeasurementSampler {
 public:
  QuantumMeasurementSampler(const EpsilonMachine& m, std::size_t length, std::size_t start)
      : length_(length), num_states_(m.num_states()), num_symbols_(m.num_symbols()) {
    if (start >= m.num_states()) throw Error(ErrorKind::unknown_state, "state index " + std::to_string(start));
    const auto set = signal_states(m, length);
    for (const auto& [index, amp] : set.amplitudes[start]) {
      outcomes_.push_back(index);
      weights_.push_back(amp * amp);
    }
  }

  Measurement draw(std::mt19937_64& rng) const {
    const std::size_t index = outcomes_[detail::draw_index(rng, weights_)];
    Measurement out;
    out.state = index % num_states_;
    std::size_t rest = index / num_states_;
    out.word.assign(length_, 0);
    for (std::size_t pos = length_; pos-- > 0;) {
      out.word[pos] = rest % num_symbols_;
      rest /= num_symbols_;
    }
    return out;
  }

 private:
  std::size_t length_;
  std::size_t num_states_;
  std::size_t num_symbols_;
  std::vector<std::size_t> outcomes_;
  std::vector<double> weights_;
};

inline Measurement measure_simulate(const EpsilonMachine& m, std::size_t length, std::size_t start,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return QuantumMeasurementSampler(m, length, start).draw(rng);
}

}  // namespace qmachine
