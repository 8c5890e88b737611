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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qmachine/common.hpp"

namespace qmachine {

using Word = std::vector<std::size_t>;

/// One labeled edge as it appears in a machine document.
struct EdgeSpec {
  std::string from;
  std::string symbol;
  std::string to;
  double prob = 0.0;
};

struct Transition {
  std::size_t target = 0;
  double prob = 0.0;
};

/**
 * A finite, unifilar, irreducible hidden Markov model presentation.
 *
 * Each (state, symbol) slot holds at most one transition, which makes the
 * successor state a function of the current state and the emitted symbol.
 * Instances are immutable once created and carry their stationary
 * distribution. State and symbol order follow construction order and index
 * every matrix derived from the machine.
 */
class EpsilonMachine {
 public:
  /// Validates and builds a machine. Edges below 1e-12 are dropped, rows are
  /// checked to sum to one within 1e-9 and then renormalized exactly.
  static EpsilonMachine create(std::string name, std::vector<std::string> alphabet,
                               std::vector<std::string> states,
                               const std::vector<EdgeSpec>& edges);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  const std::vector<std::string>& states() const { return states_; }
  std::size_t num_states() const { return states_.size(); }
  std::size_t num_symbols() const { return alphabet_.size(); }

  const std::optional<Transition>& transition(std::size_t state, std::size_t symbol) const {
    return table_[state * alphabet_.size() + symbol];
  }

  /// Probability of emitting `symbol` from `state` (0 when disallowed).
  double emission(std::size_t state, std::size_t symbol) const {
    const auto& t = transition(state, symbol);
    return t ? t->prob : 0.0;
  }

  const std::vector<double>& stationary() const { return stationary_; }

  std::size_t state_index(std::string_view label) const;
  std::size_t symbol_index(std::string_view label) const;
  std::optional<std::size_t> find_state(std::string_view label) const;
  std::optional<std::size_t> find_symbol(std::string_view label) const;

  /// Splits a textual word into symbol indices. Single-character alphabets
  /// accept a plain string ("0110"); otherwise symbols are separated by
  /// spaces or commas.
  Word encode_word(std::string_view text) const;
  std::string decode_word(std::span<const std::size_t> word) const;

  /// State-to-state transition matrix T_ij = sum_x P(x, j | i).
  Eigen::MatrixXd state_transition_matrix() const;

  std::vector<EdgeSpec> edges() const;

  EpsilonMachine renamed(std::string name) const {
    EpsilonMachine copy = *this;
    copy.name_ = std::move(name);
    return copy;
  }

 private:
  EpsilonMachine() = default;

  std::string name_;
  std::vector<std::string> alphabet_;
  std::vector<std::string> states_;
  std::vector<std::optional<Transition>> table_;
  std::vector<double> stationary_;
};

struct Violation {
  std::string rule;
  std::string context;
  double measured = 0.0;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;
  bool minimal = true;
  std::vector<std::size_t> noncounifilar_states;
};

struct WordProbability {
  double probability = 0.0;
  std::optional<std::size_t> successor;
};

struct SamplePath {
  Word symbols;
  std::vector<std::size_t> states;  // length symbols.size() + 1
};

namespace detail {

inline bool strongly_connected(std::size_t n, const std::vector<std::vector<std::size_t>>& adjacency) {
  auto reach_all = [n](const std::vector<std::vector<std::size_t>>& adj) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v : adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n;
  };
  std::vector<std::vector<std::size_t>> reverse(n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v : adjacency[u]) reverse[v].push_back(u);
  return reach_all(adjacency) && reach_all(reverse);
}

inline std::optional<std::size_t> find_label(const std::vector<std::string>& labels,
                                             std::string_view label) {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

inline void require_unique(const std::vector<std::string>& labels, const char* what) {
  if (labels.empty()) throw Error(ErrorKind::schema, std::string(what) + " must be non-empty");
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (l.empty()) throw Error(ErrorKind::schema, std::string(what) + " label is empty");
    if (!seen.insert(l).second)
      throw Error(ErrorKind::schema, std::string("duplicate ") + what + " label '" + l + "'");
  }
}

/// Left fixed point of a row-stochastic irreducible matrix.
inline std::vector<double> solve_stationary(const Eigen::MatrixXd& t) {
  const auto n = t.rows();
  Eigen::MatrixXd a = t.transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd pi = lu.solve(b);
  // one step of iterative refinement
  pi += lu.solve(b - a * pi);
  for (Eigen::Index i = 0; i < n; ++i) pi(i) = std::max(pi(i), 0.0);
  pi /= pi.sum();
  double residual = (pi.transpose() * t - pi.transpose()).cwiseAbs().maxCoeff();
  if (!(residual <= tolerance::stationary_residual) || !(pi.minCoeff() > 0.0))
    throw Error(ErrorKind::numerical,
                "stationary distribution did not converge (residual " + std::to_string(residual) + ")");
  return {pi.data(), pi.data() + n};
}

}  // namespace detail

inline EpsilonMachine EpsilonMachine::create(std::string name, std::vector<std::string> alphabet,
                                             std::vector<std::string> states,
                                             const std::vector<EdgeSpec>& edges) {
  detail::require_unique(alphabet, "symbol");
  detail::require_unique(states, "state");

  EpsilonMachine m;
  m.name_ = std::move(name);
  m.alphabet_ = std::move(alphabet);
  m.states_ = std::move(states);
  const std::size_t n = m.states_.size();
  const std::size_t k = m.alphabet_.size();
  m.table_.assign(n * k, std::nullopt);

  std::vector<bool> declared(n * k, false);
  for (const auto& e : edges) {
    auto from = detail::find_label(m.states_, e.from);
    auto to = detail::find_label(m.states_, e.to);
    auto sym = detail::find_label(m.alphabet_, e.symbol);
    if (!from) throw Error(ErrorKind::schema, "transition from unknown state '" + e.from + "'");
    if (!to) throw Error(ErrorKind::schema, "transition to unknown state '" + e.to + "'");
    if (!sym) throw Error(ErrorKind::schema, "transition on unknown symbol '" + e.symbol + "'");
    if (!std::isfinite(e.prob) || e.prob < 0.0 || e.prob > 1.0 + tolerance::row_sum)
      throw Error(ErrorKind::schema, "probability out of range on " + e.from + " -" + e.symbol +
                                         "-> " + e.to + ": " + std::to_string(e.prob));
    const std::size_t slot = *from * k + *sym;
    if (declared[slot])
      throw Error(ErrorKind::unifilarity,
                  "state '" + e.from + "' has more than one transition on symbol '" + e.symbol + "'");
    declared[slot] = true;
    if (e.prob < tolerance::edge_drop) continue;
    m.table_[slot] = Transition{*to, e.prob};
  }

  std::vector<std::vector<std::size_t>> adjacency(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t x = 0; x < k; ++x)
      if (const auto& t = m.table_[i * k + x]) sum += t->prob;
    if (std::abs(sum - 1.0) > tolerance::row_sum)
      throw Error(ErrorKind::stochasticity, "outgoing probabilities of state '" + m.states_[i] +
                                                "' sum to " + std::to_string(sum));
    // rows already stochastic to rounding are kept bit-exact
    const bool renormalize = std::abs(sum - 1.0) > 1e-14;
    for (std::size_t x = 0; x < k; ++x) {
      if (auto& t = m.table_[i * k + x]) {
        if (renormalize) t->prob /= sum;
        adjacency[i].push_back(t->target);
      }
    }
  }
  if (!detail::strongly_connected(n, adjacency))
    throw Error(ErrorKind::reducible, "state graph of '" + m.name_ + "' is not strongly connected");

  m.stationary_ = detail::solve_stationary(m.state_transition_matrix());
  return m;
}

inline std::optional<std::size_t> EpsilonMachine::find_state(std::string_view label) const {
  return detail::find_label(states_, label);
}

inline std::optional<std::size_t> EpsilonMachine::find_symbol(std::string_view label) const {
  return detail::find_label(alphabet_, label);
}

inline std::size_t EpsilonMachine::state_index(std::string_view label) const {
  if (auto i = find_state(label)) return *i;
  throw Error(ErrorKind::unknown_state, "no state '" + std::string(label) + "'");
}

inline std::size_t EpsilonMachine::symbol_index(std::string_view label) const {
  if (auto i = find_symbol(label)) return *i;
  throw Error(ErrorKind::unknown_symbol, "no symbol '" + std::string(label) + "'");
}

inline Word EpsilonMachine::encode_word(std::string_view text) const {
  const bool single_char = std::all_of(alphabet_.begin(), alphabet_.end(),
                                       [](const std::string& s) { return s.size() == 1; });
  Word word;
  if (single_char && text.find_first_of(" ,") == std::string_view::npos) {
    for (char c : text) word.push_back(symbol_index(std::string_view(&c, 1)));
    return word;
  }
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find_first_of(" ,", pos);
    if (end == std::string_view::npos) end = text.size();
    if (end > pos) word.push_back(symbol_index(text.substr(pos, end - pos)));
    pos = end + 1;
  }
  return word;
}

inline std::string EpsilonMachine::decode_word(std::span<const std::size_t> word) const {
  const bool single_char = std::all_of(alphabet_.begin(), alphabet_.end(),
                                       [](const std::string& s) { return s.size() == 1; });
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (!single_char && i > 0) out += ' ';
    out += alphabet_.at(word[i]);
  }
  return out;
}

inline Eigen::MatrixXd EpsilonMachine::state_transition_matrix() const {
  const std::size_t n = num_states();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t x = 0; x < num_symbols(); ++x)
      if (const auto& tr = transition(i, x)) t(i, tr->target) += tr->prob;
  return t;
}

inline std::vector<EdgeSpec> EpsilonMachine::edges() const {
  std::vector<EdgeSpec> out;
  for (std::size_t i = 0; i < num_states(); ++i)
    for (std::size_t x = 0; x < num_symbols(); ++x)
      if (const auto& t = transition(i, x))
        out.push_back({states_[i], alphabet_[x], states_[t->target], t->prob});
  return out;
}

/// Recomputes pi from scratch and checks ||pi T - pi||_inf <= 1e-12.
inline std::vector<double> stationary_distribution(const EpsilonMachine& m) {
  return detail::solve_stationary(m.state_transition_matrix());
}

/**
 * Moore-style partition refinement on predictive equivalence.
 *
 * Returns the block index of every state. Blocks start from next-symbol
 * distributions (equal within 1e-9 per probability) and split on the block
 * of the successor for each symbol until nothing changes. Block indices are
 * numbered by first appearance in state order.
 */
inline std::vector<std::size_t> equivalence_classes(const EpsilonMachine& m) {
  const std::size_t n = m.num_states();
  const std::size_t k = m.num_symbols();

  // Initial partition: greedy clustering by next-symbol distribution.
  std::vector<std::size_t> block(n);
  std::vector<std::size_t> representatives;
  for (std::size_t i = 0; i < n; ++i) {
    bool placed = false;
    for (std::size_t b = 0; b < representatives.size() && !placed; ++b) {
      std::size_t r = representatives[b];
      bool same = true;
      for (std::size_t x = 0; x < k && same; ++x) {
        const bool ai = m.transition(i, x).has_value();
        const bool ar = m.transition(r, x).has_value();
        same = ai == ar && std::abs(m.emission(i, x) - m.emission(r, x)) <= tolerance::same_probability;
      }
      if (same) {
        block[i] = b;
        placed = true;
      }
    }
    if (!placed) {
      block[i] = representatives.size();
      representatives.push_back(i);
    }
  }

  for (;;) {
    // Signature: (current block, successor block per symbol or none).
    std::map<std::vector<std::size_t>, std::size_t> ids;
    std::vector<std::size_t> next(n);
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> sig{block[i]};
      for (std::size_t x = 0; x < k; ++x) {
        const auto& t = m.transition(i, x);
        sig.push_back(t ? block[t->target] : none);
      }
      auto [it, inserted] = ids.emplace(std::move(sig), ids.size());
      next[i] = it->second;
    }
    // Renumber by first appearance so the result is deterministic.
    std::vector<std::size_t> remap(ids.size(), none);
    std::size_t counter = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (remap[next[i]] == none) remap[next[i]] = counter++;
    for (std::size_t i = 0; i < n; ++i) next[i] = remap[next[i]];

    std::size_t before = *std::max_element(block.begin(), block.end()) + 1;
    block = std::move(next);
    if (counter == before) break;
  }
  return block;
}

/// Merges predictively equivalent states. Each merged state takes the label
/// and outgoing probabilities of its first member.
inline EpsilonMachine minimize(const EpsilonMachine& m) {
  const auto block = equivalence_classes(m);
  const std::size_t nblocks = *std::max_element(block.begin(), block.end()) + 1;
  if (nblocks == m.num_states()) return m;

  std::vector<std::size_t> rep(nblocks, m.num_states());
  for (std::size_t i = 0; i < m.num_states(); ++i)
    if (rep[block[i]] == m.num_states()) rep[block[i]] = i;

  std::vector<std::string> states;
  for (std::size_t b = 0; b < nblocks; ++b) states.push_back(m.states()[rep[b]]);
  std::vector<EdgeSpec> edges;
  for (std::size_t b = 0; b < nblocks; ++b)
    for (std::size_t x = 0; x < m.num_symbols(); ++x)
      if (const auto& t = m.transition(rep[b], x))
        edges.push_back({states[b], m.alphabet()[x], states[block[t->target]], t->prob});
  return EpsilonMachine::create(m.name(), m.alphabet(), std::move(states), edges);
}

/// A state is noncounifilar when two distinct predecessors reach it on the same symbol.
inline std::vector<std::size_t> noncounifilar_states(const EpsilonMachine& m) {
  std::vector<std::size_t> out;
  for (std::size_t target = 0; target < m.num_states(); ++target) {
    bool found = false;
    for (std::size_t x = 0; x < m.num_symbols() && !found; ++x) {
      std::size_t preds = 0;
      for (std::size_t i = 0; i < m.num_states(); ++i) {
        const auto& t = m.transition(i, x);
        if (t && t->target == target) ++preds;
      }
      found = preds >= 2;
    }
    if (found) out.push_back(target);
  }
  return out;
}

inline ValidationReport validate(const EpsilonMachine& m) {
  ValidationReport report;
  for (std::size_t i = 0; i < m.num_states(); ++i) {
    double sum = 0.0;
    for (std::size_t x = 0; x < m.num_symbols(); ++x) sum += m.emission(i, x);
    if (std::abs(sum - 1.0) > tolerance::row_sum)
      report.violations.push_back({"stochasticity", m.states()[i], sum});
  }
  const auto& pi = m.stationary();
  Eigen::Map<const Eigen::RowVectorXd> row(pi.data(), static_cast<Eigen::Index>(pi.size()));
  const double residual = (row * m.state_transition_matrix() - row).cwiseAbs().maxCoeff();
  if (residual > tolerance::stationary_residual)
    report.violations.push_back({"stationarity", "pi", residual});

  report.ok = report.violations.empty();
  const auto block = equivalence_classes(m);
  report.minimal = *std::max_element(block.begin(), block.end()) + 1 == m.num_states();
  report.noncounifilar_states = noncounifilar_states(m);
  return report;
}

/// Pr(word | state) and the unique successor, following the single path
/// that unifilarity allows.
inline WordProbability word_probability(const EpsilonMachine& m, std::size_t state,
                                        std::span<const std::size_t> word) {
  double p = 1.0;
  std::size_t s = state;
  for (std::size_t x : word) {
    if (x >= m.num_symbols()) throw Error(ErrorKind::unknown_symbol, "symbol index " + std::to_string(x));
    const auto& t = m.transition(s, x);
    if (!t) return {0.0, std::nullopt};
    p *= t->prob;
    s = t->target;
  }
  return {p, s};
}

inline WordProbability word_probability(const EpsilonMachine& m, std::string_view state,
                                        std::string_view word) {
  return word_probability(m, m.state_index(state), m.encode_word(word));
}

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits; stable across platforms.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Index drawn from nonnegative weights summing to (about) one.
inline std::size_t draw_index(std::mt19937_64& rng, std::span<const double> weights) {
  const double u = uniform01(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

}  // namespace detail

/// Generates `length` symbols. The start state defaults to a draw from pi.
inline SamplePath sample(const EpsilonMachine& m, std::size_t length, std::uint64_t seed,
                         std::optional<std::size_t> start = std::nullopt) {
  std::mt19937_64 rng(seed);
  SamplePath path;
  std::size_t s = start ? *start : detail::draw_index(rng, m.stationary());
  if (s >= m.num_states()) throw Error(ErrorKind::unknown_state, "state index " + std::to_string(s));
  path.states.push_back(s);
  std::vector<double> row(m.num_symbols());
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t x = 0; x < m.num_symbols(); ++x) row[x] = m.emission(s, x);
    const std::size_t x = detail::draw_index(rng, row);
    path.symbols.push_back(x);
    s = m.transition(s, x)->target;
    path.states.push_back(s);
  }
  return path;
}

/**
 * States consistent with having emitted `word` and ended in `final`.
 *
 * Entry t of the result lists (in index order) the states that could have
 * been occupied at time t, for t = 0..|word|. The final singleton is
 * propagated backwards through the predecessor relation, then a forward pass
 * drops states that no earlier candidate reaches on the word.
 */
inline std::vector<std::vector<std::size_t>> backward_inference(const EpsilonMachine& m,
                                                                std::span<const std::size_t> word,
                                                                std::size_t final_state) {
  std::vector<std::vector<std::size_t>> sets(word.size() + 1);
  std::vector<bool> current(m.num_states(), false);
  current.at(final_state) = true;
  sets[word.size()] = {final_state};
  for (std::size_t t = word.size(); t-- > 0;) {
    std::vector<bool> prev(m.num_states(), false);
    for (std::size_t i = 0; i < m.num_states(); ++i) {
      const auto& tr = m.transition(i, word[t]);
      if (tr && current[tr->target]) {
        prev[i] = true;
        sets[t].push_back(i);
      }
    }
    if (sets[t].empty())
      throw Error(ErrorKind::inconsistent,
                  "word '" + m.decode_word(word) + "' cannot end in state '" + m.states()[final_state] + "'");
    current = std::move(prev);
  }
  for (std::size_t t = 0; t < word.size(); ++t) {
    std::vector<bool> reached(m.num_states(), false);
    for (std::size_t i : sets[t]) reached[m.transition(i, word[t])->target] = true;
    std::erase_if(sets[t + 1], [&](std::size_t s) { return !reached[s]; });
  }
  return sets;
}

/// True when the machines are equal up to a relabeling of states.
inline bool isomorphic(const EpsilonMachine& a, const EpsilonMachine& b, double tol = 1e-9) {
  if (a.num_states() != b.num_states() || a.num_symbols() != b.num_symbols()) return false;
  const std::size_t n = a.num_states();
  for (std::size_t start = 0; start < n; ++start) {
    std::vector<std::size_t> map(n, n);
    std::vector<std::size_t> queue{0};
    map[0] = start;
    bool ok = true;
    for (std::size_t q = 0; q < queue.size() && ok; ++q) {
      const std::size_t i = queue[q];
      for (std::size_t x = 0; x < a.num_symbols() && ok; ++x) {
        const auto& ta = a.transition(i, x);
        const auto& tb = b.transition(map[i], x);
        if (ta.has_value() != tb.has_value()) {
          ok = false;
          break;
        }
        if (!ta) continue;
        if (std::abs(ta->prob - tb->prob) > tol) {
          ok = false;
          break;
        }
        if (map[ta->target] == n) {
          map[ta->target] = tb->target;
          queue.push_back(ta->target);
        } else if (map[ta->target] != tb->target) {
          ok = false;
        }
      }
    }
    if (ok && queue.size() == n) {
      std::vector<std::size_t> sorted = map;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) return true;
    }
  }
  return false;
}

}  // namespace qmachine
