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
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qmachine/machine.hpp"

namespace qmachine {

namespace detail {

inline void require_probability(double p, const char* family) {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorKind::parameter, std::string(family) + " needs p in (0,1), got " + std::to_string(p));
}

inline std::string format_param(double p) {
  std::ostringstream os;
  os << p;
  return os.str();
}

/// A, B, ..., Z, then S26, S27, ...
inline std::string letter_label(std::size_t i) {
  if (i < 26) return std::string(1, static_cast<char>('A' + i));
  return "S" + std::to_string(i);
}

}  // namespace detail

/**
 * Two biased coins. A emits 0 with probability 1-p and stays, or 1 with
 * probability p and switches to B; B mirrors it. Pr(0|A) = 1-p.
 */
inline EpsilonMachine biased_coins(double p) {
  detail::require_probability(p, "biased-coins");
  return EpsilonMachine::create("biased-coins(p=" + detail::format_param(p) + ")", {"0", "1"}, {"A", "B"},
                                {{"A", "0", "A", 1.0 - p},
                                 {"A", "1", "B", p},
                                 {"B", "0", "A", p},
                                 {"B", "1", "B", 1.0 - p}});
}

/**
 * R-k Golden Mean process on R+k states s_0..s_{R+k-1} labeled A, B, ...
 *
 *   s_0:  1 -> s_0 (p),  0 -> s_1 (1-p)
 *   s_i:  0 -> s_{i+1}           for 1 <= i <= R-1
 *   s_i:  1 -> s_{(i+1) mod R+k} for R <= i <= R+k-1
 *
 * Markov order R, cryptic order k.
 */
inline EpsilonMachine rk_golden_mean(std::size_t markov, std::size_t cryptic, double p) {
  if (markov < 1 || cryptic < 1 || cryptic > markov)
    throw Error(ErrorKind::parameter, "rk-golden-mean needs 1 <= k <= R");
  detail::require_probability(p, "rk-golden-mean");
  const std::size_t n = markov + cryptic;
  std::vector<std::string> states;
  for (std::size_t i = 0; i < n; ++i) states.push_back(detail::letter_label(i));
  std::vector<EdgeSpec> edges{{states[0], "1", states[0], p}, {states[0], "0", states[1], 1.0 - p}};
  for (std::size_t i = 1; i < markov; ++i) edges.push_back({states[i], "0", states[i + 1], 1.0});
  for (std::size_t i = markov; i < n; ++i) edges.push_back({states[i], "1", states[(i + 1) % n], 1.0});
  return EpsilonMachine::create("rk-golden-mean(R=" + std::to_string(markov) + ",k=" + std::to_string(cryptic) +
                                    ",p=" + detail::format_param(p) + ")",
                                {"0", "1"}, std::move(states), edges);
}

/// Three-state Nemo process: A -0|p-> A, A -1|1-p-> B, B -1-> C, C -0,1|1/2-> A.
inline EpsilonMachine nemo(double p) {
  detail::require_probability(p, "nemo");
  return EpsilonMachine::create("nemo(p=" + detail::format_param(p) + ")", {"0", "1"}, {"A", "B", "C"},
                                {{"A", "0", "A", p},
                                 {"A", "1", "B", 1.0 - p},
                                 {"B", "1", "C", 1.0},
                                 {"C", "0", "A", 0.5},
                                 {"C", "1", "A", 0.5}});
}

/**
 * Random unifilar machine, minimized before return.
 *
 * Every (state, symbol) slot is independently left empty or sent to one of
 * the n states, each of the n+1 choices equally likely; topologies are
 * redrawn until the state graph is strongly connected. Outgoing
 * probabilities follow a flat Dirichlet over each state's present symbols.
 */
inline EpsilonMachine random_machine(std::size_t num_states, std::size_t alphabet_size, std::uint64_t seed) {
  if (num_states < 1 || alphabet_size < 2)
    throw Error(ErrorKind::parameter, "random machine needs n >= 1 states and >= 2 symbols");
  std::mt19937_64 rng(seed);
  std::vector<std::string> alphabet;
  for (std::size_t x = 0; x < alphabet_size; ++x) alphabet.push_back(std::to_string(x));
  std::vector<std::string> states;
  for (std::size_t i = 0; i < num_states; ++i) states.push_back("S" + std::to_string(i));

  constexpr std::size_t max_attempts = 10'000;
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<std::vector<std::size_t>> adjacency(num_states);
    std::vector<std::optional<std::size_t>> slot(num_states * alphabet_size);
    bool every_state_emits = true;
    for (std::size_t i = 0; i < num_states; ++i) {
      for (std::size_t x = 0; x < alphabet_size; ++x) {
        const std::size_t choice = rng() % (num_states + 1);
        if (choice < num_states) {
          slot[i * alphabet_size + x] = choice;
          adjacency[i].push_back(choice);
        }
      }
      every_state_emits = every_state_emits && !adjacency[i].empty();
    }
    if (!every_state_emits || !detail::strongly_connected(num_states, adjacency)) continue;

    std::vector<EdgeSpec> edges;
    for (std::size_t i = 0; i < num_states; ++i) {
      std::vector<double> w;
      for (std::size_t x = 0; x < alphabet_size; ++x)
        if (slot[i * alphabet_size + x]) w.push_back(-std::log1p(-detail::uniform01(rng)));
      double total = 0.0;
      for (double v : w) total += v;
      std::size_t k = 0;
      for (std::size_t x = 0; x < alphabet_size; ++x)
        if (slot[i * alphabet_size + x])
          edges.push_back({states[i], alphabet[x], states[*slot[i * alphabet_size + x]], w[k++] / total});
    }
    try {
      auto m = EpsilonMachine::create("random(n=" + std::to_string(num_states) + ",seed=" + std::to_string(seed) + ")",
                                      alphabet, states, edges);
      return minimize(m);
    } catch (const Error&) {
      // a vanishing Dirichlet draw can drop an edge and break connectivity
      continue;
    }
  }
  throw Error(ErrorKind::numerical, "no irreducible topology after " + std::to_string(max_attempts) +
                                        " attempts (n=" + std::to_string(num_states) + ")");
}

/// Builder parameters for one of the named families.
struct ProcessFamily {
  std::string id;  // biased-coins | rk-golden-mean | nemo | random
  double p = 0.5;
  std::size_t markov = 4;
  std::size_t cryptic = 3;
  std::size_t num_states = 3;
  std::size_t alphabet_size = 2;
  std::uint64_t seed = 0;
};

inline EpsilonMachine build_family(const ProcessFamily& f) {
  if (f.id == "biased-coins") return biased_coins(f.p);
  if (f.id == "rk-golden-mean") return rk_golden_mean(f.markov, f.cryptic, f.p);
  if (f.id == "nemo") return nemo(f.p);
  if (f.id == "random") return random_machine(f.num_states, f.alphabet_size, f.seed);
  throw Error(ErrorKind::parameter, "unknown family '" + f.id + "'");
}

}  // namespace qmachine
