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
#include <map>
#include <vector>

#include "qmachine/common.hpp"
#include "qmachine/machine.hpp"

namespace qmachine {

/// C_mu = H[pi], bits.
inline double statistical_complexity(const EpsilonMachine& m) {
  return shannon_entropy(m.stationary());
}

/// h_mu = sum_i pi_i H[X | S = i], bits per symbol.
inline double entropy_rate(const EpsilonMachine& m) {
  double h = 0.0;
  std::vector<double> row(m.num_symbols());
  for (std::size_t i = 0; i < m.num_states(); ++i) {
    for (std::size_t x = 0; x < m.num_symbols(); ++x) row[x] = m.emission(i, x);
    h += m.stationary()[i] * shannon_entropy(row);
  }
  return h;
}

/// Largest block length accepted by the word enumeration: |A|^L <= 2^16.
inline std::size_t block_entropy_cap(std::size_t alphabet_size) {
  if (alphabet_size <= 1) return 64;
  return static_cast<std::size_t>(std::floor(16.0 / std::log2(static_cast<double>(alphabet_size)) + 1e-12));
}

/// Default horizon for excess-entropy convergence: 14 for binary alphabets.
inline std::size_t default_max_block_length(std::size_t alphabet_size) {
  if (alphabet_size <= 1) return 1;
  const std::size_t cap = block_entropy_cap(alphabet_size);
  return cap > 2 ? cap - 2 : cap;
}

namespace detail {

inline void accumulate_block_entropies(const EpsilonMachine& m, const std::vector<double>& dist,
                                       std::size_t depth, std::vector<double>& h) {
  double total = 0.0;
  for (double d : dist) total += d;
  h[depth] += entropy_term(total);
  if (depth + 1 == h.size()) return;
  std::vector<double> next(m.num_states());
  for (std::size_t x = 0; x < m.num_symbols(); ++x) {
    std::fill(next.begin(), next.end(), 0.0);
    bool any = false;
    for (std::size_t i = 0; i < m.num_states(); ++i) {
      if (dist[i] == 0.0) continue;
      if (const auto& t = m.transition(i, x)) {
        next[t->target] += dist[i] * t->prob;
        any = true;
      }
    }
    if (any) accumulate_block_entropies(m, next, depth + 1, h);
  }
}

}  // namespace detail

/// H(0), H(1), ..., H(max_length) in bits, words weighted by pi.
inline std::vector<double> block_entropies(const EpsilonMachine& m, std::size_t max_length) {
  if (max_length > block_entropy_cap(m.num_symbols()))
    throw Error(ErrorKind::cap_exceeded, "block length " + std::to_string(max_length) + " exceeds cap " +
                                             std::to_string(block_entropy_cap(m.num_symbols())));
  std::vector<double> h(max_length + 1, 0.0);
  detail::accumulate_block_entropies(m, m.stationary(), 0, h);
  return h;
}

inline double block_entropy(const EpsilonMachine& m, std::size_t length) {
  return block_entropies(m, length).back();
}

/**
 * Markov order by subset construction.
 *
 * Starting from the full state set, each symbol maps a set of candidate
 * states to the set of their successors. The order is the depth after which
 * every reachable set is a singleton. A non-singleton set on a cycle makes it
 * infinite. Only the machine's support matters; probabilities are ignored.
 */
inline Order markov_order(const EpsilonMachine& m, std::size_t node_budget = 1'000'000) {
  using Subset = std::vector<std::size_t>;
  std::map<Subset, std::size_t> ids;
  std::vector<Subset> nodes;
  std::vector<std::vector<std::size_t>> children;

  Subset all(m.num_states());
  std::iota(all.begin(), all.end(), 0);
  ids.emplace(all, 0);
  nodes.push_back(all);
  children.emplace_back();

  for (std::size_t q = 0; q < nodes.size(); ++q) {
    if (nodes[q].size() == 1) continue;
    for (std::size_t x = 0; x < m.num_symbols(); ++x) {
      std::vector<bool> mark(m.num_states(), false);
      for (std::size_t s : nodes[q])
        if (const auto& t = m.transition(s, x)) mark[t->target] = true;
      Subset image;
      for (std::size_t s = 0; s < m.num_states(); ++s)
        if (mark[s]) image.push_back(s);
      if (image.empty()) continue;
      auto [it, inserted] = ids.emplace(image, nodes.size());
      if (inserted) {
        if (nodes.size() >= node_budget) return Order::unknown(node_budget);
        nodes.push_back(std::move(image));
        children.emplace_back();
      }
      children[q].push_back(it->second);
    }
  }

  // Height of each non-singleton node (longest word to synchronization),
  // with cycle detection by iterative DFS.
  enum Color : unsigned char { white, grey, black };
  std::vector<Color> color(nodes.size(), white);
  std::vector<std::size_t> height(nodes.size(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  color[0] = grey;
  if (nodes[0].size() == 1) return Order::finite(0);
  while (!stack.empty()) {
    auto& [u, next] = stack.back();
    if (next < children[u].size()) {
      std::size_t v = children[u][next++];
      if (nodes[v].size() == 1) {
        height[u] = std::max<std::size_t>(height[u], 1);
        continue;
      }
      if (color[v] == grey) return Order::infinite();
      if (color[v] == white) {
        color[v] = grey;
        stack.push_back({v, 0});
      } else {
        height[u] = std::max(height[u], height[v] + 1);
      }
    } else {
      color[u] = black;
      const std::size_t done = u;
      stack.pop_back();
      if (!stack.empty()) {
        auto& parent = stack.back().first;
        height[parent] = std::max(height[parent], height[done] + 1);
      }
    }
  }
  return Order::finite(height[0]);
}

struct ExcessEntropy {
  enum class Status { converged, truncated };

  double value = 0.0;
  Status status = Status::converged;
  std::size_t length = 0;        // block length the value was read at
  double last_increment = 0.0;   // E(length) - E(length - 1)
};

inline const char* to_string(ExcessEntropy::Status s) {
  return s == ExcessEntropy::Status::converged ? "converged" : "truncated";
}

/**
 * E from block-entropy convergence, E(L) = H(L) - L h_mu.
 *
 * Exact at the Markov order when it is finite and within `max_length`.
 * Otherwise the first L whose increment drops below `tol` counts as
 * converged, and E(max_length) is returned as a truncated lower bound.
 */
inline ExcessEntropy excess_entropy(const EpsilonMachine& m, double tol = 1e-10,
                                    std::size_t max_length = 0) {
  if (max_length == 0) max_length = default_max_block_length(m.num_symbols());
  const double h = entropy_rate(m);
  const Order r = markov_order(m);

  ExcessEntropy out;
  if (r.is_finite() && r.value <= max_length) {
    const auto blocks = block_entropies(m, r.value);
    out.value = std::max(0.0, blocks[r.value] - static_cast<double>(r.value) * h);
    out.length = r.value;
    if (r.value > 0)
      out.last_increment = (blocks[r.value] - blocks[r.value - 1]) - h;
    return out;
  }

  const auto blocks = block_entropies(m, max_length);
  double previous = 0.0;
  for (std::size_t len = 1; len <= max_length; ++len) {
    const double e = blocks[len] - static_cast<double>(len) * h;
    out.value = std::max(0.0, e);
    out.length = len;
    out.last_increment = e - previous;
    previous = e;
    if (out.last_increment < tol) return out;
  }
  out.status = ExcessEntropy::Status::truncated;
  return out;
}

}  // namespace qmachine
