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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qmachine/common.hpp"
#include "qmachine/machine.hpp"

namespace qmachine {

struct PairState {
  std::size_t first = 0;   // smaller state index
  std::size_t second = 0;  // larger state index

  friend bool operator==(const PairState&, const PairState&) = default;
};

/// Edge out of a pair-state. A merger edge lands on a single machine state
/// (`target` is a state index); otherwise `target` is a pair index.
struct PairEdge {
  std::size_t from = 0;
  std::size_t symbol = 0;
  std::size_t target = 0;
  bool merger = false;
  double weight = 0.0;  // sqrt(p_i(x) p_j(x))
};

/**
 * Pairwise-merger machine of an epsilon-machine.
 *
 * States are the unordered pairs {i, j}, i < j, indexed lexicographically.
 * On a symbol both components advance; the edge is omitted if either
 * component forbids the symbol, and it is a merger when both land on the
 * same state. Edge weights are square roots of the product of the two
 * emission probabilities, so a path weight is the overlap contribution of
 * the word it spells.
 */
class PairMergerMachine {
 public:
  explicit PairMergerMachine(const EpsilonMachine& m) : num_states_(m.num_states()) {
    const std::size_t n = m.num_states();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) pairs_.push_back({i, j});

    const auto np = static_cast<Eigen::Index>(pairs_.size());
    pair_weights_ = Eigen::MatrixXd::Zero(np, np);
    merger_mass_ = Eigen::VectorXd::Zero(np);
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
      const auto [i, j] = pairs_[p];
      for (std::size_t x = 0; x < m.num_symbols(); ++x) {
        const auto& ti = m.transition(i, x);
        const auto& tj = m.transition(j, x);
        if (!ti || !tj) continue;
        PairEdge e;
        e.from = p;
        e.symbol = x;
        e.weight = std::sqrt(ti->prob * tj->prob);
        if (ti->target == tj->target) {
          e.merger = true;
          e.target = ti->target;
          merger_mass_(static_cast<Eigen::Index>(p)) += e.weight;
        } else {
          e.target = index_of(ti->target, tj->target);
          pair_weights_(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(e.target)) += e.weight;
        }
        edges_.push_back(e);
      }
    }
  }

  std::size_t num_states() const { return num_states_; }
  const std::vector<PairState>& pairs() const { return pairs_; }
  const std::vector<PairEdge>& edges() const { return edges_; }

  /// Pair-to-pair weight matrix B.
  const Eigen::MatrixXd& pair_weights() const { return pair_weights_; }
  /// One-step merger mass c per pair.
  const Eigen::VectorXd& merger_mass() const { return merger_mass_; }

  std::size_t index_of(std::size_t a, std::size_t b) const {
    if (a == b || a >= num_states_ || b >= num_states_)
      throw Error(ErrorKind::parameter, "pair needs two distinct states");
    const std::size_t i = std::min(a, b);
    const std::size_t j = std::max(a, b);
    // pairs (i, *) start after sum_{r<i} (n - 1 - r)
    return i * (2 * num_states_ - i - 1) / 2 + (j - i - 1);
  }

  /// Spectral radius of B; below one for minimal machines.
  double spectral_radius() const {
    if (pairs_.empty()) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(pair_weights_, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
  }

 private:
  std::size_t num_states_ = 0;
  std::vector<PairState> pairs_;
  std::vector<PairEdge> edges_;
  Eigen::MatrixXd pair_weights_;
  Eigen::VectorXd merger_mass_;
};

inline PairMergerMachine build_pmm(const EpsilonMachine& m) { return PairMergerMachine(m); }

/// Symmetric matrix of signal-state overlaps <eta_i|eta_j> at a horizon.
struct GramMatrix {
  Horizon horizon;
  Eigen::MatrixXd entries;
};

namespace detail {

inline GramMatrix gram_from_pairs(const PairMergerMachine& pmm, Horizon horizon,
                                  const Eigen::VectorXd& overlaps) {
  const auto n = static_cast<Eigen::Index>(pmm.num_states());
  GramMatrix g{horizon, Eigen::MatrixXd::Identity(n, n)};
  for (std::size_t p = 0; p < pmm.pairs().size(); ++p) {
    const auto [i, j] = pmm.pairs()[p];
    const double v = std::clamp(overlaps(static_cast<Eigen::Index>(p)), 0.0, 1.0);
    g.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    g.entries(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
  }
  return g;
}

}  // namespace detail

/// Per-pair overlaps at horizon L: x_L = sum_{t<L} B^t c.
inline Eigen::VectorXd pair_overlaps(const PairMergerMachine& pmm, std::size_t length) {
  const auto& b = pmm.pair_weights();
  const auto& c = pmm.merger_mass();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(c.size());
  for (std::size_t t = 0; t < length; ++t) x = b * x + c;
  return x;
}

/// Finite-horizon Gram matrix by L matrix-vector products over the pair space.
inline GramMatrix gram_matrix(const PairMergerMachine& pmm, std::size_t length) {
  return detail::gram_from_pairs(pmm, length, pair_overlaps(pmm, length));
}

struct AsymptoticGram {
  GramMatrix gram;
  double spectral_radius = 0.0;
  double residual = 0.0;  // ||x - Bx - c||_inf of the solve
};

/// G(inf) from x = (I - B)^{-1} c. Fails when B has spectral radius >= 1,
/// which happens only for non-minimal presentations.
inline AsymptoticGram gram_matrix_asymptotic_detail(const PairMergerMachine& pmm) {
  AsymptoticGram out;
  out.spectral_radius = pmm.spectral_radius();
  if (!(out.spectral_radius < 1.0 - 1e-12))
    throw Error(ErrorKind::singular, "pair-state weight matrix has spectral radius " +
                                         std::to_string(out.spectral_radius) +
                                         "; the machine has indistinguishable states");
  const auto& b = pmm.pair_weights();
  const auto& c = pmm.merger_mass();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(c.size());
  if (c.size() > 0) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(b.rows(), b.cols()) - b;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    x = lu.solve(c);
    out.residual = (x - b * x - c).cwiseAbs().maxCoeff();
    if (x.size() > 0 && (x.maxCoeff() > 1.0 + 1e-9 || x.minCoeff() < -1e-9))
      throw Error(ErrorKind::numerical, "asymptotic overlaps left [0,1]");
  }
  out.gram = detail::gram_from_pairs(pmm, infinite_horizon, x);
  return out;
}

inline GramMatrix gram_matrix_asymptotic(const PairMergerMachine& pmm) {
  return gram_matrix_asymptotic_detail(pmm).gram;
}

/// Increment of the overlap of `pair` at each L = 0..max_length: the weight
/// of paths whose first merger happens on exactly the L-th symbol.
inline std::vector<double> overlap_increments(const PairMergerMachine& pmm, std::size_t pair,
                                              std::size_t max_length) {
  if (pair >= pmm.pairs().size()) throw Error(ErrorKind::parameter, "pair index out of range");
  std::vector<double> out(max_length + 1, 0.0);
  // Row vector e_pair^T B^{L-1}, dotted with c.
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(pmm.pairs().size()));
  row(static_cast<Eigen::Index>(pair)) = 1.0;
  for (std::size_t len = 1; len <= max_length; ++len) {
    out[len] = row.dot(pmm.merger_mass());
    row = row * pmm.pair_weights();
  }
  return out;
}

/**
 * Cryptic order as the length of the longest pair-state path that ends in a
 * merger (counting the merging symbol). Infinite when a pair-state on a
 * cycle can still reach a merger. Zero when no pair ever merges.
 */
inline Order cryptic_order(const PairMergerMachine& pmm) {
  const std::size_t np = pmm.pairs().size();
  std::vector<std::vector<std::size_t>> next(np);
  std::vector<bool> merges(np, false);
  for (const auto& e : pmm.edges()) {
    if (e.merger)
      merges[e.from] = true;
    else
      next[e.from].push_back(e.target);
  }

  // Pairs that can reach a merger edge.
  std::vector<std::vector<std::size_t>> prev(np);
  for (std::size_t p = 0; p < np; ++p)
    for (std::size_t q : next[p]) prev[q].push_back(p);
  std::vector<bool> productive(np, false);
  std::vector<std::size_t> stack;
  for (std::size_t p = 0; p < np; ++p)
    if (merges[p]) {
      productive[p] = true;
      stack.push_back(p);
    }
  while (!stack.empty()) {
    std::size_t q = stack.back();
    stack.pop_back();
    for (std::size_t p : prev[q])
      if (!productive[p]) {
        productive[p] = true;
        stack.push_back(p);
      }
  }

  // Longest merging path over the productive subgraph, which must be acyclic.
  enum Color : unsigned char { white, grey, black };
  std::vector<Color> color(np, white);
  std::vector<std::size_t> depth(np, 0);
  std::size_t best = 0;
  for (std::size_t root = 0; root < np; ++root) {
    if (!productive[root] || color[root] != white) continue;
    std::vector<std::pair<std::size_t, std::size_t>> dfs{{root, 0}};
    color[root] = grey;
    while (!dfs.empty()) {
      auto& [u, i] = dfs.back();
      if (i < next[u].size()) {
        std::size_t v = next[u][i++];
        if (!productive[v]) continue;
        if (color[v] == grey) return Order::infinite();
        if (color[v] == white) {
          color[v] = grey;
          dfs.push_back({v, 0});
        }
      } else {
        std::size_t d = merges[u] ? 1 : 0;
        for (std::size_t v : next[u])
          if (productive[v]) d = std::max(d, depth[v] + 1);
        depth[u] = d;
        color[u] = black;
        best = std::max(best, d);
        dfs.pop_back();
      }
    }
  }
  return Order::finite(best);
}

/// Cryptic order read from the increments: the largest L <= max_length with
/// a nonzero increment for any pair. Unknown when increments are still
/// nonzero at max_length.
inline Order cryptic_order_from_increments(const PairMergerMachine& pmm, std::size_t max_length) {
  std::size_t last = 0;
  for (std::size_t p = 0; p < pmm.pairs().size(); ++p) {
    const auto inc = overlap_increments(pmm, p, max_length);
    for (std::size_t len = 1; len <= max_length; ++len)
      if (inc[len] > 0.0) last = std::max(last, len);
  }
  if (last == max_length && max_length > 0) return Order::unknown(max_length);
  return Order::finite(last);
}

struct RatioCheck {
  bool positive = true;
  double min_eigenvalue = 0.0;
  Eigen::MatrixXd ratio;
};

/**
 * Element-wise ratio R_ij = G_b,ij / G_a,ij (0/0 taken as 1) and whether it
 * is positive semidefinite (smallest eigenvalue >= -1e-10). With G_a the
 * later, larger-overlap Gram matrix, G_b = G_a o R, and a PSD R rules out an
 * entropy increase from G_b to G_a.
 */
inline RatioCheck jozsa_ratio_check(const GramMatrix& a, const GramMatrix& b) {
  if (a.entries.rows() != b.entries.rows() || a.entries.cols() != b.entries.cols())
    throw Error(ErrorKind::parameter, "Gram matrices differ in size");
  constexpr double zero = 1e-300;
  RatioCheck out;
  out.ratio = Eigen::MatrixXd::Ones(a.entries.rows(), a.entries.cols());
  for (Eigen::Index i = 0; i < a.entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.entries.cols(); ++j) {
      const double num = b.entries(i, j);
      const double den = a.entries(i, j);
      if (std::abs(den) <= zero) {
        if (std::abs(num) > zero)
          throw Error(ErrorKind::undefined_ratio, "nonzero over zero at (" + std::to_string(i) + "," +
                                                      std::to_string(j) + ")");
        continue;
      }
      out.ratio(i, j) = num / den;
    }
  }
  if (out.ratio.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(out.ratio, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = solver.eigenvalues().minCoeff();
  }
  out.positive = out.min_eigenvalue >= -tolerance::psd;
  return out;
}

/// Edge-list export of the PMM for external inspection or drawing.
inline nlohmann::ordered_json pmm_to_json(const PairMergerMachine& pmm, const EpsilonMachine& m) {
  auto pair_name = [&](std::size_t p) {
    return m.states()[pmm.pairs()[p].first] + m.states()[pmm.pairs()[p].second];
  };
  nlohmann::ordered_json doc;
  doc["name"] = m.name();
  auto pairs = nlohmann::ordered_json::array();
  for (std::size_t p = 0; p < pmm.pairs().size(); ++p)
    pairs.push_back({{"pair", pair_name(p)},
                     {"states", {m.states()[pmm.pairs()[p].first], m.states()[pmm.pairs()[p].second]}}});
  doc["pairs"] = std::move(pairs);
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : pmm.edges()) {
    edges.push_back({{"from", pair_name(e.from)},
                     {"symbol", m.alphabet()[e.symbol]},
                     {"to", e.merger ? m.states()[e.target] : pair_name(e.target)},
                     {"merger", e.merger},
                     {"weight", e.weight}});
  }
  doc["edges"] = std::move(edges);
  return doc;
}

}  // namespace qmachine
