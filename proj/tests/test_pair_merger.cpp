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

#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qmachine/qmachine.hpp"

using namespace qmachine;

TEST(PairMergerMachine, PairIndexing) {
  const auto pmm = build_pmm(rk_golden_mean(4, 3, 0.5));
  ASSERT_EQ(pmm.pairs().size(), 21u);
  for (std::size_t p = 0; p < pmm.pairs().size(); ++p) {
    const auto [a, b] = pmm.pairs()[p];
    EXPECT_LT(a, b);
    EXPECT_EQ(pmm.index_of(a, b), p);
    EXPECT_EQ(pmm.index_of(b, a), p);
  }
  EXPECT_THROW(pmm.index_of(2, 2), Error);
}

TEST(PairMergerMachine, BiasedCoinsMergesInOneStep) {
  const double p = 0.3;
  const auto pmm = build_pmm(biased_coins(p));
  ASSERT_EQ(pmm.pairs().size(), 1u);
  EXPECT_EQ(pmm.pair_weights()(0, 0), 0.0);
  EXPECT_NEAR(pmm.merger_mass()(0), 2 * std::sqrt(p * (1 - p)), 1e-15);
  for (const auto& e : pmm.edges()) EXPECT_TRUE(e.merger);
}

TEST(PairMergerMachine, NemoPairCycle) {
  // (A,B) -1-> (B,C) -1-> (C,A) -1-> (A,B), and (C,A) merges into A on 0.
  const double p = 0.4;
  const auto m = nemo(p);
  const auto pmm = build_pmm(m);
  const std::size_t ab = pmm.index_of(0, 1), bc = pmm.index_of(1, 2), ca = pmm.index_of(2, 0);
  const auto& b = pmm.pair_weights();
  EXPECT_NEAR(b(ab, bc), std::sqrt(1 - p), 1e-15);
  EXPECT_NEAR(b(bc, ca), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(b(ca, ab), std::sqrt(0.5 * (1 - p)), 1e-15);
  EXPECT_NEAR(b.sum(), std::sqrt(1 - p) + std::sqrt(0.5) + std::sqrt(0.5 * (1 - p)), 1e-15);
  EXPECT_EQ(pmm.merger_mass()(ab), 0.0);
  EXPECT_EQ(pmm.merger_mass()(bc), 0.0);
  EXPECT_NEAR(pmm.merger_mass()(ca), std::sqrt(p / 2), 1e-15);
  EXPECT_LT(pmm.spectral_radius(), 1.0);
}

TEST(PairMergerMachine, RkGoldenMeanMergers) {
  // Only A and G share a successor: both go to A on 1.
  const auto m = rk_golden_mean(4, 3, 0.505);
  const auto pmm = build_pmm(m);
  std::size_t mergers = 0;
  for (const auto& e : pmm.edges())
    if (e.merger) {
      ++mergers;
      EXPECT_EQ(e.from, pmm.index_of(m.state_index("A"), m.state_index("G")));
      EXPECT_EQ(e.target, m.state_index("A"));
      EXPECT_NEAR(e.weight, std::sqrt(0.505), 1e-15);
    }
  EXPECT_EQ(mergers, 1u);
}

TEST(GramMatrix, AgreesWithWordEnumeration) {
  std::vector<EpsilonMachine> corpus{biased_coins(0.666), rk_golden_mean(4, 3, 0.505), nemo(0.666)};
  for (std::uint64_t seed = 0; seed < 20; ++seed) corpus.push_back(random_machine(2 + seed % 5, 2 + seed % 2, seed));
  for (const auto& m : corpus) {
    const auto pmm = build_pmm(m);
    for (std::size_t len = 0; len <= 6; ++len) {
      const auto g = gram_matrix(pmm, len);
      EXPECT_EQ(g.horizon, Horizon(len));
      EXPECT_LE((g.entries - oracle::gram(m, len)).cwiseAbs().maxCoeff(), 1e-12) << m.name() << " L=" << len;
    }
  }
}

TEST(GramMatrix, ZeroLengthIsIdentity) {
  const auto g = gram_matrix(build_pmm(nemo(0.5)), 0);
  EXPECT_TRUE(g.entries.isApprox(Eigen::MatrixXd::Identity(3, 3)));
}

TEST(GramMatrix, OverlapsNondecreasingInL) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto m = random_machine(2 + seed % 6, 2, 4000 + seed);
    const auto pmm = build_pmm(m);
    Eigen::MatrixXd previous = gram_matrix(pmm, 0).entries;
    for (std::size_t len = 1; len <= 10; ++len) {
      const auto g = gram_matrix(pmm, len).entries;
      EXPECT_GE((g - previous).minCoeff(), -1e-14);
      EXPECT_LE(g.maxCoeff(), 1.0);
      previous = g;
    }
  }
}

TEST(GramMatrix, BiasedCoinsConstantAfterOneStep) {
  const double p = 0.666;
  const auto pmm = build_pmm(biased_coins(p));
  for (std::size_t len = 1; len <= 5; ++len)
    EXPECT_NEAR(gram_matrix(pmm, len).entries(0, 1), 2 * std::sqrt(p * (1 - p)), 1e-15);
  EXPECT_NEAR(gram_matrix_asymptotic(pmm).entries(0, 1), 2 * std::sqrt(p * (1 - p)), 1e-15);
}

TEST(GramMatrix, RkGoldenMeanQuotedOverlaps) {
  const double p = 0.505;
  const auto m = rk_golden_mean(4, 3, p);
  const auto pmm = build_pmm(m);
  const auto a = m.state_index("A"), e = m.state_index("E"), f = m.state_index("F"), g = m.state_index("G");
  const auto g1 = gram_matrix(pmm, 1).entries;
  EXPECT_NEAR(g1(a, g), std::sqrt(p), 1e-12);
  EXPECT_EQ((g1 - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().sum(), 2 * g1(a, g));
  const auto g2 = gram_matrix(pmm, 2).entries;
  EXPECT_NEAR(g2(a, g), std::sqrt(p), 1e-12);
  EXPECT_NEAR(g2(a, f), p, 1e-12);
  EXPECT_NEAR(g2(f, g), std::sqrt(p), 1e-12);
  EXPECT_EQ(g2(a, e), 0.0);
  std::size_t nonzero = 0;
  for (Eigen::Index i = 0; i < 7; ++i)
    for (Eigen::Index j = i + 1; j < 7; ++j) nonzero += g2(i, j) > 0.0;
  EXPECT_EQ(nonzero, 3u);
}

TEST(GramMatrix, FiniteCrypticReachesAsymptoteAtK) {
  const auto m = rk_golden_mean(4, 3, 0.3);
  const auto pmm = build_pmm(m);
  const auto inf = gram_matrix_asymptotic(pmm).entries;
  EXPECT_LE((gram_matrix(pmm, 3).entries - inf).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_GT((gram_matrix(pmm, 2).entries - inf).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(GramMatrixAsymptotic, NemoClosedForms) {
  for (double p : {0.25, 0.5, 0.666, 0.9}) {
    const auto g = gram_matrix_asymptotic(build_pmm(nemo(p))).entries;
    EXPECT_NEAR(g(0, 1), std::sqrt(p * (1 - p)) / (1 + p), 1e-12);
    EXPECT_NEAR(g(1, 2), std::sqrt(p) / (1 + p), 1e-12);
    EXPECT_NEAR(g(2, 0), std::sqrt(2 * p) / (1 + p), 1e-12);
    EXPECT_EQ(g(0, 1), g(1, 0));
  }
}

TEST(GramMatrixAsymptotic, LimitOfFiniteL) {
  const auto pmm = build_pmm(nemo(0.666));
  const auto inf = gram_matrix_asymptotic(pmm).entries;
  EXPECT_LE((gram_matrix(pmm, 200).entries - inf).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GramMatrixAsymptotic, NonMinimalMachineIsSingular) {
  // A and B are both fair coins and swap on 1, so the pair never merges.
  const auto swap = EpsilonMachine::create("swap", {"0", "1"}, {"A", "B"},
                                           {{"A", "0", "A", 0.5}, {"A", "1", "B", 0.5},
                                            {"B", "0", "B", 0.5}, {"B", "1", "A", 0.5}});
  const auto pmm = build_pmm(swap);
  EXPECT_NEAR(pmm.spectral_radius(), 1.0, 1e-12);
  try {
    gram_matrix_asymptotic(pmm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::singular);
  }
}

TEST(OverlapIncrements, NemoSeries) {
  const double p = 0.666, a = (1 - p) / 2;
  const auto pmm = build_pmm(nemo(p));
  struct Series {
    std::size_t pair;
    double coef;
    std::size_t first;
  };
  const Series series[] = {{pmm.index_of(0, 1), std::sqrt(p * (1 - p)) / 2, 3},
                           {pmm.index_of(1, 2), std::sqrt(p) / 2, 2},
                           {pmm.index_of(2, 0), std::sqrt(p / 2), 1}};
  for (const auto& s : series) {
    const auto inc = overlap_increments(pmm, s.pair, 60);
    double sum = 0.0;
    for (std::size_t len = 0; len <= 60; ++len) {
      const bool merger = len >= s.first && (len - s.first) % 3 == 0;
      const double expected = merger ? s.coef * std::pow(a, static_cast<double>((len - s.first) / 3)) : 0.0;
      EXPECT_NEAR(inc[len], expected, 1e-12) << "pair " << s.pair << " L=" << len;
      sum += inc[len];
    }
    EXPECT_NEAR(sum, s.coef / (1 - a), 1e-9);
  }
}

TEST(OverlapIncrements, CumulativeSumsAreGramEntries) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const auto m = random_machine(3 + seed % 4, 2, 5000 + seed);
    const auto pmm = build_pmm(m);
    for (std::size_t q = 0; q < pmm.pairs().size(); ++q) {
      const auto inc = overlap_increments(pmm, q, 8);
      double sum = 0.0;
      for (std::size_t len = 0; len <= 8; ++len) {
        sum += inc[len];
        const auto [i, j] = pmm.pairs()[q];
        EXPECT_NEAR(sum, gram_matrix(pmm, len).entries(i, j), 1e-12);
      }
    }
  }
}

TEST(OverlapIncrements, ZeroBeyondCrypticOrder) {
  const auto pmm = build_pmm(rk_golden_mean(5, 2, 0.4));
  for (std::size_t q = 0; q < pmm.pairs().size(); ++q) {
    const auto inc = overlap_increments(pmm, q, 12);
    for (std::size_t len = 3; len <= 12; ++len) EXPECT_EQ(inc[len], 0.0);
  }
}

TEST(CrypticOrder, Examples) {
  EXPECT_EQ(cryptic_order(build_pmm(rk_golden_mean(4, 3, 0.505))), Order::finite(3));
  EXPECT_EQ(cryptic_order(build_pmm(nemo(0.666))), Order::infinite());
  EXPECT_EQ(cryptic_order(build_pmm(biased_coins(0.3))), Order::finite(1));
  const auto fair = EpsilonMachine::create("fair", {"0", "1"}, {"S"}, {{"S", "0", "S", 0.5}, {"S", "1", "S", 0.5}});
  EXPECT_EQ(cryptic_order(build_pmm(fair)), Order::finite(0));
}

TEST(CrypticOrder, IncrementVariantAgrees) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto m = random_machine(2 + seed % 6, 2, 6000 + seed);
    const auto pmm = build_pmm(m);
    const auto k = cryptic_order(pmm);
    const auto from_inc = cryptic_order_from_increments(pmm, 40);
    if (k.is_finite())
      EXPECT_EQ(from_inc, k) << m.name();
    else
      EXPECT_TRUE(from_inc.is_unknown()) << m.name();
  }
  EXPECT_TRUE(cryptic_order_from_increments(build_pmm(nemo(0.5)), 20).is_unknown());
}

TEST(CrypticOrder, AgreesWithExplicitMergerSearch) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto m = random_machine(2 + seed % 4, 2, 7000 + seed);
    const auto k = cryptic_order(build_pmm(m));
    if (!k.is_finite()) continue;
    EXPECT_EQ(oracle::last_merger_length(m, std::max<std::size_t>(k.value + 2, 6)), k.value) << m.name();
  }
}

TEST(CrypticOrder, NeverExceedsMarkovOrder) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto m = random_machine(2 + seed % 6, 2, 8000 + seed);
    const auto r = markov_order(m);
    const auto k = cryptic_order(build_pmm(m));
    if (r.is_finite()) {
      ASSERT_TRUE(k.is_finite());
      EXPECT_LE(k.value, r.value) << m.name();
    }
  }
}

TEST(JozsaRatio, BiasedCoinsConsecutiveGrams) {
  for (double p : {0.1, 0.3, 0.5, 0.666, 0.9}) {
    const auto pmm = build_pmm(biased_coins(p));
    const auto check = jozsa_ratio_check(gram_matrix(pmm, 1), gram_matrix(pmm, 0));
    EXPECT_TRUE(check.positive);
    EXPECT_TRUE(check.ratio.isApprox(Eigen::MatrixXd::Identity(2, 2)));
    EXPECT_NEAR(check.min_eigenvalue, 1.0, 1e-15);
  }
}

TEST(JozsaRatio, FlagsNonPositiveMatrix) {
  GramMatrix a{1, Eigen::MatrixXd::Ones(2, 2)};
  GramMatrix b{0, Eigen::MatrixXd::Ones(2, 2)};
  b.entries(0, 1) = b.entries(1, 0) = 3.0;
  const auto check = jozsa_ratio_check(a, b);
  EXPECT_FALSE(check.positive);
  EXPECT_NEAR(check.min_eigenvalue, -2.0, 1e-12);
}

TEST(JozsaRatio, UndefinedRatio) {
  GramMatrix a{0, Eigen::MatrixXd::Identity(2, 2)};
  GramMatrix b{1, Eigen::MatrixXd::Ones(2, 2)};
  try {
    jozsa_ratio_check(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::undefined_ratio);
  }
}

TEST(PmmExport, EdgeListNamesPairs) {
  const auto m = nemo(0.5);
  const auto doc = pmm_to_json(build_pmm(m), m);
  EXPECT_TRUE(doc.contains("edges"));
  bool found_merger = false;
  for (const auto& e : doc["edges"])
    if (e.value("merger", false)) {
      found_merger = true;
      EXPECT_EQ(e["to"], "A");
    }
  EXPECT_TRUE(found_merger);
}
