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
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qmachine/qmachine.hpp"

using namespace qmachine;

namespace {

const char* kBiasedCoinsDoc = R"({
  "name": "biased-coins",
  "alphabet": ["0", "1"],
  "states": ["A", "B"],
  "transitions": [
    {"from": "A", "symbol": "0", "to": "A", "prob": 0.334},
    {"from": "A", "symbol": "1", "to": "B", "prob": 0.666},
    {"from": "B", "symbol": "0", "to": "A", "prob": 0.666},
    {"from": "B", "symbol": "1", "to": "B", "prob": 0.334}
  ]
})";

EpsilonMachine period_cycle(std::size_t n) {
  std::vector<std::string> states;
  for (std::size_t i = 0; i < n; ++i) states.push_back("S" + std::to_string(i));
  std::vector<EdgeSpec> edges;
  for (std::size_t i = 0; i < n; ++i) edges.push_back({states[i], i == 0 ? "1" : "0", states[(i + 1) % n], 1.0});
  return EpsilonMachine::create("cycle", {"0", "1"}, states, edges);
}

ErrorKind error_kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::numerical;
}

}  // namespace

TEST(ParseMachine, BiasedCoinsDocument) {
  const auto m = parse_machine(kBiasedCoinsDoc);
  EXPECT_EQ(m.num_states(), 2u);
  EXPECT_EQ(m.num_symbols(), 2u);
  EXPECT_EQ(m.name(), "biased-coins");
  EXPECT_EQ(m.emission(0, 1), 0.666);  // decimal preserved
  EXPECT_EQ(m.transition(0, 1)->target, 1u);
}

TEST(ParseMachine, SingleStateSingleSymbol) {
  const auto m = parse_machine(
      R"({"name":"one","alphabet":["a"],"states":["S"],"transitions":[{"from":"S","symbol":"a","to":"S","prob":1}]})");
  ASSERT_EQ(m.stationary().size(), 1u);
  EXPECT_DOUBLE_EQ(m.stationary()[0], 1.0);
}

TEST(ParseMachine, DuplicateStateSymbolIsUnifilarityError) {
  const char* doc = R"({"alphabet":["0"],"states":["A","B"],"transitions":[
      {"from":"A","symbol":"0","to":"A","prob":0.5},
      {"from":"A","symbol":"0","to":"B","prob":0.5},
      {"from":"B","symbol":"0","to":"A","prob":1}]})";
  EXPECT_EQ(error_kind_of([&] { parse_machine(doc); }), ErrorKind::unifilarity);
}

TEST(ParseMachine, SchemaErrors) {
  EXPECT_EQ(error_kind_of([] { parse_machine("{not json"); }), ErrorKind::schema);
  EXPECT_EQ(error_kind_of([] { parse_machine(R"({"alphabet":["0"],"transitions":[]})"); }), ErrorKind::schema);
  EXPECT_EQ(error_kind_of([] {
              parse_machine(R"({"alphabet":["0"],"states":["A"],"transitions":[{"from":"A","symbol":"0","to":"A","prob":"1"}]})");
            }),
            ErrorKind::schema);
  EXPECT_EQ(error_kind_of([] {
              parse_machine(R"({"alphabet":["0"],"states":["A"],"transitions":[{"from":"A","symbol":"0","to":"A","prob":0}]})");
            }),
            ErrorKind::schema);
  EXPECT_EQ(error_kind_of([] {
              parse_machine(R"({"alphabet":["0"],"states":["A"],"transitions":[{"from":"Z","symbol":"0","to":"A","prob":1}]})");
            }),
            ErrorKind::schema);
  EXPECT_EQ(error_kind_of([] { parse_machine(R"({"alphabet":["0","0"],"states":["A"],"transitions":[]})"); }),
            ErrorKind::schema);
}

TEST(ParseMachine, SchemaErrorNamesTheField) {
  try {
    parse_machine(R"({"alphabet":["0"],"states":["A"],"transitions":[{"from":"A","symbol":"0","to":"A"}]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("transitions[0].prob"), std::string::npos);
  }
}

TEST(ParseMachine, StochasticityTolerance) {
  // within 1e-9: accepted and renormalized exactly
  const auto ok = parse_machine(R"({"alphabet":["0","1"],"states":["A"],"transitions":[
      {"from":"A","symbol":"0","to":"A","prob":0.5},{"from":"A","symbol":"1","to":"A","prob":0.5000000004}]})");
  EXPECT_NEAR(ok.emission(0, 0) + ok.emission(0, 1), 1.0, 1e-16);
  EXPECT_EQ(error_kind_of([] {
              parse_machine(R"({"alphabet":["0","1"],"states":["A"],"transitions":[
                  {"from":"A","symbol":"0","to":"A","prob":0.5},{"from":"A","symbol":"1","to":"A","prob":0.49}]})");
            }),
            ErrorKind::stochasticity);
}

TEST(ParseMachine, ReducibleGraphRejected) {
  const char* doc = R"({"alphabet":["0","1"],"states":["A","B"],"transitions":[
      {"from":"A","symbol":"0","to":"A","prob":0.5},{"from":"A","symbol":"1","to":"B","prob":0.5},
      {"from":"B","symbol":"1","to":"B","prob":1}]})";
  EXPECT_EQ(error_kind_of([&] { parse_machine(doc); }), ErrorKind::reducible);
}

TEST(ParseMachine, DocumentRoundTripPreservesMachine) {
  for (const auto& m : {biased_coins(0.3), rk_golden_mean(4, 3, 0.505), nemo(0.25), random_machine(5, 3, 9)}) {
    const auto back = parse_machine(to_document(m));
    EXPECT_TRUE(isomorphic(m, back, 0.0)) << m.name();
    EXPECT_EQ(back.states(), m.states());
    EXPECT_EQ(digest(back), digest(m));
  }
}

TEST(EpsilonMachine, TinyEdgesDroppedAtConstruction) {
  const auto m = EpsilonMachine::create("t", {"0", "1"}, {"A"}, {{"A", "0", "A", 1.0}, {"A", "1", "A", 1e-13}});
  EXPECT_FALSE(m.transition(0, 1).has_value());
  EXPECT_EQ(m.emission(0, 0), 1.0);
}

TEST(Validate, NoncounifilarStateOfRkGoldenMean) {
  const auto m = rk_golden_mean(4, 3, 0.505);
  const auto r = validate(m);
  EXPECT_TRUE(r.ok);
  ASSERT_EQ(r.noncounifilar_states.size(), 1u);
  EXPECT_EQ(m.states()[r.noncounifilar_states[0]], "A");
}

TEST(Validate, MinimalityOfBiasedCoins) {
  // Refinement oracle: A and B have next-symbol distributions (0.7, 0.3) and (0.3, 0.7).
  EXPECT_TRUE(validate(biased_coins(0.3)).minimal);
  EXPECT_FALSE(validate(biased_coins(0.5)).minimal);
}

TEST(Minimize, BiasedCoinsAtOneHalfBecomesFairCoin) {
  const auto m = minimize(biased_coins(0.5));
  ASSERT_EQ(m.num_states(), 1u);
  EXPECT_DOUBLE_EQ(m.emission(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(m.emission(0, 1), 0.5);
}

TEST(Minimize, MinimalMachineIsFixedPoint) {
  for (const auto& m : {biased_coins(0.666), rk_golden_mean(4, 3, 0.3), nemo(0.666)}) {
    const auto once = minimize(m);
    EXPECT_TRUE(isomorphic(once, m)) << m.name();
  }
}

TEST(Minimize, DuplicateRowsMerge) {
  // B and C both emit 0 -> A and 1 -> A with 1/2 each; A sends 0 -> B, 1 -> C.
  const auto m = EpsilonMachine::create("dup", {"0", "1"}, {"A", "B", "C"},
                                        {{"A", "0", "B", 0.25},
                                         {"A", "1", "C", 0.75},
                                         {"B", "0", "A", 0.5},
                                         {"B", "1", "A", 0.5},
                                         {"C", "0", "A", 0.5},
                                         {"C", "1", "A", 0.5}});
  const auto min = minimize(m);
  EXPECT_EQ(min.num_states(), 2u);
  const auto twin = EpsilonMachine::create("twin", {"0", "1"}, {"A", "B"},
                                           {{"A", "0", "A", 0.5}, {"A", "1", "B", 0.5},
                                            {"B", "0", "A", 0.5}, {"B", "1", "B", 0.5}});
  EXPECT_EQ(minimize(twin).num_states(), 1u);
}

TEST(Minimize, IdempotentAndPreservesWordDistribution) {
  std::vector<EpsilonMachine> corpus{biased_coins(0.5), nemo(0.4)};
  for (std::uint64_t seed = 0; seed < 30; ++seed) corpus.push_back(random_machine(2 + seed % 5, 2, 1000 + seed));
  // C and D are predictively equivalent copies
  corpus.push_back(EpsilonMachine::create("split", {"0", "1"}, {"A", "B", "C", "D"},
                                          {{"A", "0", "A", 0.4},
                                           {"A", "1", "B", 0.6},
                                           {"B", "1", "C", 1.0},
                                           {"C", "0", "A", 0.5},
                                           {"C", "1", "D", 0.5},
                                           {"D", "0", "A", 0.5},
                                           {"D", "1", "C", 0.5}}));
  for (const auto& m : corpus) {
    const auto once = minimize(m);
    const auto twice = minimize(once);
    EXPECT_TRUE(isomorphic(once, twice)) << m.name();
    const auto ta = oracle::labeled_matrices(m);
    const auto tb = oracle::labeled_matrices(once);
    for (std::size_t len = 0; len <= 8; ++len)
      for (const auto& w : oracle::all_words(m.num_symbols(), len))
        ASSERT_NEAR(oracle::word_probability_stationary(m, ta, w),
                    oracle::word_probability_stationary(once, tb, w), 1e-9)
            << m.name();
  }
}

TEST(StationaryDistribution, BiasedCoinsIsUniform) {
  for (double p : {0.1, 0.3, 0.5, 0.666, 0.9}) {
    const auto pi = biased_coins(p).stationary();
    EXPECT_NEAR(pi[0], 0.5, 1e-15);
    EXPECT_NEAR(pi[1], 0.5, 1e-15);
  }
}

TEST(StationaryDistribution, PeriodTwoCycle) {
  const auto m = period_cycle(2);
  EXPECT_NEAR(m.stationary()[0], 0.5, 1e-15);
  EXPECT_NEAR(m.stationary()[1], 0.5, 1e-15);
}

TEST(StationaryDistribution, NemoAgreesWithPowerIteration) {
  // Balance: pi_B = (1-p) pi_A, pi_C = pi_B, so pi = (1, 1-p, 1-p) / (3 - 2p).
  const double p = 0.666;
  const auto m = nemo(p);
  const auto power = oracle::power_iteration_stationary(m);
  const auto pi = stationary_distribution(m);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(pi[i], power(static_cast<Eigen::Index>(i)), 1e-12);
  EXPECT_NEAR(pi[0], 1.0 / (3 - 2 * p), 1e-14);
  EXPECT_GT(pi[0], pi[1]);
  EXPECT_NEAR(pi[0] + pi[1] + pi[2], 1.0, 1e-15);
}

TEST(StationaryDistribution, ResidualOnRandomMachines) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto m = random_machine(2 + seed % 6, 2 + seed % 2, seed);
    const auto& pi = m.stationary();
    Eigen::Map<const Eigen::RowVectorXd> row(pi.data(), static_cast<Eigen::Index>(pi.size()));
    EXPECT_LE((row * m.state_transition_matrix() - row).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(WordProbability, RkGoldenMeanFromG) {
  const auto m = rk_golden_mean(4, 3, 0.505);
  const auto r = word_probability(m, "G", "1");
  EXPECT_DOUBLE_EQ(r.probability, 1.0);
  EXPECT_EQ(m.states()[*r.successor], "A");
}

TEST(WordProbability, EmptyWord) {
  const auto m = nemo(0.3);
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    const auto r = word_probability(m, s, Word{});
    EXPECT_EQ(r.probability, 1.0);
    EXPECT_EQ(*r.successor, s);
  }
}

TEST(WordProbability, NemoFromB) {
  const auto m = nemo(0.666);
  const auto r = word_probability(m, "B", "10");
  EXPECT_DOUBLE_EQ(r.probability, 0.5);
  EXPECT_EQ(m.states()[*r.successor], "A");
  EXPECT_EQ(word_probability(m, "B", "0").probability, 0.0);
  EXPECT_FALSE(word_probability(m, "B", "0").successor.has_value());
}

TEST(WordProbability, UnknownSymbol) {
  EXPECT_EQ(error_kind_of([] { word_probability(nemo(0.5), "A", "2"); }), ErrorKind::unknown_symbol);
}

TEST(WordProbability, SumsToOneOverAllWords) {
  std::vector<EpsilonMachine> corpus{biased_coins(0.2), rk_golden_mean(4, 3, 0.7), nemo(0.9)};
  for (std::uint64_t seed = 0; seed < 10; ++seed) corpus.push_back(random_machine(3 + seed % 4, 3, seed));
  for (const auto& m : corpus)
    for (std::size_t len = 0; len <= 8; ++len) {
      if (std::pow(m.num_symbols(), len) > 7000) break;
      for (std::size_t s = 0; s < m.num_states(); ++s) {
        double total = 0.0;
        for (const auto& w : oracle::all_words(m.num_symbols(), len)) total += word_probability(m, s, w).probability;
        ASSERT_NEAR(total, 1.0, 1e-9) << m.name() << " L=" << len;
      }
    }
}

TEST(Sample, LengthZero) {
  const auto m = nemo(0.5);
  const auto path = sample(m, 0, 7, 2);
  EXPECT_TRUE(path.symbols.empty());
  ASSERT_EQ(path.states.size(), 1u);
  EXPECT_EQ(path.states[0], 2u);
}

TEST(Sample, DeterministicCycleEmitsForcedWord) {
  const auto m = period_cycle(4);
  const auto path = sample(m, 4, 3, 0);
  EXPECT_EQ(m.decode_word(path.symbols), "1000");
  EXPECT_EQ(path.states, (std::vector<std::size_t>{0, 1, 2, 3, 0}));
}

TEST(Sample, BitReproducibleWithSeed) {
  const auto m = rk_golden_mean(4, 3, 0.505);
  const auto a = sample(m, 500, 42);
  const auto b = sample(m, 500, 42);
  EXPECT_EQ(a.symbols, b.symbols);
  EXPECT_EQ(a.states, b.states);
  EXPECT_NE(sample(m, 500, 43).symbols, a.symbols);
}

TEST(Sample, BiasedCoinsFirstSymbolFrequency) {
  // 1e5 independent length-1 draws from A; Pr(1|A) = p. 3-sigma binomial band.
  const double p = 0.666;
  const auto m = biased_coins(p);
  const std::size_t n = 100000;
  std::size_t ones = 0;
  for (std::size_t i = 0; i < n; ++i) ones += sample(m, 1, 1000 + i, 0).symbols[0];
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
  EXPECT_NEAR(static_cast<double>(ones) / static_cast<double>(n), p, 3 * sigma);
}

TEST(Sample, PathIsConsistentWithTransitions) {
  const auto m = nemo(0.3);
  const auto path = sample(m, 1000, 5);
  for (std::size_t t = 0; t < path.symbols.size(); ++t) {
    const auto& tr = m.transition(path.states[t], path.symbols[t]);
    ASSERT_TRUE(tr.has_value());
    EXPECT_EQ(tr->target, path.states[t + 1]);
  }
}

TEST(BackwardInference, RkGoldenMeanWord111EndingInA) {
  const auto m = rk_golden_mean(4, 3, 0.505);
  const auto w = m.encode_word("111");
  const auto sets = backward_inference(m, w, m.state_index("A"));
  const auto expected = oracle::consistent_states(m, w, m.state_index("A"));
  ASSERT_EQ(sets.size(), 4u);
  for (std::size_t t = 0; t < sets.size(); ++t)
    EXPECT_EQ(std::set<std::size_t>(sets[t].begin(), sets[t].end()), expected[t]);
  EXPECT_GE(sets[0].size(), 2u);
  auto names = [&](const std::vector<std::size_t>& s) {
    std::string out;
    for (auto i : s) out += m.states()[i];
    return out;
  };
  EXPECT_EQ(names(sets[0]), "AEFG");
  EXPECT_EQ(names(sets[1]), "AFG");
  EXPECT_EQ(names(sets[2]), "AG");
  EXPECT_EQ(names(sets[3]), "A");
}

TEST(BackwardInference, ZerosFromDForceAUniquePath) {
  // 000 ending in D: only A -> B -> C -> D.
  const auto m = rk_golden_mean(4, 3, 0.505);
  const auto sets = backward_inference(m, m.encode_word("000"), m.state_index("D"));
  for (const auto& s : sets) EXPECT_EQ(s.size(), 1u);
  EXPECT_EQ(m.states()[sets[0][0]], "A");
}

TEST(BackwardInference, NemoZeroIntoA) {
  const auto m = nemo(0.666);
  const auto sets = backward_inference(m, m.encode_word("0"), m.state_index("A"));
  EXPECT_EQ(sets[0], (std::vector<std::size_t>{0, 2}));
}

TEST(BackwardInference, AgreesWithPathEnumeration) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = random_machine(4, 2, seed);
    const auto path = sample(m, 6, seed);
    const auto sets = backward_inference(m, path.symbols, path.states.back());
    const auto expected = oracle::consistent_states(m, path.symbols, path.states.back());
    for (std::size_t t = 0; t < sets.size(); ++t)
      EXPECT_EQ(std::set<std::size_t>(sets[t].begin(), sets[t].end()), expected[t]);
  }
}

TEST(BackwardInference, InconsistentWord) {
  const auto m = nemo(0.5);
  // B is only entered on 1.
  EXPECT_EQ(error_kind_of([&] { backward_inference(m, m.encode_word("0"), m.state_index("B")); }),
            ErrorKind::inconsistent);
}
