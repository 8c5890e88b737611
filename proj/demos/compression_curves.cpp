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

// Prints C_mu, E and the C_q(L) curve for the three example processes.

#include <cstdio>

#include "qmachine/qmachine.hpp"

int main() {
  using namespace qmachine;
  const EpsilonMachine machines[] = {biased_coins(0.666), rk_golden_mean(4, 3, 0.505), nemo(0.666)};
  for (const auto& m : machines) {
    const auto pmm = build_pmm(m);
    std::printf("%s\n", m.name().c_str());
    std::printf("  C_mu = %.6f  E = %.6f  R = %s  k = %s\n", statistical_complexity(m), excess_entropy(m).value,
                to_string(markov_order(m)).c_str(), to_string(cryptic_order(pmm)).c_str());
    const auto curve = cq_curve(m, 8);
    for (std::size_t len = 0; len < curve.size(); ++len) std::printf("  C_q(%zu) = %.6f\n", len, curve[len]);
    std::printf("  C_q(inf) = %.6f\n", cq(m, pmm, infinite_horizon));
  }
}
