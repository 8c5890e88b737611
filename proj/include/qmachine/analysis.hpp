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
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmachine/classical.hpp"
#include "qmachine/machine.hpp"
#include "qmachine/pair_merger.hpp"
#include "qmachine/processes.hpp"
#include "qmachine/q_machine.hpp"

namespace qmachine {

enum class CqMethod { gram, brute, both };

inline CqMethod parse_method(const std::string& s) {
  if (s == "gram") return CqMethod::gram;
  if (s == "brute") return CqMethod::brute;
  if (s == "both") return CqMethod::both;
  throw Error(ErrorKind::parameter, "unknown method '" + s + "'");
}

/// One point of a C_q curve. `method` is gram, brute or asymptotic.
struct CqPoint {
  Horizon horizon;
  double value = 0.0;
  std::string method;
  double err_bound = std::numeric_limits<double>::quiet_NaN();
};

struct AnalysisOptions {
  std::size_t max_length = 6;          // C_q(0..max_length)
  bool infinite = true;                // also C_q(inf)
  CqMethod method = CqMethod::gram;
  std::size_t max_block_length = 0;    // 0: alphabet default
  double excess_tol = 1e-10;
};

struct MeasureReport {
  std::string name;
  double h_mu = 0.0;
  double c_mu = 0.0;
  std::vector<double> block_entropies;
  ExcessEntropy excess;
  Order markov;
  Order cryptic;
  std::vector<CqPoint> cq;
  double spectral_radius = 0.0;
  bool minimal = true;
  std::vector<std::string> noncounifilar;
  std::vector<std::string> notes;
};

/**
 * C_q curve rows for one machine. Gram rows carry max_ij |G(inf) - G(L)| as
 * their error bound when the asymptotic Gram matrix exists; the asymptotic
 * row carries the residual of its linear solve.
 */
inline std::vector<CqPoint> cq_points(const EpsilonMachine& m, const PairMergerMachine& pmm,
                                      std::size_t max_length, bool infinite, CqMethod method) {
  std::vector<CqPoint> out;
  std::optional<AsymptoticGram> asym;
  try {
    asym = gram_matrix_asymptotic_detail(pmm);
  } catch (const Error&) {
    if (infinite) throw;
  }
  for (std::size_t len = 0; len <= max_length; ++len) {
    if (method != CqMethod::brute) {
      const auto g = gram_matrix(pmm, len);
      CqPoint pt{len, cq_from_gram(m, g), "gram"};
      if (asym) pt.err_bound = (asym->gram.entries - g.entries).cwiseAbs().maxCoeff();
      out.push_back(pt);
    }
    if (method != CqMethod::gram) out.push_back({len, cq_bruteforce(m, len), "brute", 0.0});
  }
  if (infinite) out.push_back({infinite_horizon, cq_from_gram(m, asym->gram), "asymptotic", asym->residual});
  return out;
}

inline MeasureReport analyze(const EpsilonMachine& m, const AnalysisOptions& opts = {}) {
  MeasureReport r;
  r.name = m.name();
  const auto validation = validate(m);
  r.minimal = validation.minimal;
  for (std::size_t s : validation.noncounifilar_states) r.noncounifilar.push_back(m.states()[s]);
  if (!r.minimal)
    r.notes.push_back("machine is not minimal; orders and C_q describe this presentation, not the process");

  r.h_mu = entropy_rate(m);
  r.c_mu = statistical_complexity(m);
  const std::size_t max_block = opts.max_block_length ? opts.max_block_length
                                                      : default_max_block_length(m.num_symbols());
  r.excess = excess_entropy(m, opts.excess_tol, max_block);
  r.block_entropies = block_entropies(m, std::max(r.excess.length, std::size_t{1}));
  r.markov = markov_order(m);

  const auto pmm = build_pmm(m);
  r.cryptic = cryptic_order(pmm);
  r.spectral_radius = pmm.spectral_radius();
  bool infinite = opts.infinite;
  if (infinite && !(r.spectral_radius < 1.0 - 1e-12)) {
    infinite = false;
    r.notes.push_back("C_q(inf) unavailable: pair-state spectral radius is 1");
  }
  r.cq = cq_points(m, pmm, opts.max_length, infinite, opts.method);
  return r;
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

/// Flat key-value document.
inline nlohmann::ordered_json to_json(const MeasureReport& r) {
  nlohmann::ordered_json doc;
  doc["name"] = r.name;
  doc["h_mu"] = r.h_mu;
  doc["C_mu"] = r.c_mu;
  doc["E"] = r.excess.value;
  doc["E_status"] = to_string(r.excess.status);
  doc["E_length"] = r.excess.length;
  doc["E_last_increment"] = r.excess.last_increment;
  doc["R"] = to_string(r.markov);
  doc["k"] = to_string(r.cryptic);
  doc["minimal"] = r.minimal;
  std::string nc;
  for (const auto& s : r.noncounifilar) nc += (nc.empty() ? "" : " ") + s;
  doc["noncounifilar"] = nc;
  doc["pair_spectral_radius"] = r.spectral_radius;
  for (std::size_t len = 0; len < r.block_entropies.size(); ++len)
    doc["H_" + std::to_string(len)] = r.block_entropies[len];
  for (const auto& pt : r.cq) {
    const std::string suffix = pt.method == "brute" ? "_brute" : "";
    doc["Cq_" + to_string(pt.horizon) + suffix] = pt.value;
    if (pt.method == "asymptotic") doc["Cq_inf_err_bound"] = pt.err_bound;
  }
  for (std::size_t i = 0; i < r.notes.size(); ++i) doc["note_" + std::to_string(i)] = r.notes[i];
  return doc;
}

/// Quotes a CSV field when it contains a separator or quote.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string measure_csv_header() { return "name,param,h_mu,C_mu,E,E_status,R,k"; }

inline std::string measure_csv_row(const MeasureReport& r, const std::string& param) {
  return csv_field(r.name) + "," + param + "," + format_double(r.h_mu) + "," + format_double(r.c_mu) + "," +
         format_double(r.excess.value) + "," + to_string(r.excess.status) + "," + to_string(r.markov) + "," +
         to_string(r.cryptic);
}

inline std::string cq_csv_header() { return "name,param,L,Cq,method,err_bound"; }

struct SweepSpec {
  ProcessFamily family;
  std::optional<EpsilonMachine> machine;  // used instead of the family when set
  double p_start = 0.01;
  double p_stop = 0.99;
  std::size_t steps = 99;
  std::size_t max_length = 5;
  bool infinite = false;
  CqMethod method = CqMethod::gram;
  bool minimize_first = false;
};

struct SweepRow {
  std::string name;
  std::string param;
  CqPoint point;
  double c_mu = std::numeric_limits<double>::quiet_NaN();
  double excess = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";
};

inline std::vector<double> sweep_grid(const SweepSpec& spec) {
  std::vector<double> grid;
  if (spec.steps <= 1) return {spec.p_start};
  for (std::size_t i = 0; i < spec.steps; ++i)
    grid.push_back(spec.p_start + (spec.p_stop - spec.p_start) * static_cast<double>(i) /
                                      static_cast<double>(spec.steps - 1));
  return grid;
}

/// One row per (param, L). A failing grid point yields a single row marked
/// with the error and the sweep moves on.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  std::vector<SweepRow> rows;
  auto run_one = [&](const std::string& param, auto&& make) {
    std::string name = spec.machine ? spec.machine->name() : spec.family.id;
    try {
      EpsilonMachine m = make();
      if (spec.minimize_first) m = minimize(m);
      name = m.name();
      const double c_mu = statistical_complexity(m);
      const double e = excess_entropy(m).value;
      const auto pmm = build_pmm(m);
      for (const auto& pt : cq_points(m, pmm, spec.max_length, spec.infinite, spec.method))
        rows.push_back({name, param, pt, c_mu, e, "ok"});
    } catch (const Error& err) {
      SweepRow row;
      row.name = name;
      row.param = param;
      row.point.value = std::numeric_limits<double>::quiet_NaN();
      row.status = std::string("error:") + to_string(err.kind());
      rows.push_back(row);
    }
  };
  if (spec.machine) {
    run_one("", [&] { return *spec.machine; });
    return rows;
  }
  for (double p : sweep_grid(spec)) {
    ProcessFamily f = spec.family;
    f.p = p;
    run_one(format_double(p), [&] { return build_family(f); });
  }
  return rows;
}

inline std::string sweep_csv_header() { return cq_csv_header() + ",C_mu,E,status"; }

inline std::string sweep_csv_row(const SweepRow& r) {
  return csv_field(r.name) + "," + r.param + "," + (r.status == "ok" ? to_string(r.point.horizon) : std::string()) + "," +
         format_double(r.point.value) + "," + r.point.method + "," + format_double(r.point.err_bound) + "," +
         format_double(r.c_mu) + "," + format_double(r.excess) + "," + r.status;
}

}  // namespace qmachine
