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
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace qmachine {

/// Categories of failure raised by the library. The CLI maps them onto exit codes.
enum class ErrorKind {
  schema,
  stochasticity,
  unifilarity,
  reducible,
  unknown_symbol,
  unknown_state,
  inconsistent,
  cap_exceeded,
  singular,
  parameter,
  numerical,
  undefined_ratio,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::schema: return "schema";
    case ErrorKind::stochasticity: return "stochasticity";
    case ErrorKind::unifilarity: return "unifilarity";
    case ErrorKind::reducible: return "reducible";
    case ErrorKind::unknown_symbol: return "unknown-symbol";
    case ErrorKind::unknown_state: return "unknown-state";
    case ErrorKind::inconsistent: return "inconsistent";
    case ErrorKind::cap_exceeded: return "cap-exceeded";
    case ErrorKind::singular: return "singular";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::undefined_ratio: return "undefined-ratio";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// A natural number, infinity, or "unknown beyond a budget". Used for Markov
/// and cryptic orders.
struct Order {
  enum class Kind { finite, infinite, unknown };

  Kind kind = Kind::finite;
  std::size_t value = 0;  // order when finite, exhausted budget when unknown

  static Order finite(std::size_t n) { return {Kind::finite, n}; }
  static Order infinite() { return {Kind::infinite, 0}; }
  static Order unknown(std::size_t budget) { return {Kind::unknown, budget}; }

  bool is_finite() const { return kind == Kind::finite; }
  bool is_infinite() const { return kind == Kind::infinite; }
  bool is_unknown() const { return kind == Kind::unknown; }

  friend bool operator==(const Order&, const Order&) = default;
};

inline std::string to_string(const Order& o) {
  switch (o.kind) {
    case Order::Kind::finite: return std::to_string(o.value);
    case Order::Kind::infinite: return "inf";
    case Order::Kind::unknown: return "unknown(" + std::to_string(o.value) + ")";
  }
  return "?";
}

/// Horizon length L; std::nullopt stands for L -> infinity.
using Horizon = std::optional<std::size_t>;
inline constexpr Horizon infinite_horizon = std::nullopt;

inline std::string to_string(const Horizon& h) {
  return h ? std::to_string(*h) : std::string("inf");
}

namespace tolerance {
inline constexpr double row_sum = 1e-9;
inline constexpr double edge_drop = 1e-12;
inline constexpr double same_probability = 1e-9;
inline constexpr double stationary_residual = 1e-12;
inline constexpr double eigen_clip = 1e-12;
inline constexpr double negative_eigen = 1e-9;
inline constexpr double psd = 1e-10;
}  // namespace tolerance

/// -x log2 x with 0 log 0 = 0.
inline double entropy_term(double x) {
  return x > 0.0 ? -x * std::log2(x) : 0.0;
}

/// Shannon entropy in bits. Entries are not renormalized.
inline double shannon_entropy(std::span<const double> probabilities) {
  double h = 0.0;
  for (double p : probabilities) h += entropy_term(p);
  return h;
}

inline double binary_entropy(double p) {
  return entropy_term(p) + entropy_term(1.0 - p);
}

}  // namespace qmachine
