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

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "qmachine/machine.hpp"

// Machine documents are JSON objects:
//
//   {"name": "...", "alphabet": ["0", "1"], "states": ["A", "B"],
//    "transitions": [{"from": "A", "symbol": "0", "to": "A", "prob": 0.334}, ...]}

namespace qmachine {

namespace detail {

inline std::vector<std::string> string_array(const nlohmann::json& doc, const char* field) {
  if (!doc.contains(field)) throw Error(ErrorKind::schema, std::string("missing field '") + field + "'");
  const auto& arr = doc.at(field);
  if (!arr.is_array()) throw Error(ErrorKind::schema, std::string("field '") + field + "' must be an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string())
      throw Error(ErrorKind::schema, std::string(field) + "[" + std::to_string(i) + "] must be a string");
    out.push_back(arr[i].get<std::string>());
  }
  return out;
}

}  // namespace detail

inline EpsilonMachine parse_machine(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::schema, "malformed document at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::schema, "document must be an object");

  std::string name = "machine";
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw Error(ErrorKind::schema, "field 'name' must be a string");
    name = doc["name"].get<std::string>();
  }
  auto alphabet = detail::string_array(doc, "alphabet");
  auto states = detail::string_array(doc, "states");

  if (!doc.contains("transitions") || !doc["transitions"].is_array())
    throw Error(ErrorKind::schema, "field 'transitions' must be an array");
  std::vector<EdgeSpec> edges;
  const auto& arr = doc["transitions"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& t = arr[i];
    const std::string where = "transitions[" + std::to_string(i) + "]";
    if (!t.is_object()) throw Error(ErrorKind::schema, where + " must be an object");
    EdgeSpec e;
    for (const char* field : {"from", "symbol", "to"}) {
      if (!t.contains(field) || !t[field].is_string())
        throw Error(ErrorKind::schema, where + "." + field + " must be a string");
    }
    e.from = t["from"].get<std::string>();
    e.symbol = t["symbol"].get<std::string>();
    e.to = t["to"].get<std::string>();
    if (!t.contains("prob") || !t["prob"].is_number())
      throw Error(ErrorKind::schema, where + ".prob must be a number");
    e.prob = t["prob"].get<double>();
    if (!(e.prob > 0.0 && e.prob <= 1.0))
      throw Error(ErrorKind::schema, where + ".prob must lie in (0,1], got " + std::to_string(e.prob));
    edges.push_back(std::move(e));
  }
  return EpsilonMachine::create(std::move(name), std::move(alphabet), std::move(states), edges);
}

inline EpsilonMachine load_machine(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::schema, "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_machine(buffer.str());
}

inline nlohmann::ordered_json to_json(const EpsilonMachine& m) {
  nlohmann::ordered_json doc;
  doc["name"] = m.name();
  doc["alphabet"] = m.alphabet();
  doc["states"] = m.states();
  auto transitions = nlohmann::ordered_json::array();
  for (const auto& e : m.edges())
    transitions.push_back({{"from", e.from}, {"symbol", e.symbol}, {"to", e.to}, {"prob", e.prob}});
  doc["transitions"] = std::move(transitions);
  return doc;
}

inline std::string to_document(const EpsilonMachine& m, int indent = 2) {
  return to_json(m).dump(indent);
}

/// FNV-1a over the canonical compact document. Used in corpus manifests.
inline std::uint64_t digest(const EpsilonMachine& m) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : to_json(m).dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace qmachine
