// SPDX-License-Identifier: Apache-2.0
//
// JSON form of a circuit:
//   {"n_qubits": 2, "n_params": 3,
//    "ops": [{"ry": {"p": 0, "q": 0}}, {"cx": {"c": 0, "t": 1}}, "noise", ...]}
#pragma once

#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "nvqa/circuits.hpp"

namespace nvqa {

inline nlohmann::json circuit_to_json(const Circuit& circuit) {
  nlohmann::json ops = nlohmann::json::array();
  for (const auto& op : circuit.ops()) {
    if (const auto* ry = std::get_if<RyOp>(&op)) {
      ops.push_back({{"ry", {{"p", ry->param}, {"q", ry->qubit}}}});
    } else if (const auto* cx = std::get_if<CxOp>(&op)) {
      ops.push_back({{"cx", {{"c", cx->control}, {"t", cx->target}}}});
    } else {
      ops.push_back("noise");
    }
  }
  return {{"n_qubits", circuit.n_qubits()}, {"ops", std::move(ops)}, {"n_params", circuit.n_params()}};
}

inline Circuit circuit_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n_qubits") || !j.contains("ops") || !j.contains("n_params")) {
    throw std::invalid_argument("circuit JSON needs n_qubits, ops and n_params");
  }
  std::vector<CircuitOp> ops;
  for (const auto& o : j.at("ops")) {
    if (o.is_string()) {
      if (o.get<std::string>() != "noise") {
        throw std::invalid_argument("circuit JSON: unknown op '" + o.get<std::string>() + "'");
      }
      ops.emplace_back(NoiseMark{});
    } else if (o.is_object() && o.contains("ry")) {
      ops.emplace_back(RyOp{o.at("ry").at("p").get<int>(), o.at("ry").at("q").get<int>()});
    } else if (o.is_object() && o.contains("cx")) {
      ops.emplace_back(CxOp{o.at("cx").at("c").get<int>(), o.at("cx").at("t").get<int>()});
    } else {
      throw std::invalid_argument("circuit JSON: unrecognised op " + o.dump());
    }
  }
  return Circuit(j.at("n_qubits").get<int>(), std::move(ops), j.at("n_params").get<int>());
}

}  // namespace nvqa
