// Copyright 2026 The pqst Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * JSON documents: density matrices ({n_qubits, re, im}, row-major) and
 * reconstruction reports.
 */
#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "pqst/bench.hpp"
#include "pqst/error.hpp"
#include "pqst/shadow.hpp"
#include "pqst/state.hpp"

namespace pqst {

using Json = nlohmann::ordered_json;

inline Json matrix_part_json(const Operator& m, bool imag) {
  Json arr = Json::array();
  for (const auto& z : m.entries()) arr.push_back(imag ? z.imag() : z.real());
  return arr;
}

inline Json density_matrix_json(const Operator& m) {
  return Json{{"n_qubits", m.qubits()}, {"re", matrix_part_json(m, false)}, {"im", matrix_part_json(m, true)}};
}

/// Parses and validates a density-matrix document.
inline DensityMatrix density_matrix_from_json(const Json& j, StateTolerance tol = {}) {
  try {
    const unsigned n = j.at("n_qubits").get<unsigned>();
    if (n < 1 || n > kMaxQubits) throw InvalidArgument("n_qubits must be between 1 and 4");
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    const std::size_t d = std::size_t{1} << n;
    if (re.size() != d * d || im.size() != d * d) {
      throw InvalidArgument("re and im must each hold " + std::to_string(d * d) + " entries");
    }
    std::vector<Complex> entries(d * d);
    for (std::size_t i = 0; i < d * d; ++i) entries[i] = Complex(re[i], im[i]);
    return DensityMatrix(Operator(d, std::move(entries)), tol);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed density matrix document: ") + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON in '") + path + "'", e.byte);
  }
}

inline DensityMatrix read_density_matrix(const std::string& path, StateTolerance tol = {}) {
  return density_matrix_from_json(read_json_file(path), tol);
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline void write_density_matrix(const std::string& path, const Operator& m) {
  write_json_file(path, density_matrix_json(m));
}

/// Per-entry flags: true where some estimator trusts the entry's pattern.
inline Json trusted_flags_json(std::span<const PartialShadowEstimator> pses, unsigned n) {
  Json rows = Json::array();
  const std::size_t d = std::size_t{1} << n;
  for (std::size_t i = 0; i < d; ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < d; ++j) {
      const ActivityPattern pat{n, static_cast<std::uint32_t>(i ^ j)};
      bool t = false;
      for (const auto& p : pses) t = t || p.trusts(pat);
      row.push_back(t);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json pse_json(const PartialShadowEstimator& p) {
  Json trusted = Json::array();
  for (const auto& a : p.trusted) trusted.push_back(a.to_string());
  return Json{{"ensemble", p.ensemble_id}, {"p", p.p},       {"shots", p.shots},
              {"trusted", trusted},        {"estimate", density_matrix_json(p.estimate)}};
}

struct ReconstructionReport {
  Operator estimate;
  std::vector<PartialShadowEstimator> pses;
  std::optional<FidelityResult> fidelity;
  std::uint64_t shots = 0;
  std::optional<std::uint64_t> seed;
  std::string state_source;
};

inline Json report_json(const ReconstructionReport& r) {
  Json j;
  j["state"] = r.state_source;
  j["mode"] = r.shots == 0 ? "exact" : "sampled";
  j["shots_per_set"] = r.shots;
  j["seed"] = r.seed ? Json(*r.seed) : Json(nullptr);
  j["estimate"] = density_matrix_json(r.estimate);
  j["trusted"] = trusted_flags_json(r.pses, r.estimate.qubits());
  Json sets = Json::array();
  for (const auto& p : r.pses) sets.push_back(pse_json(p));
  j["estimators"] = sets;
  if (r.fidelity) {
    j["fidelity"] = r.fidelity->value;
    j["fidelity_clamped_mass"] = r.fidelity->clamped_mass;
  } else {
    j["fidelity"] = nullptr;
  }
  return j;
}

inline Json pipeline_json(const PipelineReport& r, const std::string& state) {
  Json j;
  j["state"] = state;
  j["mode"] = r.shots_per_set == 0 ? "exact" : "sampled";
  j["shots_per_set"] = r.shots_per_set;
  j["seed"] = r.seed;
  j["fidelity"] = r.fidelity;
  j["fidelity_clamped_mass"] = r.clamped_mass;
  j["estimate"] = density_matrix_json(r.estimate);
  Json sets = Json::array();
  for (const auto& s : r.sets) {
    Json members = Json::array();
    for (std::size_t i = 0; i < s.populations.size(); ++i)
      members.push_back(Json{{"unitary", i < s.labels.size() ? s.labels[i] : ""}, {"populations", s.populations[i]}});
    sets.push_back(Json{{"ensemble", s.ensemble_id}, {"members", members}});
  }
  j["populations"] = sets;
  return j;
}

}  // namespace pqst
