#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qwalk/cost_ledger.hpp"
#include "qwalk/distinctness/collisions.hpp"
#include "qwalk/distinctness/instance.hpp"
#include "qwalk/distinctness/solver.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/hash_family.hpp"
#include "qwalk/markov_chain.hpp"
#include "qwalk/version.hpp"
#include "qwalk/walk_quantize.hpp"

namespace qwalk {

using Json = nlohmann::ordered_json;

struct InstanceFile {
  std::vector<std::int64_t> values;
  std::optional<Triple> planted;
};

/// {"n": int, "values": [int], "planted": [i,j,k] | null}
inline InstanceFile instance_from_json(const Json& j) {
  InstanceFile f;
  try {
    if (!j.is_object()) throw ParameterError("instance: expected a JSON object");
    if (!j.contains("values") || !j["values"].is_array()) throw ParameterError("instance: missing \"values\" array");
    for (auto& v : j["values"]) {
      if (!v.is_number_integer()) throw ParameterError("instance: values must be integers");
      f.values.push_back(v.get<std::int64_t>());
    }
    if (j.contains("n")) {
      if (!j["n"].is_number_integer() || j["n"].get<std::int64_t>() != static_cast<std::int64_t>(f.values.size()))
        throw ParameterError("instance: \"n\" does not match the number of values");
    }
    if (j.contains("planted") && !j["planted"].is_null()) {
      const auto& p = j["planted"];
      if (!p.is_array() || p.size() != 3) throw ParameterError("instance: \"planted\" must be [i,j,k] or null");
      f.planted = sorted_triple(p[0].get<std::int64_t>(), p[1].get<std::int64_t>(), p[2].get<std::int64_t>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("instance: ") + e.what());
  }
  if (f.values.empty()) throw ParameterError("instance: empty values");
  return f;
}

inline Json triple_to_json(const std::optional<Triple>& t) {
  if (!t) return nullptr;
  return Json::array({t->i, t->j, t->k});
}

inline Json instance_to_json(const std::vector<std::int64_t>& values, const std::optional<Triple>& planted) {
  Json j;
  j["n"] = values.size();
  j["values"] = values;
  j["planted"] = triple_to_json(planted);
  return j;
}

inline InstanceFile read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open instance file: " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError(std::string("malformed instance JSON: ") + e.what());
  }
  return instance_from_json(j);
}

inline Json symbols_to_json(const CostSymbols& s) {
  Json j = Json::object();
  auto put = [&](const char* k, const std::optional<double>& v) {
    if (v) j[k] = *v;
  };
  put("S", s.S), put("U", s.U), put("C", s.C), put("eps", s.eps), put("delta", s.delta);
  put("S_inner", s.S_inner), put("U_inner", s.U_inner), put("C_inner", s.C_inner);
  put("eps_inner", s.eps_inner), put("delta_inner", s.delta_inner), put("T", s.T);
  return j;
}

inline Json ledger_to_json(const CostLedger& L) {
  Json j;
  j["queries"] = L.queries;
  j["ds_ops"] = L.ds_ops;
  j["walk_steps"] = L.walk_steps;
  j["checks"] = L.checks;
  j["reflections"] = L.reflections;
  j["inner_invocations"] = L.inner_invocations;
  j["inner_walk_steps"] = L.inner_walk_steps;
  j["resamples"] = L.resamples;
  j["charged"] = L.charged;
  j["symbols"] = symbols_to_json(L.symbols);
  j["warnings"] = L.warnings;
  return j;
}

inline Json params_to_json(const Parameters& p) { return Json{{"s1", p.s1}, {"s2", p.s2}, {"m", p.m}, {"n2", p.n2}}; }

inline Json polyhash_to_json(const PolyHash& f) {
  return Json{{"k", f.k()}, {"domain", f.domain()}, {"range", f.range()}, {"p", f.prime()}, {"rounds", f.coefficients()}};
}

inline Json chain_to_json(const MarkovChain& c) {
  if (auto jp = c.johnson_params()) return Json{{"kind", "johnson"}, {"n", jp->n}, {"r", jp->r}, {"m", jp->m}};
  return Json{{"kind", "explicit"}, {"vertices", c.vertex_count()}};
}

inline Json state_to_json(const StateVector& s) {
  Json amps = Json::array();
  for (Eigen::Index k = 0; k < s.amplitudes.size(); ++k)
    amps.push_back(Json::array({s.amplitudes[k].real(), s.amplitudes[k].imag()}));
  return Json{{"mode", to_string(s.mode)}, {"amplitudes", amps}};
}

inline Json repetition_to_json(const RepetitionLog& r) {
  Json j;
  j["index"] = r.index;
  j["outcome"] = r.outcome;
  j["searched"] = r.searched;
  j["params"] = params_to_json(r.params);
  j["ledger"] = ledger_to_json(r.ledger);
  return j;
}

inline Json solve_result_to_json(const SolveResult& r) {
  Json j;
  j["found"] = r.triple.has_value();
  j["triple"] = triple_to_json(r.triple);
  j["params"] = Json{{"n", r.n}, {"N", r.N}, {"s1", r.s1}, {"s2", r.s2}, {"mode", to_string(r.mode)}};
  j["ledger"] = ledger_to_json(r.ledger);
  Json reps = Json::array();
  for (auto& x : r.repetitions) reps.push_back(repetition_to_json(x));
  j["repetitions"] = reps;
  return j;
}

/// Two-space indented dump with a trailing newline.
inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace qwalk
