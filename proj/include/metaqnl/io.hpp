#pragma once

// JSON serialization for rules, models, and proofs, plus DOT export.

#include <fstream>

#include <json.hpp>

#include "metaqnl/prover.hpp"

namespace metaqnl {

using Json = nlohmann::json;

inline Json rule_to_json(const Rule& r) {
  Json j;
  j["premises"] = Json::array();
  for (const Sentence& p : r.premises) j["premises"].push_back(p.str());
  j["conclusion"] = r.conclusion.str();
  return j;
}

inline Rule rule_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("premises") || !j.contains("conclusion"))
    throw Error(ErrorKind::parse_error, "rule object needs premises and conclusion");
  std::vector<Sentence> premises;
  for (const auto& p : j.at("premises")) premises.push_back(parse_sentence(p.get<std::string>()));
  return Rule(std::move(premises), parse_sentence(j.at("conclusion").get<std::string>()));
}

inline Json rules_to_json(const std::vector<Rule>& rules) {
  Json out = Json::array();
  for (const Rule& r : rules) out.push_back(rule_to_json(r));
  return out;
}

inline std::vector<Rule> rules_from_json(const Json& j) {
  std::vector<Rule> out;
  for (const auto& item : j) out.push_back(rule_from_json(item));
  return out;
}

inline void save_model(const std::vector<Rule>& rules, const std::string& path,
                       const Json& meta = Json::object()) {
  Json j;
  j["rules"] = rules_to_json(rules);
  if (!meta.empty()) j["meta"] = meta;
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::data_error, "cannot write model file: " + path);
  os << j.dump(2) << "\n";
}

inline std::vector<Rule> load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::data_error, "cannot read model file: " + path);
  Json j;
  try {
    is >> j;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::parse_error, "model file is not valid JSON: " + std::string(e.what()));
  }
  if (!j.contains("rules")) throw Error(ErrorKind::parse_error, "model file has no rules array");
  return rules_from_json(j.at("rules"));
}

inline Json proof_to_json(const Proof& proof) {
  Json j;
  j["vertices"] = Json::array();
  for (const auto& v : proof.vertices) {
    Json vj;
    if (v.is_rule) {
      vj["kind"] = "rule";
      vj["rule"] = rule_to_json(v.rule);
    } else {
      vj["kind"] = "sentence";
      vj["text"] = v.sentence.str();
    }
    j["vertices"].push_back(vj);
  }
  j["edges"] = Json::array();
  for (auto [a, b] : proof.edges) j["edges"].push_back(Json::array({a, b}));
  return j;
}

inline std::string proof_to_dot(const Proof& proof) {
  auto escape = [](const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out;
  };
  std::string dot = "digraph proof {\n";
  for (std::size_t i = 0; i < proof.vertices.size(); ++i) {
    const auto& v = proof.vertices[i];
    dot += "  v" + std::to_string(i) + " [label=\"" +
           escape(v.is_rule ? v.rule.str() : v.sentence.str()) + "\"" +
           (v.is_rule ? ", shape=box" : "") + "];\n";
  }
  for (auto [a, b] : proof.edges)
    dot += "  v" + std::to_string(a) + " -> v" + std::to_string(b) + ";\n";
  dot += "}\n";
  return dot;
}

}  // namespace metaqnl
