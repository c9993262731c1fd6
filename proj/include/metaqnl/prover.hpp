#pragma once

// Theorem proving: forward chaining with incremental premise joins (the
// Rete contract: partially satisfied premise sets are re-matched only
// against newly derived sentences), backward chaining through unification,
// proof extraction, path enumeration for the learner, and an independent
// proof checker.

#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "metaqnl/unify.hpp"

namespace metaqnl {

struct ProverOptions {
  std::size_t depth_limit = 5;
  std::size_t path_cap = 512;          // DNF conjuncts per goal before PathExplosion
  std::size_t unify_budget = kDefaultUnifyBudget;
  std::size_t max_instances = 64;      // concrete instances kept per (sub)goal
  std::size_t max_alternatives = 128;  // concrete rules kept per derived sentence
  std::size_t max_derived = 200000;    // working-memory safety valve
  bool find_all = true;                // false: stop at the first goal instance
};

// Def-5 proof DAG over concrete sentences and concrete rules.
struct Proof {
  struct Vertex {
    bool is_rule = false;
    Sentence sentence;  // valid when !is_rule
    Rule rule;          // valid when is_rule
  };
  std::vector<Vertex> vertices;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

// The result of a prover run: every goal instance found plus, per derived
// sentence, all concrete rule applications concluding it (the alternative
// paths of Fig-3b shape).
struct ProofSet {
  bool success = false;
  bool truncated = false;  // caps or unification budget cut the search short
  std::vector<Sentence> goal_instances;
  std::vector<Sentence> assumptions;
  std::unordered_map<Sentence, std::vector<Rule>, SentenceHash> alternatives;

  bool is_assumption(const Sentence& s) const {
    return std::find(assumptions.begin(), assumptions.end(), s) != assumptions.end();
  }

  std::vector<Rule> all_concrete_rules() const {
    std::vector<Rule> out;
    for (const auto& [s, alts] : alternatives)
      out.insert(out.end(), alts.begin(), alts.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // Minimum proof depth per sentence: assumptions at 0, a derived sentence at
  // 1 + max over the premises of its cheapest alternative.
  std::unordered_map<Sentence, std::size_t, SentenceHash> depths() const {
    std::unordered_map<Sentence, std::size_t, SentenceHash> depth;
    for (const Sentence& a : assumptions) depth[a] = 0;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [s, alts] : alternatives) {
        for (const Rule& cr : alts) {
          std::size_t d = 0;
          bool ok = true;
          for (const Sentence& p : cr.premises) {
            auto it = depth.find(p);
            if (it == depth.end()) {
              ok = false;
              break;
            }
            d = std::max(d, it->second);
          }
          if (!ok) continue;
          d += 1;
          auto it = depth.find(s);
          if (it == depth.end() || d < it->second) {
            depth[s] = d;
            changed = true;
          }
        }
      }
    }
    return depth;
  }

  // Builds one acyclic Def-5 proof of the given instance by always taking a
  // depth-minimal alternative.
  Proof extract_proof(const Sentence& goal_instance) const {
    Proof proof;
    std::unordered_map<Sentence, std::size_t, SentenceHash> sentence_vertex;
    auto depth = depths();

    std::function<std::size_t(const Sentence&)> build = [&](const Sentence& s) -> std::size_t {
      auto it = sentence_vertex.find(s);
      if (it != sentence_vertex.end()) return it->second;
      std::size_t v = proof.vertices.size();
      proof.vertices.push_back({false, s, Rule()});
      sentence_vertex.emplace(s, v);
      if (is_assumption(s)) return v;
      auto ait = alternatives.find(s);
      auto dit = depth.find(s);
      if (ait == alternatives.end() || dit == depth.end())
        throw Error(ErrorKind::data_error, "no derivation recorded for: " + s.str());
      const Rule* chosen = nullptr;
      for (const Rule& cr : ait->second) {
        std::size_t d = 0;
        bool ok = true;
        for (const Sentence& p : cr.premises) {
          auto pit = depth.find(p);
          if (pit == depth.end()) {
            ok = false;
            break;
          }
          d = std::max(d, pit->second);
        }
        if (ok && d + 1 == dit->second) {
          chosen = &cr;
          break;
        }
      }
      if (!chosen) throw Error(ErrorKind::data_error, "inconsistent depth labels");
      std::size_t rv = proof.vertices.size();
      proof.vertices.push_back({true, Sentence(), *chosen});
      proof.edges.emplace_back(rv, v);
      for (const Sentence& p : chosen->premises) {
        std::size_t pv = build(p);
        proof.edges.emplace_back(pv, rv);
      }
      return v;
    };
    build(goal_instance);
    return proof;
  }
};

namespace detail {

inline void validate_rules(const std::vector<Rule>& rules, bool conclusion_must_be_bound) {
  for (const Rule& r : rules) {
    if (r.premises.size() > kMaxPremises)
      throw Error(ErrorKind::invalid_rule, "premise count exceeds cap: " + r.str());
    if (conclusion_must_be_bound) {
      for (Token t : r.conclusion.tokens()) {
        if (!t.is_variable()) continue;
        bool bound = false;
        for (const Sentence& p : r.premises) {
          for (Token pt : p.tokens())
            if (pt == t) {
              bound = true;
              break;
            }
          if (bound) break;
        }
        if (!bound)
          throw Error(ErrorKind::invalid_rule,
                      "conclusion variable unbound by premises: " + r.str());
      }
    }
  }
}

inline std::vector<Rule> sorted_rules(const std::vector<Rule>& rules) {
  std::vector<Rule> out = rules;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

// Forward chaining per the incremental-join contract: each rule keeps the
// matches seen so far per premise; a new sentence extends only combinations
// it participates in. Sentences are processed strictly in depth layers so
// recorded depths are minimal.
inline ProofSet forward_chain(const std::vector<Sentence>& assumptions, const Sentence& goal,
                              const std::vector<Rule>& rules_in, std::size_t depth_limit,
                              ProverOptions opts = {}) {
  if (depth_limit < 1) throw Error(ErrorKind::config_error, "depth_limit must be >= 1");
  opts.depth_limit = depth_limit;
  for (const Sentence& a : assumptions)
    if (!a.is_concrete())
      throw Error(ErrorKind::data_error, "assumptions must be concrete: " + a.str());
  std::vector<Rule> rules = detail::sorted_rules(rules_in);
  detail::validate_rules(rules, /*conclusion_must_be_bound=*/true);

  ProofSet ps;
  ps.assumptions = assumptions;
  std::sort(ps.assumptions.begin(), ps.assumptions.end());
  ps.assumptions.erase(std::unique(ps.assumptions.begin(), ps.assumptions.end()),
                       ps.assumptions.end());

  struct Entry {
    Sentence sentence;
    Substitution sigma;
    std::size_t depth;
    std::size_t seq;
  };
  // match lists per rule, per premise
  std::vector<std::vector<std::vector<Entry>>> matches(rules.size());
  for (std::size_t i = 0; i < rules.size(); ++i) matches[i].resize(rules[i].premises.size());
  std::size_t seq_counter = 0;

  std::unordered_map<Sentence, std::size_t, SentenceHash> depth_of;
  std::map<std::size_t, std::vector<Sentence>> layers;
  std::unordered_set<std::string> alt_seen;

  auto add_sentence = [&](const Sentence& s, std::size_t d) {
    auto it = depth_of.find(s);
    if (it != depth_of.end()) return;
    if (depth_of.size() >= opts.max_derived) {
      ps.truncated = true;
      return;
    }
    depth_of.emplace(s, d);
    layers[d].push_back(s);
  };

  auto record_alternative = [&](const Sentence& concl, const Rule& cr) {
    Rule canon = canonicalize(cr);
    std::string key = concl.str() + "#" + canon.str();
    if (!alt_seen.insert(key).second) return;
    auto& alts = ps.alternatives[concl];
    if (alts.size() >= opts.max_alternatives) {
      ps.truncated = true;
      return;
    }
    alts.push_back(std::move(canon));
  };

  for (const Sentence& a : ps.assumptions) add_sentence(a, 0);
  // Zero-premise rules fire once, at depth 1.
  for (const Rule& r : rules) {
    if (!r.premises.empty()) continue;
    record_alternative(r.conclusion, r);
    add_sentence(r.conclusion, 1);
  }

  bool done = false;
  while (!done) {
    auto lit = layers.begin();
    if (lit == layers.end()) break;
    std::size_t d = lit->first;
    std::vector<Sentence> layer = std::move(lit->second);
    layers.erase(lit);
    if (d > opts.depth_limit) break;
    for (const Sentence& s : layer) {
      if (done) break;
      if (match_instance(s, goal)) {
        ps.goal_instances.push_back(s);
        ps.success = true;
        if (!opts.find_all) {
          done = true;
          break;
        }
      }
      for (std::size_t ri = 0; ri < rules.size(); ++ri) {
        const Rule& rule = rules[ri];
        for (std::size_t pi = 0; pi < rule.premises.size(); ++pi) {
          for (const Substitution& sig : match_all(s, rule.premises[pi])) {
            Entry e{s, sig, d, seq_counter++};
            matches[ri][pi].push_back(e);
            // Join against strictly older entries of the other premises, so
            // each combination fires exactly once (when its newest member
            // arrives).
            std::function<void(std::size_t, Substitution, std::size_t)> join =
                [&](std::size_t qi, Substitution acc, std::size_t dmax) {
                  if (qi == rule.premises.size()) {
                    std::size_t dc = dmax + 1;
                    if (dc > opts.depth_limit) return;
                    Rule cr = acc.apply(rule);
                    if (!cr.is_concrete()) return;
                    record_alternative(cr.conclusion, cr);
                    add_sentence(cr.conclusion, dc);
                    return;
                  }
                  if (qi == pi) {
                    join(qi + 1, std::move(acc), std::max(dmax, e.depth));
                    return;
                  }
                  for (const Entry& cand : matches[ri][qi]) {
                    if (cand.seq >= e.seq) break;  // lists grow by seq
                    Substitution merged = acc;
                    bool ok = true;
                    for (const auto& [v, img] : cand.sigma.bindings()) {
                      if (!merged.bind_consistent(v, img)) {
                        ok = false;
                        break;
                      }
                    }
                    if (ok) join(qi + 1, std::move(merged), std::max(dmax, cand.depth));
                  }
                };
            join(0, sig, 0);
          }
        }
      }
    }
  }
  std::sort(ps.goal_instances.begin(), ps.goal_instances.end());
  ps.goal_instances.erase(std::unique(ps.goal_instances.begin(), ps.goal_instances.end()),
                          ps.goal_instances.end());
  return ps;
}

namespace detail {

struct BackwardContext {
  std::vector<Rule> rules;  // standardized apart
  ProverOptions opts;
  ProofSet* ps;
  std::unordered_set<std::string>* alt_seen;
  std::unordered_map<std::string, std::vector<Sentence>> memo;

  // Conclusion indexes: rules whose (concrete) conclusion can be looked up
  // directly, buckets by first conclusion token, and the variable-headed
  // rest that every goal must try.
  std::unordered_map<Sentence, std::vector<std::size_t>, SentenceHash> exact;
  std::unordered_map<std::uint32_t, std::vector<std::size_t>> by_first_token;
  std::vector<std::size_t> var_headed;

  void build_index() {
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const Sentence& c = rules[i].conclusion;
      if (c.is_concrete()) exact[c].push_back(i);
      if (c[0].is_variable()) {
        var_headed.push_back(i);
      } else {
        by_first_token[c[0].id()].push_back(i);
      }
    }
  }

  // Indexes of rules whose conclusion could unify with the goal.
  std::vector<std::size_t> candidates_for(const Sentence& goal) const {
    std::vector<std::size_t> out;
    if (goal[0].is_variable()) {
      out.resize(rules.size());
      for (std::size_t i = 0; i < rules.size(); ++i) out[i] = i;
      return out;
    }
    if (goal.is_concrete()) {
      auto it = exact.find(goal);
      if (it != exact.end()) out = it->second;
      auto bt = by_first_token.find(goal[0].id());
      if (bt != by_first_token.end()) {
        for (std::size_t i : bt->second)
          if (!rules[i].conclusion.is_concrete()) out.push_back(i);
      }
    } else {
      auto bt = by_first_token.find(goal[0].id());
      if (bt != by_first_token.end()) out = bt->second;
    }
    out.insert(out.end(), var_headed.begin(), var_headed.end());
    std::sort(out.begin(), out.end());
    return out;
  }
};

inline void record_backward_alt(BackwardContext& ctx, const Rule& cr) {
  Rule canon = canonicalize(cr);
  std::string key = cr.conclusion.str() + "#" + canon.str();
  if (!ctx.alt_seen->insert(key).second) return;
  auto& alts = ctx.ps->alternatives[cr.conclusion];
  if (alts.size() >= ctx.opts.max_alternatives) {
    ctx.ps->truncated = true;
    return;
  }
  alts.push_back(std::move(canon));
}

inline std::vector<Sentence> prove_backward(BackwardContext& ctx, const Sentence& goal,
                                            std::size_t depth);

inline void solve_premises(BackwardContext& ctx, const Rule& rule, std::size_t idx,
                           const Substitution& sigma, std::size_t depth,
                           std::vector<Substitution>& out) {
  if (out.size() >= 4096) {
    ctx.ps->truncated = true;
    return;
  }
  if (idx == rule.premises.size()) {
    out.push_back(sigma);
    return;
  }
  Sentence subgoal = sigma.apply(rule.premises[idx]);
  for (const Sentence& inst : prove_backward(ctx, subgoal, depth)) {
    for_each_match(inst, subgoal, [&](const Substitution& ext) {
      Substitution merged = sigma;
      bool ok = true;
      for (const auto& [v, img] : ext.bindings()) {
        if (!merged.bind_consistent(v, img)) {
          ok = false;
          break;
        }
      }
      if (ok) solve_premises(ctx, rule, idx + 1, merged, depth, out);
      return true;
    });
  }
}

inline std::vector<Sentence> prove_backward(BackwardContext& ctx, const Sentence& goal,
                                            std::size_t depth) {
  std::string memo_key = alpha_normal(goal).str() + "@" + std::to_string(depth);
  auto mit = ctx.memo.find(memo_key);
  if (mit != ctx.memo.end()) return mit->second;

  std::vector<Sentence> instances;
  std::set<std::string> inst_seen;
  auto add_instance = [&](const Sentence& s) {
    if (instances.size() >= ctx.opts.max_instances) {
      ctx.ps->truncated = true;
      return false;
    }
    if (inst_seen.insert(s.str()).second) instances.push_back(s);
    return !(instances.size() == 1 && !ctx.opts.find_all);
  };

  bool keep_going = true;
  for (const Sentence& a : ctx.ps->assumptions) {
    if (is_instance(a, goal)) {
      if (!add_instance(a)) {
        keep_going = false;
        break;
      }
    }
  }
  if (keep_going && depth >= 1) {
    for (std::size_t ri : ctx.candidates_for(goal)) {
      if (!keep_going) break;
      const Rule& rule = ctx.rules[ri];
      UnifyResult ur = unify(goal, rule.conclusion, ctx.opts.unify_budget);
      if (ur.truncated) ctx.ps->truncated = true;
      for (const Unifier& u : ur.unifiers) {
        if (!keep_going) break;
        std::vector<Substitution> solutions;
        solve_premises(ctx, rule, 0, u.substitution, depth - 1, solutions);
        for (const Substitution& sol : solutions) {
          Rule cr = sol.apply(u.substitution.apply(rule));
          Sentence instance = sol.apply(u.substitution.apply(goal));
          if (!cr.is_concrete() || !instance.is_concrete()) continue;
          record_backward_alt(ctx, cr);
          if (!add_instance(instance)) {
            keep_going = false;
            break;
          }
        }
      }
    }
  }
  std::sort(instances.begin(), instances.end());
  ctx.memo.emplace(memo_key, instances);
  return instances;
}

}  // namespace detail

// Backward chaining: the goal (which may contain variables) is resolved
// against rule conclusions via unification, recursing on premises with the
// composed substitution. Succeeds on any concrete instance of the goal.
inline ProofSet backward_chain(const std::vector<Sentence>& assumptions, const Sentence& goal,
                               const std::vector<Rule>& rules_in, std::size_t depth_limit,
                               ProverOptions opts = {}) {
  if (depth_limit < 1) throw Error(ErrorKind::config_error, "depth_limit must be >= 1");
  opts.depth_limit = depth_limit;
  for (const Sentence& a : assumptions)
    if (!a.is_concrete())
      throw Error(ErrorKind::data_error, "assumptions must be concrete: " + a.str());
  std::vector<Rule> rules = detail::sorted_rules(rules_in);
  detail::validate_rules(rules, /*conclusion_must_be_bound=*/false);

  ProofSet ps;
  ps.assumptions = assumptions;
  std::sort(ps.assumptions.begin(), ps.assumptions.end());
  ps.assumptions.erase(std::unique(ps.assumptions.begin(), ps.assumptions.end()),
                       ps.assumptions.end());

  // Standardize rule variables apart from goal variables.
  std::vector<Rule> standardized;
  standardized.reserve(rules.size());
  for (std::size_t i = 0; i < rules.size(); ++i) {
    Substitution renaming;
    std::size_t k = 0;
    auto visit = [&](const Sentence& s) {
      for (Token t : s.tokens())
        if (t.is_variable() && !renaming.find(t))
          renaming.bind(t, Sentence({Token::variable("_r" + std::to_string(i) + "_" +
                                                     std::to_string(k++))}));
    };
    for (const Sentence& p : rules[i].premises) visit(p);
    visit(rules[i].conclusion);
    standardized.push_back(renaming.apply(rules[i]));
  }

  std::unordered_set<std::string> alt_seen;
  detail::BackwardContext ctx{std::move(standardized), opts, &ps, &alt_seen, {}, {}, {}, {}};
  ctx.build_index();
  ps.goal_instances = detail::prove_backward(ctx, goal, depth_limit);
  ps.success = !ps.goal_instances.empty();
  return ps;
}

// ---------------------------------------------------------------------------
// Proof checking, independent of how the proof was produced.

struct CheckResult {
  bool ok = true;
  std::string violation;
  explicit operator bool() const { return ok; }
};

inline CheckResult check_failure(std::string why) { return CheckResult{false, std::move(why)}; }

inline CheckResult check_proof(const Proof& proof, const std::vector<Rule>& model,
                               const std::vector<Sentence>& assumptions, const Sentence& goal) {
  const std::size_t n = proof.vertices.size();
  if (n == 0) return check_failure("empty proof");
  std::set<std::string> vertex_names;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = proof.vertices[i];
    if (v.is_rule) {
      if (!v.rule.is_concrete()) return check_failure("rule vertex is not concrete");
      if (!vertex_names.insert("r#" + v.rule.str()).second)
        return check_failure("duplicate rule vertex");
    } else {
      if (v.sentence.length() == 0) return check_failure("empty sentence vertex");
      if (!v.sentence.is_concrete()) return check_failure("sentence vertex is not concrete");
      if (!vertex_names.insert("s#" + v.sentence.str()).second)
        return check_failure("duplicate sentence vertex");
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> edge_set;
  for (auto [a, b] : proof.edges) {
    if (a >= n || b >= n) return check_failure("edge endpoint out of range");
    if (!edge_set.insert({a, b}).second) return check_failure("duplicate edge");
  }

  std::vector<std::vector<std::size_t>> out_edges(n), in_edges(n);
  for (auto [a, b] : proof.edges) {
    out_edges[a].push_back(b);
    in_edges[b].push_back(a);
  }

  // Edge discipline: every edge is premise->rule or rule->conclusion, and a
  // rule vertex has exactly those edges.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = proof.vertices[i];
    if (!v.is_rule) continue;
    if (out_edges[i].size() != 1) return check_failure("rule vertex must have exactly one outbound edge");
    const auto& concl = proof.vertices[out_edges[i][0]];
    if (concl.is_rule || concl.sentence != v.rule.conclusion)
      return check_failure("rule outbound edge must point at its conclusion");
    std::vector<Sentence> incoming;
    for (std::size_t src : in_edges[i]) {
      if (proof.vertices[src].is_rule) return check_failure("rule-to-rule edge");
      incoming.push_back(proof.vertices[src].sentence);
    }
    std::vector<Sentence> premises = v.rule.premises;
    std::sort(incoming.begin(), incoming.end());
    std::sort(premises.begin(), premises.end());
    // Premise duplicates collapse to one vertex, so compare distinct sets.
    premises.erase(std::unique(premises.begin(), premises.end()), premises.end());
    if (incoming != premises) return check_failure("rule inbound edges must be exactly its premises");
  }
  for (auto [a, b] : proof.edges) {
    const auto& src = proof.vertices[a];
    const auto& dst = proof.vertices[b];
    if (!src.is_rule && !dst.is_rule) return check_failure("sentence-to-sentence edge");
    if (src.is_rule && dst.is_rule) return check_failure("rule-to-rule edge");
  }

  // Acyclicity.
  {
    std::vector<std::size_t> indeg(n, 0);
    for (auto [a, b] : proof.edges) ++indeg[b];
    std::queue<std::size_t> q;
    for (std::size_t i = 0; i < n; ++i)
      if (indeg[i] == 0) q.push(i);
    std::size_t seen = 0;
    while (!q.empty()) {
      std::size_t i = q.front();
      q.pop();
      ++seen;
      for (std::size_t j : out_edges[i])
        if (--indeg[j] == 0) q.push(j);
    }
    if (seen != n) return check_failure("proof graph has a cycle");
  }

  // Exactly one sentence vertex without outbound edges: the goal.
  std::vector<std::size_t> sinks;
  for (std::size_t i = 0; i < n; ++i) {
    if (!proof.vertices[i].is_rule && out_edges[i].empty()) sinks.push_back(i);
  }
  if (sinks.size() != 1) return check_failure("proof must have exactly one goal vertex");
  if (!is_instance(proof.vertices[sinks[0]].sentence, goal))
    return check_failure("goal vertex is not an instance of the goal");

  // Sentence vertices without inbound edges are the proof's assumptions.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = proof.vertices[i];
    if (v.is_rule || !in_edges[i].empty()) continue;
    if (std::find(assumptions.begin(), assumptions.end(), v.sentence) == assumptions.end())
      return check_failure("assumption vertex not among given assumptions: " + v.sentence.str());
  }

  // Every rule vertex instantiates some rule of the model.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = proof.vertices[i];
    if (!v.is_rule) continue;
    bool witnessed = false;
    for (const Rule& m : model) {
      if (is_instance(v.rule, m)) {
        witnessed = true;
        break;
      }
    }
    if (!witnessed) return check_failure("rule vertex is not an instance of any model rule");
  }
  return CheckResult{};
}

// ---------------------------------------------------------------------------
// Path enumeration: the DNF over concrete rules such that a set S of valid
// concrete rules proves the goal instance iff some conjunct is contained in
// S. Conjuncts are subset-minimal and deduplicated.

using PathDnf = std::vector<std::vector<Rule>>;

namespace detail {

inline void minimize_dnf(std::vector<std::vector<std::string>>& keys, PathDnf& dnf) {
  std::vector<bool> drop(dnf.size(), false);
  for (std::size_t i = 0; i < dnf.size(); ++i) {
    for (std::size_t j = 0; j < dnf.size() && !drop[i]; ++j) {
      if (i == j || drop[j]) continue;
      // drop i if keys[j] subset of keys[i] (j at least as good)
      if (keys[j].size() > keys[i].size()) continue;
      if (keys[j] == keys[i] && j > i) continue;
      if (std::includes(keys[i].begin(), keys[i].end(), keys[j].begin(), keys[j].end()))
        drop[i] = true;
    }
  }
  PathDnf kept;
  std::vector<std::vector<std::string>> kept_keys;
  for (std::size_t i = 0; i < dnf.size(); ++i) {
    if (!drop[i]) {
      kept.push_back(std::move(dnf[i]));
      kept_keys.push_back(std::move(keys[i]));
    }
  }
  dnf = std::move(kept);
  keys = std::move(kept_keys);
}

inline PathDnf paths_for(const ProofSet& ps, const Sentence& s,
                         std::set<std::string>& on_path, std::size_t cap,
                         std::size_t& budget) {
  if (ps.is_assumption(s)) return {{}};
  auto it = ps.alternatives.find(s);
  if (it == ps.alternatives.end()) return {};
  std::string key = s.str();
  if (on_path.count(key)) return {};  // a derivation may not pass through itself
  on_path.insert(key);
  PathDnf dnf;
  std::set<std::vector<std::string>> seen;
  for (const Rule& cr : it->second) {
    PathDnf partial{{cr}};
    bool dead = false;
    for (const Sentence& p : cr.premises) {
      PathDnf sub = paths_for(ps, p, on_path, cap, budget);
      if (sub.empty()) {
        dead = true;
        break;
      }
      PathDnf next;
      for (const auto& a : partial) {
        for (const auto& b : sub) {
          if (--budget == 0) {
            on_path.erase(key);
            throw Error(ErrorKind::path_explosion, "proof path enumeration exceeded cap");
          }
          std::vector<Rule> merged = a;
          merged.insert(merged.end(), b.begin(), b.end());
          std::sort(merged.begin(), merged.end());
          merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
          next.push_back(std::move(merged));
        }
      }
      partial = std::move(next);
      if (partial.size() > cap) {
        on_path.erase(key);
        throw Error(ErrorKind::path_explosion, "proof path enumeration exceeded cap");
      }
    }
    if (dead) continue;
    for (auto& conj : partial) {
      std::vector<std::string> k;
      k.reserve(conj.size());
      for (const Rule& r : conj) k.push_back(r.str());
      std::sort(k.begin(), k.end());
      if (seen.insert(k).second) {
        dnf.push_back(std::move(conj));
        if (dnf.size() > cap) {
          on_path.erase(key);
          throw Error(ErrorKind::path_explosion, "proof path enumeration exceeded cap");
        }
      }
    }
  }
  on_path.erase(key);
  std::vector<std::vector<std::string>> keys;
  keys.reserve(dnf.size());
  for (const auto& conj : dnf) {
    std::vector<std::string> k;
    for (const Rule& r : conj) k.push_back(r.str());
    std::sort(k.begin(), k.end());
    keys.push_back(std::move(k));
  }
  minimize_dnf(keys, dnf);
  return dnf;
}

}  // namespace detail

inline PathDnf enumerate_paths(const ProofSet& ps, const Sentence& goal_instance,
                               std::size_t path_cap = 512) {
  if (!ps.is_assumption(goal_instance) && !ps.alternatives.count(goal_instance))
    throw Error(ErrorKind::data_error, "goal instance was not derived: " + goal_instance.str());
  std::set<std::string> on_path;
  std::size_t budget = path_cap * 64 + 1;  // work bound behind the conjunct cap
  PathDnf dnf = detail::paths_for(ps, goal_instance, on_path, path_cap, budget);
  std::sort(dnf.begin(), dnf.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return dnf;
}

}  // namespace metaqnl
