#pragma once

// The rule-induction loop: per-example rule proposal and proving, per-epoch
// abstraction closure over anti-unification, and rule pruning through a
// weighted MAX-SAT encoding of all retained proof paths. Also the loss
// L(M) = |M| - lambda+ * N+ - lambda- * N- that the encoding minimizes up to
// a constant shift.

#include <atomic>
#include <thread>

#include "metaqnl/maxsat.hpp"
#include "metaqnl/prover.hpp"
#include "metaqnl/unify.hpp"

namespace metaqnl {

struct TrainingExample {
  std::vector<Sentence> assumptions;
  Sentence goal;
  bool provable = true;  // false: a negative demonstration (D-)
};

struct Model {
  std::vector<Rule> rules;  // canonical, sorted, deduplicated

  bool contains(const Rule& r) const {
    Rule c = canonicalize(r);
    return std::binary_search(rules.begin(), rules.end(), c);
  }
  bool operator==(const Model& o) const { return rules == o.rules; }
};

enum class ProverKind { forward, backward };

struct InduceConfig {
  Weight lambda_plus = Weight::finite(Rational(128, 100));
  Weight lambda_minus = Weight::finite(Rational(0));
  std::size_t epochs = 3;
  std::size_t depth_limit = 5;
  ProverKind prover = ProverKind::backward;
  SolveBudget solver_budget;
  std::size_t path_cap = 512;
  std::size_t closure_rounds = 3;
  std::size_t closure_max_rules = 20000;
  std::size_t unify_budget = kDefaultUnifyBudget;
  std::size_t jobs = 1;
  bool stop_at_fixpoint = true;
  std::function<std::optional<Rule>(const Rule&)> extra_filter;  // task hook

  ProverOptions prover_options() const {
    ProverOptions o;
    o.depth_limit = depth_limit;
    o.path_cap = path_cap;
    o.unify_budget = unify_budget;
    o.find_all = true;
    return o;
  }
  void validate() const {
    if (epochs < 1) throw Error(ErrorKind::config_error, "epochs must be >= 1");
    if (depth_limit < 1) throw Error(ErrorKind::config_error, "depth_limit must be >= 1");
  }
};

// Rule proposers are dataset-dependent; Algorithm-style interface: the full
// training set plus the index of the current example. propose() is called
// concurrently when jobs > 1 and must be safe for that.
class RuleProposer {
 public:
  virtual ~RuleProposer() = default;
  virtual std::vector<Rule> propose(const std::vector<TrainingExample>& data, std::size_t i) = 0;
};

namespace detail {

template <typename F>
void parallel_for(std::size_t n, std::size_t jobs, F&& fn) {
  jobs = std::min(jobs == 0 ? 1 : jobs, n == 0 ? 1 : n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&]() {
    while (!failed.load()) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

inline std::vector<Token> rule_variables(const Rule& r) {
  std::vector<Token> vars;
  auto visit = [&](const Sentence& s) {
    for (Token t : s.tokens())
      if (t.is_variable() && std::find(vars.begin(), vars.end(), t) == vars.end())
        vars.push_back(t);
  };
  for (const Sentence& p : r.premises) visit(p);
  visit(r.conclusion);
  return vars;
}

inline std::size_t count_occurrences(const Rule& r, Token var) {
  std::size_t n = 0;
  auto visit = [&](const Sentence& s) {
    for (Token t : s.tokens())
      if (t == var) ++n;
  };
  for (const Sentence& p : r.premises) visit(p);
  visit(r.conclusion);
  return n;
}

// Merges variable runs that always appear together: if every occurrence of v
// is immediately followed by w and vice versa, w is redundant and is dropped.
inline Rule merge_adjacent_variables(Rule rule) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Token> vars = rule_variables(rule);
    for (Token v : vars) {
      for (Token w : vars) {
        if (v == w) continue;
        std::size_t pairs = 0, v_count = 0, w_count = 0;
        bool always = true;
        auto visit = [&](const Sentence& s) {
          const auto& toks = s.tokens();
          for (std::size_t i = 0; i < toks.size(); ++i) {
            if (toks[i] == v) {
              ++v_count;
              if (i + 1 < toks.size() && toks[i + 1] == w)
                ++pairs;
              else
                always = false;
            } else if (toks[i] == w) {
              ++w_count;
              if (i == 0 || toks[i - 1] != v) always = false;
            }
          }
        };
        for (const Sentence& p : rule.premises) visit(p);
        visit(rule.conclusion);
        if (!always || pairs == 0 || v_count != w_count || w_count != pairs) continue;
        // drop w everywhere
        auto rewrite = [&](const Sentence& s) {
          std::vector<Token> out;
          for (Token t : s.tokens())
            if (t != w) out.push_back(t);
          return Sentence(std::move(out));
        };
        std::vector<Sentence> prems;
        for (const Sentence& p : rule.premises) prems.push_back(rewrite(p));
        rule = Rule(std::move(prems), rewrite(rule.conclusion));
        changed = true;
        break;
      }
      if (changed) break;
    }
  }
  return rule;
}

}  // namespace detail

// The rule-space heuristics: merge co-occurring variable runs, then reject
// rules with more than one free variable, a free variable in the conclusion,
// or a premise that is (up to special symbols) a single free variable. A free
// variable is one occurring exactly once in the whole rule.
inline std::optional<Rule> validity_filter(const Rule& rule_in) {
  Rule rule = detail::merge_adjacent_variables(rule_in);
  std::vector<Token> free_vars;
  for (Token v : detail::rule_variables(rule)) {
    if (detail::count_occurrences(rule, v) == 1) free_vars.push_back(v);
  }
  if (free_vars.size() > 1) return std::nullopt;
  for (Token v : free_vars) {
    for (Token t : rule.conclusion.tokens())
      if (t == v) return std::nullopt;
  }
  for (const Sentence& p : rule.premises) {
    std::vector<Token> content;
    for (Token t : p.tokens())
      if (!t.is_special()) content.push_back(t);
    if (content.size() == 1 && content[0].is_variable() &&
        std::find(free_vars.begin(), free_vars.end(), content[0]) != free_vars.end())
      return std::nullopt;
  }
  return canonicalize(rule);
}

namespace detail {

inline std::vector<Token> special_skeleton(const Sentence& s) {
  std::vector<Token> out;
  for (Token t : s.tokens())
    if (t.is_special()) out.push_back(t);
  return out;
}

inline bool token_set_diff_covered(const Sentence& c1, const Sentence& c2,
                                   const std::vector<Sentence>& premises1) {
  for (Token t : c1.tokens()) {
    if (t.is_special()) continue;
    bool in_c2 = false;
    for (Token u : c2.tokens())
      if (u == t) {
        in_c2 = true;
        break;
      }
    if (in_c2) continue;
    bool in_premises = false;
    for (const Sentence& p : premises1) {
      for (Token u : p.tokens())
        if (u == t) {
          in_premises = true;
          break;
        }
      if (in_premises) break;
    }
    if (!in_premises) return false;
  }
  return true;
}

// Cheap necessary conditions for a rule pair to anti-unify into something
// the validity filter keeps.
inline bool abstraction_pair_compatible(const Rule& a, const Rule& b) {
  if (a.premises.size() != b.premises.size()) return false;
  if (a.premises.empty()) return false;  // result variables would be free in the conclusion
  auto skel = [](const Rule& r) {
    std::vector<std::string> out;
    for (const Sentence& p : r.premises) {
      std::string s;
      for (Token t : special_skeleton(p)) s += std::string(t.text()) + " ";
      out.push_back(s);
    }
    std::sort(out.begin(), out.end());
    std::string all;
    for (const auto& s : out) all += s + "|";
    all += "#";
    for (Token t : special_skeleton(r.conclusion)) all += std::string(t.text()) + " ";
    return all;
  };
  if (skel(a) != skel(b)) return false;
  // Tokens unique to one conclusion must be expressible through premise
  // variables on that side.
  if (!token_set_diff_covered(a.conclusion, b.conclusion, a.premises)) return false;
  if (!token_set_diff_covered(b.conclusion, a.conclusion, b.premises)) return false;
  return true;
}

}  // namespace detail

struct ClosureResult {
  std::vector<Rule> rules;  // sorted canonical, includes the inputs
  bool capped = false;
};

// Closes a set of concrete rules under pairwise anti-unification, keeping
// only rules the validity filter accepts (inputs are kept unconditionally).
inline ClosureResult abstraction_closure(const std::vector<Rule>& concrete_rules,
                                         const InduceConfig& config) {
  RuleFilter filter = [&config](const Rule& r) -> std::optional<Rule> {
    auto kept = validity_filter(r);
    if (!kept) return std::nullopt;
    if (config.extra_filter) return config.extra_filter(*kept);
    return kept;
  };

  ClosureResult result;
  std::set<std::string> seen;
  std::vector<Rule> all;
  for (const Rule& r : concrete_rules) {
    Rule c = canonicalize(r);
    if (seen.insert(c.str()).second) all.push_back(std::move(c));
  }
  std::sort(all.begin(), all.end());

  std::vector<Rule> frontier = all;
  for (std::size_t round = 0; round < config.closure_rounds && !frontier.empty(); ++round) {
    // pairs: frontier x all (unordered, distinct)
    std::vector<std::vector<Rule>> found(frontier.size());
    detail::parallel_for(frontier.size(), config.jobs, [&](std::size_t fi) {
      const Rule& a = frontier[fi];
      std::vector<Rule>& out = found[fi];
      for (const Rule& b : all) {
        if (a == b) continue;
        if (!detail::abstraction_pair_compatible(a, b)) continue;
        for (Rule& g : anti_unify_rules(a, b, &filter)) out.push_back(std::move(g));
      }
    });
    std::vector<Rule> fresh;
    for (auto& chunk : found) {
      for (Rule& g : chunk) {
        if (all.size() + fresh.size() >= config.closure_max_rules) {
          result.capped = true;
          break;
        }
        if (seen.insert(g.str()).second) fresh.push_back(std::move(g));
      }
      if (result.capped) break;
    }
    std::sort(fresh.begin(), fresh.end());
    fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
    all.insert(all.end(), fresh.begin(), fresh.end());
    std::sort(all.begin(), all.end());
    frontier = std::move(fresh);
    if (result.capped) break;
  }
  result.rules = std::move(all);
  return result;
}

// ---------------------------------------------------------------------------
// Loss (Eq. 1 shape): |M| - lambda+ * N+ - lambda- * N-.

struct ConsistencyCounts {
  std::size_t provable_consistent = 0;
  std::size_t provable_total = 0;
  std::size_t unprovable_consistent = 0;
  std::size_t unprovable_total = 0;
};

inline ConsistencyCounts count_consistent(const Model& model,
                                          const std::vector<TrainingExample>& data,
                                          const InduceConfig& config) {
  ConsistencyCounts out;
  std::vector<std::uint8_t> consistent(data.size(), 0);
  ProverOptions opts = config.prover_options();
  opts.find_all = false;
  detail::parallel_for(data.size(), config.jobs, [&](std::size_t i) {
    const TrainingExample& ex = data[i];
    ProofSet ps = config.prover == ProverKind::forward
                      ? forward_chain(ex.assumptions, ex.goal, model.rules, config.depth_limit, opts)
                      : backward_chain(ex.assumptions, ex.goal, model.rules, config.depth_limit, opts);
    consistent[i] = ex.provable == ps.success ? 1 : 0;
  });
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].provable) {
      ++out.provable_total;
      out.provable_consistent += consistent[i];
    } else {
      ++out.unprovable_total;
      out.unprovable_consistent += consistent[i];
    }
  }
  return out;
}

inline Rational loss(const Model& model, const std::vector<TrainingExample>& data,
                     const InduceConfig& config) {
  if (config.lambda_plus.hard || config.lambda_minus.hard)
    throw Error(ErrorKind::config_error, "loss is undefined for hard consistency weights");
  ConsistencyCounts c = count_consistent(model, data, config);
  Rational value(static_cast<std::int64_t>(model.rules.size()));
  value -= config.lambda_plus.value * static_cast<std::int64_t>(c.provable_consistent);
  value -= config.lambda_minus.value * static_cast<std::int64_t>(c.unprovable_consistent);
  return value;
}

// ---------------------------------------------------------------------------
// Rule pruning: the MAX-SAT encoding of Fig-3b shape.

struct FallbackStructure {
  // per-sentence alternatives for the path-explosion fallback encoding
  std::vector<Sentence> assumptions;
  std::vector<std::pair<Sentence, std::vector<Rule>>> alternatives;
  Sentence goal_instance;
};

struct ExampleEncoding {
  bool provable = true;
  PathDnf paths;  // subset-minimal conjunct sets of concrete rules
  std::optional<FallbackStructure> fallback;
};

struct PruneResult {
  Model model;
  Rational cost;
  bool certified = true;
  bool timed_out = false;
};

namespace detail {

// Incremental cover structure over (rules, concrete rules, proof paths) used
// to build a strong incumbent for the SAT solver: selecting a rule validates
// its concrete instances, a path is live when all its concrete rules are
// validated, an example is covered when some path is live.
class CoverSearch {
 public:
  struct ExampleInfo {
    bool provable = true;
    bool hard = false;
    Rational lambda;
    bool skip = false;  // weightless or structurally constant
  };

  CoverSearch(std::size_t num_rules, std::vector<std::vector<int>> inst_of,
              std::vector<std::vector<int>> gens_of, std::vector<std::vector<int>> path_crs,
              std::vector<int> path_example, std::vector<ExampleInfo> examples)
      : inst_of_(std::move(inst_of)),
        gens_of_(std::move(gens_of)),
        path_crs_(std::move(path_crs)),
        path_example_(std::move(path_example)),
        examples_(std::move(examples)),
        selected_(num_rules, 0),
        validated_(gens_of_.size(), 0),
        invalid_crs_(path_crs_.size(), 0),
        live_paths_(examples_.size(), 0) {
    paths_of_cr_.resize(gens_of_.size());
    for (std::size_t p = 0; p < path_crs_.size(); ++p) {
      for (int ci : path_crs_[p]) paths_of_cr_[ci].push_back(static_cast<int>(p));
      invalid_crs_[p] = static_cast<int>(path_crs_[p].size());
      if (invalid_crs_[p] == 0) ++live_paths_[path_example_[p]];
    }
    for (std::size_t e = 0; e < examples_.size(); ++e) {
      const ExampleInfo& ex = examples_[e];
      if (ex.skip) continue;
      bool covered = live_paths_[e] > 0;
      if (ex.provable ? !covered : covered) {
        if (ex.hard)
          ++hard_violations_;
        else
          soft_violations_ += ex.lambda;
      }
    }
  }

  bool selected(int ri) const { return selected_[ri] != 0; }
  bool validated(int ci) const { return validated_[ci] > 0; }
  std::size_t selected_count() const { return n_selected_; }

  // (hard violations, |S| + soft violation weight)
  std::pair<std::size_t, Rational> cost() const {
    return {hard_violations_, soft_violations_ + Rational(static_cast<std::int64_t>(n_selected_))};
  }

  void add_rule(int ri) {
    if (selected_[ri]) return;
    selected_[ri] = 1;
    ++n_selected_;
    for (int ci : inst_of_[ri]) {
      if (validated_[ci]++ == 0) {
        for (int p : paths_of_cr_[ci]) {
          if (--invalid_crs_[p] == 0) bump_example(path_example_[p], +1);
        }
      }
    }
  }

  void remove_rule(int ri) {
    if (!selected_[ri]) return;
    selected_[ri] = 0;
    --n_selected_;
    for (int ci : inst_of_[ri]) {
      if (--validated_[ci] == 0) {
        for (int p : paths_of_cr_[ci]) {
          if (invalid_crs_[p]++ == 0) bump_example(path_example_[p], -1);
        }
      }
    }
  }

  // Drops every rule whose removal does not worsen (hard, cost); returns the
  // removed rules.
  std::vector<int> reduce() {
    std::vector<int> removed;
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t ri = 0; ri < selected_.size(); ++ri) {
        if (!selected_[ri]) continue;
        auto before = cost();
        remove_rule(static_cast<int>(ri));
        if (cost() <= before) {
          removed.push_back(static_cast<int>(ri));
          changed = true;
        } else {
          add_rule(static_cast<int>(ri));
        }
      }
    }
    return removed;
  }

  // Initial cover: for every uncovered positive example take its first path
  // and validate each concrete rule through its most widely applicable
  // generalizer.
  void build_initial_cover() {
    for (std::size_t p = 0; p < path_crs_.size(); ++p) {
      int e = path_example_[p];
      if (!examples_[e].provable || examples_[e].skip) continue;
      if (live_paths_[e] > 0) continue;
      for (int ci : path_crs_[p]) {
        if (validated(ci)) continue;
        int best = -1;
        for (int ri : gens_of_[ci]) {
          if (best < 0 || inst_of_[ri].size() > inst_of_[best].size()) best = ri;
        }
        if (best >= 0) add_rule(best);
      }
    }
  }

  // Add-and-reduce passes: adding a shared abstraction pays off once the
  // rules it makes redundant are dropped.
  void improve(std::size_t max_passes) {
    std::vector<int> candidates;
    for (std::size_t ri = 0; ri < inst_of_.size(); ++ri)
      if (inst_of_[ri].size() >= 2) candidates.push_back(static_cast<int>(ri));
    std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
      return inst_of_[a].size() > inst_of_[b].size();
    });
    for (std::size_t pass = 0; pass < max_passes; ++pass) {
      bool changed = false;
      for (int ri : candidates) {
        if (selected_[ri]) continue;
        auto before = cost();
        add_rule(ri);
        std::vector<int> removed = reduce();
        if (cost() < before) {
          changed = true;
        } else {
          for (auto it = removed.rbegin(); it != removed.rend(); ++it) add_rule(*it);
          remove_rule(ri);
        }
      }
      if (!changed) break;
    }
  }

 private:
  void bump_example(int e, int delta) {
    ExampleInfo& ex = examples_[e];
    bool was_covered = live_paths_[e] > 0;
    live_paths_[e] += delta;
    bool covered = live_paths_[e] > 0;
    if (was_covered == covered || ex.skip) return;
    bool violated_now = ex.provable ? !covered : covered;
    if (violated_now) {
      if (ex.hard)
        ++hard_violations_;
      else
        soft_violations_ += ex.lambda;
    } else {
      if (ex.hard)
        --hard_violations_;
      else
        soft_violations_ -= ex.lambda;
    }
  }

  std::vector<std::vector<int>> inst_of_;   // rule -> concrete instances
  std::vector<std::vector<int>> gens_of_;   // concrete -> generalizing rules
  std::vector<std::vector<int>> path_crs_;  // path -> concrete rules
  std::vector<int> path_example_;
  std::vector<ExampleInfo> examples_;
  std::vector<std::vector<int>> paths_of_cr_;
  std::vector<char> selected_;
  std::vector<int> validated_;
  std::vector<int> invalid_crs_;
  std::vector<int> live_paths_;
  std::size_t n_selected_ = 0;
  Rational soft_violations_;
  std::size_t hard_violations_ = 0;
};

}  // namespace detail

inline PruneResult prune_rules(const std::vector<Rule>& candidate_rules,
                               const std::vector<ExampleEncoding>& examples,
                               const InduceConfig& config) {
  // Canonical candidate set with selection variables.
  std::vector<Rule> rules;
  std::set<std::string> rule_seen;
  for (const Rule& r : candidate_rules) {
    Rule c = canonicalize(r);
    if (rule_seen.insert(c.str()).second) rules.push_back(std::move(c));
  }
  std::sort(rules.begin(), rules.end());

  MaxSatInstance inst;
  std::unordered_map<std::string, int> r_var;
  for (const Rule& r : rules) r_var.emplace(r.str(), inst.add_variable(VarRole::abstract_rule));

  // Concrete rules referenced by proofs.
  std::vector<Rule> concrete;
  {
    std::set<std::string> seen;
    auto note = [&](const Rule& cr) {
      Rule c = canonicalize(cr);
      if (!r_var.count(c.str()))
        throw Error(ErrorKind::data_error,
                    "proof references a concrete rule outside the candidate set: " + c.str());
      if (seen.insert(c.str()).second) concrete.push_back(std::move(c));
    };
    for (const auto& ex : examples) {
      for (const auto& path : ex.paths)
        for (const Rule& cr : path) note(cr);
      if (ex.fallback) {
        for (const auto& [s, alts] : ex.fallback->alternatives)
          for (const Rule& cr : alts) note(cr);
      }
    }
    std::sort(concrete.begin(), concrete.end());
  }
  std::unordered_map<std::string, int> cr_var;
  for (const Rule& cr : concrete) cr_var.emplace(cr.str(), inst.add_variable(VarRole::concrete_rule));

  // Model complexity: soft not-r of weight 1 per selection variable.
  for (const Rule& r : rules) inst.add_soft({-r_var.at(r.str())}, Rational(1));

  // Rule instantiation: cr <-> disjunction of its generalizers.
  std::vector<std::vector<int>> generalizers(concrete.size());  // rule indices
  detail::parallel_for(concrete.size(), config.jobs, [&](std::size_t ci) {
    const Rule& cr = concrete[ci];
    std::vector<int>& disj = generalizers[ci];
    for (std::size_t ri = 0; ri < rules.size(); ++ri) {
      const Rule& r = rules[ri];
      if (r.premises.size() != cr.premises.size()) continue;
      if (r.is_concrete()) {
        if (r == cr) disj.push_back(static_cast<int>(ri));
        continue;
      }
      if (is_instance(cr, r)) disj.push_back(static_cast<int>(ri));
    }
  });
  for (std::size_t ci = 0; ci < concrete.size(); ++ci) {
    int cv = cr_var.at(concrete[ci].str());
    std::vector<int> clause{-cv};
    for (int ri : generalizers[ci]) clause.push_back(r_var.at(rules[ri].str()));
    inst.add_hard(clause);
    for (std::size_t k = 1; k < clause.size(); ++k) inst.add_hard({-clause[k], cv});
  }

  // Semantic incumbent: cover positive examples, penalize covered negatives,
  // then shrink by add-and-reduce over shared abstractions.
  detail::CoverSearch cover = [&]() {
    std::unordered_map<std::string, int> cr_index;
    for (std::size_t ci = 0; ci < concrete.size(); ++ci) cr_index.emplace(concrete[ci].str(), ci);
    std::vector<std::vector<int>> inst_of(rules.size());
    std::vector<std::vector<int>> gens_of(concrete.size());
    for (std::size_t ci = 0; ci < concrete.size(); ++ci) {
      gens_of[ci] = generalizers[ci];
      for (int ri : generalizers[ci]) inst_of[ri].push_back(static_cast<int>(ci));
    }
    std::vector<std::vector<int>> path_crs;
    std::vector<int> path_example;
    std::vector<detail::CoverSearch::ExampleInfo> einfo(examples.size());
    for (std::size_t e = 0; e < examples.size(); ++e) {
      const ExampleEncoding& ex = examples[e];
      Weight w = ex.provable ? config.lambda_plus : config.lambda_minus;
      detail::CoverSearch::ExampleInfo info;
      info.provable = ex.provable;
      info.hard = w.hard;
      info.lambda = w.hard ? Rational(0) : w.value;
      info.skip = ex.fallback.has_value() || (!w.hard && w.value == Rational(0)) || ex.paths.empty();
      bool trivial = false;
      for (const auto& path : ex.paths)
        if (path.empty()) trivial = true;
      if (trivial) info.skip = true;  // provability is constant either way
      einfo[e] = info;
      if (info.skip) continue;
      for (const auto& path : ex.paths) {
        std::vector<int> crs;
        crs.reserve(path.size());
        for (const Rule& cr : path) crs.push_back(cr_index.at(canonicalize(cr).str()));
        path_crs.push_back(std::move(crs));
        path_example.push_back(static_cast<int>(e));
      }
    }
    return detail::CoverSearch(rules.size(), std::move(inst_of), std::move(gens_of),
                               std::move(path_crs), std::move(path_example), std::move(einfo));
  }();
  cover.build_initial_cover();
  cover.improve(25);

  // Data consistency.
  for (const auto& ex : examples) {
    Weight w = ex.provable ? config.lambda_plus : config.lambda_minus;
    if (!w.hard && w.value == Rational(0)) continue;  // weightless: no constraint
    if (ex.fallback) {
      // Per-sentence implication encoding (both directions so unprovable
      // examples stay meaningful; cycles may over-approximate provability).
      const FallbackStructure& fb = *ex.fallback;
      std::unordered_map<std::string, int> d_var;
      auto dv = [&](const Sentence& s) -> int {
        auto it = d_var.find(s.str());
        if (it != d_var.end()) return it->second;
        int v = inst.add_variable(VarRole::aux);
        d_var.emplace(s.str(), v);
        return v;
      };
      auto is_assumption = [&](const Sentence& s) {
        return std::find(fb.assumptions.begin(), fb.assumptions.end(), s) != fb.assumptions.end();
      };
      for (const auto& [s, alts] : fb.alternatives) {
        if (is_assumption(s)) continue;
        int ds = dv(s);
        std::vector<int> any{-ds};
        for (const Rule& cr : alts) {
          int app = inst.add_variable(VarRole::aux);
          inst.add_hard({-app, cr_var.at(canonicalize(cr).str())});
          std::vector<int> back{app, -cr_var.at(canonicalize(cr).str())};
          for (const Sentence& p : cr.premises) {
            if (is_assumption(p)) continue;
            inst.add_hard({-app, dv(p)});
            back.push_back(-dv(p));
          }
          inst.add_hard(back);
          inst.add_hard({ds, -app});
          any.push_back(app);
        }
        inst.add_hard(any);
      }
      int goal_var = is_assumption(fb.goal_instance) ? 0 : dv(fb.goal_instance);
      if (ex.provable) {
        if (goal_var == 0) continue;  // trivially provable
        if (w.hard)
          inst.add_hard({goal_var});
        else
          inst.add_soft({goal_var}, w.value);
      } else {
        if (goal_var == 0) continue;  // hopeless: goal among assumptions
        if (w.hard)
          inst.add_hard({-goal_var});
        else
          inst.add_soft({-goal_var}, w.value);
      }
      continue;
    }
    if (ex.provable) {
      if (ex.paths.empty()) {
        if (w.hard)
          throw Error(ErrorKind::hard_unsat,
                      "provable example has no proof under hard consistency");
        inst.add_soft({}, w.value);  // permanently violated
        continue;
      }
      std::vector<int> disj;
      bool trivially = false;
      for (const auto& path : ex.paths) {
        if (path.empty()) {
          trivially = true;  // goal among assumptions
          break;
        }
        if (path.size() == 1) {
          disj.push_back(cr_var.at(canonicalize(path[0]).str()));
          continue;
        }
        int pv = inst.add_variable(VarRole::aux);
        for (const Rule& cr : path) inst.add_hard({-pv, cr_var.at(canonicalize(cr).str())});
        disj.push_back(pv);
      }
      if (trivially) continue;
      if (w.hard)
        inst.add_hard(disj);
      else
        inst.add_soft(disj, w.value);
    } else {
      if (ex.paths.empty()) continue;  // not provable: consistent for free
      bool trivially_provable = false;
      for (const auto& path : ex.paths)
        if (path.empty()) trivially_provable = true;
      if (trivially_provable) {
        if (w.hard)
          throw Error(ErrorKind::hard_unsat,
                      "unprovable example is provable from assumptions alone");
        inst.add_soft({}, w.value);
        continue;
      }
      if (w.hard) {
        for (const auto& path : ex.paths) {
          std::vector<int> clause;
          for (const Rule& cr : path) clause.push_back(-cr_var.at(canonicalize(cr).str()));
          inst.add_hard(clause);
        }
      } else {
        int av = inst.add_variable(VarRole::aux);
        for (const auto& path : ex.paths) {
          std::vector<int> clause{-av};
          for (const Rule& cr : path) clause.push_back(-cr_var.at(canonicalize(cr).str()));
          inst.add_hard(clause);
        }
        inst.add_soft({av}, w.value);
      }
    }
  }

  std::vector<std::uint8_t> hint(inst.num_vars() + 1, 2);
  for (std::size_t ri = 0; ri < rules.size(); ++ri)
    hint[static_cast<std::size_t>(r_var.at(rules[ri].str()))] = cover.selected(ri) ? 1 : 0;
  for (std::size_t ci = 0; ci < concrete.size(); ++ci)
    hint[static_cast<std::size_t>(cr_var.at(concrete[ci].str()))] = cover.validated(ci) ? 1 : 0;

  SolveResult solved = solve(inst, config.solver_budget, &hint);
  PruneResult out;
  out.cost = solved.assignment.cost;
  out.certified = solved.certified;
  out.timed_out = solved.timed_out;
  for (const Rule& r : rules) {
    if (solved.assignment.value(r_var.at(r.str()))) out.model.rules.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// The training loop.

struct EpochStats {
  std::size_t epoch = 0;
  std::size_t gamma_size = 0;        // concrete rules accumulated
  std::size_t gamma_prime_size = 0;  // after abstraction closure
  std::size_t model_size = 0;
  Rational sat_cost;
  bool solver_certified = true;
  std::size_t proved_examples = 0;
  std::size_t path_fallbacks = 0;
  bool converged = false;
};

using EpochLogger = std::function<void(const EpochStats&, const Model&)>;

inline Model metainduce(const std::vector<TrainingExample>& data, RuleProposer& proposer,
                        const InduceConfig& config, const EpochLogger& logger = nullptr) {
  config.validate();
  Model model;
  if (data.empty()) return model;

  std::vector<Rule> gamma;  // accumulated concrete rules from proofs
  std::set<std::string> gamma_seen;
  ProverOptions opts = config.prover_options();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<ExampleEncoding> encodings(data.size());
    std::vector<std::vector<Rule>> used(data.size());
    std::atomic<std::size_t> proved{0}, fallbacks{0};

    detail::parallel_for(data.size(), config.jobs, [&](std::size_t i) {
      const TrainingExample& ex = data[i];
      std::vector<Rule> candidates = proposer.propose(data, i);
      for (const Rule& c : candidates) {
        if (!c.is_concrete())
          throw Error(ErrorKind::config_error, "rule proposer emitted a non-concrete rule");
      }
      candidates.insert(candidates.end(), model.rules.begin(), model.rules.end());
      ProofSet ps = config.prover == ProverKind::forward
                        ? forward_chain(ex.assumptions, ex.goal, candidates, config.depth_limit, opts)
                        : backward_chain(ex.assumptions, ex.goal, candidates, config.depth_limit, opts);
      ExampleEncoding enc;
      enc.provable = ex.provable;
      if (ps.success) {
        proved.fetch_add(1);
        try {
          std::set<std::vector<std::string>> seen_paths;
          for (const Sentence& gi : ps.goal_instances) {
            for (auto& path : enumerate_paths(ps, gi, config.path_cap)) {
              std::vector<std::string> key;
              for (const Rule& r : path) key.push_back(r.str());
              if (seen_paths.insert(key).second) enc.paths.push_back(std::move(path));
              if (enc.paths.size() > config.path_cap)
                throw Error(ErrorKind::path_explosion, "combined path cap exceeded");
            }
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::path_explosion) throw;
          fallbacks.fetch_add(1);
          FallbackStructure fb;
          fb.assumptions = ps.assumptions;
          fb.goal_instance = ps.goal_instances.front();
          for (const auto& [s, alts] : ps.alternatives) fb.alternatives.emplace_back(s, alts);
          std::sort(fb.alternatives.begin(), fb.alternatives.end(),
                    [](const auto& a, const auto& b) { return a.first < b.first; });
          enc.paths.clear();
          enc.fallback = std::move(fb);
        }
      }
      used[i] = ps.all_concrete_rules();
      encodings[i] = std::move(enc);
    });

    for (const auto& chunk : used) {
      for (const Rule& cr : chunk) {
        Rule c = canonicalize(cr);
        if (gamma_seen.insert(c.str()).second) gamma.push_back(std::move(c));
      }
    }
    std::sort(gamma.begin(), gamma.end());

    ClosureResult closure = abstraction_closure(gamma, config);
    PruneResult pruned = prune_rules(closure.rules, encodings, config);

    EpochStats stats;
    stats.epoch = epoch;
    stats.gamma_size = gamma.size();
    stats.gamma_prime_size = closure.rules.size();
    stats.model_size = pruned.model.rules.size();
    stats.sat_cost = pruned.cost;
    stats.solver_certified = pruned.certified;
    stats.proved_examples = proved.load();
    stats.path_fallbacks = fallbacks.load();
    bool converged = epoch > 1 && pruned.model == model;
    stats.converged = converged;
    model = std::move(pruned.model);
    if (logger) logger(stats, model);
    if (converged && config.stop_at_fixpoint) break;
  }
  return model;
}

}  // namespace metaqnl
