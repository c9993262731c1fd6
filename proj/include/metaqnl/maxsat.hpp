#pragma once

// Weighted partial MAX-SAT: instance construction, an exact branch-and-bound
// solver for desk-scale instances, and DIMACS WCNF interchange for external
// solvers. Weights are exact rationals; WCNF export scales them by the least
// power of ten that makes every weight integral.

#include <set>
#include <sstream>

#include "metaqnl/core.hpp"
#include "metaqnl/rational.hpp"

namespace metaqnl {

enum class VarRole : std::uint8_t { abstract_rule, concrete_rule, aux };

class MaxSatInstance {
 public:
  int add_variable(VarRole role) {
    roles_.push_back(role);
    return static_cast<int>(roles_.size());
  }

  void add_hard(std::vector<int> clause) {
    check_clause(clause);
    hard_.push_back(std::move(clause));
  }

  void add_soft(std::vector<int> clause, Rational weight) {
    check_clause(clause);
    if (!(Rational(0) < weight))
      throw Error(ErrorKind::solver_error, "soft clause weight must be positive");
    soft_.emplace_back(std::move(clause), weight);
  }

  std::size_t num_vars() const { return roles_.size(); }
  VarRole role(int var) const { return roles_.at(static_cast<std::size_t>(var) - 1); }
  const std::vector<std::vector<int>>& hard() const { return hard_; }
  const std::vector<std::pair<std::vector<int>, Rational>>& soft() const { return soft_; }

 private:
  void check_clause(const std::vector<int>& clause) const {
    for (int lit : clause) {
      int v = lit > 0 ? lit : -lit;
      if (v == 0 || static_cast<std::size_t>(v) > roles_.size())
        throw Error(ErrorKind::solver_error, "literal out of range");
    }
  }
  std::vector<VarRole> roles_;
  std::vector<std::vector<int>> hard_;
  std::vector<std::pair<std::vector<int>, Rational>> soft_;
};

struct Assignment {
  std::vector<std::uint8_t> values;  // 1-based; values[v] in {0,1}
  Rational cost;

  bool value(int var) const { return values.at(static_cast<std::size_t>(var)) != 0; }
};

struct SolveBudget {
  std::size_t max_nodes = 20000000;
  // Deterministic stand-in for a wall-clock budget.
  static SolveBudget from_seconds(double seconds) {
    SolveBudget b;
    double nodes = seconds * 400000.0;
    b.max_nodes = nodes < 1000 ? 1000 : static_cast<std::size_t>(nodes);
    return b;
  }
};

struct SolveResult {
  Assignment assignment;
  bool certified = true;   // search space exhausted: provably optimal
  bool timed_out = false;  // node budget hit; assignment is best-found
};

inline Rational evaluate_cost(const MaxSatInstance& inst, const std::vector<std::uint8_t>& values) {
  Rational cost;
  for (const auto& [clause, weight] : inst.soft()) {
    bool sat = false;
    for (int lit : clause) {
      int v = lit > 0 ? lit : -lit;
      bool val = values[static_cast<std::size_t>(v)] != 0;
      if ((lit > 0) == val) {
        sat = true;
        break;
      }
    }
    if (!sat) cost += weight;
  }
  return cost;
}

inline bool hard_satisfied(const MaxSatInstance& inst, const std::vector<std::uint8_t>& values) {
  for (const auto& clause : inst.hard()) {
    bool sat = false;
    for (int lit : clause) {
      int v = lit > 0 ? lit : -lit;
      bool val = values[static_cast<std::size_t>(v)] != 0;
      if ((lit > 0) == val) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

namespace detail {

struct SolverClause {
  std::vector<int> lits;
  bool is_hard;
  Rational weight;
  int n_sat = 0;
  int n_false = 0;
  bool falsified() const { return n_false == static_cast<int>(lits.size()); }
  bool satisfied() const { return n_sat > 0; }
};

class BnBSolver {
 public:
  // hint: 0/1 preferred phases per variable (index 0 unused), 2 for unknown.
  BnBSolver(const MaxSatInstance& inst, SolveBudget budget,
            const std::vector<std::uint8_t>* hint = nullptr)
      : inst_(inst), budget_(budget), hint_(hint), n_(inst.num_vars()) {
    auto add_clause = [&](const std::vector<int>& c, bool is_hard, Rational w) {
      std::vector<int> lits = dedupe(c);
      for (int lit : lits) {
        if (std::find(lits.begin(), lits.end(), -lit) != lits.end()) return;  // tautology
      }
      clauses_.push_back({std::move(lits), is_hard, w});
    };
    for (const auto& c : inst.hard()) add_clause(c, true, Rational());
    for (const auto& [c, w] : inst.soft()) add_clause(c, false, w);
    occ_.assign(n_ + 1, {});
    for (std::size_t ci = 0; ci < clauses_.size(); ++ci) {
      for (int lit : clauses_[ci].lits) occ_[std::abs(lit)].push_back(ci);
    }
    values_.assign(n_ + 1, kUnassigned);
    // Static branch order: descending occurrence count, then variable id.
    order_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) order_[i] = static_cast<int>(i + 1);
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      return occ_[a].size() > occ_[b].size();
    });
  }

  SolveResult run() {
    if (!propagate_root()) throw Error(ErrorKind::hard_unsat, "hard clauses are unsatisfiable");
    build_incumbent();
    search(0);
    if (!found_ && out_of_budget_)
      throw Error(ErrorKind::solver_error, "budget exhausted before any feasible assignment");
    if (!found_) throw Error(ErrorKind::hard_unsat, "hard clauses are unsatisfiable");
    SolveResult out;
    out.assignment.values = best_values_;
    out.assignment.cost = best_cost_;
    out.certified = !out_of_budget_;
    out.timed_out = out_of_budget_;
    return out;
  }

 private:
  static constexpr std::uint8_t kUnassigned = 2;

  static std::vector<int> dedupe(std::vector<int> c) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
  }

  bool assign(int var, bool val) {
    values_[var] = val ? 1 : 0;
    trail_.push_back(var);
    dirty_.erase(var);
    if (val && inst_.role(var) == VarRole::abstract_rule) ++r_true_;
    bool ok = true;
    for (std::size_t ci : occ_[var]) {
      SolverClause& c = clauses_[ci];
      bool was_open = !c.satisfied() && !c.falsified();
      bool lit_true = false;
      for (int lit : c.lits) {
        if (std::abs(lit) == var) {
          lit_true = (lit > 0) == val;
          break;
        }
      }
      if (lit_true) {
        ++c.n_sat;
      } else {
        ++c.n_false;
        if (c.falsified() && !c.satisfied()) {
          if (c.is_hard)
            ok = false;
          else
            cost_ += c.weight;
        } else if (c.is_hard && !c.satisfied() &&
                   c.n_false == static_cast<int>(c.lits.size()) - 1) {
          units_.push_back(ci);
        }
      }
      // A clause leaving the open state frees its remaining variables.
      if (was_open && (c.satisfied() || c.falsified())) {
        for (int lit : c.lits) {
          int v = std::abs(lit);
          if (values_[v] == kUnassigned) dirty_.insert(v);
        }
      }
    }
    return ok;
  }

  void undo_to(std::size_t mark) {
    while (trail_.size() > mark) {
      int var = trail_.back();
      trail_.pop_back();
      bool val = values_[var] == 1;
      if (val && inst_.role(var) == VarRole::abstract_rule) --r_true_;
      for (std::size_t ci : occ_[var]) {
        SolverClause& c = clauses_[ci];
        bool lit_true = false;
        for (int lit : c.lits) {
          if (std::abs(lit) == var) {
            lit_true = (lit > 0) == val;
            break;
          }
        }
        if (lit_true) {
          --c.n_sat;
        } else {
          if (c.falsified() && !c.satisfied() && !c.is_hard) cost_ -= c.weight;
          --c.n_false;
        }
      }
      values_[var] = kUnassigned;
    }
    units_.clear();
    dirty_.clear();
  }

  // Tries the safe greedy rule on one variable: when all its hard clauses
  // are settled and its open soft clauses agree on its polarity, that
  // polarity weakly dominates (or false when nothing is open).
  bool try_free_rule(int v) {
    if (values_[v] != kUnassigned) return true;
    int soft_polarity = 0;  // 0 none, +1 positive, -1 negative, 2 mixed
    for (std::size_t ci : occ_[v]) {
      const SolverClause& c = clauses_[ci];
      if (c.satisfied() || c.falsified()) continue;
      if (c.is_hard) return true;  // still constrained
      int pol = 0;
      for (int lit : c.lits)
        if (std::abs(lit) == v) pol = lit > 0 ? 1 : -1;
      if (soft_polarity == 0)
        soft_polarity = pol;
      else if (soft_polarity != pol)
        return true;  // mixed polarity: leave for branching
    }
    return assign(v, soft_polarity == 1);
  }

  // Unit propagation on hard clauses plus the free-variable rule, driven by
  // a worklist of variables whose clause neighbourhood changed.
  bool propagate() {
    while (true) {
      while (!units_.empty()) {
        std::size_t ci = units_.back();
        units_.pop_back();
        SolverClause& c = clauses_[ci];
        if (c.satisfied() || c.falsified()) continue;
        if (c.n_false != static_cast<int>(c.lits.size()) - 1) continue;
        for (int lit : c.lits) {
          int v = std::abs(lit);
          if (values_[v] == kUnassigned) {
            if (!assign(v, lit > 0)) return false;
            break;
          }
        }
      }
      if (dirty_.empty() && units_.empty()) return true;
      while (!dirty_.empty()) {
        int v = *dirty_.begin();
        dirty_.erase(dirty_.begin());
        if (!try_free_rule(v)) return false;
        if (!units_.empty()) break;  // prefer units
      }
      if (dirty_.empty() && units_.empty()) return true;
    }
  }

  bool propagate_root() {
    for (std::size_t ci = 0; ci < clauses_.size(); ++ci) {
      SolverClause& c = clauses_[ci];
      if (c.lits.empty()) {
        if (c.is_hard) return false;
        cost_ += c.weight;
        continue;
      }
      if (c.is_hard && c.lits.size() == 1) units_.push_back(ci);
    }
    for (int v = 1; v <= static_cast<int>(n_); ++v) dirty_.insert(v);
    return propagate();
  }

  int pick_branch_var(std::size_t& from) const {
    while (from < order_.size() && values_[order_[from]] != kUnassigned) ++from;
    return from < order_.size() ? order_[from] : 0;
  }

  // One deterministic greedy descent: probe both phases of each remaining
  // variable under propagation and keep the cheaper branch. The resulting
  // full assignment seeds the bound and the branching phase order.
  void build_incumbent() {
    std::size_t root_mark = trail_.size();
    Rational root_cost = cost_;
    int root_r = r_true_;
    std::size_t from = 0;
    bool dead_end = false;
    if (hint_) {
      for (std::size_t v = 1; v <= n_ && v < hint_->size(); ++v) {
        if ((*hint_)[v] > 1 || values_[v] != kUnassigned) continue;
        std::size_t mark = trail_.size();
        Rational saved_cost = cost_;
        int saved_r = r_true_;
        if (!assign(static_cast<int>(v), (*hint_)[v] == 1) || !propagate()) {
          undo_to(mark);
          cost_ = saved_cost;
          r_true_ = saved_r;
        }
      }
    }
    while (!dead_end) {
      int var = pick_branch_var(from);
      if (var == 0) break;
      int best_phase = -1;
      Rational best_probe;
      for (int phase = 0; phase < 2; ++phase) {
        std::size_t mark = trail_.size();
        Rational saved_cost = cost_;
        int saved_r = r_true_;
        bool ok = assign(var, phase == 1) && propagate();
        Rational probe_cost = cost_;
        undo_to(mark);
        cost_ = saved_cost;
        r_true_ = saved_r;
        if (!ok) continue;
        if (best_phase < 0 || probe_cost < best_probe) {
          best_phase = phase;
          best_probe = probe_cost;
        }
      }
      if (best_phase < 0) {
        dead_end = true;
        break;
      }
      if (!assign(var, best_phase == 1) || !propagate()) {
        dead_end = true;
        break;
      }
    }
    if (!dead_end && pick_branch_var(from) == 0 && candidate_beats_best()) {
      found_ = true;
      best_values_ = values_;
      best_cost_ = cost_;
      best_r_true_ = r_true_;
    }
    incumbent_ = values_;
    undo_to(root_mark);
    cost_ = root_cost;
    r_true_ = root_r;
  }

  // (cost, #abstract-rule vars true, lexicographically smallest true set)
  bool candidate_beats_best() {
    if (!found_) return true;
    if (cost_ != best_cost_) return cost_ < best_cost_;
    if (r_true_ != best_r_true_) return r_true_ < best_r_true_;
    for (std::size_t v = 1; v <= n_; ++v) {
      bool a = values_[v] == 1;
      bool b = best_values_[v] == 1;
      if (a != b) return a;  // true at the smaller id wins
    }
    return false;
  }

  bool prunable() const {
    if (!found_) return false;
    if (best_cost_ < cost_) return true;
    if (cost_ == best_cost_ && best_r_true_ < r_true_) return true;
    return false;
  }

  void search(std::size_t from) {
    if (out_of_budget_) return;
    if (++nodes_ > budget_.max_nodes) {
      out_of_budget_ = true;
      return;
    }
    if (prunable()) return;
    int var = pick_branch_var(from);
    if (var == 0) {
      if (candidate_beats_best()) {
        found_ = true;
        best_values_ = values_;
        best_cost_ = cost_;
        best_r_true_ = r_true_;
      }
      return;
    }
    bool first = incumbent_.empty() ? false : incumbent_[var] == 1;
    for (bool val : {first, !first}) {
      std::size_t mark = trail_.size();
      Rational saved_cost = cost_;
      int saved_r = r_true_;
      if (assign(var, val) && propagate()) search(from);
      undo_to(mark);
      cost_ = saved_cost;
      r_true_ = saved_r;
      if (out_of_budget_) return;
    }
  }

  const MaxSatInstance& inst_;
  SolveBudget budget_;
  const std::vector<std::uint8_t>* hint_;
  std::size_t n_;
  std::vector<SolverClause> clauses_;
  std::vector<std::vector<std::size_t>> occ_;
  std::vector<std::uint8_t> values_;
  std::vector<int> order_;
  std::vector<int> trail_;
  std::vector<std::size_t> units_;
  std::set<int> dirty_;
  Rational cost_;
  int r_true_ = 0;
  std::size_t nodes_ = 0;
  bool out_of_budget_ = false;

  bool found_ = false;
  std::vector<std::uint8_t> best_values_;
  std::vector<std::uint8_t> incumbent_;
  Rational best_cost_;
  int best_r_true_ = 0;
};

}  // namespace detail

// Exact for instances the search exhausts within budget (always the case at
// <= 30 variables); otherwise best-found, flagged. An optional phase hint
// seeds the incumbent.
inline SolveResult solve(const MaxSatInstance& inst, SolveBudget budget = {},
                         const std::vector<std::uint8_t>* hint = nullptr) {
  if (inst.num_vars() == 0) {
    SolveResult out;
    out.assignment.values.assign(1, 0);
    for (const auto& clause : inst.hard())
      if (clause.empty()) throw Error(ErrorKind::hard_unsat, "empty hard clause");
    for (const auto& [clause, w] : inst.soft())
      if (clause.empty()) out.assignment.cost += w;
    return out;
  }

  // Independent connected components solve independently.
  std::vector<int> comp(inst.num_vars() + 1, -1);
  std::vector<std::vector<int>> comp_vars;
  {
    std::vector<std::vector<int>> adj(inst.num_vars() + 1);
    auto link = [&](const std::vector<int>& clause) {
      for (std::size_t i = 1; i < clause.size(); ++i) {
        int a = std::abs(clause[0]), b = std::abs(clause[i]);
        adj[a].push_back(b);
        adj[b].push_back(a);
      }
    };
    for (const auto& c : inst.hard()) link(c);
    for (const auto& [c, w] : inst.soft()) link(c);
    for (int v = 1; v <= static_cast<int>(inst.num_vars()); ++v) {
      if (comp[v] != -1) continue;
      int id = static_cast<int>(comp_vars.size());
      comp_vars.emplace_back();
      std::vector<int> stack{v};
      comp[v] = id;
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        comp_vars[id].push_back(u);
        for (int w : adj[u]) {
          if (comp[w] == -1) {
            comp[w] = id;
            stack.push_back(w);
          }
        }
      }
      std::sort(comp_vars[id].begin(), comp_vars[id].end());
    }
  }

  SolveResult out;
  out.assignment.values.assign(inst.num_vars() + 1, 0);
  if (comp_vars.size() == 1) {
    detail::BnBSolver solver(inst, budget, hint);
    return solver.run();
  }

  for (const auto& vars : comp_vars) {
    MaxSatInstance sub;
    std::unordered_map<int, int> to_sub;
    for (int v : vars) to_sub[v] = sub.add_variable(inst.role(v));
    auto translate = [&](const std::vector<int>& clause) {
      std::vector<int> c;
      c.reserve(clause.size());
      for (int lit : clause) {
        int v = std::abs(lit);
        c.push_back(lit > 0 ? to_sub[v] : -to_sub[v]);
      }
      return c;
    };
    for (const auto& c : inst.hard())
      if (!c.empty() && comp[std::abs(c[0])] == comp[vars[0]]) sub.add_hard(translate(c));
    for (const auto& [c, w] : inst.soft())
      if (!c.empty() && comp[std::abs(c[0])] == comp[vars[0]]) sub.add_soft(translate(c), w);
    std::vector<std::uint8_t> sub_hint;
    if (hint) {
      sub_hint.assign(vars.size() + 1, 2);
      for (int v : vars)
        if (static_cast<std::size_t>(v) < hint->size())
          sub_hint[static_cast<std::size_t>(to_sub[v])] = (*hint)[static_cast<std::size_t>(v)];
    }
    detail::BnBSolver solver(sub, budget, hint ? &sub_hint : nullptr);
    SolveResult sub_result = solver.run();
    for (int v : vars)
      out.assignment.values[static_cast<std::size_t>(v)] =
          sub_result.assignment.values[static_cast<std::size_t>(to_sub[v])];
    out.assignment.cost += sub_result.assignment.cost;
    out.certified = out.certified && sub_result.certified;
    out.timed_out = out.timed_out || sub_result.timed_out;
  }
  for (const auto& c : inst.hard())
    if (c.empty()) throw Error(ErrorKind::hard_unsat, "empty hard clause");
  for (const auto& [c, w] : inst.soft())
    if (c.empty()) out.assignment.cost += w;
  return out;
}

// ---------------------------------------------------------------------------
// DIMACS WCNF interchange.

inline std::int64_t wcnf_scale(const MaxSatInstance& inst) {
  std::int64_t scale = 1;
  for (const auto& [c, w] : inst.soft()) {
    while (w.den() != 0 && (w.num() * scale) % w.den() != 0) {
      scale *= 10;
      if (scale > 1000000000000LL)
        throw Error(ErrorKind::solver_error, "weight is not a decimal rational");
    }
  }
  return scale;
}

inline std::string export_wcnf(const MaxSatInstance& inst) {
  std::int64_t scale = wcnf_scale(inst);
  std::int64_t total = 0;
  for (const auto& [c, w] : inst.soft()) total += w.num() * scale / w.den();
  std::int64_t top = total + 1;
  std::ostringstream os;
  os << "c weights scaled by " << scale << "\n";
  os << "p wcnf " << inst.num_vars() << " " << (inst.hard().size() + inst.soft().size()) << " "
     << top << "\n";
  for (const auto& c : inst.hard()) {
    os << top;
    for (int lit : c) os << " " << lit;
    os << " 0\n";
  }
  for (const auto& [c, w] : inst.soft()) {
    os << (w.num() * scale / w.den());
    for (int lit : c) os << " " << lit;
    os << " 0\n";
  }
  return os.str();
}

// Parses a MAX-SAT solver's output ("v" value lines, either integer literals
// or a 0/1 string) and recomputes the cost from the instance.
inline Assignment import_solution(const MaxSatInstance& inst, const std::string& text) {
  Assignment out;
  out.values.assign(inst.num_vars() + 1, 0);
  bool have_values = false;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] != 'v') continue;
    std::istringstream ls(line.substr(1));
    std::string tok;
    while (ls >> tok) {
      bool all_binary = !tok.empty() && tok.find_first_not_of("01") == std::string::npos;
      if (all_binary && tok.size() == inst.num_vars() && tok.size() >= 2) {
        // new-style bit string: position i is variable i+1
        for (std::size_t i = 0; i < tok.size(); ++i)
          out.values[i + 1] = tok[i] == '1' ? 1 : 0;
        have_values = true;
        continue;
      }
      try {
        int lit = std::stoi(tok);
        if (lit == 0) continue;
        std::size_t v = static_cast<std::size_t>(lit > 0 ? lit : -lit);
        if (v > inst.num_vars())
          throw Error(ErrorKind::parse_error, "solution literal out of range: " + tok);
        out.values[v] = lit > 0 ? 1 : 0;
        have_values = true;
      } catch (const std::invalid_argument&) {
        throw Error(ErrorKind::parse_error, "malformed solution token: " + tok);
      }
    }
  }
  if (!have_values) throw Error(ErrorKind::parse_error, "no v-line in solver output");
  out.cost = evaluate_cost(inst, out.values);
  return out;
}

}  // namespace metaqnl
