#pragma once

// Test-time soft matching: when a rule does not apply rigidly, anti-unify
// the assumptions with its premises to find an applicable generalization,
// score it by how many of the rule's words survived, and apply it rigidly.
// Rigid applicability is the score-1 special case.

#include "metaqnl/induce.hpp"
#include "metaqnl/unify.hpp"

namespace metaqnl {

struct SoftMatch {
  Rule concrete_rule;  // premises are exactly the matched assumptions
  Rational score;      // in [0, 1]; 1 iff the relaxation is the identity
  Rule relaxed_rule;   // the generalization that was applied
};

// score = non-variable premise tokens preserved in the relaxation, over the
// rule's total non-variable premise tokens; clamped below 1 for any
// non-identity relaxation.
inline Rational match_score(const Rule& original_rule, const std::vector<Sentence>&,
                            const Rule& relaxed_rule) {
  auto nonvar = [](const std::vector<Sentence>& premises) {
    std::int64_t n = 0;
    for (const Sentence& p : premises)
      for (Token t : p.tokens())
        if (!t.is_variable()) ++n;
    return n;
  };
  std::int64_t total = nonvar(original_rule.premises);
  if (total == 0) return Rational(1);
  std::int64_t preserved = nonvar(relaxed_rule.premises);
  if (preserved > total) preserved = total;
  Rational s(preserved, total);
  if (s == Rational(1) && !equal_modulo(original_rule, relaxed_rule))
    s = Rational(2 * total - 1, 2 * total);
  return s;
}

namespace detail {

inline std::vector<Token> sentences_stream(const std::vector<Sentence>& sentences) {
  std::vector<Token> out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto& toks = sentences[i].tokens();
    out.insert(out.end(), toks.begin(), toks.end());
    if (i + 1 < sentences.size()) out.push_back(stream_separator());
  }
  return out;
}

}  // namespace detail

// Soft matches of one rule against a full assumption set (Def-9 shape: the
// produced concrete rules have exactly the assumptions as premises). Results
// are sorted by descending score; per concrete result only the best-scoring
// relaxation is kept.
inline std::vector<SoftMatch> soft_match(const Rule& rule, const std::vector<Sentence>& assumptions,
                                         const RuleFilter* extra_filter = nullptr) {
  std::vector<SoftMatch> out;
  if (rule.premises.size() != assumptions.size() || assumptions.empty()) return out;
  if (rule.premises.size() > detail::kMaxPremises)
    throw Error(ErrorKind::invalid_rule, "premise count exceeds cap");
  for (const Sentence& a : assumptions)
    if (!a.is_concrete())
      throw Error(ErrorKind::data_error, "assumptions must be concrete: " + a.str());

  std::map<std::string, std::size_t> best;  // concrete rule -> index in out
  std::vector<std::size_t> perm(assumptions.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::vector<Token> premise_stream = detail::sentences_stream(rule.premises);

  do {
    std::vector<Sentence> picked;
    picked.reserve(perm.size());
    for (std::size_t idx : perm) picked.push_back(assumptions[idx]);
    std::vector<Token> assumption_stream = detail::sentences_stream(picked);
    for (const AntiUnifier& au : anti_unify_token_streams(premise_stream, assumption_stream)) {
      // Split the generalization back into premises.
      std::vector<Sentence> gen_premises;
      {
        std::vector<Token> current;
        bool bad = false;
        for (Token t : au.generalization.tokens()) {
          if (t == detail::stream_separator()) {
            if (current.empty()) {
              bad = true;
              break;
            }
            gen_premises.emplace_back(std::move(current));
            current.clear();
          } else {
            current.push_back(t);
          }
        }
        if (bad || current.empty()) continue;
        gen_premises.emplace_back(std::move(current));
        if (gen_premises.size() != rule.premises.size()) continue;
      }
      // Rebuild the conclusion: a rule variable covered 1:1 by a
      // generalization variable is rewritten to it; anything else survives
      // as-is and the validity filter decides.
      Substitution conclusion_rewrite;
      for (const auto& [g, img] : au.sigma1.bindings()) {
        if (img.length() == 1 && img[0].is_variable())
          conclusion_rewrite.bind(img[0], Sentence({g}));
      }
      Sentence relaxed_conclusion = conclusion_rewrite.apply(rule.conclusion);
      Rule relaxed(gen_premises, relaxed_conclusion);
      auto kept = validity_filter(relaxed);
      if (kept && extra_filter) kept = (*extra_filter)(*kept);
      if (!kept) continue;
      // The kept rule may be rewritten (merged variables); apply the
      // assumption-side witnesses to the raw relaxation instead.
      Sentence concrete_conclusion = au.sigma2.apply(relaxed_conclusion);
      if (!concrete_conclusion.is_concrete()) continue;
      Rule concrete(assumptions, concrete_conclusion);
      if (!concrete.is_concrete()) continue;

      Rule reported = equal_modulo(*kept, rule) ? rule : *kept;
      Rational score = match_score(rule, assumptions, relaxed);
      SoftMatch sm{canonicalize(concrete), score, reported};

      std::string key = sm.concrete_rule.str();
      auto it = best.find(key);
      if (it == best.end()) {
        best.emplace(key, out.size());
        out.push_back(std::move(sm));
      } else {
        SoftMatch& old = out[it->second];
        bool better = sm.score > old.score ||
                      (sm.score == old.score &&
                       sm.relaxed_rule.str().size() > old.relaxed_rule.str().size());
        if (better) old = std::move(sm);
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::stable_sort(out.begin(), out.end(), [](const SoftMatch& a, const SoftMatch& b) {
    if (a.score != b.score) return b.score < a.score;
    return a.concrete_rule.str() < b.concrete_rule.str();
  });
  return out;
}

// All soft matches of a model against the assumptions, globally ranked.
inline std::vector<SoftMatch> soft_match_model(const Model& model,
                                               const std::vector<Sentence>& assumptions) {
  std::vector<SoftMatch> out;
  for (const Rule& r : model.rules) {
    for (SoftMatch& m : soft_match(r, assumptions)) out.push_back(std::move(m));
  }
  std::stable_sort(out.begin(), out.end(), [](const SoftMatch& a, const SoftMatch& b) {
    if (a.score != b.score) return b.score < a.score;
    return a.concrete_rule.str() < b.concrete_rule.str();
  });
  return out;
}

struct SoftProveConfig {
  std::size_t depth_limit = 5;
  ProverKind prover = ProverKind::forward;
};

struct SoftProveResult {
  Sentence prediction;
  Rational score;
};

// Rigid proving first (conservativity: where a rigid proof exists the rigid
// prediction is returned at score 1); otherwise ranked single-step soft
// matches are applied until one instantiates the goal.
inline SoftProveResult soft_prove(const std::vector<Sentence>& assumptions, const Sentence& goal,
                                  const Model& model, const SoftProveConfig& config = {}) {
  ProverOptions opts;
  opts.depth_limit = config.depth_limit;
  opts.find_all = false;
  ProofSet ps = config.prover == ProverKind::forward
                    ? forward_chain(assumptions, goal, model.rules, config.depth_limit, opts)
                    : backward_chain(assumptions, goal, model.rules, config.depth_limit, opts);
  if (ps.success) return SoftProveResult{ps.goal_instances.front(), Rational(1)};
  for (const SoftMatch& m : soft_match_model(model, assumptions)) {
    if (is_instance(m.concrete_rule.conclusion, goal))
      return SoftProveResult{m.concrete_rule.conclusion, m.score};
  }
  throw Error(ErrorKind::no_prediction, "nothing derives the goal: " + goal.str());
}

}  // namespace metaqnl
