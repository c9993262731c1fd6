#pragma once

// Task adapters: example encoders, rule proposers, and evaluation for the
// three experiment families (sequence translation, entailment with an open
// world, character-level morphology).

#include <json.hpp>

#include "metaqnl/induce.hpp"
#include "metaqnl/softmatch.hpp"

namespace metaqnl::tasks {

using Json = nlohmann::json;

enum class TaskKind { seq2seq, entailment, morphology };

// ---------------------------------------------------------------------------
// Raw records.

struct Seq2SeqPair {
  std::string source;  // space-separated tokens
  std::string target;
};

enum class EntailmentLabel { proved, disproved, unknown };

struct EntailmentRecord {
  std::vector<std::string> context;  // raw sentences, no polarity prefix
  std::string question;
  EntailmentLabel label = EntailmentLabel::unknown;
  int depth = -1;                 // ground-truth proof depth; -1 means N/A
  std::vector<Rule> proof_steps;  // concrete, already polarity-prefixed
};

struct MorphRecord {
  std::string surface;
  std::string lemma;
  std::vector<std::string> tags;
};

struct Dataset {
  std::string name;
  TaskKind kind = TaskKind::seq2seq;

  std::vector<TrainingExample> train;  // encoded training examples

  std::vector<Seq2SeqPair> train_pairs, validation_pairs, test_pairs;
  std::vector<EntailmentRecord> entail_train, entail_test;
  std::vector<MorphRecord> morph_train, morph_test;
  std::vector<std::string> tag_inventory;
  std::vector<std::string> lemma_inventory;

  // Index of the entailment/morphology record each encoded example came
  // from, used by the per-record proposers.
  std::vector<std::size_t> example_record;
};

// ---------------------------------------------------------------------------
// Helpers.

inline bool is_gapped_subsequence(const std::vector<Token>& a, const std::vector<Token>& b) {
  std::size_t i = 0;
  for (std::size_t j = 0; j < b.size() && i < a.size(); ++j)
    if (b[j] == a[i]) ++i;
  return i == a.size();
}

inline Token maps_to_symbol() { return Token::special("MAPS_TO"); }

inline std::pair<std::vector<Token>, std::vector<Token>> split_mapping(const Sentence& s) {
  std::vector<Token> src, tgt;
  bool after = false;
  for (Token t : s.tokens()) {
    if (t == maps_to_symbol()) {
      after = true;
      continue;
    }
    (after ? tgt : src).push_back(t);
  }
  return {std::move(src), std::move(tgt)};
}

inline Sentence spell_out(const std::string& word, const std::string& prefix_special = "") {
  std::vector<Token> toks;
  if (!prefix_special.empty()) toks.push_back(Token::special(prefix_special));
  for (char c : word) toks.push_back(Token::word(std::string(1, c)));
  if (toks.empty()) throw Error(ErrorKind::malformed_example, "empty word");
  return Sentence(std::move(toks));
}

// ---------------------------------------------------------------------------
// Encoders.

enum class EncodeMode { train, test };

// Train: provable example with empty assumptions and the concrete goal
// "src $MAPS_TO$ tgt". Test: the goal carries a placeholder variable to be
// filled by the prover.
inline TrainingExample encode_seq2seq(const Seq2SeqPair& pair, EncodeMode mode) {
  if (pair.source.find_first_not_of(" \t") == std::string::npos ||
      pair.target.find_first_not_of(" \t") == std::string::npos)
    throw Error(ErrorKind::malformed_example, "sequence pair with an empty side");
  TrainingExample ex;
  ex.provable = true;
  if (mode == EncodeMode::train) {
    ex.goal = parse_sentence(pair.source + " $MAPS_TO$ " + pair.target);
  } else {
    ex.goal = parse_sentence(pair.source + " $MAPS_TO$ [Y]");
  }
  return ex;
}

// Open-world polarity construction: a proved question contributes its $TRUE$
// form as provable and its $FALSE$ form as unprovable; disproved is the
// mirror image; unknown contributes both forms as unprovable.
inline std::vector<TrainingExample> encode_entailment(const EntailmentRecord& record) {
  std::vector<Sentence> assumptions;
  for (const std::string& c : record.context) assumptions.push_back(parse_sentence("$TRUE$ " + c));
  Sentence pos = parse_sentence("$TRUE$ " + record.question);
  Sentence neg = parse_sentence("$FALSE$ " + record.question);
  auto make = [&](const Sentence& goal, bool provable) {
    TrainingExample ex;
    ex.assumptions = assumptions;
    ex.goal = goal;
    ex.provable = provable;
    return ex;
  };
  switch (record.label) {
    case EntailmentLabel::proved:
      return {make(pos, true), make(neg, false)};
    case EntailmentLabel::disproved:
      return {make(neg, true), make(pos, false)};
    case EntailmentLabel::unknown:
      return {make(pos, false), make(neg, false)};
  }
  throw Error(ErrorKind::malformed_example, "unknown entailment label");
}

// One provable example per goal: the lemma spelled out and one per tag.
// Unprovable examples pair the same assumptions with other tags from the
// inventory and other observed lemmas, deterministically sampled by record
// hash up to a cap.
inline std::vector<TrainingExample> encode_morphology(const MorphRecord& record,
                                                      const std::vector<std::string>& tag_inventory,
                                                      const std::vector<std::string>& lemma_inventory,
                                                      std::size_t negative_cap, std::uint64_t seed) {
  if (record.surface.empty() || record.lemma.empty())
    throw Error(ErrorKind::malformed_example, "morphology record with empty surface or lemma");
  std::vector<TrainingExample> out;
  Sentence assumption = spell_out(record.surface);
  auto make = [&](const Sentence& goal, bool provable) {
    TrainingExample ex;
    ex.assumptions = {assumption};
    ex.goal = goal;
    ex.provable = provable;
    return ex;
  };
  out.push_back(make(spell_out(record.lemma, "LEMMA"), true));
  for (const std::string& tag : record.tags)
    out.push_back(make(parse_sentence("$TAG$ " + tag), true));

  std::vector<Sentence> negatives;
  for (const std::string& tag : tag_inventory) {
    if (std::find(record.tags.begin(), record.tags.end(), tag) != record.tags.end()) continue;
    negatives.push_back(parse_sentence("$TAG$ " + tag));
  }
  for (const std::string& lemma : lemma_inventory) {
    if (lemma == record.lemma) continue;
    negatives.push_back(spell_out(lemma, "LEMMA"));
  }
  // Deterministic sample keyed by the record.
  std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ull;
  for (char c : record.surface) h = (h ^ static_cast<std::uint64_t>(c)) * 0x100000001b3ull;
  std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    std::uint64_t k = h;
    for (char c : negatives[i].str()) k = (k ^ static_cast<std::uint64_t>(c)) * 0x100000001b3ull;
    keyed.emplace_back(k, i);
  }
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t i = 0; i < keyed.size() && i < negative_cap; ++i)
    out.push_back(make(negatives[keyed[i].second], false));
  return out;
}

// ---------------------------------------------------------------------------
// Proposers.

// All concrete rules with up to two premises built from training goals,
// filtered so every premise maps a gapped subsequence of the conclusion's
// source to a gapped subsequence of its target. The set is global; the
// example index is ignored.
class Seq2SeqProposer : public RuleProposer {
 public:
  explicit Seq2SeqProposer(const std::vector<TrainingExample>& data) {
    std::vector<Sentence> goals;
    std::set<std::string> seen;
    for (const auto& ex : data) {
      if (!ex.provable) continue;
      if (seen.insert(ex.goal.str()).second) goals.push_back(ex.goal);
    }
    for (const Sentence& c : goals) {
      rules_.push_back(canonicalize(Rule({}, c)));
      auto [cs, ct] = split_mapping(c);
      std::vector<const Sentence*> compatible;
      for (const Sentence& p : goals) {
        if (p == c) continue;
        auto [ps, pt] = split_mapping(p);
        if (is_gapped_subsequence(ps, cs) && is_gapped_subsequence(pt, ct))
          compatible.push_back(&p);
      }
      for (std::size_t i = 0; i < compatible.size(); ++i) {
        rules_.push_back(canonicalize(Rule({*compatible[i]}, c)));
        for (std::size_t j = i + 1; j < compatible.size(); ++j)
          rules_.push_back(canonicalize(Rule({*compatible[i], *compatible[j]}, c)));
      }
    }
    std::sort(rules_.begin(), rules_.end());
    rules_.erase(std::unique(rules_.begin(), rules_.end()), rules_.end());
  }

  std::vector<Rule> propose(const std::vector<TrainingExample>&, std::size_t) override {
    return rules_;
  }

  const std::vector<Rule>& rules() const { return rules_; }

 private:
  std::vector<Rule> rules_;
};

// Ground-truth proof steps of the record each example came from.
class EntailmentProposer : public RuleProposer {
 public:
  EntailmentProposer(const Dataset& dataset) : dataset_(&dataset) {}

  std::vector<Rule> propose(const std::vector<TrainingExample>&, std::size_t i) override {
    const auto& records = dataset_->entail_train;
    std::size_t r = dataset_->example_record.at(i);
    std::vector<Rule> out;
    for (const Rule& step : records.at(r).proof_steps) out.push_back(canonicalize(step));
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  const Dataset* dataset_;
};

// The single-step rule proving this example's own goal from its assumptions.
class MorphologyProposer : public RuleProposer {
 public:
  std::vector<Rule> propose(const std::vector<TrainingExample>& data, std::size_t i) override {
    const TrainingExample& ex = data.at(i);
    return {canonicalize(Rule(ex.assumptions, ex.goal))};
  }
};

// ---------------------------------------------------------------------------
// Evaluation.

struct EvalOptions {
  bool soft = false;
  std::size_t depth_limit = 6;
  ProverKind prover = ProverKind::backward;
  std::size_t jobs = 1;
  bool check_proofs = true;  // entailment: verify every emitted proof
};

struct EvalResult {
  Json metrics;
  Json per_example = Json::array();
};

namespace detail_eval {

inline double f1_score(const std::set<std::string>& predicted, const std::set<std::string>& gold) {
  if (predicted.empty() && gold.empty()) return 1.0;
  if (predicted.empty() || gold.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& p : predicted)
    if (gold.count(p)) ++hits;
  if (hits == 0) return 0.0;
  double precision = static_cast<double>(hits) / static_cast<double>(predicted.size());
  double recall = static_cast<double>(hits) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace detail_eval

// Sequence translation: an example counts as correct when the model proves
// the gold mapping. The flat learned rules can derive several instances for
// one source, so correctness is judged on the gold instance rather than an
// arbitrary enumeration order.
inline EvalResult evaluate_seq2seq(const Model& model, const std::vector<Seq2SeqPair>& pairs,
                                   const EvalOptions& opts) {
  EvalResult out;
  std::vector<Json> rows(pairs.size());
  std::atomic<std::size_t> correct{0};
  ProverOptions popts;
  popts.depth_limit = opts.depth_limit;
  popts.find_all = false;
  detail::parallel_for(pairs.size(), opts.jobs, [&](std::size_t i) {
    const Seq2SeqPair& pair = pairs[i];
    Sentence gold_goal = encode_seq2seq(pair, EncodeMode::train).goal;
    ProofSet ps = backward_chain({}, gold_goal, model.rules, opts.depth_limit, popts);
    bool ok = ps.success;
    Json row;
    row["source"] = pair.source;
    row["gold"] = pair.target;
    row["correct"] = ok;
    if (ok) {
      row["predicted"] = pair.target;
    } else {
      Sentence free_goal = encode_seq2seq(pair, EncodeMode::test).goal;
      ProofSet free_ps = backward_chain({}, free_goal, model.rules, opts.depth_limit, popts);
      if (free_ps.success) {
        auto [src, tgt] = split_mapping(free_ps.goal_instances.front());
        std::string predicted;
        for (Token t : tgt) {
          if (!predicted.empty()) predicted += ' ';
          predicted += t.text();
        }
        row["predicted"] = predicted;
      } else {
        row["predicted"] = nullptr;
      }
    }
    if (ok) correct.fetch_add(1);
    rows[i] = std::move(row);
  });
  for (auto& r : rows) out.per_example.push_back(std::move(r));
  out.metrics["n"] = pairs.size();
  out.metrics["correct"] = correct.load();
  out.metrics["accuracy"] =
      pairs.empty() ? 0.0 : static_cast<double>(correct.load()) / static_cast<double>(pairs.size());
  return out;
}

// Entailment under the open-world assumption: an example is answered
// "proved" when the $TRUE$ form is derivable, "disproved" when the $FALSE$
// form is, and "unknown" otherwise. Accuracy is reported overall and
// bucketed by the record's ground-truth proof depth.
inline EvalResult evaluate_entailment(const Model& model,
                                      const std::vector<EntailmentRecord>& records,
                                      const EvalOptions& opts) {
  EvalResult out;
  std::vector<Json> rows(records.size());
  std::vector<std::uint8_t> oks(records.size(), 0);
  std::atomic<std::size_t> proof_failures{0};
  ProverOptions popts;
  popts.depth_limit = opts.depth_limit;
  popts.find_all = false;
  detail::parallel_for(records.size(), opts.jobs, [&](std::size_t i) {
    const EntailmentRecord& rec = records[i];
    std::vector<Sentence> assumptions;
    for (const std::string& c : rec.context) assumptions.push_back(parse_sentence("$TRUE$ " + c));
    Sentence pos = parse_sentence("$TRUE$ " + rec.question);
    Sentence neg = parse_sentence("$FALSE$ " + rec.question);
    auto prove = [&](const Sentence& goal) {
      return opts.prover == ProverKind::forward
                 ? forward_chain(assumptions, goal, model.rules, opts.depth_limit, popts)
                 : backward_chain(assumptions, goal, model.rules, opts.depth_limit, popts);
    };
    ProofSet pos_ps = prove(pos);
    ProofSet neg_ps = prove(neg);
    std::string answer = pos_ps.success ? "proved" : (neg_ps.success ? "disproved" : "unknown");
    if (opts.check_proofs) {
      for (ProofSet* ps : {&pos_ps, &neg_ps}) {
        if (!ps->success) continue;
        Proof proof = ps->extract_proof(ps->goal_instances.front());
        if (!check_proof(proof, model.rules, assumptions,
                         ps == &pos_ps ? pos : neg)) {
          proof_failures.fetch_add(1);
        }
      }
    }
    std::string gold = rec.label == EntailmentLabel::proved
                           ? "proved"
                           : rec.label == EntailmentLabel::disproved ? "disproved" : "unknown";
    oks[i] = answer == gold ? 1 : 0;
    Json row;
    row["question"] = rec.question;
    row["gold"] = gold;
    row["predicted"] = answer;
    row["depth"] = rec.depth;
    row["correct"] = oks[i] != 0;
    rows[i] = std::move(row);
  });
  std::map<std::string, std::pair<std::size_t, std::size_t>> by_depth;  // bucket -> (correct, n)
  std::size_t correct = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    correct += oks[i];
    std::string bucket = records[i].depth < 0 ? "N/A" : std::to_string(records[i].depth);
    by_depth[bucket].first += oks[i];
    by_depth[bucket].second += 1;
  }
  for (auto& r : rows) out.per_example.push_back(std::move(r));
  out.metrics["n"] = records.size();
  out.metrics["correct"] = correct;
  out.metrics["accuracy"] = records.empty()
                                ? 0.0
                                : static_cast<double>(correct) / static_cast<double>(records.size());
  Json buckets;
  for (auto& [bucket, cn] : by_depth) {
    buckets[bucket]["n"] = cn.second;
    buckets[bucket]["accuracy"] =
        cn.second == 0 ? 0.0 : static_cast<double>(cn.first) / static_cast<double>(cn.second);
  }
  out.metrics["by_depth"] = buckets;
  out.metrics["proof_check_failures"] = proof_failures.load();
  return out;
}

namespace detail_eval {

inline std::string decode_chars(const Sentence& s, std::size_t skip) {
  std::string out;
  for (std::size_t i = skip; i < s.length(); ++i) out += s[i].text();
  return out;
}

struct MorphPrediction {
  std::optional<std::string> lemma;
  std::set<std::string> tags;
  double min_score = 1.0;
};

inline std::string common_prefix_len_key(const std::string& a, const std::string& b) {
  std::size_t n = 0;
  while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
  return std::to_string(1000000 - n);  // longer prefix sorts first
}

// Rigid derivation of every $LEMMA$/$TAG$ conclusion; the lemma is the
// candidate sharing the longest prefix with the surface form.
inline MorphPrediction rigid_predict(const Model& model, const MorphRecord& rec,
                                     std::size_t depth_limit) {
  MorphPrediction out;
  Sentence assumption = spell_out(rec.surface);
  ProverOptions popts;
  popts.depth_limit = depth_limit;
  popts.find_all = true;
  ProofSet ps = forward_chain({assumption}, parse_sentence("$LEMMA$ [Y]"), model.rules,
                              depth_limit, popts);
  std::vector<std::string> lemmas;
  for (const auto& [s, alts] : ps.alternatives) {
    if (s.length() >= 2 && s[0] == Token::special("LEMMA")) lemmas.push_back(decode_chars(s, 1));
    if (s.length() == 2 && s[0] == Token::special("TAG")) out.tags.insert(std::string(s[1].text()));
  }
  if (!lemmas.empty()) {
    std::sort(lemmas.begin(), lemmas.end(), [&](const std::string& a, const std::string& b) {
      auto ka = common_prefix_len_key(a, rec.surface), kb = common_prefix_len_key(b, rec.surface);
      if (ka != kb) return ka < kb;
      return a < b;
    });
    out.lemma = lemmas.front();
  }
  return out;
}

}  // namespace detail_eval

// Morphology F1 over {lemma} + tags per example, macro-averaged. In soft
// mode an example with any rigid derivation keeps its rigid prediction;
// otherwise the highest-scoring soft matches fill in.
inline EvalResult evaluate_morphology(const Model& model, const std::vector<MorphRecord>& records,
                                      const EvalOptions& opts) {
  EvalResult out;
  std::vector<Json> rows(records.size());
  std::vector<double> f1s(records.size(), 0.0);
  detail::parallel_for(records.size(), opts.jobs, [&](std::size_t i) {
    const MorphRecord& rec = records[i];
    detail_eval::MorphPrediction pred = detail_eval::rigid_predict(model, rec, opts.depth_limit);
    double score = 1.0;
    bool used_soft = false;
    if (opts.soft && !pred.lemma && pred.tags.empty()) {
      Sentence assumption = spell_out(rec.surface);
      auto matches = soft_match_model(model, {assumption});
      if (!matches.empty()) {
        double top = matches.front().score.to_double();
        for (const auto& m : matches) {
          if (m.score.to_double() < top) break;
          const Sentence& concl = m.concrete_rule.conclusion;
          if (concl.length() >= 2 && concl[0] == Token::special("LEMMA")) {
            if (!pred.lemma) pred.lemma = detail_eval::decode_chars(concl, 1);
          } else if (concl.length() == 2 && concl[0] == Token::special("TAG")) {
            pred.tags.insert(std::string(concl[1].text()));
          }
        }
        if (pred.lemma || !pred.tags.empty()) {
          used_soft = true;
          score = top;
        }
      }
    }
    std::set<std::string> predicted, gold;
    if (pred.lemma) predicted.insert("LEMMA:" + *pred.lemma);
    for (const auto& t : pred.tags) predicted.insert("TAG:" + t);
    gold.insert("LEMMA:" + rec.lemma);
    for (const auto& t : rec.tags) gold.insert("TAG:" + t);
    f1s[i] = detail_eval::f1_score(predicted, gold);
    Json row;
    row["surface"] = rec.surface;
    row["gold_lemma"] = rec.lemma;
    row["predicted_lemma"] = pred.lemma ? Json(*pred.lemma) : Json(nullptr);
    row["gold_tags"] = rec.tags;
    row["predicted_tags"] = std::vector<std::string>(pred.tags.begin(), pred.tags.end());
    row["f1"] = f1s[i];
    row["soft"] = used_soft;
    row["score"] = score;
    rows[i] = std::move(row);
  });
  double total = 0.0;
  for (double f : f1s) total += f;
  for (auto& r : rows) out.per_example.push_back(std::move(r));
  out.metrics["n"] = records.size();
  out.metrics["f1"] = records.empty() ? 0.0 : total / static_cast<double>(records.size());
  return out;
}

inline EvalResult evaluate(const Model& model, const Dataset& dataset, const EvalOptions& opts) {
  switch (dataset.kind) {
    case TaskKind::seq2seq:
      return evaluate_seq2seq(model, dataset.test_pairs, opts);
    case TaskKind::entailment:
      return evaluate_entailment(model, dataset.entail_test, opts);
    case TaskKind::morphology:
      return evaluate_morphology(model, dataset.morph_test, opts);
  }
  throw Error(ErrorKind::config_error, "unknown task kind");
}

}  // namespace metaqnl::tasks
