#pragma once

// Dataset construction: the embedded MiniSCAN pairs, the SCAN command
// grammar with its published splits, scripted synthetic corpora for the
// entailment and morphology tasks, and the file adapters.

#include <fstream>
#include <memory>
#include <random>

#include "metaqnl/tasks.hpp"

namespace metaqnl::tasks {

// ---------------------------------------------------------------------------
// MiniSCAN, embedded verbatim: 14 training and 10 test pairs.

inline const std::vector<Seq2SeqPair>& miniscan_train() {
  static const std::vector<Seq2SeqPair> pairs = {
      {"dax", "RED"},
      {"lug", "BLUE"},
      {"wif", "GREEN"},
      {"zup", "YELLOW"},
      {"dax fep", "RED RED RED"},
      {"lug fep", "BLUE BLUE BLUE"},
      {"wif blicket dax", "GREEN RED GREEN"},
      {"lug blicket wif", "BLUE GREEN BLUE"},
      {"dax kiki lug", "BLUE RED"},
      {"lug kiki wif", "GREEN BLUE"},
      {"lug fep kiki wif", "GREEN BLUE BLUE BLUE"},
      {"lug kiki wif fep", "GREEN GREEN GREEN BLUE"},
      {"wif kiki dax blicket lug", "RED BLUE RED GREEN"},
      {"wif blicket dax kiki lug", "BLUE GREEN RED GREEN"},
  };
  return pairs;
}

inline const std::vector<Seq2SeqPair>& miniscan_test() {
  static const std::vector<Seq2SeqPair> pairs = {
      {"zup fep", "YELLOW YELLOW YELLOW"},
      {"zup blicket lug", "YELLOW BLUE YELLOW"},
      {"zup kiki dax", "RED YELLOW"},
      {"zup fep kiki lug", "BLUE YELLOW YELLOW YELLOW"},
      {"wif kiki zup fep", "YELLOW YELLOW YELLOW GREEN"},
      {"lug kiki wif blicket zup", "GREEN YELLOW GREEN BLUE"},
      {"zup blicket wif kiki dax fep", "RED RED RED YELLOW GREEN YELLOW"},
      {"zup blicket zup kiki zup fep", "YELLOW YELLOW YELLOW YELLOW YELLOW YELLOW"},
      {"dax blicket zup", "RED YELLOW RED"},
      {"wif kiki zup", "YELLOW GREEN"},
  };
  return pairs;
}

inline Dataset miniscan_dataset() {
  Dataset ds;
  ds.name = "miniscan";
  ds.kind = TaskKind::seq2seq;
  ds.train_pairs = miniscan_train();
  ds.test_pairs = miniscan_test();
  for (const auto& p : ds.train_pairs) ds.train.push_back(encode_seq2seq(p, EncodeMode::train));
  return ds;
}

// ---------------------------------------------------------------------------
// SCAN: the full 20,910-command space generated from the published grammar,
// with the simple / length / addprim_jump / addprim_turn_left splits.

namespace detail_scan {

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (char c : s) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::vector<Seq2SeqPair> all_commands() {
  const std::vector<std::pair<std::string, std::string>> prims = {
      {"walk", "WALK"}, {"look", "LOOK"}, {"run", "RUN"}, {"jump", "JUMP"}};
  const std::vector<std::pair<std::string, std::string>> dirs = {{"left", "LEFT"},
                                                                 {"right", "RIGHT"}};
  std::vector<Seq2SeqPair> v_phrases;
  auto rep = [](const std::string& s, int n) {
    std::string out;
    for (int i = 0; i < n; ++i) {
      if (!out.empty()) out += ' ';
      out += s;
    }
    return out;
  };
  for (const auto& [u, U] : prims) v_phrases.push_back({u, U});
  for (const auto& [d, D] : dirs) {
    v_phrases.push_back({"turn " + d, D});
    v_phrases.push_back({"turn opposite " + d, D + " " + D});
    v_phrases.push_back({"turn around " + d, rep(D, 4)});
    for (const auto& [u, U] : prims) {
      v_phrases.push_back({u + " " + d, D + " " + U});
      v_phrases.push_back({u + " opposite " + d, D + " " + D + " " + U});
      v_phrases.push_back({u + " around " + d, D + " " + U + " " + D + " " + U + " " + D + " " +
                                                   U + " " + D + " " + U});
    }
  }
  std::vector<Seq2SeqPair> s_phrases;
  for (const auto& p : v_phrases) {
    s_phrases.push_back(p);
    s_phrases.push_back({p.source + " twice", p.target + " " + p.target});
    s_phrases.push_back({p.source + " thrice", p.target + " " + p.target + " " + p.target});
  }
  std::vector<Seq2SeqPair> commands = s_phrases;
  for (const auto& a : s_phrases) {
    for (const auto& b : s_phrases) {
      commands.push_back({a.source + " and " + b.source, a.target + " " + b.target});
      commands.push_back({a.source + " after " + b.source, b.target + " " + a.target});
    }
  }
  return commands;
}

inline std::size_t token_count(const std::string& s) {
  std::size_t n = 0;
  bool in_tok = false;
  for (char c : s) {
    if (c == ' ') {
      in_tok = false;
    } else if (!in_tok) {
      in_tok = true;
      ++n;
    }
  }
  return n;
}

inline bool contains_token(const std::string& s, const std::string& tok) {
  std::istringstream is(s);
  std::string t;
  while (is >> t)
    if (t == tok) return true;
  return false;
}

inline bool contains_bigram(const std::string& s, const std::string& a, const std::string& b) {
  std::istringstream is(s);
  std::string prev, t;
  while (is >> t) {
    if (prev == a && t == b) return true;
    prev = t;
  }
  return false;
}

}  // namespace detail_scan

struct ScanSplit {
  std::vector<Seq2SeqPair> train_pool;
  std::vector<Seq2SeqPair> test_pool;
};

// Published split definitions over the full command space. "simple" is a
// deterministic hash-based 80/20; "length" holds out commands with long
// action sequences; the addprim splits hold out all composed uses of one
// primitive.
inline ScanSplit scan_split(const std::string& split) {
  ScanSplit out;
  for (const Seq2SeqPair& cmd : detail_scan::all_commands()) {
    bool in_train;
    if (split == "simple") {
      in_train = detail_scan::fnv1a(cmd.source) % 5 != 0;
    } else if (split == "length") {
      in_train = detail_scan::token_count(cmd.target) <= 22;
    } else if (split == "addprim_jump") {
      in_train = !detail_scan::contains_token(cmd.source, "jump") || cmd.source == "jump";
    } else if (split == "addprim_turn_left") {
      in_train = !detail_scan::contains_bigram(cmd.source, "turn", "left") ||
                 cmd.source == "turn left";
    } else {
      throw Error(ErrorKind::config_error, "unknown SCAN split: " + split);
    }
    (in_train ? out.train_pool : out.test_pool).push_back(cmd);
  }
  return out;
}

// Training uses the split's 400 shortest commands (source length, then
// target length, then text). Validation and test are deterministic
// hash-ordered samples of the remaining pools.
inline Dataset scan_dataset(const std::string& split, std::size_t train_size = 400,
                            std::size_t validation_size = 1000, std::size_t test_size = 1000) {
  ScanSplit pools = scan_split(split);
  auto shortness = [](const Seq2SeqPair& a, const Seq2SeqPair& b) {
    auto ka = std::tuple(detail_scan::token_count(a.source), detail_scan::token_count(a.target),
                         a.source, a.target);
    auto kb = std::tuple(detail_scan::token_count(b.source), detail_scan::token_count(b.target),
                         b.source, b.target);
    return ka < kb;
  };
  std::sort(pools.train_pool.begin(), pools.train_pool.end(), shortness);

  Dataset ds;
  ds.name = "scan_" + split;
  ds.kind = TaskKind::seq2seq;
  for (std::size_t i = 0; i < pools.train_pool.size() && i < train_size; ++i)
    ds.train_pairs.push_back(pools.train_pool[i]);
  for (const auto& p : ds.train_pairs) ds.train.push_back(encode_seq2seq(p, EncodeMode::train));

  std::vector<Seq2SeqPair> rest(pools.train_pool.begin() +
                                    std::min(pools.train_pool.size(), train_size),
                                pools.train_pool.end());
  auto hash_order = [](const Seq2SeqPair& a, const Seq2SeqPair& b) {
    auto ha = detail_scan::fnv1a(a.source, 0x9e3779b97f4a7c15ull);
    auto hb = detail_scan::fnv1a(b.source, 0x9e3779b97f4a7c15ull);
    if (ha != hb) return ha < hb;
    return a.source < b.source;
  };
  std::sort(rest.begin(), rest.end(), hash_order);
  for (std::size_t i = 0; i < rest.size() && i < validation_size; ++i)
    ds.validation_pairs.push_back(rest[i]);

  std::sort(pools.test_pool.begin(), pools.test_pool.end(), hash_order);
  for (std::size_t i = 0; i < pools.test_pool.size() && i < test_size; ++i)
    ds.test_pairs.push_back(pools.test_pool[i]);
  return ds;
}

// ---------------------------------------------------------------------------
// Synthetic entailment corpus (RuleTaker-style, depth <= 3, open world).

struct EntailmentCorpusOptions {
  std::size_t records = 500;
  std::uint64_t seed = 7;
  std::size_t max_depth = 3;
};

namespace detail_ent {

inline const std::vector<std::string>& entities() {
  static const std::vector<std::string> v = {
      "anne",       "bob",       "charlie",   "erin",      "fiona",      "gary",
      "the cat",    "the dog",   "the lion",  "the mouse", "the tiger",  "the bear",
      "the rabbit", "the eagle", "the shark", "dave",      "the turtle", "harry"};
  return v;
}

inline const std::vector<std::string>& attributes() {
  static const std::vector<std::string> v = {"big",   "tall",  "strong", "kind",  "nice",
                                             "cold",  "round", "smart",  "red",   "blue",
                                             "green", "young", "quiet",  "furry", "happy"};
  return v;
}

}  // namespace detail_ent

// Records carry their ground-truth proof steps, polarity-prefixed, in the
// shape the proposer consumes. Questions rotate proved / disproved /
// unknown; disproved questions are negations bridged by the negation step.
inline std::vector<EntailmentRecord> generate_entailment_corpus(
    const EntailmentCorpusOptions& opts = {}) {
  std::mt19937_64 rng(opts.seed);
  const auto& ents = detail_ent::entities();
  const auto& attrs = detail_ent::attributes();
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

  std::vector<EntailmentRecord> out;
  while (out.size() < opts.records) {
    EntailmentRecord rec;
    // Entities and seed facts.
    std::vector<std::string> es;
    std::size_t n_ents = 2 + pick(2);
    while (es.size() < n_ents) {
      const std::string& e = ents[pick(ents.size())];
      if (std::find(es.begin(), es.end(), e) == es.end()) es.push_back(e);
    }
    std::vector<std::string> shuffled_attrs = attrs;
    for (std::size_t i = shuffled_attrs.size(); i > 1; --i)
      std::swap(shuffled_attrs[i - 1], shuffled_attrs[pick(i)]);

    // Per entity: derivable attributes with depth labels.
    std::map<std::string, std::map<std::string, int>> derived;  // entity -> attr -> depth
    std::size_t attr_cursor = 0;
    auto next_attr = [&]() -> const std::string& {
      return shuffled_attrs[attr_cursor++ % shuffled_attrs.size()];
    };
    for (const std::string& e : es) {
      std::size_t n_facts = 1 + pick(2);
      for (std::size_t k = 0; k < n_facts; ++k) {
        const std::string& a = next_attr();
        if (!derived[e].count(a)) {
          derived[e][a] = 0;
          rec.context.push_back(e + " is " + a);
        }
      }
    }
    // Conditionals chain new attributes off existing ones.
    struct Cond {
      bool conjunctive;
      std::string a, b, c;  // if (a [and b]) then c
    };
    std::vector<Cond> conds;
    std::size_t n_conds = 2 + pick(3);
    for (std::size_t k = 0; k < n_conds; ++k) {
      const std::string& src = shuffled_attrs[pick(6)];  // bias toward used attributes
      const std::string& dst = next_attr();
      if (src == dst) continue;
      if (pick(3) == 0) {
        const std::string& src2 = shuffled_attrs[pick(6)];
        if (src2 == src || src2 == dst) continue;
        conds.push_back({true, src, src2, dst});
        rec.context.push_back(src + " , " + src2 + " things are " + dst);
      } else {
        conds.push_back({false, src, "", dst});
        rec.context.push_back("if something is " + src + " then it is " + dst);
      }
    }
    // Forward closure with depth accounting and proof-step recording.
    std::vector<Rule> steps;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const std::string& e : es) {
        for (const Cond& c : conds) {
          auto have = [&](const std::string& a) { return derived[e].count(a) != 0; };
          if (!have(c.a) || (c.conjunctive && !have(c.b)) || derived[e].count(c.c)) continue;
          int d = derived[e][c.a];
          if (c.conjunctive) d = std::max(d, derived[e][c.b]);
          if (static_cast<std::size_t>(d + 1) > opts.max_depth) continue;
          derived[e][c.c] = d + 1;
          std::vector<Sentence> premises;
          if (c.conjunctive) {
            premises.push_back(parse_sentence("$TRUE$ " + c.a + " , " + c.b + " things are " + c.c));
            premises.push_back(parse_sentence("$TRUE$ " + e + " is " + c.a));
            premises.push_back(parse_sentence("$TRUE$ " + e + " is " + c.b));
          } else {
            premises.push_back(parse_sentence("$TRUE$ if something is " + c.a + " then it is " + c.c));
            premises.push_back(parse_sentence("$TRUE$ " + e + " is " + c.a));
          }
          steps.emplace_back(std::move(premises), parse_sentence("$TRUE$ " + e + " is " + c.c));
          changed = true;
        }
      }
    }

    // One question per record, label rotating by record index.
    const std::string& qe = es[pick(es.size())];
    std::size_t flavor = out.size() % 3;
    auto unknown_attr = [&]() -> std::optional<std::string> {
      for (const std::string& a : shuffled_attrs)
        if (!derived[qe].count(a)) return a;
      return std::nullopt;
    };
    auto derivation_of = [&](const std::string& attr) {
      // Steps contributing to qe's attr, walked backwards.
      std::vector<Rule> chain;
      std::set<std::string> needed{"$TRUE$ " + qe + " is " + attr};
      for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
        if (needed.count(it->conclusion.str())) {
          chain.push_back(*it);
          for (const Sentence& p : it->premises) needed.insert(p.str());
        }
      }
      std::reverse(chain.begin(), chain.end());
      return chain;
    };
    if (flavor == 0) {
      // proved: pick the deepest derivable attribute
      std::string best;
      int best_depth = -1;
      for (const auto& [a, d] : derived[qe]) {
        if (d > best_depth) {
          best = a;
          best_depth = d;
        }
      }
      rec.question = qe + " is " + best;
      rec.label = EntailmentLabel::proved;
      rec.depth = best_depth;
      rec.proof_steps = derivation_of(best);
    } else if (flavor == 1) {
      // disproved: negative form of a derivable attribute
      std::string best;
      int best_depth = -1;
      for (const auto& [a, d] : derived[qe]) {
        if (d > best_depth) {
          best = a;
          best_depth = d;
        }
      }
      rec.question = qe + " is not " + best;
      rec.label = EntailmentLabel::disproved;
      rec.depth = best_depth + 1;
      rec.proof_steps = derivation_of(best);
      rec.proof_steps.emplace_back(
          std::vector<Sentence>{parse_sentence("$TRUE$ " + qe + " is " + best)},
          parse_sentence("$FALSE$ " + qe + " is not " + best));
    } else {
      auto ua = unknown_attr();
      if (!ua) continue;
      rec.question = pick(2) == 0 ? qe + " is " + *ua : qe + " is not " + *ua;
      rec.label = EntailmentLabel::unknown;
      rec.depth = -1;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline Dataset entailment_dataset(const std::vector<EntailmentRecord>& train_records,
                                  const std::vector<EntailmentRecord>& test_records,
                                  const std::string& name = "entailment") {
  Dataset ds;
  ds.name = name;
  ds.kind = TaskKind::entailment;
  ds.entail_train = train_records;
  ds.entail_test = test_records;
  for (std::size_t r = 0; r < ds.entail_train.size(); ++r) {
    for (TrainingExample& ex : encode_entailment(ds.entail_train[r])) {
      ds.train.push_back(std::move(ex));
      ds.example_record.push_back(r);
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Synthetic morphology corpus: a regular suffix language. Lemmas are
// stem + "ar"; each tagset has one unambiguous suffix.

struct MorphologyCorpusOptions {
  std::size_t train_words = 200;
  std::size_t test_words = 50;
  std::uint64_t seed = 11;
};

namespace detail_morph {

struct Inflection {
  std::string suffix;
  std::vector<std::string> tags;
};

inline const std::vector<Inflection>& inflections() {
  static const std::vector<Inflection> v = {
      {"o", {"V", "PRS", "1", "SG"}},    {"as", {"V", "PRS", "2", "SG"}},
      {"amos", {"V", "PRS", "1", "PL"}}, {"an", {"V", "PRS", "3", "PL"}},
      {"e", {"V", "PST", "1", "SG"}},    {"aron", {"V", "PST", "3", "PL"}},
      {"aste", {"V", "PST", "2", "SG"}}, {"are", {"V", "FUT", "1", "SG"}},
      {"aran", {"V", "FUT", "3", "PL"}},
  };
  return v;
}

}  // namespace detail_morph

struct MorphologyCorpus {
  std::vector<MorphRecord> train;
  std::vector<MorphRecord> test;
};

inline MorphologyCorpus generate_morphology_corpus(const MorphologyCorpusOptions& opts = {}) {
  std::mt19937_64 rng(opts.seed);
  const std::string consonants = "bcdfglmnprst";
  const std::string vowels = "aeiou";
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  std::set<std::string> used_stems;
  auto fresh_stem = [&]() {
    while (true) {
      std::string stem;
      std::size_t syllables = 2 + pick(2);
      for (std::size_t i = 0; i < syllables; ++i) {
        stem += consonants[pick(consonants.size())];
        stem += vowels[pick(vowels.size())];
      }
      // Suffixes attach to a consonant-final stem form.
      stem += consonants[pick(consonants.size())];
      if (used_stems.insert(stem).second) return stem;
    }
  };
  const auto& infl = detail_morph::inflections();
  MorphologyCorpus out;
  auto make = [&](std::size_t i) {
    std::string stem = fresh_stem();
    const auto& form = infl[i % infl.size()];
    MorphRecord rec;
    rec.surface = stem + form.suffix;
    rec.lemma = stem + "ar";
    rec.tags = form.tags;
    return rec;
  };
  for (std::size_t i = 0; i < opts.train_words; ++i) out.train.push_back(make(i));
  for (std::size_t i = 0; i < opts.test_words; ++i) out.test.push_back(make(i + 1));
  return out;
}

struct MorphologyEncodeOptions {
  std::size_t negative_cap = 20;
  std::uint64_t seed = 0;
};

inline Dataset morphology_dataset(const std::vector<MorphRecord>& train_records,
                                  const std::vector<MorphRecord>& test_records,
                                  const MorphologyEncodeOptions& opts = {},
                                  const std::string& name = "morphology") {
  Dataset ds;
  ds.name = name;
  ds.kind = TaskKind::morphology;
  ds.morph_train = train_records;
  ds.morph_test = test_records;
  std::set<std::string> tags, lemmas;
  for (const auto& r : train_records) {
    lemmas.insert(r.lemma);
    for (const auto& t : r.tags) tags.insert(t);
  }
  ds.tag_inventory.assign(tags.begin(), tags.end());
  ds.lemma_inventory.assign(lemmas.begin(), lemmas.end());
  for (std::size_t r = 0; r < train_records.size(); ++r) {
    for (TrainingExample& ex : encode_morphology(train_records[r], ds.tag_inventory,
                                                 ds.lemma_inventory, opts.negative_cap,
                                                 opts.seed)) {
      ds.train.push_back(std::move(ex));
      ds.example_record.push_back(r);
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// File adapters.

// SCAN's published line format: "IN: jump twice OUT: JUMP JUMP".
inline std::vector<Seq2SeqPair> load_scan_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::data_error, "cannot read: " + path);
  std::vector<Seq2SeqPair> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto in_pos = line.find("IN:");
    auto out_pos = line.find("OUT:");
    if (in_pos == std::string::npos || out_pos == std::string::npos || out_pos < in_pos)
      throw Error(ErrorKind::parse_error, "malformed SCAN line: " + line);
    auto trim = [](std::string s) {
      std::size_t a = s.find_first_not_of(" \t");
      std::size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    out.push_back({trim(line.substr(in_pos + 3, out_pos - in_pos - 3)),
                   trim(line.substr(out_pos + 4))});
  }
  return out;
}

inline void save_scan_file(const std::vector<Seq2SeqPair>& pairs, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::data_error, "cannot write: " + path);
  for (const auto& p : pairs) os << "IN: " << p.source << " OUT: " << p.target << "\n";
}

// Entailment records, one JSON object per line:
//   {"context": [...], "question": "...", "answer": "proved|disproved|unknown",
//    "depth": int, "proof": [{"premises": [...], "conclusion": "..."}]}
// Proof sentences are written in polarity-prefixed form.
inline std::vector<EntailmentRecord> load_entailment_jsonl(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::data_error, "cannot read: " + path);
  std::vector<EntailmentRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::parse_error,
                  "line " + std::to_string(line_no) + ": " + std::string(e.what()));
    }
    EntailmentRecord rec;
    for (const auto& c : j.at("context")) rec.context.push_back(c.get<std::string>());
    rec.question = j.at("question").get<std::string>();
    std::string answer = j.at("answer").get<std::string>();
    if (answer == "proved")
      rec.label = EntailmentLabel::proved;
    else if (answer == "disproved")
      rec.label = EntailmentLabel::disproved;
    else if (answer == "unknown")
      rec.label = EntailmentLabel::unknown;
    else
      throw Error(ErrorKind::malformed_example, "unknown answer label: " + answer);
    rec.depth = j.value("depth", -1);
    if (j.contains("proof")) {
      for (const auto& step : j.at("proof")) {
        std::vector<Sentence> premises;
        for (const auto& p : step.at("premises")) premises.push_back(parse_sentence(p.get<std::string>()));
        rec.proof_steps.emplace_back(std::move(premises),
                                     parse_sentence(step.at("conclusion").get<std::string>()));
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline void save_entailment_jsonl(const std::vector<EntailmentRecord>& records,
                                  const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::data_error, "cannot write: " + path);
  for (const auto& rec : records) {
    Json j;
    j["context"] = rec.context;
    j["question"] = rec.question;
    j["answer"] = rec.label == EntailmentLabel::proved
                      ? "proved"
                      : rec.label == EntailmentLabel::disproved ? "disproved" : "unknown";
    j["depth"] = rec.depth;
    Json proof = Json::array();
    for (const Rule& step : rec.proof_steps) {
      Json s;
      s["premises"] = Json::array();
      for (const Sentence& p : step.premises) s["premises"].push_back(p.str());
      s["conclusion"] = step.conclusion.str();
      proof.push_back(s);
    }
    j["proof"] = proof;
    os << j.dump() << "\n";
  }
}

// Morphology TSV: surface <tab> lemma <tab> tag;tag;tag
inline std::vector<MorphRecord> load_morphology_tsv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::data_error, "cannot read: " + path);
  std::vector<MorphRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = line.find('\t', t1 == std::string::npos ? t1 : t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw Error(ErrorKind::parse_error, "malformed morphology line: " + line);
    MorphRecord rec;
    rec.surface = line.substr(0, t1);
    rec.lemma = line.substr(t1 + 1, t2 - t1 - 1);
    std::string tags = line.substr(t2 + 1);
    std::size_t start = 0;
    while (start <= tags.size()) {
      auto semi = tags.find(';', start);
      std::string tag = tags.substr(start, semi == std::string::npos ? tags.npos : semi - start);
      if (!tag.empty()) rec.tags.push_back(tag);
      if (semi == std::string::npos) break;
      start = semi + 1;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline void save_morphology_tsv(const std::vector<MorphRecord>& records, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::data_error, "cannot write: " + path);
  for (const auto& rec : records) {
    os << rec.surface << '\t' << rec.lemma << '\t';
    for (std::size_t i = 0; i < rec.tags.size(); ++i) {
      if (i) os << ';';
      os << rec.tags[i];
    }
    os << "\n";
  }
}

// ---------------------------------------------------------------------------
// Task defaults.

inline InduceConfig default_config(TaskKind kind) {
  InduceConfig cfg;
  switch (kind) {
    case TaskKind::seq2seq:
      cfg.lambda_plus = Weight::finite(Rational(128, 100));
      cfg.lambda_minus = Weight::finite(Rational(0));
      cfg.epochs = 3;
      cfg.depth_limit = 6;
      cfg.prover = ProverKind::backward;
      break;
    case TaskKind::entailment:
      cfg.lambda_plus = Weight::finite(Rational(128, 100));
      cfg.lambda_minus = Weight::finite(Rational(128, 100));
      cfg.epochs = 5;
      cfg.depth_limit = 7;
      cfg.prover = ProverKind::forward;
      break;
    case TaskKind::morphology:
      cfg.lambda_plus = Weight::finite(Rational(128, 100));
      cfg.lambda_minus = Weight::finite(Rational(128, 100));
      cfg.epochs = 3;
      cfg.depth_limit = 1;
      cfg.prover = ProverKind::forward;
      break;
  }
  return cfg;
}

inline std::unique_ptr<RuleProposer> make_proposer(const Dataset& ds) {
  switch (ds.kind) {
    case TaskKind::seq2seq:
      return std::make_unique<Seq2SeqProposer>(ds.train);
    case TaskKind::entailment:
      return std::make_unique<EntailmentProposer>(ds);
    case TaskKind::morphology:
      return std::make_unique<MorphologyProposer>();
  }
  throw Error(ErrorKind::config_error, "unknown task kind");
}

}  // namespace metaqnl::tasks
