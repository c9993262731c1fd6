#pragma once

// Tokens, sentences, rules and substitutions: the algebra the rest of the
// library is built on. Sentences are interned token sequences; rules are
// premise multisets plus a conclusion, compared modulo premise order and
// variable renaming via an explicit canonical form.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace metaqnl {

enum class ErrorKind {
  empty_sentence,
  malformed_token,
  malformed_example,
  invalid_rule,
  parse_error,
  config_error,
  data_error,
  solver_error,
  hard_unsat,
  path_explosion,
  no_prediction,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

enum class TokenKind : std::uint8_t { word, variable, special };

namespace detail {

// Global intern table. Tokens compare by id; the table is append-only and
// safe for concurrent insertion.
class Interner {
 public:
  std::uint32_t intern(std::string_view text) {
    {
      std::shared_lock lock(mu_);
      auto it = ids_.find(text);
      if (it != ids_.end()) return it->second;
    }
    std::unique_lock lock(mu_);
    auto it = ids_.find(text);
    if (it != ids_.end()) return it->second;
    texts_.emplace_back(text);
    std::uint32_t id = static_cast<std::uint32_t>(texts_.size() - 1);
    ids_.emplace(texts_.back(), id);
    return id;
  }

  std::string_view text(std::uint32_t id) const {
    std::shared_lock lock(mu_);
    return texts_[id];
  }

 private:
  mutable std::shared_mutex mu_;
  std::deque<std::string> texts_;  // deque: stable storage for the map keys
  std::unordered_map<std::string_view, std::uint32_t> ids_;
};

inline Interner& interner() {
  static Interner table;
  return table;
}

inline void hash_combine(std::size_t& seed, std::size_t v) {
  seed ^= v + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2);
}

}  // namespace detail

class Token {
 public:
  Token() : id_(0) {}

  static Token word(std::string_view name) {
    check_name(name);
    if (name.front() == '[' || name.front() == '$')
      throw Error(ErrorKind::malformed_token, "word may not start with '[' or '$': " + std::string(name));
    return Token(detail::interner().intern(name));
  }
  static Token variable(std::string_view name) {
    check_name(name);
    std::string text = "[" + std::string(name) + "]";
    return Token(detail::interner().intern(text));
  }
  static Token special(std::string_view name) {
    check_name(name);
    std::string text = "$" + std::string(name) + "$";
    return Token(detail::interner().intern(text));
  }

  // Parses one whitespace-free chunk, classifying by delimiters.
  static Token parse(std::string_view chunk) {
    if (chunk.empty()) throw Error(ErrorKind::malformed_token, "empty token");
    if (chunk.front() == '[') {
      if (chunk.size() < 3 || chunk.back() != ']')
        throw Error(ErrorKind::malformed_token, "unclosed '[' in token: " + std::string(chunk));
      return Token(detail::interner().intern(chunk));
    }
    if (chunk.front() == '$') {
      if (chunk.size() < 3 || chunk.back() != '$')
        throw Error(ErrorKind::malformed_token, "unclosed '$' in token: " + std::string(chunk));
      return Token(detail::interner().intern(chunk));
    }
    return Token(detail::interner().intern(chunk));
  }

  TokenKind kind() const {
    std::string_view t = text();
    if (t.front() == '[') return TokenKind::variable;
    if (t.front() == '$') return TokenKind::special;
    return TokenKind::word;
  }
  bool is_variable() const { return kind() == TokenKind::variable; }
  bool is_special() const { return kind() == TokenKind::special; }
  bool is_word() const { return kind() == TokenKind::word; }

  // Surface form, delimiters included.
  std::string_view text() const { return detail::interner().text(id_); }
  // Name with delimiters stripped.
  std::string_view name() const {
    std::string_view t = text();
    if (t.front() == '[' || t.front() == '$') return t.substr(1, t.size() - 2);
    return t;
  }

  std::uint32_t id() const { return id_; }
  friend bool operator==(Token a, Token b) { return a.id_ == b.id_; }
  friend bool operator!=(Token a, Token b) { return a.id_ != b.id_; }

 private:
  explicit Token(std::uint32_t id) : id_(id) {}
  static void check_name(std::string_view name) {
    if (name.empty()) throw Error(ErrorKind::malformed_token, "empty token name");
    for (char c : name)
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
        throw Error(ErrorKind::malformed_token, "whitespace in token name");
  }
  std::uint32_t id_;
};

class Sentence {
 public:
  Sentence() = default;
  explicit Sentence(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.empty()) throw Error(ErrorKind::empty_sentence, "sentence must be non-empty");
  }

  static Sentence parse(std::string_view text) {
    std::vector<Token> toks;
    std::size_t i = 0;
    while (i < text.size()) {
      while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      std::size_t j = i;
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
      if (j > i) toks.push_back(Token::parse(text.substr(i, j - i)));
      i = j;
    }
    if (toks.empty()) throw Error(ErrorKind::empty_sentence, "empty sentence: \"" + std::string(text) + "\"");
    return Sentence(std::move(toks));
  }

  const std::vector<Token>& tokens() const { return tokens_; }
  std::size_t length() const { return tokens_.size(); }
  Token operator[](std::size_t i) const { return tokens_[i]; }

  bool is_concrete() const {
    return std::none_of(tokens_.begin(), tokens_.end(), [](Token t) { return t.is_variable(); });
  }
  bool has_special() const {
    return std::any_of(tokens_.begin(), tokens_.end(), [](Token t) { return t.is_special(); });
  }

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (i) out += ' ';
      out += tokens_[i].text();
    }
    return out;
  }

  friend bool operator==(const Sentence& a, const Sentence& b) { return a.tokens_ == b.tokens_; }
  friend bool operator!=(const Sentence& a, const Sentence& b) { return !(a == b); }

  // Total order on surface text, independent of interning order.
  friend bool operator<(const Sentence& a, const Sentence& b) {
    std::size_t n = std::min(a.length(), b.length());
    for (std::size_t i = 0; i < n; ++i) {
      if (a.tokens_[i] != b.tokens_[i]) return a.tokens_[i].text() < b.tokens_[i].text();
    }
    return a.length() < b.length();
  }

  std::size_t hash() const {
    std::size_t h = 0xcbf29ce484222325ull;
    for (Token t : tokens_) detail::hash_combine(h, t.id());
    return h;
  }

 private:
  std::vector<Token> tokens_;
};

struct SentenceHash {
  std::size_t operator()(const Sentence& s) const { return s.hash(); }
};

inline Sentence parse_sentence(std::string_view text) { return Sentence::parse(text); }

struct Rule {
  std::vector<Sentence> premises;  // multiset; order is not significant
  Sentence conclusion;

  Rule() = default;
  Rule(std::vector<Sentence> prems, Sentence concl)
      : premises(std::move(prems)), conclusion(std::move(concl)) {}

  // "p1 ; p2 |- c" with an empty premise side allowed.
  static Rule parse(std::string_view text) {
    auto pos = text.find("|-");
    if (pos == std::string_view::npos)
      throw Error(ErrorKind::parse_error, "rule is missing '|-': " + std::string(text));
    std::string_view left = text.substr(0, pos);
    std::string_view right = text.substr(pos + 2);
    std::vector<Sentence> prems;
    std::size_t start = 0;
    while (start <= left.size()) {
      auto semi = left.find(';', start);
      std::string_view part = left.substr(start, semi == std::string_view::npos ? left.npos : semi - start);
      bool blank = part.find_first_not_of(" \t") == std::string_view::npos;
      if (!blank) prems.push_back(Sentence::parse(part));
      if (semi == std::string_view::npos) break;
      start = semi + 1;
    }
    return Rule(std::move(prems), Sentence::parse(right));
  }

  bool is_concrete() const {
    if (!conclusion.is_concrete()) return false;
    return std::all_of(premises.begin(), premises.end(), [](const Sentence& s) { return s.is_concrete(); });
  }

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < premises.size(); ++i) {
      if (i) out += " ; ";
      out += premises[i].str();
    }
    out += premises.empty() ? "|- " : " |- ";
    out += conclusion.str();
    return out;
  }

  friend bool operator==(const Rule& a, const Rule& b) {
    return a.premises == b.premises && a.conclusion == b.conclusion;
  }
  friend bool operator!=(const Rule& a, const Rule& b) { return !(a == b); }

  friend bool operator<(const Rule& a, const Rule& b) {
    if (a.premises.size() != b.premises.size()) return a.premises.size() < b.premises.size();
    for (std::size_t i = 0; i < a.premises.size(); ++i) {
      if (a.premises[i] != b.premises[i]) return a.premises[i] < b.premises[i];
    }
    return a.conclusion < b.conclusion;
  }

  std::size_t hash() const {
    std::size_t h = 0x100001b3ull;
    for (const Sentence& p : premises) detail::hash_combine(h, p.hash());
    detail::hash_combine(h, 0xabcdefull);
    detail::hash_combine(h, conclusion.hash());
    return h;
  }
};

struct RuleHash {
  std::size_t operator()(const Rule& r) const { return r.hash(); }
};

// A substitution maps variables to sentences of words and variables only
// (never special symbols); unbound variables map to themselves.
class Substitution {
 public:
  Substitution() = default;

  static Substitution identity() { return Substitution(); }

  bool empty() const { return bindings_.empty(); }
  std::size_t size() const { return bindings_.size(); }

  const Sentence* find(Token var) const {
    for (const auto& [v, img] : bindings_)
      if (v == var) return &img;
    return nullptr;
  }

  void bind(Token var, Sentence image) {
    if (!var.is_variable()) throw Error(ErrorKind::invalid_rule, "substitution domain must be variables");
    if (image.has_special())
      throw Error(ErrorKind::invalid_rule, "substitution image may not contain special symbols");
    for (auto& [v, img] : bindings_) {
      if (v == var) {
        img = std::move(image);
        return;
      }
    }
    bindings_.emplace_back(var, std::move(image));
  }

  // bind() unless the variable is already bound to something different.
  bool bind_consistent(Token var, const Sentence& image) {
    if (const Sentence* old = find(var)) return *old == image;
    bind(var, image);
    return true;
  }

  Sentence apply(const Sentence& s) const {
    std::vector<Token> out;
    out.reserve(s.length());
    for (Token t : s.tokens()) {
      const Sentence* img = t.is_variable() ? find(t) : nullptr;
      if (img) {
        out.insert(out.end(), img->tokens().begin(), img->tokens().end());
      } else {
        out.push_back(t);
      }
    }
    return Sentence(std::move(out));
  }

  Rule apply(const Rule& r) const {
    std::vector<Sentence> prems;
    prems.reserve(r.premises.size());
    for (const Sentence& p : r.premises) prems.push_back(apply(p));
    return Rule(std::move(prems), apply(r.conclusion));
  }

  const std::vector<std::pair<Token, Sentence>>& bindings() const { return bindings_; }

  std::string str() const {
    std::vector<std::pair<std::string, std::string>> items;
    for (const auto& [v, img] : bindings_) items.emplace_back(std::string(v.text()), img.str());
    std::sort(items.begin(), items.end());
    std::string out = "{";
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ", ";
      out += items[i].first + " -> " + items[i].second;
    }
    return out + "}";
  }

 private:
  std::vector<std::pair<Token, Sentence>> bindings_;
};

inline Sentence apply_substitution(const Substitution& sigma, const Sentence& s) { return sigma.apply(s); }
inline Rule apply_substitution(const Substitution& sigma, const Rule& r) { return sigma.apply(r); }

// compose(outer, inner): applying the result equals applying inner, then outer.
inline Substitution compose(const Substitution& outer, const Substitution& inner) {
  Substitution result;
  for (const auto& [v, img] : inner.bindings()) result.bind(v, outer.apply(img));
  for (const auto& [v, img] : outer.bindings()) {
    if (!inner.find(v)) result.bind(v, img);
  }
  return result;
}

namespace detail {

constexpr std::size_t kMaxPremises = 8;  // engineering cap; nothing in the corpus exceeds 3

// All substitutions sigma with sigma(general) == specific. Variables bind to
// non-empty segments without special tokens; repeated variables must agree.
inline void match_all_impl(const Sentence& specific, const Sentence& general, std::size_t si,
                           std::size_t gi, Substitution& sigma,
                           const std::function<bool(const Substitution&)>& emit, bool& stop) {
  if (stop) return;
  if (gi == general.length()) {
    if (si == specific.length() && !emit(sigma)) stop = true;
    return;
  }
  if (si >= specific.length()) return;
  Token g = general[gi];
  if (!g.is_variable()) {
    if (specific[si] == g) match_all_impl(specific, general, si + 1, gi + 1, sigma, emit, stop);
    return;
  }
  if (const Sentence* img = sigma.find(g)) {
    std::size_t n = img->length();
    if (si + n > specific.length()) return;
    for (std::size_t k = 0; k < n; ++k)
      if (specific[si + k] != (*img)[k]) return;
    match_all_impl(specific, general, si + n, gi + 1, sigma, emit, stop);
    return;
  }
  // Remaining general tokens each need at least one specific token.
  std::size_t reserve = general.length() - gi - 1;
  std::size_t remaining = specific.length() - si;
  if (remaining <= reserve) return;
  std::size_t max_len = remaining - reserve;
  std::vector<Token> seg;
  for (std::size_t len = 1; len <= max_len && !stop; ++len) {
    Token t = specific[si + len - 1];
    if (t.is_special()) break;  // images may not contain special symbols
    seg.push_back(t);
    Substitution saved = sigma;
    sigma.bind(g, Sentence(std::vector<Token>(seg)));
    match_all_impl(specific, general, si + len, gi + 1, sigma, emit, stop);
    sigma = std::move(saved);
  }
}

}  // namespace detail

// Enumerates matches in a deterministic order (shortest bindings first).
// The callback returns false to stop early.
inline void for_each_match(const Sentence& specific, const Sentence& general,
                           const std::function<bool(const Substitution&)>& emit) {
  Substitution sigma;
  bool stop = false;
  detail::match_all_impl(specific, general, 0, 0, sigma, emit, stop);
}

inline std::vector<Substitution> match_all(const Sentence& specific, const Sentence& general) {
  std::vector<Substitution> out;
  for_each_match(specific, general, [&](const Substitution& s) {
    out.push_back(s);
    return true;
  });
  return out;
}

inline std::optional<Substitution> match_instance(const Sentence& specific, const Sentence& general) {
  std::optional<Substitution> out;
  for_each_match(specific, general, [&](const Substitution& s) {
    out = s;
    return false;
  });
  return out;
}

namespace detail {

inline void match_rule_premises(const Rule& specific, const Rule& general, std::size_t gi,
                                std::vector<bool>& used, Substitution& sigma,
                                const std::function<bool(const Substitution&)>& emit, bool& stop) {
  if (stop) return;
  if (gi == general.premises.size()) {
    if (!emit(sigma)) stop = true;
    return;
  }
  for (std::size_t si = 0; si < specific.premises.size() && !stop; ++si) {
    if (used[si]) continue;
    // Skip duplicate specific premises at the same slot.
    bool dup = false;
    for (std::size_t k = 0; k < si; ++k) {
      if (!used[k] && specific.premises[k] == specific.premises[si]) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    used[si] = true;
    bool inner_stop = false;
    match_all_impl(specific.premises[si], general.premises[gi], 0, 0, sigma,
                   [&](const Substitution&) {
                     // sigma already carries the extended bindings here.
                     match_rule_premises(specific, general, gi + 1, used, sigma, emit, stop);
                     return !stop;
                   },
                   inner_stop);
    used[si] = false;
  }
}

}  // namespace detail

// One-sided rule matching: some sigma with sigma(general) == specific modulo
// premise reordering. Premise pairings are enumerated by backtracking.
inline void for_each_rule_match(const Rule& specific, const Rule& general,
                                const std::function<bool(const Substitution&)>& emit) {
  if (specific.premises.size() != general.premises.size()) return;
  if (specific.premises.size() > detail::kMaxPremises)
    throw Error(ErrorKind::invalid_rule, "premise count exceeds cap");
  bool stop = false;
  Substitution sigma;
  std::vector<bool> used(specific.premises.size(), false);
  bool inner_stop = false;
  detail::match_all_impl(specific.conclusion, general.conclusion, 0, 0, sigma,
                         [&](const Substitution&) {
                           detail::match_rule_premises(specific, general, 0, used, sigma, emit, stop);
                           return !stop;
                         },
                         inner_stop);
}

inline std::optional<Substitution> match_instance(const Rule& specific, const Rule& general) {
  std::optional<Substitution> out;
  for_each_rule_match(specific, general, [&](const Substitution& s) {
    out = s;
    return false;
  });
  return out;
}

inline bool is_instance(const Sentence& specific, const Sentence& general) {
  return match_instance(specific, general).has_value();
}
inline bool is_instance(const Rule& specific, const Rule& general) {
  return match_instance(specific, general).has_value();
}

namespace detail {

inline std::string canonical_var_name(std::size_t i) {
  std::string name(1, static_cast<char>('A' + i % 26));
  if (i >= 26) name += std::to_string(i / 26);
  return name;
}

// Premise sort key that is invariant under variable renaming: variables are
// replaced by their first-occurrence index within the premise.
inline std::string local_shape_key(const Sentence& s) {
  std::string key;
  std::vector<Token> seen;
  for (Token t : s.tokens()) {
    if (!key.empty()) key += ' ';
    if (t.is_variable()) {
      std::size_t idx = seen.size();
      for (std::size_t k = 0; k < seen.size(); ++k)
        if (seen[k] == t) idx = k;
      if (idx == seen.size()) seen.push_back(t);
      key += "[#" + std::to_string(idx) + "]";
    } else {
      key += t.text();
    }
  }
  return key;
}

inline Rule rename_in_order(const std::vector<Sentence>& premises, const Sentence& conclusion) {
  Substitution renaming;
  std::size_t next = 0;
  auto visit = [&](const Sentence& s) {
    for (Token t : s.tokens()) {
      if (t.is_variable() && !renaming.find(t))
        renaming.bind(t, Sentence({Token::variable(canonical_var_name(next++))}));
    }
  };
  for (const Sentence& p : premises) visit(p);
  visit(conclusion);
  std::vector<Sentence> out;
  out.reserve(premises.size());
  for (const Sentence& p : premises) out.push_back(renaming.apply(p));
  return Rule(std::move(out), renaming.apply(conclusion));
}

}  // namespace detail

// Renames variables to [A], [B], ... in first-occurrence order.
inline Sentence alpha_normal(const Sentence& s) {
  return detail::rename_in_order({}, s).conclusion;
}

// Canonical form: premises sorted by (length, shape), variables renamed in
// first-occurrence order over sorted premises then the conclusion. Groups of
// premises with equal shape keys are permuted and the lexicographically
// smallest printed rule wins, so equality modulo premise reordering and
// alpha-conversion becomes structural equality.
inline Rule canonicalize(const Rule& rule) {
  std::vector<std::pair<std::string, const Sentence*>> keyed;
  keyed.reserve(rule.premises.size());
  for (const Sentence& p : rule.premises) {
    std::string key = std::to_string(p.length());
    key.insert(key.begin(), static_cast<char>('0' + std::min<std::size_t>(9, key.size())));
    keyed.emplace_back(key + ":" + detail::local_shape_key(p), &p);
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  // Tie groups of equal keys.
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t i = 0; i < keyed.size();) {
    std::size_t j = i + 1;
    while (j < keyed.size() && keyed[j].first == keyed[i].first) ++j;
    if (j - i > 1) groups.emplace_back(i, j);
    i = j;
  }

  std::vector<Sentence> order;
  order.reserve(keyed.size());
  for (auto& [k, p] : keyed) order.push_back(*p);

  Rule best = detail::rename_in_order(order, rule.conclusion);
  std::string best_str = best.str();
  if (!groups.empty()) {
    // Enumerate permutations within tie groups, one group at a time; groups
    // beyond this size would only arise from degenerate rules.
    constexpr std::size_t kMaxGroup = 6;
    std::function<void(std::size_t)> expand = [&](std::size_t g) {
      if (g == groups.size()) {
        Rule cand = detail::rename_in_order(order, rule.conclusion);
        std::string s = cand.str();
        if (s < best_str) {
          best_str = std::move(s);
          best = std::move(cand);
        }
        return;
      }
      auto [lo, hi] = groups[g];
      if (hi - lo > kMaxGroup) {
        expand(g + 1);
        return;
      }
      std::vector<Sentence> slice(order.begin() + lo, order.begin() + hi);
      std::sort(slice.begin(), slice.end());
      do {
        std::copy(slice.begin(), slice.end(), order.begin() + lo);
        expand(g + 1);
      } while (std::next_permutation(slice.begin(), slice.end()));
    };
    expand(0);
  }
  return best;
}

inline bool equal_modulo(const Rule& a, const Rule& b) { return canonicalize(a) == canonicalize(b); }

}  // namespace metaqnl
