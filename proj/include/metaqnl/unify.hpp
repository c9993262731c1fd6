#pragma once

// Sequence unification and anti-unification over sentences and rules.
// Unification feeds backward chaining; anti-unification feeds rule
// abstraction and soft matching. The minimal complete set of unifiers can be
// infinite, so unification carries a per-variable budget and a truncation
// flag. Anti-unification recursively matches the beginnings of the two
// sentences: a shared leading token is emitted verbatim, otherwise a fresh
// variable covers some non-empty prefix pair and the remainders recurse.

#include <functional>
#include <map>
#include <set>
#include <unordered_map>

#include "metaqnl/core.hpp"

namespace metaqnl {

struct Unifier {
  Substitution substitution;
};

struct UnifyResult {
  std::vector<Unifier> unifiers;
  bool truncated = false;  // the infinite/over-budget part was cut off
};

struct AntiUnifier {
  Sentence generalization;
  Substitution sigma1;  // maps generalization back onto the first input
  Substitution sigma2;
};

inline constexpr std::size_t kDefaultUnifyBudget = 8;
inline constexpr std::size_t kAntiUnifyPrefixCap = 12;
inline constexpr std::size_t kUnifyNodeCap = 200000;
inline constexpr std::size_t kAntiUnifyNodeCap = 400000;

namespace detail {

inline Token fresh_var(std::size_t& counter) {
  return Token::variable("_u" + std::to_string(counter++));
}

inline bool is_internal_var(Token t) {
  return t.is_variable() && t.name().size() >= 2 && t.name()[0] == '_';
}

inline std::vector<Token> subst_tokens(const std::vector<Token>& seq, Token var,
                                       const std::vector<Token>& image) {
  std::vector<Token> out;
  out.reserve(seq.size() + image.size());
  for (Token t : seq) {
    if (t == var)
      out.insert(out.end(), image.begin(), image.end());
    else
      out.push_back(t);
  }
  return out;
}

struct UnifyState {
  std::size_t budget;
  std::size_t fresh_counter = 0;
  std::size_t nodes = 0;
  bool truncated = false;
  std::vector<Substitution> found;
};

// One accumulated binding step: sigma := {var -> image} after sigma.
inline Substitution chain(const Substitution& sigma, Token var, const Sentence& image) {
  Substitution step;
  step.bind(var, image);
  Substitution out = compose(step, sigma);
  if (!out.find(var)) out.bind(var, image);
  return out;
}

inline void unify_impl(std::vector<Token> a, std::vector<Token> b, Substitution sigma,
                       std::map<std::uint32_t, std::size_t> depth, UnifyState& st) {
  if (++st.nodes > kUnifyNodeCap) {
    st.truncated = true;
    return;
  }
  std::size_t i = 0;
  while (i < a.size() && i < b.size() && a[i] == b[i]) ++i;
  if (i == a.size() && i == b.size()) {
    st.found.push_back(sigma);
    return;
  }
  if (i == a.size() || i == b.size()) return;
  Token x = a[i], y = b[i];
  std::vector<Token> ra(a.begin() + i, a.end());
  std::vector<Token> rb(b.begin() + i, b.end());

  auto step = [&](Token var, std::vector<Token> image, bool extend) {
    std::size_t d = depth.count(var.id()) ? depth.at(var.id()) : 1;
    if (extend && d >= st.budget) {
      st.truncated = true;
      return;
    }
    Sentence img(image);
    auto na = subst_tokens(ra, var, image);
    auto nb = subst_tokens(rb, var, image);
    auto ndepth = depth;
    if (extend) ndepth[image.back().id()] = d + 1;
    unify_impl(std::move(na), std::move(nb), chain(sigma, var, img), std::move(ndepth), st);
  };

  if (x.is_variable() && y.is_variable()) {
    step(x, {y}, false);
    Token xf = fresh_var(st.fresh_counter);
    step(x, {y, xf}, true);
    Token yf = fresh_var(st.fresh_counter);
    step(y, {x, yf}, true);
    return;
  }
  if (x.is_variable()) {
    if (y.is_special()) return;  // images may not contain special symbols
    step(x, {y}, false);
    Token xf = fresh_var(st.fresh_counter);
    step(x, {y, xf}, true);
    return;
  }
  if (y.is_variable()) {
    if (x.is_special()) return;
    step(y, {x}, false);
    Token yf = fresh_var(st.fresh_counter);
    step(y, {x, yf}, true);
    return;
  }
  // Distinct non-variable heads never unify.
}

inline std::vector<Token> sentence_vars(const Sentence& s) {
  std::vector<Token> vars;
  for (Token t : s.tokens()) {
    if (t.is_variable() && std::find(vars.begin(), vars.end(), t) == vars.end()) vars.push_back(t);
  }
  return vars;
}

}  // namespace detail

// All unifiers of s1 and s2 within the budget, restricted to the variables of
// the inputs and filtered to the most general ones. The budget bounds how far
// a single variable's image may grow through chained extensions.
inline UnifyResult unify(const Sentence& s1, const Sentence& s2,
                         std::size_t budget = kDefaultUnifyBudget) {
  detail::UnifyState st;
  st.budget = std::max<std::size_t>(budget, 1);
  detail::unify_impl(s1.tokens(), s2.tokens(), Substitution(), {}, st);

  std::vector<Token> originals = detail::sentence_vars(s1);
  for (Token t : detail::sentence_vars(s2))
    if (std::find(originals.begin(), originals.end(), t) == originals.end()) originals.push_back(t);
  std::sort(originals.begin(), originals.end(), [](Token a, Token b) { return a.text() < b.text(); });

  std::set<std::string> names_taken;
  for (Token v : originals) names_taken.insert(std::string(v.name()));
  auto is_fresh = [&](Token t) {
    return detail::is_internal_var(t) &&
           std::find(originals.begin(), originals.end(), t) == originals.end();
  };

  std::vector<std::pair<std::string, Unifier>> keyed;
  std::set<std::string> seen;
  for (const Substitution& raw : st.found) {
    // Keep only bindings of input variables.
    Substitution sigma;
    for (Token v : originals) {
      if (const Sentence* img = raw.find(v)) sigma.bind(v, *img);
    }
    // A fresh variable standing for exactly one input variable's image takes
    // that variable's name back.
    for (Token v : originals) {
      const Sentence* img = sigma.find(v);
      if (img && img->length() == 1 && is_fresh((*img)[0])) {
        Token f = (*img)[0];
        Substitution renamed;
        Substitution rename_step;
        rename_step.bind(f, Sentence({v}));
        for (const auto& [w, wi] : sigma.bindings()) {
          if (w == v) continue;
          renamed.bind(w, rename_step.apply(wi));
        }
        sigma = std::move(renamed);
      }
    }
    // Remaining fresh variables get canonical unused names.
    std::size_t next = 0;
    Substitution rename;
    auto alloc = [&]() {
      while (true) {
        std::string name = detail::canonical_var_name(next++);
        if (!names_taken.count(name)) return Token::variable(name);
      }
    };
    for (const auto& [v, img] : sigma.bindings()) {
      for (Token t : img.tokens())
        if (is_fresh(t) && !rename.find(t)) rename.bind(t, Sentence({alloc()}));
    }
    Substitution cleaned;
    for (Token v : originals) {
      if (const Sentence* img = sigma.find(v)) {
        Sentence fixed = rename.apply(*img);
        if (fixed.length() == 1 && fixed[0] == v) continue;  // identity
        cleaned.bind(v, fixed);
      }
    }
    std::string key = cleaned.str();
    if (seen.insert(key).second) keyed.emplace_back(std::move(key), Unifier{std::move(cleaned)});
  }

  // Drop unifiers strictly less general than another one.
  std::vector<bool> dominated(keyed.size(), false);
  std::vector<Sentence> results;
  results.reserve(keyed.size());
  for (auto& [k, u] : keyed) results.push_back(u.substitution.apply(s1));
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    for (std::size_t j = 0; j < keyed.size() && !dominated[i]; ++j) {
      if (i == j || dominated[j]) continue;
      if (alpha_normal(results[i]) == alpha_normal(results[j])) continue;
      if (is_instance(results[i], results[j])) dominated[i] = true;
    }
  }
  UnifyResult out;
  out.truncated = st.truncated;
  std::vector<std::size_t> order(keyed.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return keyed[a].first < keyed[b].first; });
  for (std::size_t i : order)
    if (!dominated[i]) out.unifiers.push_back(std::move(keyed[i].second));
  return out;
}

namespace detail {

struct SegPair {
  std::vector<Token> left, right;
  friend bool operator<(const SegPair& a, const SegPair& b) {
    if (a.left != b.left) {
      return std::lexicographical_compare(
          a.left.begin(), a.left.end(), b.left.begin(), b.left.end(),
          [](Token x, Token y) { return x.id() < y.id(); });
    }
    return std::lexicographical_compare(
        a.right.begin(), a.right.end(), b.right.begin(), b.right.end(),
        [](Token x, Token y) { return x.id() < y.id(); });
  }
  friend bool operator==(const SegPair& a, const SegPair& b) {
    return a.left == b.left && a.right == b.right;
  }
};

// One element of a segment-level generalization: either a verbatim token or
// a variable identified by the prefix pair it covers. Keying variables by
// their covered pair makes reuse automatic: the same mismatched pair always
// yields the same variable, across segments too.
struct SegItem {
  bool is_pair = false;
  Token token;         // valid when !is_pair
  SegPair pair;        // valid when is_pair
};
using SegSeq = std::vector<SegItem>;

inline constexpr std::size_t kSegmentSolutionCap = 128;
inline constexpr std::size_t kStreamSolutionCap = 512;
inline constexpr std::size_t kMaxDistinctPairs = 10;

// Anti-unifies two special-free token segments by the prefix-matching
// procedure: a shared leading token is emitted verbatim (no other choice is
// explored), otherwise a pair-variable covers some non-empty prefix of each
// side and the remainders recurse.
inline void anti_unify_segment_impl(const std::vector<Token>& s1, const std::vector<Token>& s2,
                                    std::size_t i, std::size_t j, SegSeq& acc,
                                    std::vector<SegSeq>& out, std::size_t& nodes) {
  if (out.size() >= kSegmentSolutionCap) return;
  if (++nodes > kAntiUnifyNodeCap) return;
  if (i == s1.size() && j == s2.size()) {
    out.push_back(acc);
    return;
  }
  if (i == s1.size() || j == s2.size()) return;
  if (s1[i] == s2[j]) {
    acc.push_back(SegItem{false, s1[i], {}});
    anti_unify_segment_impl(s1, s2, i + 1, j + 1, acc, out, nodes);
    acc.pop_back();
    return;
  }
  std::size_t max1 = std::min(kAntiUnifyPrefixCap, s1.size() - i);
  std::size_t max2 = std::min(kAntiUnifyPrefixCap, s2.size() - j);
  for (std::size_t l1 = 1; l1 <= max1; ++l1) {
    for (std::size_t l2 = 1; l2 <= max2; ++l2) {
      SegItem item;
      item.is_pair = true;
      item.pair = SegPair{{s1.begin() + i, s1.begin() + i + l1},
                          {s2.begin() + j, s2.begin() + j + l2}};
      acc.push_back(std::move(item));
      anti_unify_segment_impl(s1, s2, i + l1, j + l2, acc, out, nodes);
      acc.pop_back();
    }
  }
}

struct SegKey {
  std::vector<std::uint32_t> ids;
  bool operator==(const SegKey&) const = default;
};
struct SegKeyHash {
  std::size_t operator()(const SegKey& k) const {
    std::size_t h = 0x811c9dc5u;
    for (auto id : k.ids) hash_combine(h, id);
    return h;
  }
};

class SegmentCache {
 public:
  const std::vector<SegSeq>* lookup(const SegKey& key) const {
    std::shared_lock lock(mu_);
    auto it = map_.find(key);
    return it == map_.end() ? nullptr : &it->second;
  }
  const std::vector<SegSeq>* store(SegKey key, std::vector<SegSeq> value) {
    std::unique_lock lock(mu_);
    auto [it, inserted] = map_.emplace(std::move(key), std::move(value));
    return &it->second;
  }
  void clear() {
    std::unique_lock lock(mu_);
    map_.clear();
  }

 private:
  mutable std::shared_mutex mu_;
  std::unordered_map<SegKey, std::vector<SegSeq>, SegKeyHash> map_;
};

inline SegmentCache& segment_cache() {
  static SegmentCache cache;
  return cache;
}

inline const std::vector<SegSeq>& anti_unify_segment(const std::vector<Token>& a,
                                                     const std::vector<Token>& b) {
  SegKey key;
  key.ids.reserve(a.size() + b.size() + 1);
  for (Token t : a) key.ids.push_back(t.id());
  key.ids.push_back(0xffffffffu);
  for (Token t : b) key.ids.push_back(t.id());
  if (const auto* hit = segment_cache().lookup(key)) return *hit;
  std::vector<SegSeq> out;
  SegSeq acc;
  std::size_t nodes = 0;
  anti_unify_segment_impl(a, b, 0, 0, acc, out, nodes);
  return *segment_cache().store(std::move(key), std::move(out));
}

// Splits a token stream at special tokens. Specials can never fall inside a
// variable image, so they anchor the generalization; the pieces between them
// anti-unify independently.
struct SplitStream {
  std::vector<Token> anchors;
  std::vector<std::vector<Token>> segments;  // anchors.size() + 1 entries
};

inline SplitStream split_stream(const std::vector<Token>& stream) {
  SplitStream out;
  out.segments.emplace_back();
  for (Token t : stream) {
    if (t.is_special()) {
      out.anchors.push_back(t);
      out.segments.emplace_back();
    } else {
      out.segments.back().push_back(t);
    }
  }
  return out;
}

// All generalizations of two token streams, as pair-item sequences joined by
// the shared anchors. Cross products over segments are consistent by
// construction because variables are identified by their covered pair.
inline std::vector<std::vector<SegItem>> anti_unify_stream_items(const std::vector<Token>& a,
                                                                 const std::vector<Token>& b) {
  std::vector<std::vector<SegItem>> results;
  SplitStream sa = split_stream(a);
  SplitStream sb = split_stream(b);
  if (sa.anchors != sb.anchors) return results;
  std::vector<const std::vector<SegSeq>*> per_segment;
  per_segment.reserve(sa.segments.size());
  for (std::size_t i = 0; i < sa.segments.size(); ++i) {
    const auto& solutions = anti_unify_segment(sa.segments[i], sb.segments[i]);
    if (solutions.empty()) {
      if (sa.segments[i].empty() && sb.segments[i].empty()) {
        static const std::vector<SegSeq> kEmptySolution{SegSeq{}};
        per_segment.push_back(&kEmptySolution);
        continue;
      }
      return results;
    }
    per_segment.push_back(&solutions);
  }

  std::vector<SegItem> acc;
  std::set<SegPair> pairs_used;
  std::function<void(std::size_t)> combine = [&](std::size_t seg) {
    if (results.size() >= kStreamSolutionCap) return;
    if (seg == per_segment.size()) {
      results.push_back(acc);
      return;
    }
    for (const SegSeq& choice : *per_segment[seg]) {
      std::vector<SegPair> added;
      bool ok = true;
      for (const SegItem& item : choice) {
        if (!item.is_pair) continue;
        if (pairs_used.count(item.pair)) continue;
        if (pairs_used.size() + added.size() >= kMaxDistinctPairs) {
          ok = false;
          break;
        }
        if (std::find(added.begin(), added.end(), item.pair) == added.end())
          added.push_back(item.pair);
      }
      if (!ok) continue;
      for (const auto& p : added) pairs_used.insert(p);
      std::size_t mark = acc.size();
      acc.insert(acc.end(), choice.begin(), choice.end());
      if (seg + 1 <= per_segment.size() && seg < sa.anchors.size())
        acc.push_back(SegItem{false, sa.anchors[seg], {}});
      combine(seg + 1);
      acc.resize(mark);
      for (const auto& p : added) pairs_used.erase(p);
      if (results.size() >= kStreamSolutionCap) return;
    }
  };
  combine(0);
  return results;
}

// Materializes pair-item sequences into anti-unifiers with canonical
// variable naming in first-occurrence order.
inline std::vector<AntiUnifier> materialize_items(const std::vector<std::vector<SegItem>>& items) {
  std::vector<AntiUnifier> out;
  out.reserve(items.size());
  for (const auto& seq : items) {
    std::map<SegPair, Token> var_of;
    std::size_t counter = 0;
    std::vector<Token> gen;
    gen.reserve(seq.size());
    for (const SegItem& item : seq) {
      if (!item.is_pair) {
        gen.push_back(item.token);
        continue;
      }
      auto it = var_of.find(item.pair);
      if (it == var_of.end()) it = var_of.emplace(item.pair, fresh_var(counter)).first;
      gen.push_back(it->second);
    }
    AntiUnifier au;
    au.generalization = Sentence(std::move(gen));
    for (const auto& [pair, var] : var_of) {
      au.sigma1.bind(var, Sentence(std::vector<Token>(pair.left)));
      au.sigma2.bind(var, Sentence(std::vector<Token>(pair.right)));
    }
    out.push_back(std::move(au));
  }
  return out;
}

// Renames internal variables of an anti-unifier to canonical names in
// first-occurrence order, leaving input variables untouched.
inline AntiUnifier tidy_anti_unifier(const AntiUnifier& au) {
  std::set<std::string> taken;
  for (Token t : au.generalization.tokens())
    if (t.is_variable() && !is_internal_var(t)) taken.insert(std::string(t.name()));
  for (const auto* sig : {&au.sigma1, &au.sigma2}) {
    for (const auto& [v, img] : sig->bindings()) {
      for (Token t : img.tokens())
        if (t.is_variable() && !is_internal_var(t)) taken.insert(std::string(t.name()));
    }
  }
  Substitution rename;
  std::size_t next = 0;
  auto alloc = [&]() {
    while (true) {
      std::string name = canonical_var_name(next++);
      if (!taken.count(name)) return Token::variable(name);
    }
  };
  for (Token t : au.generalization.tokens())
    if (is_internal_var(t) && !rename.find(t)) rename.bind(t, Sentence({alloc()}));
  AntiUnifier out;
  out.generalization = rename.apply(au.generalization);
  for (const auto& [v, img] : au.sigma1.bindings()) {
    const Sentence* nv = rename.find(v);
    out.sigma1.bind(nv ? (*nv)[0] : v, img);
  }
  for (const auto& [v, img] : au.sigma2.bindings()) {
    const Sentence* nv = rename.find(v);
    out.sigma2.bind(nv ? (*nv)[0] : v, img);
  }
  return out;
}

}  // namespace detail

// Anti-unifiers of two sentences per the recursive prefix-matching procedure,
// deduplicated modulo variable renaming. The trivial single-variable
// generalization is included whenever it is expressible (both inputs free of
// special symbols).
inline std::vector<AntiUnifier> anti_unify(const Sentence& s1, const Sentence& s2) {
  std::vector<AntiUnifier> out;
  std::set<std::string> seen;
  for (const AntiUnifier& raw :
       detail::materialize_items(detail::anti_unify_stream_items(s1.tokens(), s2.tokens()))) {
    AntiUnifier tidy = detail::tidy_anti_unifier(raw);
    std::string key = alpha_normal(tidy.generalization).str();
    if (seen.insert(key).second) out.push_back(std::move(tidy));
  }
  if (!s1.has_special() && !s2.has_special()) {
    Token x = Token::variable("A");
    std::string key = alpha_normal(Sentence({x})).str();
    if (seen.insert(key).second) {
      AntiUnifier trivial;
      trivial.generalization = Sentence({x});
      trivial.sigma1.bind(x, s1);
      trivial.sigma2.bind(x, s2);
      out.push_back(std::move(trivial));
    }
  }
  return out;
}

// Full anti-unifiers of two raw token streams (used for joint premise
// generalization in soft matching); witnesses included, deduplicated.
inline std::vector<AntiUnifier> anti_unify_token_streams(const std::vector<Token>& a,
                                                         const std::vector<Token>& b) {
  std::vector<AntiUnifier> out;
  std::set<std::string> seen;
  for (const AntiUnifier& raw :
       detail::materialize_items(detail::anti_unify_stream_items(a, b))) {
    AntiUnifier tidy = detail::tidy_anti_unifier(raw);
    if (seen.insert(alpha_normal(tidy.generalization).str()).second)
      out.push_back(std::move(tidy));
  }
  return out;
}

using RuleFilter = std::function<std::optional<Rule>(const Rule&)>;

namespace detail {

// Rules anti-unify as single token streams with premises and conclusion
// joined by a reserved separator token. Separators behave like specials:
// they must align, which keeps premise boundaries intact, and the shared
// segment-pair map keeps variables consistent across the whole rule.
inline Token stream_separator() {
  static Token sep = Token::special("\x01");
  return sep;
}

inline std::vector<Token> rule_stream(const Rule& r, const std::vector<std::size_t>& order) {
  std::vector<Token> out;
  for (std::size_t idx : order) {
    const auto& toks = r.premises[idx].tokens();
    out.insert(out.end(), toks.begin(), toks.end());
    out.push_back(stream_separator());
  }
  const auto& c = r.conclusion.tokens();
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

inline std::optional<Rule> stream_to_rule(const Sentence& stream) {
  std::vector<Sentence> premises;
  std::vector<Token> current;
  for (Token t : stream.tokens()) {
    if (t == stream_separator()) {
      if (current.empty()) return std::nullopt;
      premises.emplace_back(std::move(current));
      current.clear();
    } else {
      current.push_back(t);
    }
  }
  if (current.empty()) return std::nullopt;
  return Rule(std::move(premises), Sentence(std::move(current)));
}

struct StreamPairKey {
  std::vector<std::uint32_t> ids;
  bool operator==(const StreamPairKey&) const = default;
};
struct StreamPairKeyHash {
  std::size_t operator()(const StreamPairKey& k) const {
    std::size_t h = 0x811c9dc5u;
    for (auto id : k.ids) hash_combine(h, id);
    return h;
  }
};

class AntiUnifyCache {
 public:
  bool lookup(const StreamPairKey& key, std::vector<Sentence>& out) const {
    std::shared_lock lock(mu_);
    auto it = map_.find(key);
    if (it == map_.end()) return false;
    out = it->second;
    return true;
  }
  void store(const StreamPairKey& key, std::vector<Sentence> value) {
    std::unique_lock lock(mu_);
    map_.emplace(std::move(key), std::move(value));
  }
  void clear() {
    std::unique_lock lock(mu_);
    map_.clear();
  }

 private:
  mutable std::shared_mutex mu_;
  std::unordered_map<StreamPairKey, std::vector<Sentence>, StreamPairKeyHash> map_;
};

inline AntiUnifyCache& anti_unify_cache() {
  static AntiUnifyCache cache;
  return cache;
}

inline std::vector<Sentence> anti_unify_streams(const std::vector<Token>& a,
                                                const std::vector<Token>& b) {
  StreamPairKey key;
  key.ids.reserve(a.size() + b.size() + 1);
  for (Token t : a) key.ids.push_back(t.id());
  key.ids.push_back(0xffffffffu);
  for (Token t : b) key.ids.push_back(t.id());
  std::vector<Sentence> cached;
  if (anti_unify_cache().lookup(key, cached)) return cached;

  std::vector<Sentence> out;
  std::set<std::string> seen;
  for (const AntiUnifier& raw : materialize_items(anti_unify_stream_items(a, b))) {
    Sentence g = tidy_anti_unifier(raw).generalization;
    if (seen.insert(g.str()).second) out.push_back(std::move(g));
  }
  anti_unify_cache().store(key, out);
  return out;
}

}  // namespace detail

// Common generalizations of two rules. Pairs with unequal premise counts
// yield the empty set. Results are canonicalized and deduplicated; when a
// filter is supplied, results it rejects are dropped and rewrites it makes
// are kept.
inline std::vector<Rule> anti_unify_rules(const Rule& r1, const Rule& r2,
                                          const RuleFilter* filter = nullptr) {
  std::vector<Rule> out;
  if (r1.premises.size() != r2.premises.size()) return out;
  if (r1.premises.size() > detail::kMaxPremises)
    throw Error(ErrorKind::invalid_rule, "premise count exceeds cap");

  std::vector<std::size_t> identity(r1.premises.size());
  for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
  std::vector<Token> stream1 = detail::rule_stream(r1, identity);

  std::set<std::string> seen;
  std::vector<std::size_t> perm = identity;
  do {
    std::vector<Token> stream2 = detail::rule_stream(r2, perm);
    for (const Sentence& gen : detail::anti_unify_streams(stream1, stream2)) {
      auto rule = detail::stream_to_rule(gen);
      if (!rule) continue;
      Rule canon = canonicalize(*rule);
      if (filter) {
        auto kept = (*filter)(canon);
        if (!kept) continue;
        canon = canonicalize(*kept);
      }
      if (seen.insert(canon.str()).second) out.push_back(std::move(canon));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::sort(out.begin(), out.end());
  return out;
}

inline void clear_anti_unify_cache() {
  detail::anti_unify_cache().clear();
  detail::segment_cache().clear();
}

}  // namespace metaqnl
