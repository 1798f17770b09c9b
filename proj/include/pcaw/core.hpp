#pragma once

// Shared value types: carrier elements, verdicts, budgets, deterministic RNG.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace pcaw {

struct Error : std::runtime_error {
  explicit Error(const std::string& m) : std::runtime_error(m) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void require(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix64). std:: distributions are not stable across
// library implementations, and seeded runs must replay byte-identically.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Combinator values: closed applicative trees over k, s and inert atoms.
// These are the carrier elements of the symbolic backend.

struct Comb;
using CombPtr = std::shared_ptr<const Comb>;

struct Comb {
  enum class Tag { K, S, Atom, App };
  Tag tag = Tag::K;
  std::string atom;  // Atom
  CombPtr fun, arg;  // App

  static CombPtr k() {
    static CombPtr v = std::make_shared<Comb>(Comb{Tag::K, "", nullptr, nullptr});
    return v;
  }
  static CombPtr s() {
    static CombPtr v = std::make_shared<Comb>(Comb{Tag::S, "", nullptr, nullptr});
    return v;
  }
  static CombPtr make_atom(const std::string& name) {
    return std::make_shared<Comb>(Comb{Tag::Atom, name, nullptr, nullptr});
  }
  static CombPtr app(CombPtr f, CombPtr a) {
    return std::make_shared<Comb>(Comb{Tag::App, "", std::move(f), std::move(a)});
  }
};

inline int comb_cmp(const CombPtr& a, const CombPtr& b) {
  if (a.get() == b.get()) return 0;
  auto rank = [](const Comb& c) {
    switch (c.tag) {
      case Comb::Tag::K: return 0;
      case Comb::Tag::S: return 1;
      case Comb::Tag::Atom: return 2;
      case Comb::Tag::App: return 3;
    }
    return 4;
  };
  int ra = rank(*a), rb = rank(*b);
  if (ra != rb) return ra < rb ? -1 : 1;
  if (a->tag == Comb::Tag::Atom) {
    if (a->atom != b->atom) return a->atom < b->atom ? -1 : 1;
    return 0;
  }
  if (a->tag == Comb::Tag::App) {
    int c = comb_cmp(a->fun, b->fun);
    if (c != 0) return c;
    return comb_cmp(a->arg, b->arg);
  }
  return 0;
}

inline bool comb_eq(const CombPtr& a, const CombPtr& b) { return comb_cmp(a, b) == 0; }

inline int comb_size(const CombPtr& c) {
  if (c->tag != Comb::Tag::App) return 1;
  return comb_size(c->fun) + comb_size(c->arg);
}

// Compact print: single-character heads, application by juxtaposition,
// parentheses only around argument applications. "skk", "s(kk)a".
inline std::string comb_show(const CombPtr& c) {
  switch (c->tag) {
    case Comb::Tag::K: return "k";
    case Comb::Tag::S: return "s";
    case Comb::Tag::Atom: return c->atom;
    case Comb::Tag::App: {
      std::string l = comb_show(c->fun);
      std::string r = comb_show(c->arg);
      if (c->arg->tag == Comb::Tag::App) r = "(" + r + ")";
      return l + r;
    }
  }
  return "?";
}

inline CombPtr comb_parse(const std::string& text);  // below

// ---------------------------------------------------------------------------
// Elem: universal immutable value for carriers and assembly points.
// Unit | Nat | Sym | Comb | Pair | Set.  Sets are kept sorted and deduped so
// equality and printing are canonical.

class Elem {
 public:
  enum class Tag { Unit, Nat, Sym, Comb, Pair, Set };

  Elem() : rep_(unit_rep()) {}

  static Elem unit() { return Elem(); }
  static Elem nat(std::uint64_t n) {
    Elem e;
    e.rep_ = std::make_shared<Rep>(Rep{Tag::Nat, n, "", nullptr, {}});
    return e;
  }
  static Elem sym(const std::string& s) {
    Elem e;
    e.rep_ = std::make_shared<Rep>(Rep{Tag::Sym, 0, s, nullptr, {}});
    return e;
  }
  static Elem comb(CombPtr c) {
    Elem e;
    e.rep_ = std::make_shared<Rep>(Rep{Tag::Comb, 0, "", std::move(c), {}});
    return e;
  }
  static Elem pair(const Elem& a, const Elem& b) {
    Elem e;
    e.rep_ = std::make_shared<Rep>(Rep{Tag::Pair, 0, "", nullptr, {a, b}});
    return e;
  }
  static Elem set(std::vector<Elem> xs) {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    Elem e;
    e.rep_ = std::make_shared<Rep>(Rep{Tag::Set, 0, "", nullptr, std::move(xs)});
    return e;
  }
  static Elem nat_set(const std::vector<std::uint64_t>& ns) {
    std::vector<Elem> xs;
    xs.reserve(ns.size());
    for (auto n : ns) xs.push_back(Elem::nat(n));
    return set(std::move(xs));
  }

  Tag tag() const { return rep_->tag; }
  std::uint64_t nat_value() const { return rep_->nat; }
  const std::string& sym_value() const { return rep_->sym; }
  const CombPtr& comb_value() const { return rep_->comb; }
  const Elem& first() const { return rep_->kids[0]; }
  const Elem& second() const { return rep_->kids[1]; }
  const std::vector<Elem>& set_items() const { return rep_->kids; }

  friend int elem_cmp(const Elem& a, const Elem& b) {
    if (a.rep_.get() == b.rep_.get()) return 0;
    if (a.rep_->tag != b.rep_->tag)
      return static_cast<int>(a.rep_->tag) < static_cast<int>(b.rep_->tag) ? -1 : 1;
    switch (a.rep_->tag) {
      case Tag::Unit: return 0;
      case Tag::Nat:
        if (a.rep_->nat != b.rep_->nat) return a.rep_->nat < b.rep_->nat ? -1 : 1;
        return 0;
      case Tag::Sym:
        if (a.rep_->sym != b.rep_->sym) return a.rep_->sym < b.rep_->sym ? -1 : 1;
        return 0;
      case Tag::Comb: return comb_cmp(a.rep_->comb, b.rep_->comb);
      case Tag::Pair:
      case Tag::Set: {
        const auto& xs = a.rep_->kids;
        const auto& ys = b.rep_->kids;
        for (std::size_t i = 0; i < std::min(xs.size(), ys.size()); ++i) {
          int c = elem_cmp(xs[i], ys[i]);
          if (c != 0) return c;
        }
        if (xs.size() != ys.size()) return xs.size() < ys.size() ? -1 : 1;
        return 0;
      }
    }
    return 0;
  }

  friend bool operator==(const Elem& a, const Elem& b) { return elem_cmp(a, b) == 0; }
  friend bool operator!=(const Elem& a, const Elem& b) { return elem_cmp(a, b) != 0; }
  friend bool operator<(const Elem& a, const Elem& b) { return elem_cmp(a, b) < 0; }

  std::string show() const {
    switch (tag()) {
      case Tag::Unit: return "*";
      case Tag::Nat: return std::to_string(nat_value());
      case Tag::Sym: return sym_value();
      case Tag::Comb: return comb_show(comb_value());
      case Tag::Pair: return "(" + first().show() + "," + second().show() + ")";
      case Tag::Set: {
        std::string out = "{";
        bool sep = false;
        for (const auto& x : set_items()) {
          if (sep) out += ",";
          out += x.show();
          sep = true;
        }
        return out + "}";
      }
    }
    return "?";
  }

 private:
  struct Rep {
    Tag tag;
    std::uint64_t nat;
    std::string sym;
    CombPtr comb;
    std::vector<Elem> kids;  // Pair: exactly 2; Set: sorted/deduped
  };

  static std::shared_ptr<Rep> unit_rep() {
    static std::shared_ptr<Rep> r = std::make_shared<Rep>(Rep{Tag::Unit, 0, "", nullptr, {}});
    return r;
  }

  std::shared_ptr<Rep> rep_;
};

inline std::string show_list(const std::vector<Elem>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += xs[i].show();
  }
  return out + "]";
}

// ---------------------------------------------------------------------------
// Three-valued logic for enumerated/sampled predicates.

enum class Tri { False, True, Dunno };

inline Tri tri_and(Tri a, Tri b) {
  if (a == Tri::False || b == Tri::False) return Tri::False;
  if (a == Tri::Dunno || b == Tri::Dunno) return Tri::Dunno;
  return Tri::True;
}

// ---------------------------------------------------------------------------
// Verdicts. Proven is reserved for exhaustively checked claims over exact
// data; sampled or enumeration-bounded positives are Evidence; Refuted always
// carries a replayable counterexample description; Unknown names the budget
// that ran out.

enum class Outcome { Proven, Evidence, Refuted, Unknown };

inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Proven: return "proven";
    case Outcome::Evidence: return "evidence";
    case Outcome::Refuted: return "refuted";
    case Outcome::Unknown: return "unknown";
  }
  return "?";
}

struct Coverage {
  std::uint64_t checked = 0;  // cases examined
  std::uint64_t passed = 0;   // cases that held
  std::uint64_t dunno = 0;    // cases that could not be decided at budget
  std::optional<std::uint64_t> domain;  // total case count when known

  Coverage& operator+=(const Coverage& o) {
    checked += o.checked;
    passed += o.passed;
    dunno += o.dunno;
    if (domain && o.domain)
      *domain += *o.domain;
    else
      domain.reset();
    return *this;
  }
};

struct Verdict {
  Outcome outcome = Outcome::Unknown;
  Coverage cov;
  std::string detail;  // counterexample for Refuted, exhausted budget for Unknown

  static Verdict proven(Coverage c = {}) { return {Outcome::Proven, c, ""}; }
  static Verdict evidence(Coverage c = {}) { return {Outcome::Evidence, c, ""}; }
  static Verdict refuted(const std::string& cex, Coverage c = {}) {
    return {Outcome::Refuted, c, cex};
  }
  static Verdict unknown(const std::string& why, Coverage c = {}) {
    return {Outcome::Unknown, c, why};
  }

  bool ok() const { return outcome == Outcome::Proven || outcome == Outcome::Evidence; }

  // Positive verdicts over inexhaustible domains must not claim proof.
  Verdict capped() const {
    if (outcome == Outcome::Proven) return {Outcome::Evidence, cov, detail};
    return *this;
  }

  std::string show() const {
    std::string out = outcome_name(outcome);
    if (cov.checked > 0) {
      out += " [" + std::to_string(cov.passed) + "/" + std::to_string(cov.checked);
      if (cov.dunno) out += ", " + std::to_string(cov.dunno) + " undecided";
      if (cov.domain) out += " of " + std::to_string(*cov.domain);
      out += "]";
    }
    if (!detail.empty()) out += ": " + detail;
    return out;
  }
};

// Conjunction: any refutation dominates, then any unknown, then evidence.
inline Verdict verdict_all(const std::vector<Verdict>& vs) {
  Coverage cov;
  bool any_evidence = false;
  const Verdict* unknown = nullptr;
  for (const auto& v : vs) {
    cov += v.cov;
    if (v.outcome == Outcome::Refuted) return {Outcome::Refuted, cov, v.detail};
    if (v.outcome == Outcome::Unknown && !unknown) unknown = &v;
    if (v.outcome == Outcome::Evidence) any_evidence = true;
  }
  if (unknown) return {Outcome::Unknown, cov, unknown->detail};
  if (any_evidence) return {Outcome::Evidence, cov, ""};
  return {Outcome::Proven, cov, ""};
}

// ---------------------------------------------------------------------------
// Budgets. One knob bundle threaded through every bounded search; all checks
// are deterministic functions of (inputs, budget).

struct Budget {
  std::uint64_t fuel = 3000;    // reduction steps per application
  int term_size = 5;            // certificate search: term node-count cap
  int arity = 3;                // abstraction arity cap
  int samples = 32;             // samples per inexhaustible domain
  std::uint64_t seed = 17;      // base RNG seed
  int enum_limit = 256;         // enumeration prefix for infinite searches

  Budget with_seed(std::uint64_t s) const {
    Budget b = *this;
    b.seed = s;
    return b;
  }
  Budget with_samples(int n) const {
    Budget b = *this;
    b.samples = n;
    return b;
  }
};

// ---------------------------------------------------------------------------
// Comb parser (compact syntax used by fixtures and tests).
//   term := atom+        application, left associative
//   atom := 'k' | 's' | other single letter (atom) | '(' term ')'

namespace detail {
inline CombPtr comb_parse_term(const std::string& t, std::size_t& i);

inline CombPtr comb_parse_atom(const std::string& t, std::size_t& i) {
  while (i < t.size() && t[i] == ' ') ++i;
  require(i < t.size(), "comb_parse: unexpected end in '" + t + "'");
  char c = t[i];
  if (c == '(') {
    ++i;
    CombPtr inner = comb_parse_term(t, i);
    require(i < t.size() && t[i] == ')', "comb_parse: missing ')' in '" + t + "'");
    ++i;
    return inner;
  }
  require(std::isalpha(static_cast<unsigned char>(c)), "comb_parse: bad char in '" + t + "'");
  ++i;
  if (c == 'k') return Comb::k();
  if (c == 's') return Comb::s();
  return Comb::make_atom(std::string(1, c));
}

inline CombPtr comb_parse_term(const std::string& t, std::size_t& i) {
  CombPtr acc = comb_parse_atom(t, i);
  while (true) {
    while (i < t.size() && t[i] == ' ') ++i;
    if (i >= t.size() || t[i] == ')') break;
    acc = Comb::app(acc, comb_parse_atom(t, i));
  }
  return acc;
}
}  // namespace detail

inline CombPtr comb_parse(const std::string& text) {
  std::size_t i = 0;
  CombPtr c = detail::comb_parse_term(text, i);
  require(i == text.size(), "comb_parse: trailing input in '" + text + "'");
  return c;
}

inline Elem ce(const std::string& text) { return Elem::comb(comb_parse(text)); }

}  // namespace pcaw
