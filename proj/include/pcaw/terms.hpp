#pragma once

// Applicative terms over a partial applicative structure: syntax, parsing,
// bracket abstraction, definedness unfolding, fuel-bounded evaluation.

#include <map>
#include <set>

#include "pcaw/core.hpp"

namespace pcaw {

// ---------------------------------------------------------------------------
// Application outcomes. Undefined is only ever produced by exact backends;
// fuel exhaustion is always Unknown.

struct AppOutcome {
  enum class Tag { Value, Undefined, Unknown };
  Tag tag = Tag::Unknown;
  Elem val;

  static AppOutcome value(Elem e) { return {Tag::Value, std::move(e)}; }
  static AppOutcome undefined() { return {Tag::Undefined, Elem()}; }
  static AppOutcome unknown() { return {Tag::Unknown, Elem()}; }

  bool is_value() const { return tag == Tag::Value; }
  bool is_undefined() const { return tag == Tag::Undefined; }
  bool is_unknown() const { return tag == Tag::Unknown; }

  std::string show() const {
    switch (tag) {
      case Tag::Value: return val.show();
      case Tag::Undefined: return "<undefined>";
      case Tag::Unknown: return "<unknown>";
    }
    return "?";
  }
};

using AppFn = std::function<AppOutcome(const Elem&, const Elem&, std::uint64_t)>;

// ---------------------------------------------------------------------------
// Term syntax. Abstraction is not a node: lambda requests are compiled away
// by bracket abstraction, so evaluation only ever sees applicative trees.

enum class KitSlot { K, S, I, Kbar, P, P0, P1 };

inline const char* kit_slot_name(KitSlot s) {
  switch (s) {
    case KitSlot::K: return "k";
    case KitSlot::S: return "s";
    case KitSlot::I: return "i";
    case KitSlot::Kbar: return "kbar";
    case KitSlot::P: return "P";
    case KitSlot::P0: return "P0";
    case KitSlot::P1: return "P1";
  }
  return "?";
}

inline std::optional<KitSlot> kit_slot_from(const std::string& n) {
  if (n == "k" || n == "K") return KitSlot::K;
  if (n == "s" || n == "S") return KitSlot::S;
  if (n == "i" || n == "I") return KitSlot::I;
  if (n == "kbar" || n == "Kbar") return KitSlot::Kbar;
  if (n == "P") return KitSlot::P;
  if (n == "P0" || n == "p0") return KitSlot::P0;
  if (n == "P1" || n == "p1") return KitSlot::P1;
  return std::nullopt;
}

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  enum class Tag { Var, App, ConstElem, ConstKit };
  Tag tag = Tag::Var;
  std::string var;
  TermPtr fun, arg;
  Elem cval;
  KitSlot slot = KitSlot::K;
};

inline TermPtr tvar(const std::string& n) {
  return std::make_shared<Term>(Term{Term::Tag::Var, n, nullptr, nullptr, Elem(), KitSlot::K});
}
inline TermPtr tapp(TermPtr f, TermPtr a) {
  return std::make_shared<Term>(
      Term{Term::Tag::App, "", std::move(f), std::move(a), Elem(), KitSlot::K});
}
inline TermPtr tconst(const Elem& e) {
  return std::make_shared<Term>(Term{Term::Tag::ConstElem, "", nullptr, nullptr, e, KitSlot::K});
}
inline TermPtr tkit(KitSlot s) {
  return std::make_shared<Term>(Term{Term::Tag::ConstKit, "", nullptr, nullptr, Elem(), s});
}
template <typename... Ts>
inline TermPtr tapps(TermPtr head, Ts... rest) {
  TermPtr acc = std::move(head);
  ((acc = tapp(acc, rest)), ...);
  return acc;
}

inline int term_size(const TermPtr& t) {
  if (t->tag == Term::Tag::App) return 1 + term_size(t->fun) + term_size(t->arg);
  return 1;
}

inline void free_vars_into(const TermPtr& t, std::set<std::string>& out) {
  switch (t->tag) {
    case Term::Tag::Var: out.insert(t->var); break;
    case Term::Tag::App:
      free_vars_into(t->fun, out);
      free_vars_into(t->arg, out);
      break;
    default: break;
  }
}

inline std::set<std::string> free_vars(const TermPtr& t) {
  std::set<std::string> out;
  free_vars_into(t, out);
  return out;
}

inline bool occurs(const std::string& x, const TermPtr& t) {
  switch (t->tag) {
    case Term::Tag::Var: return t->var == x;
    case Term::Tag::App: return occurs(x, t->fun) || occurs(x, t->arg);
    default: return false;
  }
}

inline std::string term_show(const TermPtr& t) {
  switch (t->tag) {
    case Term::Tag::Var: return t->var;
    case Term::Tag::ConstElem: return t->cval.show();
    case Term::Tag::ConstKit: return kit_slot_name(t->slot);
    case Term::Tag::App: {
      std::string l = term_show(t->fun);
      std::string r = term_show(t->arg);
      if (t->arg->tag == Term::Tag::App) r = "(" + r + ")";
      return l + " " + r;
    }
  }
  return "?";
}

// Structural comparison (used for deterministic search orders).
inline int term_cmp(const TermPtr& a, const TermPtr& b) {
  if (a->tag != b->tag) return static_cast<int>(a->tag) < static_cast<int>(b->tag) ? -1 : 1;
  switch (a->tag) {
    case Term::Tag::Var: return a->var == b->var ? 0 : (a->var < b->var ? -1 : 1);
    case Term::Tag::ConstElem: return elem_cmp(a->cval, b->cval);
    case Term::Tag::ConstKit:
      return a->slot == b->slot ? 0 : (static_cast<int>(a->slot) < static_cast<int>(b->slot) ? -1 : 1);
    case Term::Tag::App: {
      int c = term_cmp(a->fun, b->fun);
      if (c != 0) return c;
      return term_cmp(a->arg, b->arg);
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Substitution of variables by terms (used for certificate composition).

inline TermPtr term_subst(const TermPtr& t,
                          const std::map<std::string, TermPtr>& sub) {
  switch (t->tag) {
    case Term::Tag::Var: {
      auto it = sub.find(t->var);
      return it == sub.end() ? t : it->second;
    }
    case Term::Tag::App: {
      TermPtr f = term_subst(t->fun, sub);
      TermPtr a = term_subst(t->arg, sub);
      if (f.get() == t->fun.get() && a.get() == t->arg.get()) return t;
      return tapp(f, a);
    }
    default: return t;
  }
}

// ---------------------------------------------------------------------------
// Parser.  Grammar:
//   request := '\' ident+ '.' apps | apps
//   apps    := atom+                 (application, left associative)
//   atom    := ident | '(' apps ')'
// Identifiers matching kit names (k s i kbar P P0 P1, plus capitalized
// aliases) become kit constants unless bound by the lambda or listed as
// protected parameter names.

struct LambdaTerm {
  std::vector<std::string> binders;
  TermPtr body;
};

namespace detail {

inline void skip_ws(const std::string& t, std::size_t& i) {
  while (i < t.size() && (t[i] == ' ' || t[i] == '\t')) ++i;
}

inline std::string parse_ident(const std::string& t, std::size_t& i) {
  skip_ws(t, i);
  require(i < t.size(), "term parse: expected identifier in '" + t + "'");
  char c = t[i];
  require(std::isalpha(static_cast<unsigned char>(c)) || c == '_',
          "term parse: expected identifier at '" + t.substr(i) + "'");
  std::string out;
  while (i < t.size() &&
         (std::isalnum(static_cast<unsigned char>(t[i])) || t[i] == '_' || t[i] == '\'')) {
    out += t[i];
    ++i;
  }
  return out;
}

inline TermPtr parse_apps(const std::string& t, std::size_t& i);

inline TermPtr parse_atom(const std::string& t, std::size_t& i) {
  skip_ws(t, i);
  require(i < t.size(), "term parse: unexpected end of '" + t + "'");
  if (t[i] == '(') {
    ++i;
    TermPtr inner = parse_apps(t, i);
    skip_ws(t, i);
    require(i < t.size() && t[i] == ')', "term parse: missing ')' in '" + t + "'");
    ++i;
    return inner;
  }
  return tvar(parse_ident(t, i));
}

inline TermPtr parse_apps(const std::string& t, std::size_t& i) {
  TermPtr acc = parse_atom(t, i);
  while (true) {
    skip_ws(t, i);
    if (i >= t.size() || t[i] == ')') break;
    acc = tapp(acc, parse_atom(t, i));
  }
  return acc;
}

inline TermPtr resolve_kit(const TermPtr& t, const std::set<std::string>& shadowed) {
  switch (t->tag) {
    case Term::Tag::Var: {
      if (shadowed.count(t->var)) return t;
      if (auto slot = kit_slot_from(t->var)) return tkit(*slot);
      return t;
    }
    case Term::Tag::App: return tapp(resolve_kit(t->fun, shadowed), resolve_kit(t->arg, shadowed));
    default: return t;
  }
}

}  // namespace detail

inline LambdaTerm parse_lambda(const std::string& text,
                               const std::set<std::string>& params = {}) {
  std::size_t i = 0;
  detail::skip_ws(text, i);
  LambdaTerm out;
  if (i < text.size() && text[i] == '\\') {
    ++i;
    while (true) {
      out.binders.push_back(detail::parse_ident(text, i));
      detail::skip_ws(text, i);
      require(i < text.size(), "term parse: lambda without body in '" + text + "'");
      if (text[i] == '.') {
        ++i;
        break;
      }
    }
  }
  TermPtr body = detail::parse_apps(text, i);
  detail::skip_ws(text, i);
  require(i == text.size(), "term parse: trailing input in '" + text + "'");
  std::set<std::string> shadowed(out.binders.begin(), out.binders.end());
  shadowed.insert(params.begin(), params.end());
  out.body = detail::resolve_kit(body, shadowed);
  return out;
}

inline TermPtr parse_term(const std::string& text, const std::set<std::string>& params = {}) {
  LambdaTerm lt = parse_lambda(text, params);
  require(lt.binders.empty(), "parse_term: unexpected lambda in '" + text + "'");
  return lt.body;
}

// ---------------------------------------------------------------------------
// Bracket abstraction: the three-clause translation, no eta optimization.
//   [x]x        = s k k
//   [x]t        = k t                 when x not free in t
//   [x](l r)    = s ([x]l) ([x]r)
// Multi-variable abstraction iterates right to left.

inline TermPtr bracket_abstract(const std::string& x, const TermPtr& t) {
  if (t->tag == Term::Tag::Var && t->var == x)
    return tapp(tapp(tkit(KitSlot::S), tkit(KitSlot::K)), tkit(KitSlot::K));
  if (!occurs(x, t)) return tapp(tkit(KitSlot::K), t);
  require(t->tag == Term::Tag::App, "bracket_abstract: unreachable shape");
  return tapp(tapp(tkit(KitSlot::S), bracket_abstract(x, t->fun)),
              bracket_abstract(x, t->arg));
}

inline TermPtr bracket_abstract_all(const std::vector<std::string>& xs, TermPtr t) {
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) t = bracket_abstract(*it, t);
  return t;
}

inline TermPtr compile_lambda(const LambdaTerm& lt) {
  return bracket_abstract_all(lt.binders, lt.body);
}

// ---------------------------------------------------------------------------
// Definedness unfolding: one constraint per application node, evaluation
// order left to right.  eval_term follows exactly this plan, so a defined
// evaluation is a replay of the formula's witnesses.

struct DefRef {
  bool from_step = false;
  std::size_t idx = 0;  // leaf index or step index
};

struct DefStep {
  DefRef lhs, rhs;
  TermPtr lhs_term, rhs_term;  // subterms, for printing
};

struct EvalPlan {
  std::vector<TermPtr> leaves;  // left-to-right leaf occurrences
  std::vector<DefStep> steps;   // postorder, left argument first
  DefRef result;
  TermPtr source;
};

namespace detail {
inline DefRef plan_walk(const TermPtr& t, EvalPlan& plan) {
  if (t->tag != Term::Tag::App) {
    plan.leaves.push_back(t);
    return DefRef{false, plan.leaves.size() - 1};
  }
  DefRef l = plan_walk(t->fun, plan);
  DefRef r = plan_walk(t->arg, plan);
  plan.steps.push_back(DefStep{l, r, t->fun, t->arg});
  return DefRef{true, plan.steps.size() - 1};
}
}  // namespace detail

inline EvalPlan unfold_definedness(const TermPtr& t) {
  EvalPlan plan;
  plan.source = t;
  plan.result = detail::plan_walk(t, plan);
  return plan;
}

// Rendering with optional valuation: "D(x, y) & D(x y, z)".
inline std::string def_show(const EvalPlan& plan,
                            const std::map<std::string, std::string>& names = {}) {
  std::function<std::string(const TermPtr&)> sub_show = [&](const TermPtr& t) -> std::string {
    if (t->tag == Term::Tag::Var) {
      auto it = names.find(t->var);
      return it != names.end() ? it->second : t->var;
    }
    if (t->tag == Term::Tag::App) {
      std::string l = sub_show(t->fun);
      std::string r = sub_show(t->arg);
      if (t->arg->tag == Term::Tag::App) r = "(" + r + ")";
      return l + " " + r;
    }
    return term_show(t);
  };
  std::string out;
  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    if (k) out += " & ";
    out += "D(" + sub_show(plan.steps[k].lhs_term) + ", " + sub_show(plan.steps[k].rhs_term) + ")";
  }
  if (plan.steps.empty()) out = "true";
  return out;
}

// ---------------------------------------------------------------------------
// Element-level evaluation against a backend application.

struct TermEnv {
  std::function<std::optional<Elem>(const std::string&)> var;
  std::function<std::optional<Elem>(KitSlot)> kit;
};

inline TermEnv env_of_map(const std::map<std::string, Elem>& m) {
  return TermEnv{[m](const std::string& n) -> std::optional<Elem> {
                   auto it = m.find(n);
                   if (it == m.end()) return std::nullopt;
                   return it->second;
                 },
                 [](KitSlot) -> std::optional<Elem> { return std::nullopt; }};
}

// Evaluates along the definedness plan; the first Undefined or Unknown step
// decides the outcome.  Trace receives the value of each application step.
inline AppOutcome eval_plan(const EvalPlan& plan, const TermEnv& env, const AppFn& app,
                            std::uint64_t fuel, std::vector<Elem>* trace = nullptr) {
  std::vector<Elem> leaf_vals;
  leaf_vals.reserve(plan.leaves.size());
  for (const auto& leaf : plan.leaves) {
    switch (leaf->tag) {
      case Term::Tag::Var: {
        auto v = env.var ? env.var(leaf->var) : std::nullopt;
        require(v.has_value(), "eval_term: unbound variable " + leaf->var);
        leaf_vals.push_back(*v);
        break;
      }
      case Term::Tag::ConstElem: leaf_vals.push_back(leaf->cval); break;
      case Term::Tag::ConstKit: {
        auto v = env.kit ? env.kit(leaf->slot) : std::nullopt;
        require(v.has_value(),
                std::string("eval_term: no kit binding for ") + kit_slot_name(leaf->slot));
        leaf_vals.push_back(*v);
        break;
      }
      default: fail("eval_term: nested application leaf");
    }
  }
  std::vector<Elem> step_vals;
  step_vals.reserve(plan.steps.size());
  auto deref = [&](const DefRef& r) -> const Elem& {
    return r.from_step ? step_vals[r.idx] : leaf_vals[r.idx];
  };
  for (const auto& st : plan.steps) {
    AppOutcome out = app(deref(st.lhs), deref(st.rhs), fuel);
    if (!out.is_value()) return out;
    step_vals.push_back(out.val);
    if (trace) trace->push_back(out.val);
  }
  return AppOutcome::value(deref(plan.result));
}

inline AppOutcome eval_term(const TermPtr& t, const TermEnv& env, const AppFn& app,
                            std::uint64_t fuel, std::vector<Elem>* trace = nullptr) {
  return eval_plan(unfold_definedness(t), env, app, fuel, trace);
}

// ---------------------------------------------------------------------------
// Deterministic term enumeration for bounded searches: size-major, and for a
// fixed size applications are generated with the left subtree smallest first,
// leaves in index order.

inline void enumerate_terms(int leaf_count_vars, int max_size,
                            const std::function<bool(const TermPtr&)>& visit) {
  std::vector<std::vector<TermPtr>> by_size(static_cast<std::size_t>(max_size) + 1);
  for (int sz = 1; sz <= max_size; ++sz) {
    auto& bucket = by_size[static_cast<std::size_t>(sz)];
    if (sz == 1) {
      for (int v = 0; v < leaf_count_vars; ++v) bucket.push_back(tvar("g" + std::to_string(v)));
    } else {
      for (int ls = 1; ls <= sz - 2; ++ls) {
        for (const auto& l : by_size[static_cast<std::size_t>(ls)])
          for (const auto& r : by_size[static_cast<std::size_t>(sz - 1 - ls)])
            bucket.push_back(tapp(l, r));
      }
    }
    for (const auto& t : bucket)
      if (!visit(t)) return;
  }
}

}  // namespace pcaw
