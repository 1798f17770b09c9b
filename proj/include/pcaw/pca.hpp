#pragma once

// Relative partial combinatory algebras over a backend world: carriers with a
// partial application, a designated sub-PCA of privileged realizers, filters
// of realizer sets with replayable membership certificates, and synthesis of
// realizers from lambda requests.

#include "pcaw/backend.hpp"
#include "pcaw/terms.hpp"

namespace pcaw {

struct Pca;

// ---------------------------------------------------------------------------
// Realizer sets: subsets of the carrier, finitely listed or given by a
// decidable membership test (optionally with its own enumerator).

struct RSet {
  enum class Kind { Finite, Pred, Full };
  Kind kind = Kind::Finite;
  std::vector<Elem> elems;  // encoded, sorted, deduped
  std::function<bool(const Elem&)> pred;
  std::function<std::optional<Elem>(std::uint64_t)> nth;  // optional, Pred only
  std::string label;

  static RSet finite(std::vector<Elem> xs, std::string label = "") {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    RSet r;
    r.kind = Kind::Finite;
    r.elems = std::move(xs);
    r.label = std::move(label);
    return r;
  }
  static RSet singleton(const Elem& e, std::string label = "") {
    return finite({e}, std::move(label));
  }
  static RSet predicate(std::function<bool(const Elem&)> p, std::string label,
                        std::function<std::optional<Elem>(std::uint64_t)> nth = nullptr) {
    RSet r;
    r.kind = Kind::Pred;
    r.pred = std::move(p);
    r.nth = std::move(nth);
    r.label = std::move(label);
    return r;
  }
  static RSet full(std::string label = "A") {
    RSet r;
    r.kind = Kind::Full;
    r.label = std::move(label);
    return r;
  }

  bool is_finite() const { return kind == Kind::Finite; }

  bool contains(const Obj& carrier, const Elem& e) const {
    switch (kind) {
      case Kind::Finite: return std::binary_search(elems.begin(), elems.end(), e);
      case Kind::Pred: return pred(e);
      case Kind::Full: return carrier.contains(e);
    }
    return false;
  }

  std::string show() const {
    if (kind == Kind::Finite) {
      if (!label.empty()) return label;
      return show_list(elems);
    }
    return label.empty() ? std::string("<set>") : label;
  }
};

// Subset test: exact for finite left sides, enumeration-bounded otherwise.
inline Tri rset_subset(const Obj& carrier, const RSet& x, const RSet& y,
                       const Budget& budget) {
  if (x.is_finite()) {
    for (const auto& e : x.elems)
      if (!y.contains(carrier, e)) return Tri::False;
    return Tri::True;
  }
  // sample through the enumerator, or the carrier when there is none
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(budget.enum_limit); ++i) {
    std::optional<Elem> e = x.nth ? x.nth(i) : carrier.nth_elem(i);
    if (!e) {
      if (x.nth) return Tri::True;  // x exhausted: every member checked
      break;
    }
    if (!x.nth && !x.contains(carrier, *e)) continue;
    if (!y.contains(carrier, *e)) return Tri::False;
  }
  if (!x.nth && carrier.finite() &&
      carrier.size() <= static_cast<std::uint64_t>(budget.enum_limit))
    return Tri::True;
  return Tri::Dunno;
}

// Values of a finite set inside one fiber.
inline std::vector<Elem> rset_fiber_values(const RSet& x, const Obj& carrier,
                                           std::size_t fiber) {
  require(x.is_finite(), "rset_fiber_values: not finite");
  std::vector<Elem> out;
  for (const auto& e : x.elems) {
    if (!carrier.world.fibered()) {
      out.push_back(e);
      continue;
    }
    if (e.tag() == Elem::Tag::Pair && e.first() == carrier.world.base[fiber])
      out.push_back(e.second());
  }
  if (!carrier.world.fibered() && fiber != 0) out.clear();
  return out;
}

// ---------------------------------------------------------------------------
// Combinator kit: one raw value per fiber for each slot.

struct CombinatorKit {
  std::map<KitSlot, std::vector<Elem>> slots;

  bool has(KitSlot s) const { return slots.count(s) > 0; }
  const Elem& at(KitSlot s, std::size_t fiber = 0) const {
    auto it = slots.find(s);
    require(it != slots.end(), std::string("kit: missing slot ") + kit_slot_name(s));
    require(fiber < it->second.size(), "kit: fiber out of range");
    return it->second[fiber];
  }
};

// ---------------------------------------------------------------------------
// The PCA structure.  Application acts on raw fiber values; the encoded
// wrapper checks that both arguments live over the same base point.

struct Pca {
  std::string name;
  World world = World::set_world();
  Obj carrier;
  RSet designated;  // C: app-closed, contains the kit
  CombinatorKit kit;
  std::function<AppOutcome(std::size_t, const Elem&, const Elem&, std::uint64_t)> app_raw;
  bool exact = true;  // application never answers Unknown on carrier values
  std::function<Elem(std::size_t, Rng&)> sample_raw;
  std::function<std::optional<Elem>(std::size_t, std::uint64_t)> designated_nth_raw;
  Budget defaults;

  std::size_t fiber_count() const { return world.base.size(); }
  Elem encode(std::size_t fiber, const Elem& raw) const { return carrier.encode(fiber, raw); }

  AppOutcome app_at(std::size_t fiber, const Elem& a, const Elem& b,
                    std::uint64_t fuel) const {
    return app_raw(fiber, a, b, fuel);
  }

  // encoded application
  AppOutcome app(const Elem& a, const Elem& b, std::uint64_t fuel) const {
    if (!world.fibered()) return app_raw(0, a, b, fuel);
    require(a.tag() == Elem::Tag::Pair && b.tag() == Elem::Tag::Pair,
            "pca: applying unfibered elements in a fibered world");
    require(a.first() == b.first(), "pca: application across fibers");
    std::size_t fi = world.fiber_index(a.first());
    AppOutcome out = app_raw(fi, a.second(), b.second(), fuel);
    if (!out.is_value()) return out;
    return AppOutcome::value(Elem::pair(a.first(), out.val));
  }

  AppFn app_fn_at(std::size_t fiber) const {
    auto f = app_raw;
    return [f, fiber](const Elem& a, const Elem& b, std::uint64_t fuel) {
      return f(fiber, a, b, fuel);
    };
  }

  Elem sample_elem(Rng& rng) const {
    std::size_t fi = static_cast<std::size_t>(rng.below(world.base.size()));
    return encode(fi, sample_raw(fi, rng));
  }

  TermEnv kit_env(std::size_t fiber) const {
    const CombinatorKit* k = &kit;
    return TermEnv{[](const std::string&) -> std::optional<Elem> { return std::nullopt; },
                   [k, fiber](KitSlot s) -> std::optional<Elem> {
                     if (!k->has(s)) return std::nullopt;
                     return k->at(s, fiber);
                   }};
  }

  // the kit slot as a section set {(i, kit_i)}
  RSet kit_set(KitSlot s) const {
    std::vector<Elem> xs;
    for (std::size_t i = 0; i < fiber_count(); ++i) xs.push_back(encode(i, kit.at(s, i)));
    return RSet::finite(std::move(xs), std::string("{") + kit_slot_name(s) + "}");
  }

  RSet section_set(const std::vector<Elem>& raw_per_fiber, std::string label = "") const {
    require(raw_per_fiber.size() == fiber_count(), "section_set: wrong length");
    std::vector<Elem> xs;
    for (std::size_t i = 0; i < raw_per_fiber.size(); ++i)
      xs.push_back(encode(i, raw_per_fiber[i]));
    return RSet::finite(std::move(xs), std::move(label));
  }
};

// Derive the kit beyond k and s by compiling the defining lambdas and
// evaluating them with the application of one fiber.
inline CombinatorKit derive_kit(
    const std::function<AppOutcome(std::size_t, const Elem&, const Elem&, std::uint64_t)>&
        app_raw,
    const std::vector<Elem>& k_per_fiber, const std::vector<Elem>& s_per_fiber,
    std::uint64_t fuel) {
  CombinatorKit kit;
  kit.slots[KitSlot::K] = k_per_fiber;
  kit.slots[KitSlot::S] = s_per_fiber;
  const std::vector<std::pair<KitSlot, const char*>> defs = {
      {KitSlot::I, "\\x. x"},
      {KitSlot::Kbar, "\\x y. y"},
      {KitSlot::P, "\\x y z. z x y"},
      {KitSlot::P0, "\\x. x k"},
      {KitSlot::P1, "\\x. x kbar"},
  };
  std::size_t fibers = k_per_fiber.size();
  for (const auto& [slot, src] : defs) {
    TermPtr compiled = compile_lambda(parse_lambda(src));
    std::vector<Elem> vals;
    bool ok = true;
    for (std::size_t fi = 0; fi < fibers && ok; ++fi) {
      CombinatorKit* kp = &kit;
      TermEnv env{[](const std::string&) -> std::optional<Elem> { return std::nullopt; },
                  [kp, fi](KitSlot s) -> std::optional<Elem> {
                    if (!kp->has(s)) return std::nullopt;
                    return kp->at(s, fi);
                  }};
      AppFn app = [&app_raw, fi](const Elem& a, const Elem& b, std::uint64_t f) {
        return app_raw(fi, a, b, f);
      };
      AppOutcome out = eval_term(compiled, env, app, fuel);
      if (!out.is_value())
        ok = false;
      else
        vals.push_back(out.val);
    }
    if (ok) kit.slots[slot] = std::move(vals);
  }
  return kit;
}

// ---------------------------------------------------------------------------
// Set-level application: U v V is defined when every same-fiber pair is, and
// its value is the image set.

struct SetApp {
  Tri defined = Tri::Dunno;
  RSet image;
  std::optional<std::pair<Elem, Elem>> undef_pair;
  std::uint64_t checked_pairs = 0, dunno_pairs = 0;
};

namespace detail {

// bounded listing of a non-finite set through its enumerator or the carrier
inline std::vector<Elem> rset_sample_members(const RSet& x, const Obj& carrier,
                                             const Budget& budget, bool* exhaustive) {
  std::vector<Elem> out;
  *exhaustive = false;
  if (x.is_finite()) {
    *exhaustive = true;
    return x.elems;
  }
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(budget.enum_limit); ++i) {
    std::optional<Elem> e = x.nth ? x.nth(i) : carrier.nth_elem(i);
    if (!e) {
      *exhaustive = true;
      break;
    }
    if (x.contains(carrier, *e)) out.push_back(*e);
    if (out.size() >= static_cast<std::size_t>(budget.enum_limit)) break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

inline SetApp set_apply(const Pca& pca, const RSet& u, const RSet& v, const Budget& budget) {
  SetApp out;
  bool u_exact = false, v_exact = false;
  std::vector<Elem> us = detail::rset_sample_members(u, pca.carrier, budget, &u_exact);
  std::vector<Elem> vs = detail::rset_sample_members(v, pca.carrier, budget, &v_exact);
  bool exhaustive = u_exact && v_exact;

  std::vector<Elem> image;
  bool saw_dunno = false;
  for (const auto& a : us) {
    for (const auto& b : vs) {
      if (pca.world.fibered() && a.first() != b.first()) continue;
      out.checked_pairs++;
      AppOutcome r = pca.app(a, b, budget.fuel);
      if (r.is_undefined()) {
        out.defined = Tri::False;
        out.undef_pair = {a, b};
        return out;
      }
      if (r.is_unknown()) {
        saw_dunno = true;
        out.dunno_pairs++;
        continue;
      }
      image.push_back(r.val);
    }
  }
  out.image = RSet::finite(std::move(image));
  out.defined = (saw_dunno || !exhaustive) ? Tri::Dunno : Tri::True;
  return out;
}

// ---------------------------------------------------------------------------
// Evaluating a term whose leaves are realizer sets.  Variables are g0, g1, ...
// by position; kit leaves become section singletons.

struct SetEval {
  Tri defined = Tri::Dunno;
  RSet value;
  std::optional<std::pair<Elem, Elem>> undef_pair;
  std::uint64_t dunno = 0;
};

inline SetEval eval_term_sets(const Pca& pca, const TermPtr& t, const std::vector<RSet>& gens,
                              const Budget& budget) {
  switch (t->tag) {
    case Term::Tag::Var: {
      require(t->var.size() > 1 && t->var[0] == 'g', "eval_term_sets: leaf " + t->var);
      std::size_t i = static_cast<std::size_t>(std::stoul(t->var.substr(1)));
      require(i < gens.size(), "eval_term_sets: generator index out of range");
      return SetEval{Tri::True, gens[i], std::nullopt, 0};
    }
    case Term::Tag::ConstElem: return SetEval{Tri::True, RSet::singleton(t->cval), std::nullopt, 0};
    case Term::Tag::ConstKit: return SetEval{Tri::True, pca.kit_set(t->slot), std::nullopt, 0};
    case Term::Tag::App: {
      SetEval l = eval_term_sets(pca, t->fun, gens, budget);
      if (l.defined == Tri::False) return l;
      SetEval r = eval_term_sets(pca, t->arg, gens, budget);
      if (r.defined == Tri::False) return r;
      SetApp ap = set_apply(pca, l.value, r.value, budget);
      SetEval out;
      out.defined = tri_and(tri_and(l.defined, r.defined), ap.defined);
      out.value = ap.image;
      out.undef_pair = ap.undef_pair;
      out.dunno = l.dunno + r.dunno + ap.dunno_pairs;
      if (ap.defined == Tri::False) out.defined = Tri::False;
      return out;
    }
  }
  fail("eval_term_sets: unhandled tag");
}

// ---------------------------------------------------------------------------
// Filters and membership certificates.

struct FilterCert;
using FilterCertPtr = std::shared_ptr<const FilterCert>;

struct CertArg {
  RSet set;
  FilterCertPtr why;
};

struct FilterCert {
  enum class Kind { ByGenerator, BySection, ByInhabitant, ByTerm, ByTransport, ByComponents };
  Kind kind = Kind::ByGenerator;
  std::size_t index = 0;            // ByGenerator
  std::vector<Elem> section;        // BySection / ByInhabitant: encoded, one per fiber
  TermPtr term;                     // ByTerm
  std::vector<CertArg> args;        // ByTerm
  std::string via;                  // ByTransport / ByComponents: construction name
  FilterCertPtr inner;              // ByTransport
  std::vector<FilterCertPtr> parts; // ByComponents

  static FilterCertPtr by_generator(std::size_t i) {
    auto c = std::make_shared<FilterCert>();
    c->kind = Kind::ByGenerator;
    c->index = i;
    return c;
  }
  static FilterCertPtr by_section(std::vector<Elem> sec) {
    auto c = std::make_shared<FilterCert>();
    c->kind = Kind::BySection;
    c->section = std::move(sec);
    return c;
  }
  static FilterCertPtr by_inhabitant(std::vector<Elem> sec) {
    auto c = std::make_shared<FilterCert>();
    c->kind = Kind::ByInhabitant;
    c->section = std::move(sec);
    return c;
  }
  static FilterCertPtr by_term(TermPtr t, std::vector<CertArg> args) {
    auto c = std::make_shared<FilterCert>();
    c->kind = Kind::ByTerm;
    c->term = std::move(t);
    c->args = std::move(args);
    return c;
  }
  static FilterCertPtr by_transport(std::string via, FilterCertPtr inner) {
    auto c = std::make_shared<FilterCert>();
    c->kind = Kind::ByTransport;
    c->via = std::move(via);
    c->inner = std::move(inner);
    return c;
  }
  static FilterCertPtr by_components(std::string via, std::vector<FilterCertPtr> parts) {
    auto c = std::make_shared<FilterCert>();
    c->kind = Kind::ByComponents;
    c->via = std::move(via);
    c->parts = std::move(parts);
    return c;
  }

  std::string show() const {
    switch (kind) {
      case Kind::ByGenerator: return "gen[" + std::to_string(index) + "]";
      case Kind::BySection: return "section " + show_list(section);
      case Kind::ByInhabitant: return "inhabitant " + show_list(section);
      case Kind::ByTerm: {
        std::string s = "term " + term_show(term) + " @ [";
        for (std::size_t i = 0; i < args.size(); ++i)
          s += (i ? ", " : "") + args[i].set.show() + " <- " +
               (args[i].why ? args[i].why->show() : "?");
        return s + "]";
      }
      case Kind::ByTransport: return "transport(" + via + ", " + inner->show() + ")";
      case Kind::ByComponents: {
        std::string s = "components(" + via;
        for (const auto& p : parts) s += ", " + p->show();
        return s + ")";
      }
    }
    return "?";
  }
};

struct FilterGen {
  RSet set;
  std::string name;
};

struct MemberResult {
  Verdict verdict;
  FilterCertPtr cert;
  RSet witness;  // the filter element found inside U (meaningful on success)
};

struct Filter {
  enum class Mode { Generated, SingletonGenerated, Maximal };
  Mode mode = Mode::Generated;
  std::string name = "phi";
  std::vector<FilterGen> gens;  // Generated
  RSet pool;                    // SingletonGenerated / Maximal: app-closed pool
  // fast membership oracle (installed by slice/transport constructions)
  std::function<std::optional<MemberResult>(const Pca&, const RSet&, const Budget&)> oracle;
  // replay hook for ByTransport / ByComponents certificates
  std::function<std::optional<Verdict>(const Pca&, const RSet&, const FilterCertPtr&,
                                       const Budget&)>
      replay_hook;

  static Filter generated(std::vector<FilterGen> gens, std::string name = "phi") {
    Filter f;
    f.mode = Mode::Generated;
    f.gens = std::move(gens);
    f.name = std::move(name);
    return f;
  }
  // pool must be closed under defined application and contain the kit
  static Filter singleton_generated(RSet pool, std::string name = "phi") {
    Filter f;
    f.mode = Mode::SingletonGenerated;
    f.pool = std::move(pool);
    f.name = std::move(name);
    return f;
  }
  static Filter maximal(std::string name = "max") {
    Filter f;
    f.mode = Mode::Maximal;
    f.pool = RSet::full();
    f.name = std::move(name);
    return f;
  }
};

// canonical filter of a relative PCA: singletons from the designated sub-PCA
inline Filter canonical_filter(const Pca& pca) {
  RSet pool = pca.designated;
  if (!pool.nth && pca.designated_nth_raw && !pca.world.fibered()) {
    auto g = pca.designated_nth_raw;
    pool.nth = [g](std::uint64_t i) { return g(0, i); };
  }
  return Filter::singleton_generated(std::move(pool), "phi_C");
}

namespace detail {

// Search one inhabitant of U n pool per fiber.  Exact refutation only if U is
// finite (then the scan is exhaustive).
inline MemberResult singleton_member(const Pca& pca, const RSet& pool, const RSet& u,
                                     const Budget& budget, bool pool_is_designated) {
  std::size_t fibers = pca.fiber_count();
  std::vector<Elem> section;
  Coverage cov;
  for (std::size_t fi = 0; fi < fibers; ++fi) {
    std::optional<Elem> found;
    if (u.is_finite()) {
      for (const auto& e : u.elems) {
        if (pca.world.fibered() && pca.world.fiber_index(e.first()) != fi) continue;
        cov.checked++;
        if (pool.contains(pca.carrier, e)) {
          found = e;
          cov.passed++;
          break;
        }
      }
      if (!found)
        return MemberResult{
            Verdict::refuted("no member of " + pool.show() + " inside U at fiber " +
                                 pca.world.base[fi].show(),
                             cov),
            nullptr, RSet{}};
    } else if (pool.is_finite()) {
      for (const auto& cand : pool.elems) {
        if (pca.world.fibered() &&
            (cand.tag() != Elem::Tag::Pair || pca.world.fiber_index(cand.first()) != fi))
          continue;
        cov.checked++;
        if (u.contains(pca.carrier, cand)) {
          found = cand;
          cov.passed++;
          break;
        }
      }
      if (!found)
        return MemberResult{
            Verdict::unknown("pool exhausted without a witness inside U", cov), nullptr,
            RSet{}};
    } else {
      // enumerate the pool (or carrier) looking for a U member
      for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(budget.enum_limit); ++i) {
        std::optional<Elem> cand;
        if (pool.nth)
          cand = pool.nth(i);
        else if (pca.designated_nth_raw && pool_is_designated) {
          auto raw = pca.designated_nth_raw(fi, i);
          if (raw) cand = pca.encode(fi, *raw);
        } else {
          cand = pca.carrier.nth_elem(i);
        }
        if (!cand) break;
        if (pca.world.fibered() &&
            (cand->tag() != Elem::Tag::Pair ||
             pca.world.fiber_index(cand->first()) != fi))
          continue;
        cov.checked++;
        if (pool.contains(pca.carrier, *cand) && u.contains(pca.carrier, *cand)) {
          found = *cand;
          cov.passed++;
          break;
        }
      }
      if (!found)
        return MemberResult{Verdict::unknown("no witness found within the enumeration budget",
                                             cov),
                            nullptr, RSet{}};
    }
    section.push_back(*found);
  }
  auto cert = pool_is_designated ? FilterCert::by_section(section)
                                 : FilterCert::by_inhabitant(section);
  RSet witness = RSet::finite(section, "{witness}");
  return MemberResult{Verdict::proven(cov), cert, witness};
}

}  // namespace detail

inline MemberResult filter_member(const Pca& pca, const Filter& filter, const RSet& u,
                                  const Budget& budget) {
  if (filter.oracle) {
    if (auto r = filter.oracle(pca, u, budget)) return *r;
  }
  if (filter.mode != Filter::Mode::Generated) {
    bool designated_pool = filter.mode == Filter::Mode::SingletonGenerated;
    return detail::singleton_member(pca, filter.pool, u, budget, designated_pool);
  }

  Coverage cov;
  // fast path: a generator already below U
  for (std::size_t i = 0; i < filter.gens.size(); ++i) {
    cov.checked++;
    if (rset_subset(pca.carrier, filter.gens[i].set, u, budget) == Tri::True) {
      cov.passed++;
      return MemberResult{Verdict::proven(cov), FilterCert::by_generator(i),
                          filter.gens[i].set};
    }
  }

  // bounded search for a term over the finite generators
  std::vector<RSet> finite_gens;
  std::vector<std::size_t> gen_index;
  for (std::size_t i = 0; i < filter.gens.size(); ++i) {
    if (filter.gens[i].set.is_finite()) {
      finite_gens.push_back(filter.gens[i].set);
      gen_index.push_back(i);
    }
  }
  MemberResult out{Verdict::unknown("no derivation found within the term budget", cov),
                   nullptr, RSet{}};
  if (finite_gens.empty()) return out;
  int visited = 0;
  enumerate_terms(
      static_cast<int>(finite_gens.size()), budget.term_size, [&](const TermPtr& t) {
        if (++visited > budget.enum_limit) return false;
        cov.checked++;
        SetEval ev = eval_term_sets(pca, t, finite_gens, budget);
        if (ev.defined != Tri::True) return true;
        if (rset_subset(pca.carrier, ev.value, u, budget) != Tri::True) return true;
        cov.passed++;
        std::vector<CertArg> args;
        for (std::size_t j = 0; j < finite_gens.size(); ++j)
          args.push_back(CertArg{finite_gens[j], FilterCert::by_generator(gen_index[j])});
        out = MemberResult{Verdict::proven(cov), FilterCert::by_term(t, std::move(args)),
                           ev.value};
        return false;
      });
  out.verdict.cov = cov;
  return out;
}

// Replay a certificate against a filter and a target set.
inline Verdict replay_cert(const Pca& pca, const Filter& filter, const RSet& u,
                           const FilterCertPtr& cert, const Budget& budget) {
  require(cert != nullptr, "replay_cert: missing certificate");
  switch (cert->kind) {
    case FilterCert::Kind::ByGenerator: {
      if (cert->index >= filter.gens.size())
        return Verdict::refuted("certificate names generator " + std::to_string(cert->index) +
                                " of " + std::to_string(filter.gens.size()));
      Tri t = rset_subset(pca.carrier, filter.gens[cert->index].set, u, budget);
      if (t == Tri::True) return Verdict::proven(Coverage{1, 1, 0, 1});
      if (t == Tri::False)
        return Verdict::refuted("generator " + filter.gens[cert->index].name +
                                " is not below the target set");
      return Verdict::unknown("generator subset check exhausted its budget");
    }
    case FilterCert::Kind::BySection:
    case FilterCert::Kind::ByInhabitant: {
      bool want_designated = cert->kind == FilterCert::Kind::BySection;
      const RSet& pool = want_designated ? pca.designated : filter.pool;
      if (cert->section.size() != pca.fiber_count())
        return Verdict::refuted("section length does not match the base");
      Coverage cov;
      for (std::size_t fi = 0; fi < cert->section.size(); ++fi) {
        const Elem& e = cert->section[fi];
        cov.checked++;
        if (pca.world.fibered() &&
            (e.tag() != Elem::Tag::Pair || pca.world.fiber_index(e.first()) != fi))
          return Verdict::refuted("section element " + e.show() + " is not over fiber " +
                                  pca.world.base[fi].show());
        if (!pool.contains(pca.carrier, e))
          return Verdict::refuted("section element " + e.show() + " is outside " + pool.show());
        if (!u.contains(pca.carrier, e))
          return Verdict::refuted("section element " + e.show() + " is outside the target set");
        cov.passed++;
      }
      cov.domain = cov.checked;
      return Verdict::proven(cov);
    }
    case FilterCert::Kind::ByTerm: {
      std::vector<RSet> gens;
      std::vector<Verdict> vs;
      for (const auto& a : cert->args) {
        gens.push_back(a.set);
        if (a.why) vs.push_back(replay_cert(pca, filter, a.set, a.why, budget));
      }
      SetEval ev = eval_term_sets(pca, cert->term, gens, budget);
      if (ev.defined == Tri::False)
        return Verdict::refuted("term application undefined at " +
                                (ev.undef_pair ? ev.undef_pair->first.show() + " . " +
                                                     ev.undef_pair->second.show()
                                               : std::string("?")));
      if (ev.defined == Tri::Dunno)
        vs.push_back(Verdict::unknown("term evaluation exhausted its fuel"));
      Tri sub = rset_subset(pca.carrier, ev.value, u, budget);
      if (sub == Tri::False)
        return Verdict::refuted("term value is not below the target set");
      if (sub == Tri::Dunno) vs.push_back(Verdict::unknown("subset check exhausted its budget"));
      vs.push_back(Verdict::proven(Coverage{1, 1, 0, 1}));
      return verdict_all(vs);
    }
    case FilterCert::Kind::ByTransport:
    case FilterCert::Kind::ByComponents: {
      if (filter.replay_hook) {
        if (auto v = filter.replay_hook(pca, u, cert, budget)) return *v;
      }
      return Verdict::unknown("certificate kind needs its construction context to replay");
    }
  }
  return Verdict::unknown("unhandled certificate kind");
}

// Properness: the empty set must stay outside the filter.
inline Verdict filter_proper(const Pca& pca, const Filter& filter, const Budget& budget) {
  auto inhabited = [&](const RSet& x, const std::string& name) -> Verdict {
    Coverage cov;
    for (std::size_t fi = 0; fi < pca.fiber_count(); ++fi) {
      cov.checked++;
      bool found = false;
      if (x.is_finite()) {
        for (const auto& e : x.elems) {
          if (!pca.world.fibered() || pca.world.fiber_index(e.first()) == fi) {
            found = true;
            break;
          }
        }
        if (!found)
          return Verdict::refuted(name + " has an empty fiber at " +
                                  pca.world.base[fi].show());
      } else {
        for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(budget.enum_limit); ++i) {
          std::optional<Elem> cand;
          if (x.nth)
            cand = x.nth(i);
          else if (pca.designated_nth_raw) {
            auto raw = pca.designated_nth_raw(fi, i);
            if (raw) cand = pca.encode(fi, *raw);
          } else
            cand = pca.carrier.nth_elem(i);
          if (!cand) break;
          if (pca.world.fibered() &&
              (cand->tag() != Elem::Tag::Pair || pca.world.fiber_index(cand->first()) != fi))
            continue;
          if (x.contains(pca.carrier, *cand)) {
            found = true;
            break;
          }
        }
        if (!found) return Verdict::unknown(name + ": no inhabitant found within the budget");
      }
      cov.passed++;
    }
    cov.domain = cov.checked;
    return Verdict::proven(cov);
  };

  if (filter.mode != Filter::Mode::Generated) return inhabited(filter.pool, "pool");
  std::vector<Verdict> vs;
  for (const auto& g : filter.gens) vs.push_back(inhabited(g.set, "generator " + g.name));
  if (vs.empty()) vs.push_back(Verdict::proven(Coverage{0, 0, 0, 0}));
  return verdict_all(vs);
}

// ---------------------------------------------------------------------------
// Realizer synthesis from lambda requests, and verification against the
// realizing-clauses.

struct Synthesized {
  LambdaTerm lambda;
  TermPtr compiled;
  std::vector<Elem> realizer;  // raw value per fiber; empty if evaluation failed
  Verdict verified;
};

// Check the two realizing clauses for r against t over sampled (or, on small
// finite carriers, all) argument tuples of one fiber.
inline Verdict verify_realizer_at(const Pca& pca, std::size_t fiber, const Elem& r,
                                  const LambdaTerm& lt, const Budget& budget) {
  std::size_t n = lt.binders.size();
  require(n >= 1, "verify_realizer_at: no binders");
  EvalPlan body_plan = unfold_definedness(lt.body);
  AppFn app = pca.app_fn_at(fiber);

  bool exhaustive = false;
  std::vector<std::vector<Elem>> tuples;
  const Carrier& car = pca.carrier.fibers[fiber];
  if (car.finite) {
    double total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= static_cast<double>(car.elems.size());
    if (total <= 4096) {
      exhaustive = true;
      std::vector<std::size_t> idx(n, 0);
      if (!car.elems.empty()) {
        while (true) {
          std::vector<Elem> tup;
          for (auto i : idx) tup.push_back(car.elems[i]);
          tuples.push_back(tup);
          std::size_t v = 0;
          for (; v < n; ++v) {
            if (++idx[v] < car.elems.size()) break;
            idx[v] = 0;
          }
          if (v == n) break;
        }
      }
    }
  }
  if (!exhaustive) {
    Rng rng(budget.seed);
    for (int s = 0; s < budget.samples; ++s) {
      std::vector<Elem> tup;
      for (std::size_t i = 0; i < n; ++i) tup.push_back(pca.sample_raw(fiber, rng));
      tuples.push_back(tup);
    }
  }

  Coverage cov;
  bool saw_dunno = false;
  for (const auto& tup : tuples) {
    cov.checked++;
    // clause 1: prefixes r a1 ... ai stay defined for i < n
    Elem cur = r;
    bool bad = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      AppOutcome step = app(cur, tup[i], budget.fuel);
      if (step.is_undefined())
        return Verdict::refuted("prefix r " + show_list(std::vector<Elem>(tup.begin(),
                                                                          tup.begin() +
                                                                              static_cast<std::ptrdiff_t>(i) + 1)) +
                                    " is undefined",
                                cov);
      if (step.is_unknown()) {
        saw_dunno = true;
        cov.dunno++;
        bad = true;
        break;
      }
      cur = step.val;
    }
    if (bad) continue;

    // clause 2: if t(tuple) is defined then r applied through the tuple gives it
    std::map<std::string, Elem> env_map;
    for (std::size_t i = 0; i < n; ++i) env_map[lt.binders[i]] = tup[i];
    TermEnv env = env_of_map(env_map);
    env.kit = pca.kit_env(fiber).kit;
    AppOutcome want = eval_plan(body_plan, env, app, budget.fuel);
    if (want.is_unknown()) {
      saw_dunno = true;
      cov.dunno++;
      continue;
    }
    if (want.is_undefined()) {
      cov.passed++;  // nothing demanded of r here
      continue;
    }
    AppOutcome got = app(cur, tup[n - 1], budget.fuel);
    if (got.is_unknown()) {
      saw_dunno = true;
      cov.dunno++;
      continue;
    }
    if (got.is_undefined())
      return Verdict::refuted("r " + show_list(tup) + " undefined but the body has value " +
                                  want.val.show(),
                              cov);
    if (!(got.val == want.val)) {
      // truncated backends may report a strict under-set; stay honest
      if (got.val.tag() == Elem::Tag::Set && want.val.tag() == Elem::Tag::Set) {
        bool strict_subset = true;
        for (const auto& m : got.val.set_items())
          if (!(std::binary_search(want.val.set_items().begin(), want.val.set_items().end(),
                                   m)))
            strict_subset = false;
        if (strict_subset) {
          saw_dunno = true;
          cov.dunno++;
          continue;
        }
      }
      return Verdict::refuted("r " + show_list(tup) + " = " + got.val.show() +
                                  " but the body gives " + want.val.show(),
                              cov);
    }
    cov.passed++;
  }
  if (exhaustive && !saw_dunno) {
    cov.domain = cov.checked;
    return Verdict::proven(cov);
  }
  if (saw_dunno && cov.passed == 0)
    return Verdict::unknown("every sampled tuple exhausted the budget", cov);
  return Verdict::evidence(cov);
}

inline Verdict verify_realizer(const Pca& pca, const std::vector<Elem>& r_per_fiber,
                               const LambdaTerm& lt, const Budget& budget) {
  std::vector<Verdict> vs;
  for (std::size_t fi = 0; fi < pca.fiber_count(); ++fi)
    vs.push_back(verify_realizer_at(pca, fi, r_per_fiber[fi], lt, budget));
  return verdict_all(vs);
}

inline Synthesized synthesize_realizer(const Pca& pca, const std::string& lambda_src,
                                       const Budget& budget) {
  Synthesized out;
  out.lambda = parse_lambda(lambda_src);
  require(!out.lambda.binders.empty(), "synthesize_realizer: request has no binders");
  out.compiled = compile_lambda(out.lambda);
  for (std::size_t fi = 0; fi < pca.fiber_count(); ++fi) {
    AppOutcome v = eval_term(out.compiled, pca.kit_env(fi), pca.app_fn_at(fi), budget.fuel);
    if (!v.is_value()) {
      out.realizer.clear();
      out.verified = Verdict::unknown("compiled term did not evaluate to an element");
      return out;
    }
    out.realizer.push_back(v.val);
  }
  out.verified = verify_realizer(pca, out.realizer, out.lambda, budget);
  return out;
}

// ---------------------------------------------------------------------------
// The defining laws, checked elementwise over sampled (or exhaustively over
// small finite) carriers.

inline Verdict check_pca_laws(const Pca& pca, const Budget& budget) {
  Coverage cov;
  bool exhaustive = true;
  std::vector<Verdict> bad;

  // sets-with-truncation backends may report strict under-sets: treat a
  // strict subset outcome as budget noise, anything else as a refutation
  auto same = [](const Elem& got, const Elem& want) -> Tri {
    if (got == want) return Tri::True;
    if (got.tag() == Elem::Tag::Set && want.tag() == Elem::Tag::Set) {
      const auto& g = got.set_items();
      const auto& w = want.set_items();
      bool sub = true;
      for (const auto& m : g)
        if (!std::binary_search(w.begin(), w.end(), m)) sub = false;
      if (sub) return Tri::Dunno;
    }
    return Tri::False;
  };

  for (std::size_t fi = 0; fi < pca.fiber_count(); ++fi) {
    const Elem k = pca.kit.at(KitSlot::K, fi);
    const Elem s = pca.kit.at(KitSlot::S, fi);
    AppFn app = pca.app_fn_at(fi);

    std::vector<std::vector<Elem>> triples;
    const Carrier& car = pca.carrier.fibers[fi];
    if (car.finite && car.elems.size() * car.elems.size() * car.elems.size() <= 4096) {
      for (const auto& a : car.elems)
        for (const auto& b : car.elems)
          for (const auto& c : car.elems) triples.push_back({a, b, c});
    } else {
      exhaustive = false;
      Rng rng(budget.seed + fi);
      for (int i = 0; i < budget.samples; ++i)
        triples.push_back(
            {pca.sample_raw(fi, rng), pca.sample_raw(fi, rng), pca.sample_raw(fi, rng)});
    }

    for (const auto& tr : triples) {
      const Elem &a = tr[0], &b = tr[1], &c = tr[2];
      cov.checked++;
      bool dunno = false;

      // (k a) b = a
      AppOutcome ka = app(k, a, budget.fuel);
      if (ka.is_undefined())
        return Verdict::refuted("k " + a.show() + " undefined", cov);
      if (ka.is_unknown())
        dunno = true;
      else {
        AppOutcome kab = app(ka.val, b, budget.fuel);
        if (kab.is_undefined())
          return Verdict::refuted("k " + a.show() + " " + b.show() + " undefined", cov);
        if (kab.is_unknown())
          dunno = true;
        else {
          Tri eq = same(kab.val, a);
          if (eq == Tri::False)
            return Verdict::refuted("k " + a.show() + " " + b.show() + " = " +
                                        kab.val.show() + ", expected " + a.show(),
                                    cov);
          if (eq == Tri::Dunno) dunno = true;
        }
      }

      // s a b defined
      AppOutcome sa = app(s, a, budget.fuel);
      if (sa.is_undefined()) return Verdict::refuted("s " + a.show() + " undefined", cov);
      AppOutcome sab = sa.is_value() ? app(sa.val, b, budget.fuel) : sa;
      if (sab.is_undefined())
        return Verdict::refuted("s " + a.show() + " " + b.show() + " undefined", cov);
      if (!sab.is_value()) dunno = true;

      // s a b c = (a c)(b c) whenever the right side is defined
      AppOutcome ac = app(a, c, budget.fuel);
      AppOutcome bc = app(b, c, budget.fuel);
      if (ac.is_value() && bc.is_value()) {
        AppOutcome rhs = app(ac.val, bc.val, budget.fuel);
        if (rhs.is_value() && sab.is_value()) {
          AppOutcome lhs = app(sab.val, c, budget.fuel);
          if (lhs.is_undefined())
            return Verdict::refuted("s " + a.show() + " " + b.show() + " " + c.show() +
                                        " undefined but (a c)(b c) = " + rhs.val.show(),
                                    cov);
          if (lhs.is_unknown())
            dunno = true;
          else {
            Tri eq = same(lhs.val, rhs.val);
            if (eq == Tri::False)
              return Verdict::refuted("s-law mismatch at a = " + a.show() + ", b = " +
                                          b.show() + ", c = " + c.show() + ": got " +
                                          lhs.val.show() + ", expected " + rhs.val.show(),
                                      cov);
            if (eq == Tri::Dunno) dunno = true;
          }
        } else if (rhs.is_unknown() || !sab.is_value()) {
          dunno = true;
        }
      } else if (ac.is_unknown() || bc.is_unknown()) {
        dunno = true;
      }

      if (dunno)
        cov.dunno++;
      else
        cov.passed++;
    }
  }

  if (exhaustive && cov.dunno == 0) {
    cov.domain = cov.checked;
    return Verdict::proven(cov);
  }
  return Verdict::evidence(cov);
}

// The relative structure: kit inside the designated set, and closure of the
// designated set under defined application (sampled).
inline Verdict check_relative_structure(const Pca& pca, const Budget& budget) {
  Coverage cov;
  for (std::size_t fi = 0; fi < pca.fiber_count(); ++fi) {
    for (KitSlot s : {KitSlot::K, KitSlot::S}) {
      cov.checked++;
      if (!pca.designated.contains(pca.carrier, pca.encode(fi, pca.kit.at(s, fi))))
        return Verdict::refuted(std::string(kit_slot_name(s)) + " is not in " +
                                    pca.designated.show(),
                                cov);
      cov.passed++;
    }
    if (!pca.designated_nth_raw) continue;
    std::vector<Elem> cs;
    for (std::uint64_t i = 0; i < 12; ++i) {
      auto e = pca.designated_nth_raw(fi, i);
      if (!e) break;
      cs.push_back(*e);
    }
    for (const auto& a : cs) {
      for (const auto& b : cs) {
        cov.checked++;
        AppOutcome r = pca.app_at(fi, a, b, budget.fuel);
        if (r.is_value() &&
            !pca.designated.contains(pca.carrier, pca.encode(fi, r.val)))
          return Verdict::refuted(pca.designated.show() + " is not closed: " + a.show() +
                                      " . " + b.show() + " = " + r.val.show(),
                                  cov);
        if (r.is_unknown())
          cov.dunno++;
        else
          cov.passed++;
      }
    }
  }
  return Verdict::evidence(cov);
}

}  // namespace pcaw
