#pragma once
// Assemblies over a relative PCA: tracked morphisms, the regular structure,
// Gamma and nabla, prone maps, constant objects, projectivity diagnostics.

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pcaw/backend.hpp"
#include "pcaw/pca.hpp"

namespace pcaw {

// ---------------------------------------------------------------------------
// Assemblies: a world object carrying an existence relation into the carrier.
// The base object is finite at desk scale; fibers of E may be infinite.

struct Assembly {
  std::string name;
  Obj space;                           // |X|
  std::function<RSet(const Elem&)> E;  // encoded base point -> E_X(x)
};

inline Assembly make_assembly(std::string name, Obj space,
                              std::function<RSet(const Elem&)> E) {
  return Assembly{std::move(name), std::move(space), std::move(E)};
}

// finite presentation: base point -> realizer set
inline Assembly table_assembly(std::string name, Obj space, std::map<Elem, RSet> table) {
  auto tab = std::make_shared<std::map<Elem, RSet>>(std::move(table));
  for (const auto& e : space.elements())
    require(tab->count(e) > 0, "table_assembly: no realizers for " + e.show());
  return Assembly{std::move(name), std::move(space), [tab](const Elem& x) {
                    auto it = tab->find(x);
                    require(it != tab->end(), "assembly: point outside the table");
                    return it->second;
                  }};
}

inline Assembly nabla(const Pca& pca, Obj y, std::string name = "") {
  (void)pca;
  if (name.empty()) name = "nabla";
  return Assembly{std::move(name), std::move(y), [](const Elem&) { return RSet::full(); }};
}

inline Assembly asm_terminal(const Pca& pca) { return nabla(pca, terminal_obj(pca.world), "1"); }

// |R| = A with the diagonal existence relation
inline Assembly object_of_realizers(const Pca& pca) {
  return Assembly{"R", pca.carrier, [](const Elem& e) { return RSet::singleton(e); }};
}

// Totality: every fiber of E is inhabited and lands in the carrier.
inline Verdict assembly_valid(const Pca& pca, const Assembly& X, const Budget& budget) {
  if (!X.space.finite())
    return Verdict::unknown("totality over an enumerated base is not checked");
  Coverage cov;
  for (const auto& x : X.space.elements()) {
    cov.checked++;
    RSet ex = X.E(x);
    bool exhaustive = false;
    std::vector<Elem> ms = detail::rset_sample_members(ex, pca.carrier, budget, &exhaustive);
    bool found = false;
    for (const auto& m : ms) {
      if (pca.world.fibered() &&
          (m.tag() != Elem::Tag::Pair || m.first() != X.space.base_of(x)))
        return Verdict::refuted("realizer " + m.show() + " of " + x.show() +
                                    " lies over the wrong base point",
                                cov);
      if (!pca.carrier.contains(m))
        return Verdict::refuted("realizer " + m.show() + " of " + x.show() +
                                    " is outside the carrier",
                                cov);
      found = true;
    }
    if (!found) {
      if (exhaustive) return Verdict::refuted("E(" + x.show() + ") is empty", cov);
      return Verdict::unknown("no realizer for " + x.show() + " within the budget", cov);
    }
    cov.passed++;
  }
  cov.domain = cov.checked;
  return Verdict::proven(cov);
}

// ---------------------------------------------------------------------------
// The tracking clause: r.a defined and inside E_Y(f x) for every r in the
// tracker, point x and realizer a in E_X(x).

struct TrackEntry {
  Elem x, a, r;
  Tri ok = Tri::Dunno;
};

inline Verdict verify_tracking(const Pca& pca, const Assembly& X, const Assembly& Y,
                               const Arrow& f, const RSet& tracker, const Budget& budget,
                               std::vector<TrackEntry>* log = nullptr) {
  require(X.space.finite(), "verify_tracking: enumerated base");
  Coverage cov;
  bool exhaustive = true;
  bool tr_all = false;
  std::vector<Elem> rs = detail::rset_sample_members(tracker, pca.carrier, budget, &tr_all);
  exhaustive = exhaustive && tr_all;
  for (const auto& x : X.space.elements()) {
    Elem base = X.space.base_of(x);
    bool ex_all = false;
    std::vector<Elem> as = detail::rset_sample_members(X.E(x), pca.carrier, budget, &ex_all);
    exhaustive = exhaustive && ex_all;
    Elem fx = f(x);
    RSet ey = Y.E(fx);
    for (const auto& r : rs) {
      if (pca.world.fibered() && r.first() != base) continue;
      for (const auto& a : as) {
        if (pca.world.fibered() && a.first() != base) continue;
        cov.checked++;
        AppOutcome out = pca.app(r, a, budget.fuel);
        Tri ok = Tri::Dunno;
        if (out.is_undefined())
          ok = Tri::False;
        else if (out.is_value())
          ok = ey.contains(pca.carrier, out.val) ? Tri::True : Tri::False;
        if (log && log->size() < 64) log->push_back(TrackEntry{x, a, r, ok});
        if (ok == Tri::False)
          return Verdict::refuted(
              "tracking fails at x=" + x.show() + ", a=" + a.show() + ", r=" + r.show() +
                  (out.is_undefined() ? " (application undefined)"
                                      : " (lands outside E(" + fx.show() + "))"),
              cov);
        if (ok == Tri::Dunno) {
          cov.dunno++;
          continue;
        }
        cov.passed++;
      }
    }
  }
  if (exhaustive && cov.dunno == 0) {
    cov.domain = cov.checked;
    return Verdict::proven(cov);
  }
  if (cov.passed > 0) return Verdict::evidence(cov);
  return Verdict::unknown("no application could be decided within the budget", cov);
}

// ---------------------------------------------------------------------------
// Morphisms of assemblies.

struct AsmMorphism {
  std::string name;
  Assembly src, dst;
  Arrow f;
  RSet tracker;
  FilterCertPtr cert;  // tracker membership in phi
  TermPtr recipe;      // synthesized trackers: the combinator term used
  Verdict in_filter, tracked, verdict;
  std::vector<TrackEntry> log;

  bool ok() const { return verdict.ok(); }
};

// equality of morphisms = equality of the underlying arrows
inline bool asm_morphism_eq(const AsmMorphism& f, const AsmMorphism& g) {
  return obj_same_shape(f.src.space, g.src.space) &&
         obj_same_shape(f.dst.space, g.dst.space) && arrow_equal(f.f, g.f);
}

// ---------------------------------------------------------------------------
// Search for a phi-member inside a property of single realizers.  The
// property grades each candidate: Pass is exhaustive, PassSampled passed
// every decided case over a truncated fiber, Fail is definite.  The search
// runs strict then lenient (kit singletons first in each round); lenient
// finds are honest because the caller re-verifies whatever is returned.
// Refutes only when application is exact, the pool is exhaustible and every
// section definitely fails in some fiber.

enum class RealizerFit { Pass, PassSampled, Fail, Undecided };

struct GradedResult {
  MemberResult member;
  bool strict = false;  // found by the exhaustive-grade predicate
};

inline GradedResult graded_search(const Pca& pca, const Filter& phi,
                                  const std::function<RealizerFit(const Elem&)>& fit,
                                  const std::string& label, const Budget& budget) {
  MemberResult last;
  for (int round = 0; round < 2; ++round) {
    bool strict = round == 0;
    std::function<bool(const Elem&)> pred = [fit, strict](const Elem& e) {
      RealizerFit f = fit(e);
      return f == RealizerFit::Pass || (!strict && f == RealizerFit::PassSampled);
    };
    for (KitSlot s : {KitSlot::I, KitSlot::K, KitSlot::Kbar, KitSlot::P0, KitSlot::P1,
                      KitSlot::P, KitSlot::S}) {
      if (!pca.kit.has(s)) continue;
      RSet u = pca.kit_set(s);
      bool all = true;
      for (const auto& e : u.elems)
        if (!pred(e)) {
          all = false;
          break;
        }
      if (!all) continue;
      MemberResult mem = filter_member(pca, phi, u, budget);
      if (!mem.verdict.ok()) continue;
      mem.witness = u;
      return GradedResult{std::move(mem), strict};
    }
    MemberResult mem = filter_member(pca, phi, RSet::predicate(pred, label), budget);
    if (mem.verdict.ok() || mem.verdict.outcome == Outcome::Refuted)
      return GradedResult{std::move(mem), strict};
    last = std::move(mem);
  }

  if (!pca.exact || phi.mode == Filter::Mode::Generated || phi.oracle)
    return GradedResult{std::move(last), false};
  bool pool_exh = false;
  std::vector<Elem> pool =
      detail::rset_sample_members(phi.pool, pca.carrier, budget, &pool_exh);
  if (!pool_exh) return GradedResult{std::move(last), false};
  Coverage cov = last.verdict.cov;
  for (std::size_t fi = 0; fi < pca.fiber_count(); ++fi) {
    bool all_fail = true;
    for (const auto& e : pool) {
      if (pca.world.fibered() && pca.world.fiber_index(e.first()) != fi) continue;
      cov.checked++;
      if (fit(e) == RealizerFit::Fail)
        continue;
      all_fail = false;
      cov.dunno++;
    }
    if (all_fail)
      return GradedResult{
          MemberResult{Verdict::refuted("no " + phi.name + " section satisfies " + label +
                                            " over fiber " + pca.world.base[fi].show(),
                                        cov),
                       nullptr, RSet{}},
          true};
  }
  last.verdict.cov = cov;
  return GradedResult{std::move(last), false};
}

namespace detail {

// per-point data for the tracking property
struct TrackPoint {
  Elem x, base, fx;
  std::vector<Elem> as;
  bool exhaustive = false;
  RSet ey;
};

inline std::shared_ptr<std::vector<TrackPoint>> track_points(const Pca& pca,
                                                             const Assembly& X,
                                                             const Assembly& Y,
                                                             const Arrow& f,
                                                             const Budget& budget) {
  auto data = std::make_shared<std::vector<TrackPoint>>();
  for (const auto& x : X.space.elements()) {
    TrackPoint p;
    p.x = x;
    p.base = X.space.base_of(x);
    p.fx = f(x);
    p.as = rset_sample_members(X.E(x), pca.carrier, budget, &p.exhaustive);
    p.ey = Y.E(p.fx);
    data->push_back(std::move(p));
  }
  return data;
}

}  // namespace detail

inline AsmMorphism check_morphism(const Pca& pca, const Filter& phi, const Assembly& X,
                                  const Assembly& Y, const Arrow& f,
                                  const std::optional<RSet>& hint, const Budget& budget,
                                  std::string name = "") {
  require(obj_same_shape(f.src, X.space) && obj_same_shape(f.dst, Y.space),
          "check_morphism: arrow does not match the assemblies");
  AsmMorphism m;
  m.name = name.empty() ? (f.name.empty() ? "f" : f.name) : std::move(name);
  m.src = X;
  m.dst = Y;
  m.f = f;

  auto finish = [&](RSet tracker, FilterCertPtr cert, Verdict in_filter) {
    m.tracker = std::move(tracker);
    m.cert = std::move(cert);
    m.in_filter = std::move(in_filter);
    m.tracked = verify_tracking(pca, X, Y, f, m.tracker, budget, &m.log);
    m.verdict = verdict_all({m.in_filter, m.tracked});
    return m;
  };

  if (hint) {
    MemberResult mem = filter_member(pca, phi, *hint, budget);
    return finish(*hint, mem.cert, mem.verdict);
  }

  auto data = detail::track_points(pca, X, Y, f, budget);
  const Pca* P = &pca;
  Budget b = budget;
  auto fit = [P, data, b](const Elem& r) -> RealizerFit {
    bool sampled = false, undecided = false;
    std::uint64_t passes = 0;
    for (const auto& d : *data) {
      if (P->world.fibered() && r.first() != d.base) continue;
      if (!d.exhaustive) sampled = true;
      for (const auto& a : d.as) {
        AppOutcome out = P->app(r, a, b.fuel);
        if (out.is_undefined()) return RealizerFit::Fail;
        if (out.is_unknown()) {
          undecided = true;
          continue;
        }
        if (!d.ey.contains(P->carrier, out.val)) return RealizerFit::Fail;
        passes++;
      }
    }
    if (!sampled && !undecided) return RealizerFit::Pass;
    return passes > 0 ? RealizerFit::PassSampled : RealizerFit::Undecided;
  };

  GradedResult got = graded_search(pca, phi, fit, "T_" + m.name, budget);
  if (got.member.verdict.ok())
    return finish(got.member.witness, got.member.cert, got.member.verdict);
  m.tracker = RSet::finite({}, "none");
  m.in_filter = got.member.verdict;
  m.tracked = got.member.verdict;
  m.verdict = got.member.verdict;
  return m;
}

inline AsmMorphism asm_identity(const Pca& pca, const Filter& phi, const Assembly& X,
                                const Budget& budget) {
  std::optional<RSet> hint;
  if (pca.kit.has(KitSlot::I)) hint = pca.kit_set(KitSlot::I);
  return check_morphism(pca, phi, X, X, identity_arrow(X.space), hint, budget,
                        "id_" + X.name);
}

// ---------------------------------------------------------------------------
// Synthesized morphisms: the tracker is a combinator term over trackers that
// are already certified, so the certificate replays with no search.

inline AsmMorphism synthesize_tracked(const Pca& pca, const Filter& phi, std::string name,
                                      const Assembly& X, const Assembly& Y, const Arrow& f,
                                      const std::string& lambda_src,
                                      const std::vector<const AsmMorphism*>& parts,
                                      const Budget& budget) {
  AsmMorphism m;
  m.name = std::move(name);
  m.src = X;
  m.dst = Y;
  m.f = f;
  m.recipe = compile_lambda(parse_lambda(lambda_src));
  std::vector<RSet> gens;
  std::vector<CertArg> args;
  for (const auto* p : parts) {
    gens.push_back(p->tracker);
    args.push_back(CertArg{p->tracker, p->cert});
  }
  SetEval ev = eval_term_sets(pca, m.recipe, gens, budget);
  if (ev.defined == Tri::False || ev.value.elems.empty()) {
    m.tracker = RSet::finite({}, "none");
    m.verdict = ev.defined == Tri::False
                    ? Verdict::refuted("tracker term application undefined at " +
                                       (ev.undef_pair ? ev.undef_pair->first.show() + " . " +
                                                            ev.undef_pair->second.show()
                                                      : std::string("?")))
                    : Verdict::unknown("tracker term evaluated to nothing within budget");
    m.in_filter = m.verdict;
    m.tracked = m.verdict;
    return m;
  }
  m.tracker = ev.value;
  m.cert = FilterCert::by_term(m.recipe, std::move(args));
  m.in_filter = replay_cert(pca, phi, m.tracker, m.cert, budget);
  m.tracked = verify_tracking(pca, X, Y, f, m.tracker, budget, &m.log);
  m.verdict = verdict_all({m.in_filter, m.tracked});
  return m;
}

// g after f, tracked below \x. V (U x)
inline AsmMorphism compose_morphisms(const Pca& pca, const Filter& phi, const AsmMorphism& f,
                                     const AsmMorphism& g, const Budget& budget) {
  require(obj_same_shape(f.dst.space, g.src.space), "compose_morphisms: domain mismatch");
  Arrow comp = compose_arrow(g.f, f.f, g.name + "." + f.name);
  return synthesize_tracked(pca, phi, g.name + "." + f.name, f.src, g.dst, comp,
                            "\\x. g1 (g0 x)", {&f, &g}, budget);
}

// ---------------------------------------------------------------------------
// P-pair existence relations: exact image when both fibers are finite,
// sampled listing with strict membership otherwise.

inline RSet pair_fiber(const Pca& pca, const RSet& ex, const RSet& ey, const Budget& budget) {
  if (!pca.kit.has(KitSlot::P)) return RSet::finite({}, "no-P");
  RSet pset = pca.kit_set(KitSlot::P);
  if (ex.is_finite() && ey.is_finite()) {
    SetApp l = set_apply(pca, pset, ex, budget);
    if (l.defined == Tri::False) return RSet::finite({}, "P-pair-undefined");
    SetApp r = set_apply(pca, l.image, ey, budget);
    if (r.defined == Tri::False) return RSet::finite({}, "P-pair-undefined");
    RSet out = r.image;
    out.label = "P-pairs";
    return out;
  }

  Budget cap = budget;
  cap.enum_limit = std::min(budget.enum_limit, 24);
  bool e1 = false, e2 = false;
  std::vector<Elem> cs = detail::rset_sample_members(ex, pca.carrier, cap, &e1);
  std::vector<Elem> ds = detail::rset_sample_members(ey, pca.carrier, cap, &e2);
  const Pca* P = &pca;
  std::uint64_t fuel = budget.fuel;
  auto app2 = [P, fuel](const Elem& a, const Elem& b) -> std::optional<Elem> {
    AppOutcome o = P->app(a, b, fuel);
    if (!o.is_value()) return std::nullopt;
    return o.val;
  };
  std::vector<Elem> listed;
  for (const auto& c : cs) {
    std::size_t fi = pca.carrier.fiber_of(c);
    Elem pe = pca.encode(fi, pca.kit.at(KitSlot::P, fi));
    for (const auto& d : ds) {
      if (pca.world.fibered() && c.first() != d.first()) continue;
      auto pc = app2(pe, c);
      if (!pc) continue;
      auto pcd = app2(*pc, d);
      if (pcd) listed.push_back(*pcd);
    }
  }
  std::sort(listed.begin(), listed.end());
  listed.erase(std::unique(listed.begin(), listed.end()), listed.end());

  std::function<std::optional<Elem>(std::uint64_t)> nth;
  if (!listed.empty())
    // repeat the last element forever: the listing is partial, it must not
    // signal exhaustion
    nth = [listed](std::uint64_t i) -> std::optional<Elem> {
      return i < listed.size() ? listed[i] : listed.back();
    };
  RSet exc = ex, eyc = ey;
  bool has_proj = pca.kit.has(KitSlot::P0) && pca.kit.has(KitSlot::P1);
  auto pred = [P, exc, eyc, app2, has_proj](const Elem& v) -> bool {
    if (!has_proj) return false;
    if (P->world.fibered() && v.tag() != Elem::Tag::Pair) return false;
    std::size_t fi = P->carrier.fiber_of(v);
    Elem p0 = P->encode(fi, P->kit.at(KitSlot::P0, fi));
    Elem p1 = P->encode(fi, P->kit.at(KitSlot::P1, fi));
    Elem pe = P->encode(fi, P->kit.at(KitSlot::P, fi));
    auto c = app2(p0, v);
    auto d = app2(p1, v);
    if (!c || !d) return false;
    if (!exc.contains(P->carrier, *c) || !eyc.contains(P->carrier, *d)) return false;
    auto rc = app2(pe, *c);
    if (!rc) return false;
    auto rcd = app2(*rc, *d);
    return rcd && *rcd == v;
  };
  return RSet::predicate(pred, "P-pairs", nth);
}

// realizer-level union (image factorizations)
inline RSet rset_union(const Pca& pca, const std::vector<RSet>& parts, const Budget& budget,
                       std::string label = "union") {
  bool all_finite = true;
  for (const auto& p : parts)
    if (!p.is_finite()) all_finite = false;
  if (all_finite) {
    std::vector<Elem> xs;
    for (const auto& p : parts) xs.insert(xs.end(), p.elems.begin(), p.elems.end());
    return RSet::finite(std::move(xs), std::move(label));
  }
  std::vector<Elem> listed;
  Budget cap = budget;
  cap.enum_limit = std::min(budget.enum_limit, 24);
  for (const auto& p : parts) {
    bool exh = false;
    auto ms = detail::rset_sample_members(p, pca.carrier, cap, &exh);
    listed.insert(listed.end(), ms.begin(), ms.end());
  }
  std::sort(listed.begin(), listed.end());
  listed.erase(std::unique(listed.begin(), listed.end()), listed.end());
  std::function<std::optional<Elem>(std::uint64_t)> nth;
  if (!listed.empty())
    nth = [listed](std::uint64_t i) -> std::optional<Elem> {
      return i < listed.size() ? listed[i] : listed.back();
    };
  auto ps = std::make_shared<std::vector<RSet>>(parts);
  const Obj* carrier = &pca.carrier;
  return RSet::predicate(
      [ps, carrier](const Elem& e) {
        for (const auto& p : *ps)
          if (p.contains(*carrier, e)) return true;
        return false;
      },
      std::move(label), nth);
}

// ---------------------------------------------------------------------------
// Regular structure.

struct AsmProduct {
  Assembly obj;
  AsmMorphism p0, p1;
};

namespace detail {

inline Assembly pair_assembly(const Pca& pca, std::string name, const Assembly& X,
                              const Assembly& Y, const Obj& base, const Budget& budget) {
  auto table = std::make_shared<std::map<Elem, RSet>>();
  for (const auto& e : base.elements()) {
    std::size_t fi = base.fiber_of(e);
    Elem v = base.value_of(e);
    Elem x = X.space.encode(fi, v.first());
    Elem y = Y.space.encode(fi, v.second());
    (*table)[e] = pair_fiber(pca, X.E(x), Y.E(y), budget);
  }
  return Assembly{std::move(name), base, [table](const Elem& e) {
                    auto it = table->find(e);
                    require(it != table->end(), "pair assembly: unknown point");
                    return it->second;
                  }};
}

inline Arrow pair_proj(const Obj& prod, const Obj& to, bool first, const std::string& name) {
  return arrow_fn(prod, to,
                  [prod, to, first](const Elem& e) {
                    std::size_t fi = prod.fiber_of(e);
                    Elem v = prod.value_of(e);
                    return to.encode(fi, first ? v.first() : v.second());
                  },
                  name);
}

}  // namespace detail

inline AsmProduct asm_product(const Pca& pca, const Filter& phi, const Assembly& X,
                              const Assembly& Y, const Budget& budget) {
  Obj prod = product_obj(X.space, Y.space);
  Assembly obj = detail::pair_assembly(pca, X.name + "*" + Y.name, X, Y, prod, budget);
  std::optional<RSet> h0, h1;
  if (pca.kit.has(KitSlot::P0)) h0 = pca.kit_set(KitSlot::P0);
  if (pca.kit.has(KitSlot::P1)) h1 = pca.kit_set(KitSlot::P1);
  AsmMorphism p0 = check_morphism(pca, phi, obj, X,
                                  detail::pair_proj(prod, X.space, true, "p0"), h0, budget);
  AsmMorphism p1 = check_morphism(pca, phi, obj, Y,
                                  detail::pair_proj(prod, Y.space, false, "p1"), h1, budget);
  return AsmProduct{std::move(obj), std::move(p0), std::move(p1)};
}

// mediating morphism <f,g>, tracked below \x. P (U x) (V x)
inline AsmMorphism asm_pair(const Pca& pca, const Filter& phi, const AsmProduct& XY,
                            const AsmMorphism& f, const AsmMorphism& g, const Budget& budget) {
  require(obj_same_shape(f.src.space, g.src.space), "asm_pair: source mismatch");
  const Obj& prod = XY.obj.space;
  Arrow pairing = arrow_fn(f.src.space, prod,
                           [ff = f.f, gf = g.f, S = f.src.space, prod, X = f.dst.space,
                            Y = g.dst.space](const Elem& z) {
                             std::size_t fi = S.fiber_of(z);
                             return prod.encode(
                                 fi, Elem::pair(X.value_of(ff.fn(z)), Y.value_of(gf.fn(z))));
                           },
                           "<" + f.name + "," + g.name + ">");
  return synthesize_tracked(pca, phi, "<" + f.name + "," + g.name + ">", f.src, XY.obj,
                            pairing, "\\x. P (g0 x) (g1 x)", {&f, &g}, budget);
}

struct AsmEqualizer {
  Assembly obj;
  AsmMorphism incl;
};

// E_Z = E_X restricted along the inclusion
inline AsmEqualizer asm_equalizer(const Pca& pca, const Filter& phi, const AsmMorphism& f,
                                  const AsmMorphism& g, const Budget& budget) {
  require(obj_same_shape(f.src.space, g.src.space) &&
              obj_same_shape(f.dst.space, g.dst.space),
          "asm_equalizer: parallel pair expected");
  Obj eq = equalizer_obj(f.f, g.f);
  Assembly obj{"eq(" + f.name + "," + g.name + ")", eq, f.src.E};
  std::optional<RSet> hint;
  if (pca.kit.has(KitSlot::I)) hint = pca.kit_set(KitSlot::I);
  AsmMorphism incl =
      check_morphism(pca, phi, obj, f.src,
                     arrow_fn(eq, f.src.space, [](const Elem& e) { return e; }, "inc"), hint,
                     budget, "eq-inc");
  return AsmEqualizer{std::move(obj), std::move(incl)};
}

struct AsmPullback {
  Assembly obj;
  AsmMorphism q0, q1;
};

inline AsmPullback asm_pullback(const Pca& pca, const Filter& phi, const AsmMorphism& f,
                                const AsmMorphism& g, const Budget& budget) {
  require(obj_same_shape(f.dst.space, g.dst.space), "asm_pullback: codomain mismatch");
  Obj pb = pullback_obj(f.f, g.f);
  Assembly obj = detail::pair_assembly(pca, "pb(" + f.name + "," + g.name + ")", f.src,
                                       g.src, pb, budget);
  std::optional<RSet> h0, h1;
  if (pca.kit.has(KitSlot::P0)) h0 = pca.kit_set(KitSlot::P0);
  if (pca.kit.has(KitSlot::P1)) h1 = pca.kit_set(KitSlot::P1);
  AsmMorphism q0 = check_morphism(
      pca, phi, obj, f.src, detail::pair_proj(pb, f.src.space, true, "q0"), h0, budget);
  AsmMorphism q1 = check_morphism(
      pca, phi, obj, g.src, detail::pair_proj(pb, g.src.space, false, "q1"), h1, budget);
  return AsmPullback{std::move(obj), std::move(q0), std::move(q1)};
}

// ---------------------------------------------------------------------------
// Regular epis: witnesses and their replay.

struct EpiWitness {
  RSet witness;
  FilterCertPtr cert;
  Verdict in_filter, realized, verdict;

  bool ok() const { return verdict.ok(); }
};

inline Verdict verify_epi_witness(const Pca& pca, const AsmMorphism& e, const RSet& w,
                                  const Budget& budget) {
  require(e.src.space.finite() && e.dst.space.finite(), "verify_epi_witness: finite bases");
  std::map<Elem, std::vector<Elem>> pre;
  for (const auto& x : e.src.space.elements()) pre[e.f(x)].push_back(x);
  Coverage cov;
  bool exhaustive = true;
  bool w_all = false;
  std::vector<Elem> rs = detail::rset_sample_members(w, pca.carrier, budget, &w_all);
  exhaustive = exhaustive && w_all;
  for (const auto& y : e.dst.space.elements()) {
    Elem base = e.dst.space.base_of(y);
    bool ey_all = false;
    std::vector<Elem> as =
        detail::rset_sample_members(e.dst.E(y), pca.carrier, budget, &ey_all);
    exhaustive = exhaustive && ey_all;
    const auto& xs = pre[y];
    for (const auto& r : rs) {
      if (pca.world.fibered() && r.first() != base) continue;
      for (const auto& a : as) {
        if (pca.world.fibered() && a.first() != base) continue;
        cov.checked++;
        AppOutcome out = pca.app(r, a, budget.fuel);
        if (out.is_undefined())
          return Verdict::refuted("witness application undefined at y=" + y.show() +
                                      ", a=" + a.show() + ", r=" + r.show(),
                                  cov);
        if (out.is_unknown()) {
          cov.dunno++;
          continue;
        }
        bool hit = false;
        for (const auto& x : xs)
          if (e.src.E(x).contains(pca.carrier, out.val)) {
            hit = true;
            break;
          }
        if (!hit)
          return Verdict::refuted("witness value " + out.val.show() +
                                      " realizes no preimage of " + y.show(),
                                  cov);
        cov.passed++;
      }
    }
  }
  if (exhaustive && cov.dunno == 0) {
    cov.domain = cov.checked;
    return Verdict::proven(cov);
  }
  if (cov.passed > 0) return Verdict::evidence(cov);
  return Verdict::unknown("no application could be decided within the budget", cov);
}

inline EpiWitness epi_check(const Pca& pca, const Filter& phi, const AsmMorphism& e,
                            const std::optional<RSet>& hint, const Budget& budget) {
  EpiWitness out;
  // surjectivity precheck on the base
  std::map<Elem, std::vector<Elem>> pre;
  for (const auto& x : e.src.space.elements()) pre[e.f(x)].push_back(x);
  for (const auto& y : e.dst.space.elements())
    if (pre[y].empty()) {
      out.verdict = Verdict::refuted("underlying arrow misses " + y.show());
      out.in_filter = out.verdict;
      out.realized = out.verdict;
      return out;
    }

  auto finish = [&](RSet w, FilterCertPtr cert, Verdict in_filter) {
    out.witness = std::move(w);
    out.cert = std::move(cert);
    out.in_filter = std::move(in_filter);
    out.realized = verify_epi_witness(pca, e, out.witness, budget);
    out.verdict = verdict_all({out.in_filter, out.realized});
    return out;
  };

  if (hint) {
    MemberResult mem = filter_member(pca, phi, *hint, budget);
    return finish(*hint, mem.cert, mem.verdict);
  }

  // per-target data for the witness property
  struct YData {
    Elem base;
    std::vector<Elem> as;
    bool exhaustive = false;
    std::vector<RSet> exs;
  };
  auto data = std::make_shared<std::vector<YData>>();
  for (const auto& y : e.dst.space.elements()) {
    YData d;
    d.base = e.dst.space.base_of(y);
    d.as = detail::rset_sample_members(e.dst.E(y), pca.carrier, budget, &d.exhaustive);
    for (const auto& x : pre[y]) d.exs.push_back(e.src.E(x));
    data->push_back(std::move(d));
  }
  const Pca* P = &pca;
  Budget b = budget;
  auto fit = [P, data, b](const Elem& r) -> RealizerFit {
    bool sampled = false, undecided = false;
    std::uint64_t passes = 0;
    for (const auto& d : *data) {
      if (P->world.fibered() && r.first() != d.base) continue;
      if (!d.exhaustive) sampled = true;
      for (const auto& a : d.as) {
        AppOutcome o = P->app(r, a, b.fuel);
        if (o.is_undefined()) return RealizerFit::Fail;
        if (o.is_unknown()) {
          undecided = true;
          continue;
        }
        bool hit = false;
        for (const auto& ex : d.exs)
          if (ex.contains(P->carrier, o.val)) {
            hit = true;
            break;
          }
        if (!hit) return RealizerFit::Fail;
        passes++;
      }
    }
    if (!sampled && !undecided) return RealizerFit::Pass;
    return passes > 0 ? RealizerFit::PassSampled : RealizerFit::Undecided;
  };
  GradedResult got = graded_search(pca, phi, fit, "W_" + e.name, budget);
  if (got.member.verdict.ok())
    return finish(got.member.witness, got.member.cert, got.member.verdict);
  out.witness = RSet::finite({}, "none");
  out.in_filter = got.member.verdict;
  out.realized = got.member.verdict;
  out.verdict = got.member.verdict;
  return out;
}

struct AsmImage {
  Assembly obj;
  AsmMorphism e, m;
  EpiWitness w;
};

// image factorization: E_im(z) = union of E_X over the preimage of z
inline AsmImage asm_image(const Pca& pca, const Filter& phi, const AsmMorphism& f,
                          const Budget& budget) {
  ImageFactorization base = image_factor(f.f);
  auto table = std::make_shared<std::map<Elem, RSet>>();
  {
    std::map<Elem, std::vector<RSet>> parts;
    for (const auto& x : f.src.space.elements()) parts[base.epi(x)].push_back(f.src.E(x));
    for (auto& [z, ps] : parts) (*table)[z] = rset_union(pca, ps, budget, "E_im");
  }
  Assembly im{f.name + "_im", base.image, [table](const Elem& z) {
                auto it = table->find(z);
                require(it != table->end(), "image assembly: unknown point");
                return it->second;
              }};
  std::optional<RSet> ihint;
  if (pca.kit.has(KitSlot::I)) ihint = pca.kit_set(KitSlot::I);
  AsmMorphism e = check_morphism(pca, phi, f.src, im, base.epi, ihint, budget, f.name + "!");
  AsmMorphism m =
      check_morphism(pca, phi, im, f.dst, base.mono, f.tracker, budget, f.name + "_inc");
  EpiWitness w = epi_check(pca, phi, e, ihint, budget);
  return AsmImage{std::move(im), std::move(e), std::move(m), std::move(w)};
}

// Witness for the pullback of a regular epi e along f, synthesized from
// \x. P (W (V x)) x over the epi witness W and f's tracker V.  The pullback
// must have been built as asm_pullback(e, f); the pulled-back epi is q1.
inline EpiWitness pullback_epi_witness(const Pca& pca, const Filter& phi,
                                       const AsmPullback& pb, const EpiWitness& we,
                                       const AsmMorphism& f, const Budget& budget) {
  EpiWitness out;
  TermPtr t = compile_lambda(parse_lambda("\\x. P (g0 (g1 x)) x"));
  SetEval ev = eval_term_sets(pca, t, {we.witness, f.tracker}, budget);
  if (ev.defined == Tri::False || ev.value.elems.empty()) {
    out.verdict = ev.defined == Tri::False
                      ? Verdict::refuted("witness term application undefined")
                      : Verdict::unknown("witness term evaluated to nothing within budget");
    out.in_filter = out.verdict;
    out.realized = out.verdict;
    return out;
  }
  out.witness = ev.value;
  out.cert = FilterCert::by_term(t, {CertArg{we.witness, we.cert}, CertArg{f.tracker, f.cert}});
  out.in_filter = replay_cert(pca, phi, out.witness, out.cert, budget);
  out.realized = verify_epi_witness(pca, pb.q1, out.witness, budget);
  out.verdict = verdict_all({out.in_filter, out.realized});
  return out;
}

// ---------------------------------------------------------------------------
// Gamma and nabla.

inline Obj gamma_obj(const Assembly& X) { return X.space; }
inline Arrow gamma_arrow(const AsmMorphism& f) { return f.f; }

// nabla on arrows: any base arrow, tracked by i
inline AsmMorphism nabla_morphism(const Pca& pca, const Filter& phi, const Assembly& nX,
                                  const Assembly& nY, const Arrow& u, const Budget& budget) {
  std::optional<RSet> hint;
  if (pca.kit.has(KitSlot::I)) hint = pca.kit_set(KitSlot::I);
  return check_morphism(pca, phi, nX, nY, u, hint, budget, "nabla " + u.name);
}

// the unit X -> nabla Gamma X: identity underneath, tracked by i
inline AsmMorphism asm_unit_eta(const Pca& pca, const Filter& phi, const Assembly& X,
                                const Budget& budget) {
  Assembly ngx = nabla(pca, X.space, "nabla|" + X.name + "|");
  std::optional<RSet> hint;
  if (pca.kit.has(KitSlot::I)) hint = pca.kit_set(KitSlot::I);
  return check_morphism(pca, phi, X, ngx, identity_arrow(X.space, "eta"), hint, budget,
                        "eta_" + X.name);
}

// ---------------------------------------------------------------------------
// Hom-set enumeration (finite fixtures).

inline std::vector<Arrow> enumerate_arrows(const Obj& X, const Obj& Y) {
  require(X.finite() && Y.finite(), "enumerate_arrows: finite objects only");
  std::vector<Elem> xs = X.elements();
  std::vector<std::vector<Elem>> choices;
  std::uint64_t total = 1;
  for (const auto& x : xs) {
    std::vector<Elem> ys;
    std::size_t fi = X.fiber_of(x);
    for (const auto& v : Y.fibers[fi].elems) ys.push_back(Y.encode(fi, v));
    if (ys.empty()) return {};
    total *= ys.size();
    require(total <= (1u << 20), "enumerate_arrows: hom-set too large");
    choices.push_back(std::move(ys));
  }
  std::vector<Arrow> out;
  std::vector<std::size_t> idx(xs.size(), 0);
  while (true) {
    std::map<Elem, Elem> m;
    for (std::size_t i = 0; i < xs.size(); ++i) m[xs[i]] = choices[i][idx[i]];
    out.push_back(arrow_from_map(X, Y, std::move(m), "h" + std::to_string(out.size())));
    std::size_t i = 0;
    for (; i < idx.size(); ++i) {
      if (++idx[i] < choices[i].size()) break;
      idx[i] = 0;
    }
    if (i == idx.size()) break;
  }
  return out;
}

inline std::vector<AsmMorphism> enumerate_morphisms(const Pca& pca, const Filter& phi,
                                                    const Assembly& X, const Assembly& Y,
                                                    const Budget& budget) {
  std::vector<AsmMorphism> out;
  for (const auto& f : enumerate_arrows(X.space, Y.space)) {
    AsmMorphism m = check_morphism(pca, phi, X, Y, f, std::nullopt, budget);
    if (m.ok()) out.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prone morphisms and constant objects.

struct ProneReport {
  Assembly pb;
  AsmMorphism compare, inverse;
  Verdict verdict;
};

// f is prone iff the naturality square over eta is a pullback: the canonical
// comparison into pb(eta_Y, nabla Gamma f) is an iso of assemblies.
inline ProneReport is_prone(const Pca& pca, const Filter& phi, const AsmMorphism& f,
                            const Budget& budget) {
  const Assembly& X = f.src;
  const Assembly& Y = f.dst;
  Assembly ngx = nabla(pca, X.space, "nabla|" + X.name + "|");
  Assembly ngy = nabla(pca, Y.space, "nabla|" + Y.name + "|");
  std::optional<RSet> ihint;
  if (pca.kit.has(KitSlot::I)) ihint = pca.kit_set(KitSlot::I);
  AsmMorphism etay = check_morphism(pca, phi, Y, ngy, identity_arrow(Y.space, "eta"), ihint,
                                    budget, "eta_Y");
  AsmMorphism ngf =
      check_morphism(pca, phi, ngx, ngy, Arrow{ngx.space, ngy.space, f.f.fn, "nabla f"},
                     ihint, budget, "nabla f");
  AsmPullback pb = asm_pullback(pca, phi, etay, ngf, budget);

  const Obj& pbs = pb.obj.space;
  Arrow cmp = arrow_fn(X.space, pbs,
                       [XS = X.space, YS = Y.space, pbs, ff = f.f](const Elem& x) {
                         std::size_t fi = XS.fiber_of(x);
                         return pbs.encode(fi, Elem::pair(YS.value_of(ff.fn(x)),
                                                          XS.value_of(x)));
                       },
                       "cmp");
  AsmMorphism compare =
      synthesize_tracked(pca, phi, "prone-cmp", X, pb.obj, cmp, "\\x. P (g0 x) x", {&f},
                         budget);
  Arrow inv = arrow_fn(pbs, X.space,
                       [XS = X.space, pbs](const Elem& e) {
                         std::size_t fi = pbs.fiber_of(e);
                         return XS.encode(fi, pbs.value_of(e).second());
                       },
                       "inv");
  AsmMorphism inverse =
      check_morphism(pca, phi, pb.obj, X, inv, std::nullopt, budget, "prone-inv");
  bool round = arrow_equal(compose_arrow(inv, cmp), identity_arrow(X.space)) &&
               arrow_equal(compose_arrow(cmp, inv), identity_arrow(pbs));
  Verdict v = verdict_all(
      {compare.verdict, inverse.verdict,
       round ? Verdict::proven(Coverage{2, 2, 0, 2})
             : Verdict::refuted("comparison is not a base bijection")});
  return ProneReport{pb.obj, std::move(compare), std::move(inverse), std::move(v)};
}

struct ProneSub {
  Assembly obj;
  AsmMorphism incl;
};

// E restricted along a base subobject: the unique prone subobject
inline ProneSub prone_restriction(const Pca& pca, const Filter& phi, const Assembly& Y,
                                  const std::function<bool(const Elem&)>& keep,
                                  const Budget& budget) {
  Obj s = sub_obj(Y.space, keep);
  Assembly sub{Y.name + "_sub", s, Y.E};
  std::optional<RSet> hint;
  if (pca.kit.has(KitSlot::I)) hint = pca.kit_set(KitSlot::I);
  AsmMorphism incl = check_morphism(
      pca, phi, sub, Y, arrow_fn(s, Y.space, [](const Elem& e) { return e; }, "inc"), hint,
      budget, "prone-inc");
  return ProneSub{std::move(sub), std::move(incl)};
}

// prone subobject of the object of realizers cut out by U
inline ProneSub prone_sub(const Pca& pca, const Filter& phi, const Assembly& R,
                          const RSet& u, const Budget& budget) {
  const Obj* carrier = &pca.carrier;
  RSet uc = u;
  return prone_restriction(pca, phi, R,
                           [carrier, uc](const Elem& e) { return uc.contains(*carrier, e); },
                           budget);
}

struct ConstantReport {
  Verdict verdict;
  MemberResult member;  // the certified U with |X| x U inside E_X
};

inline ConstantReport is_constant(const Pca& pca, const Filter& phi, const Assembly& X,
                                  const Budget& budget) {
  const Pca* P = &pca;
  Obj space = X.space;
  auto E = X.E;
  Budget b = budget;
  auto fit = [P, space, E, b](const Elem& r) -> RealizerFit {
    if (space.finite()) {
      for (const auto& x : space.elements()) {
        if (P->world.fibered() && space.base_of(x) != r.first()) continue;
        if (!E(x).contains(P->carrier, r)) return RealizerFit::Fail;
      }
      return RealizerFit::Pass;
    }
    std::uint64_t passes = 0;
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(b.enum_limit); ++i) {
      std::optional<Elem> x = space.nth_elem(i);
      if (!x) return RealizerFit::Pass;  // base exhausted: every point checked
      if (P->world.fibered() && space.base_of(*x) != r.first()) continue;
      if (!E(*x).contains(P->carrier, r)) return RealizerFit::Fail;
      passes++;
    }
    return passes > 0 ? RealizerFit::PassSampled : RealizerFit::Undecided;
  };
  GradedResult got = graded_search(pca, phi, fit, "const_" + X.name, budget);
  Verdict v = got.strict ? got.member.verdict : got.member.verdict.capped();
  return ConstantReport{std::move(v), std::move(got.member)};
}

// ---------------------------------------------------------------------------
// Projectivity at fixture scale: split an epi onto a terminal-shaped
// assembly through a pool-certified singleton, as the singleton presentation
// provides.

struct ProjectivityReport {
  Verdict verdict;
  std::optional<AsmMorphism> splitting;
  std::string note;
};

inline ProjectivityReport projectivity_report(const Pca& pca, const Filter& phi,
                                              const AsmMorphism& e, const EpiWitness& w,
                                              const Budget& budget) {
  for (const auto& fib : e.dst.space.fibers)
    require(fib.finite && fib.elems.size() == 1,
            "projectivity_report: target is not terminal-shaped");
  if (phi.mode == Filter::Mode::Generated)
    return ProjectivityReport{
        Verdict::unknown("projectivity needs a singleton presentation"), std::nullopt,
        "non-singleton presentation: no section certificate attempted"};

  std::map<Elem, Elem> pointmap;
  std::vector<Elem> section;
  for (std::size_t fi = 0; fi < pca.fiber_count(); ++fi) {
    Elem t = e.dst.space.encode(fi, e.dst.space.fibers[fi].elems[0]);
    bool wx = false, ax = false;
    std::vector<Elem> rs = detail::rset_sample_members(w.witness, pca.carrier, budget, &wx);
    std::vector<Elem> as = detail::rset_sample_members(e.dst.E(t), pca.carrier, budget, &ax);
    std::optional<Elem> hit;
    for (const auto& r : rs) {
      if (pca.world.fibered() && pca.carrier.fiber_of(r) != fi) continue;
      if (!phi.pool.contains(pca.carrier, r)) continue;
      for (const auto& a : as) {
        if (pca.world.fibered() && pca.carrier.fiber_of(a) != fi) continue;
        if (!phi.pool.contains(pca.carrier, a)) continue;
        AppOutcome out = pca.app(r, a, budget.fuel);
        if (!out.is_value()) continue;
        for (const auto& x : e.src.space.elements()) {
          if (e.src.space.fiber_of(x) != fi) continue;
          if (!(e.f(x) == t)) continue;
          if (e.src.E(x).contains(pca.carrier, out.val)) {
            // the section is tracked by the constant realizer K.v
            hit = out.val;
            if (pca.kit.has(KitSlot::K)) {
              AppOutcome kv =
                  pca.app(pca.encode(fi, pca.kit.at(KitSlot::K, fi)), out.val, budget.fuel);
              if (kv.is_value()) hit = kv.val;
            }
            pointmap[t] = x;
            break;
          }
        }
        if (hit) break;
      }
      if (hit) break;
    }
    if (!hit)
      return ProjectivityReport{
          Verdict::unknown("no pool-certified singleton splits the epi within budget"),
          std::nullopt, "pool or witness enumeration exhausted"};
    section.push_back(*hit);
  }
  Arrow s = arrow_from_map(e.dst.space, e.src.space, pointmap, "split");
  AsmMorphism sm = check_morphism(pca, phi, e.dst, e.src, s,
                                  RSet::finite(section, "{split}"), budget, "split");
  bool splits = arrow_equal(compose_arrow(e.f, s), identity_arrow(e.dst.space));
  Verdict v = verdict_all(
      {sm.verdict, splits ? Verdict::proven(Coverage{1, 1, 0, 1})
                          : Verdict::refuted("the section does not split the epi")});
  return ProjectivityReport{std::move(v), std::move(sm), ""};
}

}  // namespace pcaw
