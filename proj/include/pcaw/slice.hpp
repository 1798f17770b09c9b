#pragma once
// Slice PCAs (A,phi)/I: the carrier |I|*(A) over Set/|I|, the filter
// phi_I = < |I|*(phi) u {E_I} > with a Lemma-form membership oracle, the
// equivalence between assemblies over the slice and assemblies sliced over I,
// pullback morphisms between slices, and the partitioned presentation.

#include "pcaw/appmorph.hpp"
#include "pcaw/assembly.hpp"

namespace pcaw {

struct SlicePca {
  Pca base;
  Filter base_phi;
  Assembly i;          // the indexing assembly; |I| finite, over Set
  RegFunctor reindex;  // |I|* : Set -> Set/|I|
  Pca pca;             // |I|*(A) with the transported kit
  RSet ei;             // E_I as one subset of the slice carrier
  Filter phi;          // phi_I
};

// Lemma-form membership data: V in phi with |I|*(V).E_I below the target.
struct SliceLemma {
  RSet v;             // over the base
  FilterCertPtr why;  // V's membership certificate in the base filter
};

namespace detail {

struct SliceCtx {
  Pca base;
  Filter base_phi;
  RegFunctor reindex;
  RSet ei;
  std::vector<Elem> base_pts;
  std::vector<std::vector<Elem>> ei_vals;  // raw E_I values per base point
  bool ei_exhaustive = true;
};

// Walk the base filter's pool prefix; fn returns false to stop early.
// Returns true when the scan exhausted the pool.
inline bool base_pool_scan(const Pca& base, const Filter& phi, const Budget& budget,
                           const std::function<bool(const Elem&)>& fn) {
  const RSet& pool = phi.pool;
  for (std::uint64_t n = 0; n < static_cast<std::uint64_t>(budget.enum_limit); ++n) {
    std::optional<Elem> cand;
    if (pool.is_finite()) {
      if (n >= pool.elems.size()) return true;
      cand = pool.elems[n];
    } else if (pool.nth) {
      cand = pool.nth(n);
    } else if (base.designated_nth_raw && phi.mode == Filter::Mode::SingletonGenerated) {
      auto raw = base.designated_nth_raw(0, n);
      if (raw) cand = *raw;
    } else {
      cand = base.carrier.nth_elem(n);
    }
    if (!cand) return true;
    if (!pool.contains(base.carrier, *cand)) continue;
    if (!fn(*cand)) return false;
  }
  return false;
}

// per-candidate check of |I|*(V).E_I inside u; fills the image on success
enum class LemmaFit { Pass, Fail, Dunno };

inline LemmaFit lemma_fit(const SliceCtx& ctx, const Pca& spca, const std::vector<Elem>& vs,
                          const RSet& u, const Budget& budget, std::vector<Elem>* image,
                          Coverage* cov) {
  image->clear();
  bool dunno = false;
  for (std::size_t fi = 0; fi < ctx.base_pts.size(); ++fi) {
    for (const auto& v : vs) {
      for (const auto& a : ctx.ei_vals[fi]) {
        cov->checked++;
        AppOutcome out = ctx.base.app_raw(0, v, a, budget.fuel);
        if (out.is_undefined()) return LemmaFit::Fail;
        if (out.is_unknown()) {
          dunno = true;
          cov->dunno++;
          continue;
        }
        Elem got = Elem::pair(ctx.base_pts[fi], out.val);
        if (!u.contains(spca.carrier, got)) return LemmaFit::Fail;
        cov->passed++;
        image->push_back(got);
      }
    }
  }
  return dunno ? LemmaFit::Dunno : LemmaFit::Pass;
}

inline FilterCertPtr const_section_cert(const SliceCtx& ctx, const Elem& c, bool designated) {
  std::vector<Elem> sec;
  for (const auto& b : ctx.base_pts) sec.push_back(Elem::pair(b, c));
  return designated ? FilterCert::by_section(sec) : FilterCert::by_inhabitant(sec);
}

// Lemma-form certificate: the application term |I|*(V) . E_I over the slice
// generators, generator 0 being E_I.
inline FilterCertPtr lemma_cert(const SliceCtx& ctx, const RSet& vslice,
                                const FilterCertPtr& why) {
  std::vector<CertArg> args;
  args.push_back(CertArg{vslice, why});
  args.push_back(CertArg{ctx.ei, FilterCert::by_generator(0)});
  return FilterCert::by_term(tapp(tvar("g0"), tvar("g1")), std::move(args));
}

// Exact decision for finite exact bases: saturate the generator family
// (E_I and every |I|*(c) for pool members c) under defined application and
// test the target against each saturated member.  Certificates record the
// derivation.  Returns nullopt when the base is unsuitable or a cap is hit.
inline std::optional<MemberResult> slice_saturate(const SliceCtx& ctx, const Pca& spca,
                                                  const std::vector<FilterGen>& gens,
                                                  const RSet& u, const Budget& budget) {
  if (!ctx.base.exact || !ctx.base.carrier.finite() || !ctx.ei_exhaustive) return std::nullopt;
  for (const auto& g : gens)
    if (!g.set.is_finite()) return std::nullopt;

  struct Entry {
    std::vector<Elem> elems;  // sorted encoded members
    RSet set;
    FilterCertPtr cert;
  };
  std::vector<Entry> sat;
  auto push = [&sat](RSet set, FilterCertPtr cert) {
    if (set.elems.empty()) return false;
    for (const auto& e : sat)
      if (e.elems == set.elems) return false;
    sat.push_back(Entry{set.elems, std::move(set), std::move(cert)});
    return true;
  };

  for (std::size_t j = 0; j < gens.size(); ++j) push(gens[j].set, FilterCert::by_generator(j));
  bool pool_exh = base_pool_scan(ctx.base, ctx.base_phi, budget, [&](const Elem& c) {
    bool desig = ctx.base.designated.contains(ctx.base.carrier, c);
    std::vector<Elem> sec;
    for (const auto& b : ctx.base_pts) sec.push_back(Elem::pair(b, c));
    push(RSet::finite(sec, "|I|*(" + c.show() + ")"), const_section_cert(ctx, c, desig));
    return true;
  });
  if (!pool_exh) return std::nullopt;

  constexpr std::size_t kSatCap = 96;
  Coverage cov;
  std::size_t lo = 0;
  while (lo < sat.size()) {
    std::size_t hi = sat.size();
    if (hi > kSatCap) return std::nullopt;
    for (std::size_t a = 0; a < hi; ++a) {
      for (std::size_t b = (a < lo ? lo : 0); b < hi; ++b) {
        SetApp ap = set_apply(spca, sat[a].set, sat[b].set, budget);
        cov.checked++;
        if (ap.defined != Tri::True || ap.image.elems.empty()) continue;
        std::vector<CertArg> args{CertArg{sat[a].set, sat[a].cert},
                                  CertArg{sat[b].set, sat[b].cert}};
        push(ap.image, FilterCert::by_term(tapp(tvar("g0"), tvar("g1")), std::move(args)));
      }
    }
    lo = hi;
  }

  for (const auto& e : sat) {
    cov.checked++;
    if (rset_subset(spca.carrier, e.set, u, budget) == Tri::True) {
      cov.passed++;
      return MemberResult{Verdict::proven(cov), e.cert, e.set};
    }
  }
  if (!u.is_finite() && !u.pred) return std::nullopt;
  return MemberResult{
      Verdict::refuted("no generated member of " + std::to_string(sat.size()) +
                           " lies inside the target set",
                       cov),
      nullptr, RSet{}};
}

// Directed Lemma candidates built from the target itself: constants K.v for
// each designated value in u, and the selector \x. x v0 .. v(n-1) for each
// designated section of u.  Mirrors the worked examples' witnesses.
inline std::vector<Elem> directed_candidates(const SliceCtx& ctx, const Pca& spca,
                                             const RSet& u, const Budget& budget) {
  std::vector<Elem> out;
  if (!u.is_finite()) return out;
  if (!ctx.base.kit.has(KitSlot::K)) return out;
  constexpr std::size_t kWidth = 3;

  std::vector<std::vector<Elem>> per(ctx.base_pts.size());
  for (const auto& e : u.elems) {
    if (e.tag() != Elem::Tag::Pair) continue;
    if (!spca.designated.contains(spca.carrier, e)) continue;
    for (std::size_t fi = 0; fi < ctx.base_pts.size(); ++fi)
      if (e.first() == ctx.base_pts[fi] && per[fi].size() < kWidth)
        per[fi].push_back(e.second());
  }

  auto add = [&out](const Elem& c) {
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  };
  for (const auto& fiber : per) {
    for (const auto& v : fiber) {
      AppOutcome kv = ctx.base.app_raw(0, ctx.base.kit.at(KitSlot::K), v, budget.fuel);
      if (kv.is_value()) add(kv.val);
    }
  }

  bool can_abstract = ctx.base.kit.has(KitSlot::S) && ctx.base.kit.has(KitSlot::I);
  if (!can_abstract || ctx.base_pts.size() < 2) return out;
  for (const auto& fiber : per)
    if (fiber.empty()) return out;
  std::string src = "\\x. x";
  for (std::size_t fi = 0; fi < ctx.base_pts.size(); ++fi)
    src += " g" + std::to_string(fi);
  TermPtr sel = compile_lambda(parse_lambda(src));

  std::vector<std::size_t> pick(ctx.base_pts.size(), 0);
  for (std::size_t count = 0; count < 32; ++count) {
    std::vector<RSet> section;
    for (std::size_t fi = 0; fi < pick.size(); ++fi)
      section.push_back(RSet::singleton(per[fi][pick[fi]]));
    SetEval ev = eval_term_sets(ctx.base, sel, section, budget);
    if (ev.defined == Tri::True && ev.value.elems.size() == 1) add(ev.value.elems[0]);
    std::size_t fi = 0;
    while (fi < pick.size() && ++pick[fi] == per[fi].size()) pick[fi++] = 0;
    if (fi == pick.size()) break;
  }
  return out;
}

}  // namespace detail

inline Pca slice_carrier_pca(const Pca& base, const Assembly& i) {
  RegFunctor f = pullback_to_slice(i.space.elements());
  return transport_pca(f, base);
}

inline SlicePca slice_pca(const Pca& base, const Filter& base_phi, const Assembly& i,
                          const Budget& budget) {
  require(!base.world.fibered(), "slice_pca: base must live over Set");
  require(i.space.finite(), "slice_pca: |I| must be finite");
  SlicePca s;
  s.base = base;
  s.base_phi = base_phi;
  s.i = i;
  s.reindex = pullback_to_slice(i.space.elements());
  s.pca = transport_pca(s.reindex, base);

  auto ctx = std::make_shared<detail::SliceCtx>();
  ctx->base = base;
  ctx->base_phi = base_phi;
  ctx->reindex = s.reindex;
  ctx->base_pts = i.space.elements();
  bool all_fin = true;
  for (const auto& b : ctx->base_pts) {
    bool exh = false;
    ctx->ei_vals.push_back(detail::rset_sample_members(i.E(b), base.carrier, budget, &exh));
    ctx->ei_exhaustive = ctx->ei_exhaustive && exh;
    if (i.E(b).kind != RSet::Kind::Finite) all_fin = false;
  }
  if (all_fin) {
    std::vector<Elem> elems;
    for (std::size_t fi = 0; fi < ctx->base_pts.size(); ++fi)
      for (const auto& a : ctx->ei_vals[fi]) elems.push_back(Elem::pair(ctx->base_pts[fi], a));
    s.ei = RSet::finite(std::move(elems), "E_" + i.name);
  } else {
    Assembly ic = i;
    Obj bc = base.carrier;
    s.ei = RSet::predicate(
        [ic, bc](const Elem& e) {
          if (e.tag() != Elem::Tag::Pair) return false;
          if (!ic.space.contains(e.first())) return false;
          return ic.E(e.first()).contains(bc, e.second());
        },
        "E_" + i.name);
  }
  ctx->ei = s.ei;

  Filter phi;
  phi.mode = Filter::Mode::Generated;
  phi.name = base_phi.name + "/" + i.name;
  phi.gens.push_back(FilterGen{s.ei, "E_" + i.name});
  for (const auto& g : base_phi.gens)
    phi.gens.push_back(
        FilterGen{transport_rset(s.reindex, base.carrier, g.set), "|I|*(" + g.name + ")"});
  if (base_phi.mode != Filter::Mode::Generated)
    phi.pool = transport_rset(s.reindex, base.carrier, base_phi.pool);

  std::vector<FilterGen> gens = phi.gens;
  phi.oracle = [ctx, gens](const Pca& spca, const RSet& u,
                           const Budget& b) -> std::optional<MemberResult> {
    Coverage cov;
    // listed generators first: E_I and any transported base generators
    for (std::size_t j = 0; j < gens.size(); ++j) {
      cov.checked++;
      if (rset_subset(spca.carrier, gens[j].set, u, b) == Tri::True) {
        cov.passed++;
        return MemberResult{Verdict::proven(cov), FilterCert::by_generator(j), gens[j].set};
      }
    }
    // finite exact bases: the saturated generator family decides membership
    if (auto r = detail::slice_saturate(*ctx, spca, gens, u, b)) {
      r->verdict.cov.checked += cov.checked;
      return r;
    }
    // Lemma scan: V ranges over listed base generators, the pool prefix and
    // candidates synthesized from the target
    std::vector<Elem> image;
    bool desig_pool = ctx->base_phi.mode == Filter::Mode::SingletonGenerated;
    if (ctx->base_phi.mode == Filter::Mode::Generated) {
      for (std::size_t j = 0; j < ctx->base_phi.gens.size(); ++j) {
        const RSet& g = ctx->base_phi.gens[j].set;
        if (!g.is_finite()) continue;
        if (detail::lemma_fit(*ctx, spca, g.elems, u, b, &image, &cov) != detail::LemmaFit::Pass)
          continue;
        if (!ctx->ei_exhaustive) break;
        RSet vs = transport_rset(ctx->reindex, ctx->base.carrier, g);
        return MemberResult{Verdict::proven(cov),
                            detail::lemma_cert(*ctx, vs, FilterCert::by_generator(j + 1)),
                            RSet::finite(image)};
      }
      return std::nullopt;
    }
    std::optional<MemberResult> found;
    bool saw_dunno = false;
    auto try_candidate = [&](const Elem& c) {
      detail::LemmaFit fit = detail::lemma_fit(*ctx, spca, {c}, u, b, &image, &cov);
      if (fit == detail::LemmaFit::Dunno) saw_dunno = true;
      if (fit != detail::LemmaFit::Pass || !ctx->ei_exhaustive) return true;
      bool desig = ctx->base.designated.contains(ctx->base.carrier, c);
      if (!desig && desig_pool) return true;
      RSet vs = transport_rset(ctx->reindex, ctx->base.carrier, RSet::singleton(c));
      found = MemberResult{Verdict::proven(cov),
                           detail::lemma_cert(*ctx, vs, detail::const_section_cert(*ctx, c, desig)),
                           RSet::finite(image)};
      return false;
    };
    bool pool_exh = detail::base_pool_scan(ctx->base, ctx->base_phi, b, try_candidate);
    if (found) return found;
    for (const auto& c : detail::directed_candidates(*ctx, spca, u, b)) {
      if (!ctx->base_phi.pool.contains(ctx->base.carrier, c)) continue;
      if (!try_candidate(c)) return found;
    }
    if (pool_exh && ctx->base.exact && ctx->ei_exhaustive && !saw_dunno && u.is_finite())
      return MemberResult{
          Verdict::refuted("no " + ctx->base_phi.name + " member V has |I|*(V).E_I inside U",
                           cov),
          nullptr, RSet{}};
    return MemberResult{
        Verdict::unknown("no Lemma witness found within the enumeration budget", cov), nullptr,
        RSet{}};
  };

  s.phi = std::move(phi);
  return s;
}

// ---------------------------------------------------------------------------
// Certificate interconversion.  Generator form is a term over the slice
// generators; Lemma form is a single V in phi.  The conversions are the
// Lemma proof's K and S constructions.

namespace detail {

// base-filter membership certificate for a finite set, preferring the
// designated-section shape
inline FilterCertPtr base_member_why(const SlicePca& s, const RSet& v, const Budget& budget) {
  if (s.base_phi.mode != Filter::Mode::Generated && v.is_finite() && v.elems.size() == 1) {
    const Elem& e = v.elems[0];
    if (s.base.designated.contains(s.base.carrier, e)) return FilterCert::by_section({e});
    if (s.base_phi.pool.contains(s.base.carrier, e)) return FilterCert::by_inhabitant({e});
  }
  return filter_member(s.base, s.base_phi, v, budget).cert;
}

// lift a base-filter certificate to the slice filter; generator j moves past
// the E_I slot, sections become constant sections
inline FilterCertPtr slice_lift_cert(const SlicePca& s, const FilterCertPtr& cert) {
  if (!cert) return nullptr;
  switch (cert->kind) {
    case FilterCert::Kind::ByGenerator:
      if (s.base_phi.mode != Filter::Mode::Generated) return nullptr;
      return FilterCert::by_generator(cert->index + 1);
    case FilterCert::Kind::BySection:
    case FilterCert::Kind::ByInhabitant: {
      if (cert->section.size() != 1) return nullptr;
      std::vector<Elem> sec;
      for (const auto& b : s.i.space.elements()) sec.push_back(Elem::pair(b, cert->section[0]));
      return cert->kind == FilterCert::Kind::BySection ? FilterCert::by_section(sec)
                                                       : FilterCert::by_inhabitant(sec);
    }
    case FilterCert::Kind::ByTerm: {
      std::vector<CertArg> args;
      for (const auto& a : cert->args) {
        FilterCertPtr w = slice_lift_cert(s, a.why);
        if (a.why && !w) return nullptr;
        args.push_back(CertArg{transport_rset(s.reindex, s.base.carrier, a.set), std::move(w)});
      }
      return FilterCert::by_term(cert->term, std::move(args));
    }
    default: return nullptr;
  }
}

}  // namespace detail

// Lemma form -> generator form: the certificate |I|*(V) . E_I.
inline FilterCertPtr slice_cert(const SlicePca& s, const SliceLemma& lem) {
  RSet vs = transport_rset(s.reindex, s.base.carrier, lem.v);
  std::vector<CertArg> args;
  args.push_back(CertArg{std::move(vs), detail::slice_lift_cert(s, lem.why)});
  args.push_back(CertArg{s.ei, FilterCert::by_generator(0)});
  return FilterCert::by_term(tapp(tvar("g0"), tvar("g1")), std::move(args));
}

// Generator form -> Lemma form.  E_I itself becomes V = I, a transported base
// generator becomes K.g, and applications fold through S.
inline std::optional<SliceLemma> slice_lemma(const SlicePca& s, const FilterCertPtr& cert,
                                             const Budget& budget) {
  if (!cert) return std::nullopt;
  auto ev_ok = [&](const SetEval& ev) { return ev.defined == Tri::True && !ev.value.elems.empty(); };
  switch (cert->kind) {
    case FilterCert::Kind::ByGenerator: {
      if (cert->index == 0) {
        if (!s.base.kit.has(KitSlot::I)) return std::nullopt;
        RSet v = s.base.kit_set(KitSlot::I);
        return SliceLemma{v, detail::base_member_why(s, v, budget)};
      }
      std::size_t j = cert->index - 1;
      if (s.base_phi.mode != Filter::Mode::Generated || j >= s.base_phi.gens.size())
        return std::nullopt;
      if (!s.base.kit.has(KitSlot::K)) return std::nullopt;
      TermPtr t = tapp(tkit(KitSlot::K), tvar("g0"));
      SetEval ev = eval_term_sets(s.base, t, {s.base_phi.gens[j].set}, budget);
      if (!ev_ok(ev)) return std::nullopt;
      std::vector<CertArg> args{CertArg{s.base_phi.gens[j].set, FilterCert::by_generator(j)}};
      return SliceLemma{ev.value, FilterCert::by_term(t, std::move(args))};
    }
    case FilterCert::Kind::BySection:
    case FilterCert::Kind::ByInhabitant: {
      if (cert->section.empty()) return std::nullopt;
      Elem a = s.pca.world.fibered() ? cert->section[0].second() : cert->section[0];
      for (const auto& e : cert->section)
        if ((s.pca.world.fibered() ? e.second() : e) != a) return std::nullopt;
      if (!s.base.kit.has(KitSlot::K)) return std::nullopt;
      AppOutcome ka = s.base.app_raw(0, s.base.kit.at(KitSlot::K), a, budget.fuel);
      if (!ka.is_value()) return std::nullopt;
      RSet v = RSet::singleton(ka.val);
      return SliceLemma{v, detail::base_member_why(s, v, budget)};
    }
    case FilterCert::Kind::ByTerm: {
      if (!s.base.kit.has(KitSlot::S) || !s.base.kit.has(KitSlot::K)) return std::nullopt;
      std::vector<SliceLemma> parts;
      for (const auto& a : cert->args) {
        auto p = slice_lemma(s, a.why, budget);
        if (!p) return std::nullopt;
        parts.push_back(std::move(*p));
      }
      TermPtr sterm = tapp(tapp(tkit(KitSlot::S), tvar("g0")), tvar("g1"));
      std::function<std::optional<SliceLemma>(const TermPtr&)> fold =
          [&](const TermPtr& t) -> std::optional<SliceLemma> {
        switch (t->tag) {
          case Term::Tag::Var: {
            std::size_t i = static_cast<std::size_t>(std::stoul(t->var.substr(1)));
            if (i >= parts.size()) return std::nullopt;
            return parts[i];
          }
          case Term::Tag::ConstKit: {
            AppOutcome kc =
                s.base.app_raw(0, s.base.kit.at(KitSlot::K), s.base.kit.at(t->slot), budget.fuel);
            if (!kc.is_value()) return std::nullopt;
            RSet v = RSet::singleton(kc.val);
            return SliceLemma{v, detail::base_member_why(s, v, budget)};
          }
          case Term::Tag::ConstElem: return std::nullopt;
          case Term::Tag::App: {
            auto l = fold(t->fun);
            if (!l) return std::nullopt;
            auto r = fold(t->arg);
            if (!r) return std::nullopt;
            SetEval ev = eval_term_sets(s.base, sterm, {l->v, r->v}, budget);
            if (!ev_ok(ev)) return std::nullopt;
            std::vector<CertArg> args{CertArg{l->v, l->why}, CertArg{r->v, r->why}};
            return SliceLemma{ev.value, FilterCert::by_term(sterm, std::move(args))};
          }
        }
        return std::nullopt;
      };
      return fold(cert->term);
    }
    default: return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// The equivalence.  Objects of the sliced category are certified morphisms
// down: X -> I; objects over the slice PCA are plain assemblies there.

struct SliceRoundTrip {
  AsmMorphism fwd, bwd;
  Verdict verdict;
};

struct SliceEquivData {
  SlicePca s;
  Budget budget;

  // F on objects: reinterpret X fiberwise along down
  Assembly F_obj(const AsmMorphism& down) const {
    const Assembly& x = down.src;
    World w = s.pca.world;
    std::vector<Carrier> fibers;
    for (const auto& b : w.base) {
      std::vector<Elem> vals;
      for (const auto& e : x.space.elements())
        if (down.f(e) == b) vals.push_back(e);
      fibers.push_back(Carrier::of(std::move(vals)));
    }
    auto E = x.E;
    Obj bc = s.base.carrier;
    return make_assembly(
        "F(" + x.name + ")", fibered_obj(w, std::move(fibers)), [E, bc](const Elem& enc) {
          Elem b = enc.first(), xv = enc.second();
          RSet ex = E(xv);
          if (ex.is_finite()) {
            std::vector<Elem> out;
            for (const auto& a : ex.elems) out.push_back(Elem::pair(b, a));
            return RSet::finite(std::move(out), ex.label);
          }
          return RSet::predicate(
              [ex, bc, b](const Elem& p) {
                return p.tag() == Elem::Tag::Pair && p.first() == b &&
                       ex.contains(bc, p.second());
              },
              ex.label);
        });
  }

  // F on morphisms: same arrow, tracker |I|*(U) with the lifted certificate
  AsmMorphism F_map(const AsmMorphism& fm, const Assembly& fx, const Assembly& fy) const {
    AsmMorphism m;
    m.name = "F(" + fm.name + ")";
    m.src = fx;
    m.dst = fy;
    auto fn = fm.f.fn;
    m.f = arrow_fn(fx.space, fy.space,
                   [fn](const Elem& enc) { return Elem::pair(enc.first(), fn(enc.second())); },
                   m.name);
    m.tracker = transport_rset(s.reindex, s.base.carrier, fm.tracker);
    m.cert = detail::slice_lift_cert(s, fm.cert);
    m.in_filter = m.cert ? replay_cert(s.pca, s.phi, m.tracker, m.cert, budget)
                         : filter_member(s.pca, s.phi, m.tracker, budget).verdict;
    m.tracked = verify_tracking(s.pca, fx, fy, m.f, m.tracker, budget, &m.log);
    m.verdict = verdict_all({m.in_filter, m.tracked});
    return m;
  }

  // G on objects: realizers P.c.d pair E_I with E_X
  Assembly G_obj(const Assembly& xs) const {
    require(s.base.kit.has(KitSlot::P), "G_obj: base kit has no P");
    std::map<Elem, RSet> table;
    std::vector<Elem> pts;
    RSet pset = s.base.kit_set(KitSlot::P);
    for (const auto& enc : xs.space.elements()) {
      pts.push_back(enc);
      std::size_t fi = xs.space.fiber_of(enc);
      bool ci_exh = false;
      RSet ci = RSet::finite(detail::rset_sample_members(s.i.E(s.pca.world.base[fi]),
                                                         s.base.carrier, budget, &ci_exh));
      bool exh = false;
      std::vector<Elem> ds =
          detail::rset_sample_members(xs.E(enc), s.pca.carrier, budget, &exh);
      std::vector<Elem> raw;
      for (const auto& d : ds) raw.push_back(d.second());
      SetEval ev = eval_term_sets(s.base, tapp(tapp(tvar("g0"), tvar("g1")), tvar("g2")),
                                  {pset, ci, RSet::finite(raw)}, budget);
      table[enc] = ev.value;
    }
    return table_assembly("G(" + xs.name + ")", set_obj(std::move(pts)), std::move(table));
  }

  // the structure map G X -> I, tracked by P0
  AsmMorphism G_down(const Assembly& gx) const {
    Arrow down = arrow_fn(gx.space, s.i.space, [](const Elem& p) { return p.first(); },
                          "l_" + gx.name);
    std::optional<RSet> hint;
    if (s.base.kit.has(KitSlot::P0)) hint = s.base.kit_set(KitSlot::P0);
    return check_morphism(s.base, s.base_phi, gx, s.i, down, hint, budget, "l_" + gx.name);
  }

  // G on morphisms: tracker from \x. P (P0 x) (V (P0 x) (P1 x))
  AsmMorphism G_map(const AsmMorphism& fm, const Assembly& gx, const Assembly& gy) const {
    auto fn = fm.f.fn;
    Arrow ga = arrow_fn(gx.space, gy.space, [fn](const Elem& p) { return fn(p); },
                        "G(" + fm.name + ")");
    auto lem = slice_lemma(s, fm.cert, budget);
    if (!lem) return check_morphism(s.base, s.base_phi, gx, gy, ga, std::nullopt, budget,
                                    "G(" + fm.name + ")");
    AsmMorphism m;
    m.name = "G(" + fm.name + ")";
    m.src = gx;
    m.dst = gy;
    m.f = ga;
    m.recipe = compile_lambda(parse_lambda("\\x. P (P0 x) (g0 (P0 x) (P1 x))"));
    SetEval ev = eval_term_sets(s.base, m.recipe, {lem->v}, budget);
    if (ev.defined != Tri::True || ev.value.elems.empty()) {
      m.verdict = Verdict::unknown("tracker term did not evaluate within budget");
      m.in_filter = m.verdict;
      m.tracked = m.verdict;
      return m;
    }
    m.tracker = ev.value;
    m.cert = FilterCert::by_term(m.recipe, {CertArg{lem->v, lem->why}});
    m.in_filter = replay_cert(s.base, s.base_phi, m.tracker, m.cert, budget);
    m.tracked = verify_tracking(s.base, gx, gy, ga, m.tracker, budget, &m.log);
    m.verdict = verdict_all({m.in_filter, m.tracked});
    return m;
  }

  // X ~ GFX over the base: trackers \x. P (U x) x and P1
  SliceRoundTrip unit(const AsmMorphism& down) const {
    const Assembly& x = down.src;
    Assembly gfx = G_obj(F_obj(down));
    auto dfn = down.f.fn;
    Arrow fwd_a = arrow_fn(x.space, gfx.space,
                           [dfn](const Elem& e) { return Elem::pair(dfn(e), e); }, "unit");
    AsmMorphism fwd = synthesize_tracked(s.base, s.base_phi, "unit_" + x.name, x, gfx, fwd_a,
                                         "\\x. P (g0 x) x", {&down}, budget);
    Arrow bwd_a = arrow_fn(gfx.space, x.space, [](const Elem& p) { return p.second(); },
                           "unit_inv");
    std::optional<RSet> hint;
    if (s.base.kit.has(KitSlot::P1)) hint = s.base.kit_set(KitSlot::P1);
    AsmMorphism bwd =
        check_morphism(s.base, s.base_phi, gfx, x, bwd_a, hint, budget, "unit_inv_" + x.name);
    bool round = arrow_equal(compose_arrow(bwd_a, fwd_a), identity_arrow(x.space)) &&
                 arrow_equal(compose_arrow(fwd_a, bwd_a), identity_arrow(gfx.space));
    Verdict v = verdict_all({fwd.verdict, bwd.verdict,
                             round ? Verdict::proven(Coverage{2, 2, 0, 2})
                                   : Verdict::refuted("unit is not a base bijection")});
    return SliceRoundTrip{std::move(fwd), std::move(bwd), std::move(v)};
  }

  // FGX ~ X over the slice: trackers |I|*(P).E_I and |I|*(P1)
  SliceRoundTrip counit(const Assembly& xs) const {
    Assembly gx = G_obj(xs);
    AsmMorphism down = G_down(gx);
    Assembly fgx = F_obj(down);
    Arrow fwd_a = arrow_fn(xs.space, fgx.space,
                           [](const Elem& enc) { return Elem::pair(enc.first(), enc); },
                           "counit_inv");
    RSet pslice = s.pca.kit_set(KitSlot::P);
    SetApp pe = set_apply(s.pca, pslice, s.ei, budget);
    AsmMorphism fwd;
    fwd.name = "counit_inv_" + xs.name;
    fwd.src = xs;
    fwd.dst = fgx;
    fwd.f = fwd_a;
    fwd.tracker = pe.image;
    Elem praw = s.base.kit.at(KitSlot::P);
    fwd.cert = detail::lemma_cert(
        detail::SliceCtx{s.base, s.base_phi, s.reindex, s.ei, s.i.space.elements(), {}, true},
        pslice,
        s.base.designated.contains(s.base.carrier, praw)
            ? FilterCert::by_section([&] {
                std::vector<Elem> sec;
                for (const auto& b : s.pca.world.base) sec.push_back(Elem::pair(b, praw));
                return sec;
              }())
            : nullptr);
    fwd.in_filter = replay_cert(s.pca, s.phi, fwd.tracker, fwd.cert, budget);
    fwd.tracked = verify_tracking(s.pca, xs, fgx, fwd_a, fwd.tracker, budget, &fwd.log);
    fwd.verdict = verdict_all({fwd.in_filter, fwd.tracked});

    Arrow bwd_a = arrow_fn(fgx.space, xs.space, [](const Elem& p) { return p.second(); },
                           "counit");
    std::optional<RSet> hint;
    if (s.pca.kit.has(KitSlot::P1)) hint = s.pca.kit_set(KitSlot::P1);
    AsmMorphism bwd =
        check_morphism(s.pca, s.phi, fgx, xs, bwd_a, hint, budget, "counit_" + xs.name);
    bool round = arrow_equal(compose_arrow(bwd_a, fwd_a), identity_arrow(xs.space)) &&
                 arrow_equal(compose_arrow(fwd_a, bwd_a), identity_arrow(fgx.space));
    Verdict v = verdict_all({fwd.verdict, bwd.verdict,
                             round ? Verdict::proven(Coverage{2, 2, 0, 2})
                                   : Verdict::refuted("counit is not a base bijection")});
    return SliceRoundTrip{std::move(fwd), std::move(bwd), std::move(v)};
  }
};

inline SliceEquivData slice_equivalence(const SlicePca& s, const Budget& budget) {
  require(s.base.kit.has(KitSlot::P) && s.base.kit.has(KitSlot::P0) &&
              s.base.kit.has(KitSlot::P1),
          "slice_equivalence: base kit needs P, P0, P1");
  return SliceEquivData{s, budget};
}

// ---------------------------------------------------------------------------
// Pullback morphisms between slices.

// (|I|*, delta) : (A, phi) -> (A, phi)/I; the J = 1 case
inline AppMorphism slice_inclusion(const SlicePca& s, const Budget& budget) {
  std::optional<RSet> hint;
  if (s.pca.kit.has(KitSlot::I)) hint = s.pca.kit_set(KitSlot::I);
  return check_applicative(s.reindex, s.base, s.base_phi, s.pca, s.phi,
                           identity_rel(s.pca.carrier), hint, budget, "|I|*");
}

// (f*, delta) : (A, phi)/J -> (A, phi)/I along f : I -> J
inline AppMorphism slice_pullback_morphism(const SlicePca& si, const SlicePca& sj,
                                           const AsmMorphism& f, const Budget& budget) {
  std::map<Elem, Elem> u;
  for (const auto& b : si.pca.world.base) u[b] = f.f(b);
  RegFunctor fs = pullback_functor(sj.pca.world, si.pca.world, std::move(u),
                                   f.name.empty() ? "f*" : f.name + "*");
  std::optional<RSet> hint;
  if (si.pca.kit.has(KitSlot::I)) hint = si.pca.kit_set(KitSlot::I);
  return check_applicative(fs, sj.pca, sj.phi, si.pca, si.phi, identity_rel(si.pca.carrier),
                           hint, budget, "pb(" + f.name + ")");
}

// ---------------------------------------------------------------------------
// Partitioned indices: E_I single-valued, so the filter has a section
// presentation computed uniformly from the basic elements f(i).

struct PartitionedSlice {
  Verdict partitioned;
  std::vector<Elem> basics;  // f(i) per base point
  Filter filter;
};

inline PartitionedSlice partitioned_slice_filter(const SlicePca& s, const Budget& budget) {
  PartitionedSlice out;
  std::vector<Elem> pts = s.i.space.elements();
  Coverage cov;
  for (const auto& b : pts) {
    bool exh = false;
    std::vector<Elem> vals = detail::rset_sample_members(s.i.E(b), s.base.carrier, budget, &exh);
    cov.checked++;
    if (vals.size() > 1) {
      out.partitioned =
          Verdict::refuted("E_I is not single-valued at " + b.show() + ": " + vals[0].show() +
                               " and " + vals[1].show(),
                           cov);
      return out;
    }
    if (vals.empty()) {
      out.partitioned = Verdict::refuted("E_I is empty at " + b.show(), cov);
      return out;
    }
    if (!exh) {
      out.partitioned =
          Verdict::unknown("E_I at " + b.show() + " was sampled, not exhausted", cov);
      return out;
    }
    cov.passed++;
    out.basics.push_back(vals[0]);
  }
  cov.domain = cov.checked;
  out.partitioned = Verdict::proven(cov);

  std::vector<FilterGen> gens;
  auto seen = std::make_shared<std::map<std::vector<Elem>, std::size_t>>();
  detail::base_pool_scan(s.base, s.base_phi, budget, [&](const Elem& r) {
    std::vector<Elem> sec;
    for (std::size_t fi = 0; fi < pts.size(); ++fi) {
      AppOutcome o = s.base.app_raw(0, r, out.basics[fi], budget.fuel);
      if (!o.is_value()) return true;
      sec.push_back(Elem::pair(pts[fi], o.val));
    }
    std::sort(sec.begin(), sec.end());
    if (seen->count(sec)) return true;
    (*seen)[sec] = gens.size();
    gens.push_back(FilterGen{RSet::finite(sec), r.show() + ".f"});
    return true;
  });
  out.filter = Filter::generated(gens, s.base_phi.name + "@" + s.i.name);
  if (s.base_phi.mode != Filter::Mode::Generated)
    out.filter.pool = transport_rset(s.reindex, s.base.carrier, s.base_phi.pool);

  // membership oracle: the uniform r-scan of the partitioned description,
  // matching the general slice oracle on batteries over kit-bearing bases
  auto ctx = std::make_shared<detail::SliceCtx>();
  ctx->base = s.base;
  ctx->base_phi = s.base_phi;
  ctx->reindex = s.reindex;
  ctx->ei = s.ei;
  ctx->base_pts = pts;
  for (const auto& f0 : out.basics) ctx->ei_vals.push_back({f0});
  out.filter.oracle = [ctx, seen](const Pca& spca, const RSet& u,
                                  const Budget& b) -> std::optional<MemberResult> {
    Coverage cov;
    std::vector<Elem> image;
    bool saw_dunno = false;
    std::optional<MemberResult> found;
    auto try_r = [&](const Elem& r) {
      image.clear();
      detail::LemmaFit fit = detail::lemma_fit(*ctx, spca, {r}, u, b, &image, &cov);
      if (fit == detail::LemmaFit::Dunno) saw_dunno = true;
      if (fit != detail::LemmaFit::Pass) return true;
      std::vector<Elem> sec = image;
      std::sort(sec.begin(), sec.end());
      auto it = seen->find(sec);
      FilterCertPtr cert = it != seen->end() ? FilterCert::by_generator(it->second) : nullptr;
      found = MemberResult{Verdict::proven(cov), std::move(cert), RSet::finite(image)};
      return false;
    };
    bool pool_exh = detail::base_pool_scan(ctx->base, ctx->base_phi, b, try_r);
    if (found) return found;
    for (const auto& c : detail::directed_candidates(*ctx, spca, u, b)) {
      if (!ctx->base_phi.pool.contains(ctx->base.carrier, c)) continue;
      if (!try_r(c)) return found;
    }
    if (pool_exh && ctx->base.exact && !saw_dunno && u.is_finite())
      return MemberResult{
          Verdict::refuted("no " + ctx->base_phi.name + " element r has r.f inside U", cov),
          nullptr, RSet{}};
    return MemberResult{
        Verdict::unknown("no section witness found within the enumeration budget", cov),
        nullptr, RSet{}};
  };
  return out;
}

}  // namespace pcaw
