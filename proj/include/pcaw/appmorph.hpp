#pragma once

#include "pcaw/assembly.hpp"

// Applicative morphisms between relative PCAs over possibly different
// backend worlds: a functor part, a total relation on carriers, a tracking
// realizer with a filter certificate, and generator-image data.  Everything
// constructed here is re-verified against the defining clauses; synthesized
// realizers carry replayable certificates.

namespace pcaw {

// ---------------------------------------------------------------------------
// Transport along a regular functor: realizer sets, PCAs, filters, certs.

inline RSet transport_rset(const RegFunctor& F, const Obj& src, const RSet& r);

namespace detail {

inline RSet transport_rset_base(const RegFunctor& F, const Obj& src, const RSet& r) {
  std::string label = F.name + "(" + r.show() + ")";
  if (r.kind == RSet::Kind::Full) return RSet::full(std::move(label));
  if (r.is_finite()) return RSet::finite(functor_subset(F, src, r.elems), std::move(label));
  RSet rc = r;
  Obj sc = src;
  auto pred = functor_subset_pred(F, src, [rc, sc](const Elem& e) { return rc.contains(sc, e); });
  return RSet::predicate(std::move(pred), std::move(label));
}

}  // namespace detail

inline RSet transport_rset(const RegFunctor& F, const Obj& src, const RSet& r) {
  if (F.kind == RegFunctor::Kind::Identity) return r;
  if (F.kind == RegFunctor::Kind::Compose) {
    Obj mid = functor_apply(*F.before, src);
    return transport_rset(*F.after, mid, transport_rset(*F.before, src, r));
  }
  return detail::transport_rset_base(F, src, r);
}

inline Pca unit_pca(const World& w, const std::string& name = "1") {
  Pca one;
  one.name = name;
  one.world = w;
  one.carrier = Obj{w, std::vector<Carrier>(w.base.size(), Carrier::of({Elem::unit()}))};
  one.designated = RSet::full();
  for (KitSlot s : {KitSlot::K, KitSlot::S, KitSlot::I, KitSlot::Kbar, KitSlot::P,
                    KitSlot::P0, KitSlot::P1})
    one.kit.slots[s] = std::vector<Elem>(w.base.size(), Elem::unit());
  one.app_raw = [](std::size_t, const Elem&, const Elem&, std::uint64_t) {
    return AppOutcome::value(Elem::unit());
  };
  one.exact = true;
  one.sample_raw = [](std::size_t, Rng&) { return Elem::unit(); };
  one.designated_nth_raw = [](std::size_t, std::uint64_t i) -> std::optional<Elem> {
    if (i == 0) return Elem::unit();
    return std::nullopt;
  };
  return one;
}

inline Pca transport_pca(const RegFunctor& F, const Pca& A) {
  require(A.world == F.src_world, "transport_pca: world mismatch");
  switch (F.kind) {
    case RegFunctor::Kind::Identity: return A;
    case RegFunctor::Kind::Compose: return transport_pca(*F.after, transport_pca(*F.before, A));
    case RegFunctor::Kind::Terminal: return unit_pca(World::set_world(), "1");
    default: break;
  }

  Pca B;
  B.name = F.name + "(" + A.name + ")";
  B.world = F.dst_world;
  B.carrier = functor_apply(F, A.carrier);
  B.designated = transport_rset(F, A.carrier, A.designated);
  B.exact = A.exact;
  B.defaults = A.defaults;

  if (F.kind == RegFunctor::Kind::Projection) {
    std::size_t idx = A.world.fiber_index(F.index);
    auto app = A.app_raw;
    B.app_raw = [app, idx](std::size_t, const Elem& a, const Elem& b, std::uint64_t fuel) {
      return app(idx, a, b, fuel);
    };
    for (const auto& [s, vec] : A.kit.slots) B.kit.slots[s] = {vec[idx]};
    auto smp = A.sample_raw;
    B.sample_raw = [smp, idx](std::size_t, Rng& rng) { return smp(idx, rng); };
    if (A.designated_nth_raw) {
      auto g = A.designated_nth_raw;
      B.designated_nth_raw = [g, idx](std::size_t, std::uint64_t i) { return g(idx, i); };
    }
    return B;
  }

  if (F.kind == RegFunctor::Kind::Pullback || F.kind == RegFunctor::Kind::Diagonal) {
    std::vector<std::size_t> old;
    for (const auto& b : F.dst_world.base)
      old.push_back(F.src_world.fibered() ? A.world.fiber_index(F.reindex.at(b)) : 0);
    auto app = A.app_raw;
    B.app_raw = [app, old](std::size_t fi, const Elem& a, const Elem& b, std::uint64_t fuel) {
      return app(old[fi], a, b, fuel);
    };
    for (const auto& [s, vec] : A.kit.slots) {
      std::vector<Elem> per;
      for (std::size_t fi = 0; fi < old.size(); ++fi) per.push_back(vec[old[fi]]);
      B.kit.slots[s] = std::move(per);
    }
    auto smp = A.sample_raw;
    B.sample_raw = [smp, old](std::size_t fi, Rng& rng) { return smp(old[fi], rng); };
    if (A.designated_nth_raw) {
      auto g = A.designated_nth_raw;
      B.designated_nth_raw = [g, old](std::size_t fi, std::uint64_t i) { return g(old[fi], i); };
    }
    return B;
  }

  require(F.kind == RegFunctor::Kind::BinaryProduct, "transport_pca: unhandled kind");
  auto app = A.app_raw;
  B.app_raw = [app](std::size_t, const Elem& a, const Elem& b, std::uint64_t fuel) {
    require(a.tag() == Elem::Tag::Pair && b.tag() == Elem::Tag::Pair,
            "product pca: elements must be pairs");
    AppOutcome l = app(0, a.first(), b.first(), fuel);
    if (l.is_undefined()) return AppOutcome::undefined();
    AppOutcome r = app(1, a.second(), b.second(), fuel);
    if (r.is_undefined()) return AppOutcome::undefined();
    if (l.is_unknown() || r.is_unknown()) return AppOutcome::unknown();
    return AppOutcome::value(Elem::pair(l.val, r.val));
  };
  for (const auto& [s, vec] : A.kit.slots) B.kit.slots[s] = {Elem::pair(vec[0], vec[1])};
  auto smp = A.sample_raw;
  B.sample_raw = [smp](std::size_t, Rng& rng) {
    Elem l = smp(0, rng);
    return Elem::pair(l, smp(1, rng));
  };
  if (A.designated_nth_raw) {
    // diagonal walk over the two streams; skips past a finished stream, so a
    // consumer only sees nullopt at genuine exhaustion
    struct DiagState {
      std::vector<Elem> emitted;
      std::uint64_t d = 0, i = 0;
      std::optional<std::uint64_t> len0, len1;
      bool done = false;
    };
    auto g = A.designated_nth_raw;
    auto st = std::make_shared<DiagState>();
    B.designated_nth_raw = [g, st](std::size_t, std::uint64_t n) -> std::optional<Elem> {
      while (!st->done && st->emitted.size() <= n) {
        if (st->len0 && st->len1 &&
            st->emitted.size() == static_cast<std::size_t>(*st->len0 * *st->len1)) {
          st->done = true;
          break;
        }
        if (st->i > st->d) {
          ++st->d;
          st->i = 0;
          if (st->len0 && st->len1 && st->d >= *st->len0 + *st->len1) {
            st->done = true;
            break;
          }
          continue;
        }
        std::uint64_t i = st->i++, j = st->d - i;
        if ((st->len0 && i >= *st->len0) || (st->len1 && j >= *st->len1)) continue;
        auto a = g(0, i);
        if (!a) {
          if (!st->len0 || i < *st->len0) st->len0 = i;
          continue;
        }
        auto b = g(1, j);
        if (!b) {
          if (!st->len1 || j < *st->len1) st->len1 = j;
          continue;
        }
        st->emitted.push_back(Elem::pair(*a, *b));
      }
      if (n < st->emitted.size()) return st->emitted[n];
      return std::nullopt;
    };
  }
  return B;
}

// Structural transport of a membership certificate.  Returns null for the
// wrapped kinds, which replay through the transported filter's hook instead.
inline FilterCertPtr transport_cert(const RegFunctor& F, const Obj& src,
                                    const FilterCertPtr& cert) {
  if (!cert) return nullptr;
  switch (cert->kind) {
    case FilterCert::Kind::ByGenerator: return FilterCert::by_generator(cert->index);
    case FilterCert::Kind::BySection:
      return FilterCert::by_section(functor_subset(F, src, cert->section));
    case FilterCert::Kind::ByInhabitant:
      return FilterCert::by_inhabitant(functor_subset(F, src, cert->section));
    case FilterCert::Kind::ByTerm: {
      std::vector<CertArg> args;
      for (const auto& a : cert->args)
        args.push_back(CertArg{transport_rset(F, src, a.set),
                               a.why ? transport_cert(F, src, a.why) : nullptr});
      return FilterCert::by_term(cert->term, std::move(args));
    }
    case FilterCert::Kind::ByTransport:
    case FilterCert::Kind::ByComponents: return nullptr;
  }
  return nullptr;
}

inline Filter transport_filter(const RegFunctor& F, const Pca& A, const Filter& phi) {
  if (F.kind == RegFunctor::Kind::Identity) return phi;
  Filter out;
  out.mode = phi.mode;
  out.name = F.name + "(" + phi.name + ")";
  for (const auto& g : phi.gens)
    out.gens.push_back(FilterGen{transport_rset(F, A.carrier, g.set), F.name + "(" + g.name + ")"});
  if (phi.mode != Filter::Mode::Generated)
    out.pool = transport_rset(F, A.carrier, phi.pool);
  Filter ctx = out;  // hook-free copy: structural certificates replay against it
  RegFunctor Fc = F;
  Obj src = A.carrier;
  out.replay_hook = [Fc, src, ctx](const Pca& pca, const RSet& u, const FilterCertPtr& cert,
                                   const Budget& b) -> std::optional<Verdict> {
    if (cert->kind != FilterCert::Kind::ByTransport || cert->via != Fc.name)
      return std::nullopt;
    FilterCertPtr tc = transport_cert(Fc, src, cert->inner);
    if (!tc)
      return Verdict::unknown("inner certificate does not transport structurally");
    return replay_cert(pca, ctx, u, tc, b);
  };
  return out;
}

// ---------------------------------------------------------------------------
// The morphism record and its verification engines.

struct GenImage {
  std::string label;
  RSet gen;
  RSet image;
  bool image_exact = false;
  MemberResult member;
};

struct AppMorphism {
  std::string name;
  RegFunctor p;  // functor part; identity for vertical morphisms
  Pca src;
  Filter src_phi;
  Pca tsrc;  // p applied to src; the relation's actual source
  Filter tsrc_phi;
  Pca dst;
  Filter dst_phi;
  Rel f;  // total relation tsrc.carrier -|-> dst.carrier
  RSet tracker;
  FilterCertPtr cert;
  TermPtr recipe;
  std::vector<GenImage> gen_images;
  Verdict total, in_filter, tracked, images, verdict;

  bool ok() const { return verdict.ok(); }
};

namespace detail {

// encoded carrier listing, capped per enumerated fiber
inline std::vector<Elem> pca_samples(const Pca& pca, std::size_t cap, bool* exhaustive) {
  std::vector<Elem> out;
  *exhaustive = true;
  for (std::size_t fi = 0; fi < pca.fiber_count(); ++fi) {
    const Carrier& c = pca.carrier.fibers[fi];
    if (c.finite) {
      for (const auto& v : c.elems) out.push_back(pca.encode(fi, v));
      continue;
    }
    bool ended = false;
    for (std::uint64_t i = 0; i < cap; ++i) {
      auto v = c.nth(i);
      if (!v) {
        ended = true;
        break;
      }
      out.push_back(pca.encode(fi, *v));
    }
    if (!ended) *exhaustive = false;
  }
  return out;
}

// condition (b) instances: defined products aa' with the realizer images of
// both factors
struct BPoint {
  Elem base, prod;
  std::vector<Elem> bs, bs2;
};

struct BData {
  std::vector<BPoint> points;
  bool exhaustive = true;  // carrier listed fully, images complete, no fuel gaps
};

constexpr std::size_t kPairGridCap = 12;

inline std::shared_ptr<const BData> b_data(const Pca& tsrc, const Rel& f,
                                           const Budget& budget) {
  auto out = std::make_shared<BData>();
  bool exh = false;
  std::vector<Elem> as =
      pca_samples(tsrc, std::min<std::size_t>(kPairGridCap, budget.samples), &exh);
  out->exhaustive = exh && f.finite;
  for (const auto& a : as) {
    std::vector<Elem> bs = f.image_of(a);
    if (bs.empty()) continue;
    for (const auto& a2 : as) {
      if (tsrc.world.fibered() && a.first() != a2.first()) continue;
      AppOutcome pr = tsrc.app(a, a2, budget.fuel);
      if (pr.is_undefined()) continue;  // clause is vacuous here
      if (pr.is_unknown()) {
        out->exhaustive = false;
        continue;
      }
      std::vector<Elem> bs2 = f.image_of(a2);
      if (bs2.empty()) continue;
      out->points.push_back(BPoint{tsrc.carrier.base_of(a), pr.val, bs, bs2});
    }
  }
  return out;
}

inline RealizerFit b_fit(const Pca& dst, const Rel& f, const std::shared_ptr<const BData>& data,
                         const Elem& r, std::uint64_t fuel) {
  bool undecided = false;
  std::uint64_t passes = 0;
  for (const auto& p : data->points) {
    if (dst.world.fibered() && r.first() != p.base) continue;
    for (const auto& b : p.bs) {
      AppOutcome rb = dst.app(r, b, fuel);
      if (rb.is_undefined()) return RealizerFit::Fail;
      if (rb.is_unknown()) {
        undecided = true;
        continue;
      }
      for (const auto& b2 : p.bs2) {
        AppOutcome w = dst.app(rb.val, b2, fuel);
        if (w.is_undefined()) return RealizerFit::Fail;
        if (w.is_unknown()) {
          undecided = true;
          continue;
        }
        if (!f.holds(p.prod, w.val)) return RealizerFit::Fail;
        passes++;
      }
    }
  }
  if (!undecided && data->exhaustive) return RealizerFit::Pass;
  return passes > 0 ? RealizerFit::PassSampled : RealizerFit::Undecided;
}

}  // namespace detail

// Totality of the relation over the (possibly sampled) carrier.
inline Verdict verify_total(const Pca& tsrc, const Rel& f, const Budget& budget) {
  bool exh = false;
  std::vector<Elem> as = detail::pca_samples(tsrc, budget.samples, &exh);
  Coverage cov;
  for (const auto& a : as) {
    cov.checked++;
    if (!f.image_of(a).empty()) {
      cov.passed++;
      continue;
    }
    if (f.finite) return Verdict::refuted("relation has no value at " + a.show(), cov);
    cov.dunno++;
  }
  if (exh && cov.dunno == 0) {
    cov.domain = cov.checked;
    return Verdict::proven(cov);
  }
  if (cov.passed > 0) return Verdict::evidence(cov);
  return Verdict::unknown("no value found within the sampling budget", cov);
}

// Condition (b) for a given tracker set: every member must send each defined
// product's factor realizers to a realizer of the product.
inline Verdict verify_tracking_rel(const Pca& dst, const Rel& f,
                                   const std::shared_ptr<const detail::BData>& data,
                                   const RSet& tracker, const Budget& budget) {
  bool tr_exh = false;
  std::vector<Elem> rs = detail::rset_sample_members(tracker, dst.carrier, budget, &tr_exh);
  if (rs.empty()) return Verdict::unknown("tracker set has no listable members");
  Coverage cov;
  bool undecided = false;
  for (const auto& r : rs) {
    for (const auto& p : data->points) {
      if (dst.world.fibered() && r.first() != p.base) continue;
      for (const auto& b : p.bs) {
        AppOutcome rb = dst.app(r, b, budget.fuel);
        if (rb.is_unknown()) {
          cov.dunno++;
          undecided = true;
          continue;
        }
        if (rb.is_undefined())
          return Verdict::refuted("tracking fails: " + r.show() + " . " + b.show() +
                                      " undefined",
                                  cov);
        for (const auto& b2 : p.bs2) {
          cov.checked++;
          AppOutcome w = dst.app(rb.val, b2, budget.fuel);
          if (w.is_unknown()) {
            cov.dunno++;
            undecided = true;
            continue;
          }
          if (w.is_undefined())
            return Verdict::refuted("tracking fails: result of " + r.show() + " at " +
                                        b.show() + ", " + b2.show() + " undefined",
                                    cov);
          if (!f.holds(p.prod, w.val))
            return Verdict::refuted("tracking fails: " + w.val.show() +
                                        " does not realize " + p.prod.show(),
                                    cov);
          cov.passed++;
        }
      }
    }
  }
  if (data->exhaustive && tr_exh && !undecided) {
    cov.domain = cov.checked;
    return Verdict::proven(cov);
  }
  if (cov.passed > 0) return Verdict::evidence(cov);
  return Verdict::unknown("no tracking instance could be decided", cov);
}

namespace detail {

constexpr std::size_t kGenImageCap = 12;

// generators of the (transported) source filter: listed generators, or
// sampled sections from the pool (singletons on an unfibered carrier)
inline std::vector<std::pair<std::string, RSet>> filter_generators(const Pca& pca,
                                                                   const Filter& phi,
                                                                   const Budget& budget,
                                                                   bool* exhaustive) {
  std::vector<std::pair<std::string, RSet>> out;
  if (phi.mode == Filter::Mode::Generated) {
    *exhaustive = true;
    for (const auto& g : phi.gens) out.emplace_back(g.name, g.set);
    return out;
  }
  bool pool_exh = false;
  std::vector<Elem> pool = rset_sample_members(phi.pool, pca.carrier, budget, &pool_exh);
  if (!pca.world.fibered()) {
    *exhaustive = pool_exh && pool.size() <= kGenImageCap;
    for (std::size_t i = 0; i < pool.size() && i < kGenImageCap; ++i)
      out.emplace_back("{" + pool[i].show() + "}", RSet::singleton(pool[i]));
    return out;
  }
  // a member of a singleton-generated filter over a fibered carrier is a
  // section of the pool, so the listable generators are section sets
  std::vector<std::vector<Elem>> per(pca.fiber_count());
  for (const auto& e : pool) per[pca.world.fiber_index(e.first())].push_back(e);
  std::size_t total = 1;
  for (const auto& v : per) {
    if (v.empty()) {
      *exhaustive = false;
      return out;
    }
    total = std::min<std::size_t>(total * v.size(), kGenImageCap + 1);
  }
  *exhaustive = pool_exh && total <= kGenImageCap;
  std::vector<std::size_t> pick(per.size(), 0);
  for (std::size_t emitted = 0; emitted < kGenImageCap; ++emitted) {
    std::vector<Elem> sec;
    std::string label = "{";
    for (std::size_t i = 0; i < per.size(); ++i) {
      sec.push_back(per[i][pick[i]]);
      label += (i ? "," : "") + per[i][pick[i]].show();
    }
    label += "}";
    out.emplace_back(label, RSet::finite(std::move(sec), label));
    std::size_t j = 0;
    while (j < per.size() && ++pick[j] == per[j].size()) pick[j++] = 0;
    if (j == per.size()) break;
  }
  return out;
}

}  // namespace detail

// Condition (c'): the image of each source-filter generator lands in the
// target filter.  Image under-approximation is sound for membership (filters
// are upward closed) but blocks refutation.
inline std::vector<GenImage> morphism_gen_images(const Pca& tsrc, const Filter& tsrc_phi,
                                                 const Pca& dst, const Filter& dst_phi,
                                                 const Rel& f, const Budget& budget,
                                                 Verdict* combined) {
  bool gens_exh = false;
  auto gens = detail::filter_generators(tsrc, tsrc_phi, budget, &gens_exh);
  std::vector<GenImage> out;
  std::vector<Verdict> vs;
  for (auto& [label, gen] : gens) {
    GenImage gi;
    gi.label = label;
    gi.gen = gen;
    bool mem_exh = false;
    std::vector<Elem> members = detail::rset_sample_members(gen, tsrc.carrier, budget, &mem_exh);
    std::vector<Elem> img;
    for (const auto& a : members)
      for (const auto& b : f.image_of(a)) img.push_back(b);
    gi.image = RSet::finite(std::move(img), "f(" + label + ")");
    gi.image_exact = mem_exh && f.finite;
    gi.member = filter_member(dst, dst_phi, gi.image, budget);
    if (gi.member.verdict.outcome == Outcome::Refuted && !gi.image_exact)
      gi.member.verdict =
          Verdict::unknown("image was sampled; membership refutation withheld",
                           gi.member.verdict.cov);
    vs.push_back(gi.member.verdict);
    out.push_back(std::move(gi));
  }
  if (vs.empty()) vs.push_back(Verdict::unknown("no generators to check"));
  *combined = verdict_all(vs);
  if (!gens_exh) *combined = combined->capped();
  return out;
}

// Full check of an applicative morphism candidate.  With a hint the tracker
// is taken as given (and its membership certified); otherwise a graded
// search synthesizes one and the result is re-verified.
inline AppMorphism check_applicative(const RegFunctor& p, const Pca& A, const Filter& phiA,
                                     const Pca& B, const Filter& psiB, const Rel& f,
                                     const std::optional<RSet>& hint, const Budget& budget,
                                     std::string name = "f") {
  require(p.src_world == A.world && p.dst_world == B.world,
          "check_applicative: functor does not match the worlds");
  AppMorphism m;
  m.name = std::move(name);
  m.p = p;
  m.src = A;
  m.src_phi = phiA;
  m.tsrc = transport_pca(p, A);
  m.tsrc_phi = transport_filter(p, A, phiA);
  m.dst = B;
  m.dst_phi = psiB;
  m.f = f;
  require(obj_same_shape(f.src, m.tsrc.carrier) && obj_same_shape(f.dst, B.carrier),
          "check_applicative: relation does not match the carriers");

  m.total = verify_total(m.tsrc, f, budget);
  auto data = detail::b_data(m.tsrc, f, budget);
  m.gen_images =
      morphism_gen_images(m.tsrc, m.tsrc_phi, B, psiB, f, budget, &m.images);

  auto finish = [&](RSet tracker, FilterCertPtr cert, Verdict in_filter) -> AppMorphism {
    m.tracker = std::move(tracker);
    m.cert = std::move(cert);
    m.in_filter = std::move(in_filter);
    m.tracked = verify_tracking_rel(B, f, data, m.tracker, budget);
    m.verdict = verdict_all({m.total, m.in_filter, m.tracked, m.images});
    return m;
  };

  if (hint) {
    MemberResult mem = filter_member(B, psiB, *hint, budget);
    return finish(*hint, mem.cert, mem.verdict);
  }

  const Pca* D = &B;
  Rel fc = f;
  std::uint64_t fuel = budget.fuel;
  auto fit = [D, fc, data, fuel](const Elem& r) {
    return detail::b_fit(*D, fc, data, r, fuel);
  };
  GradedResult got = graded_search(B, psiB, fit, "U_" + m.name, budget);
  if (got.member.verdict.ok())
    return finish(got.member.witness, got.member.cert, got.member.verdict);
  m.tracker = RSet::finite({}, "none");
  m.in_filter = got.member.verdict;
  m.tracked = got.member.verdict;
  m.verdict = verdict_all({m.total, got.member.verdict, m.images});
  return m;
}

inline AppMorphism check_vertical(const Pca& A, const Filter& phiA, const Pca& B,
                                  const Filter& psiB, const Rel& f,
                                  const std::optional<RSet>& hint, const Budget& budget,
                                  std::string name = "f") {
  return check_applicative(identity_functor(A.world), A, phiA, B, psiB, f, hint, budget,
                           std::move(name));
}

inline AppMorphism app_identity(const Pca& A, const Filter& phiA, const Budget& budget) {
  std::optional<RSet> hint;
  if (A.kit.has(KitSlot::I)) hint = A.kit_set(KitSlot::I);
  return check_vertical(A, phiA, A, phiA, identity_rel(A.carrier, "delta"), hint, budget,
                        "id_" + A.name);
}

namespace detail {

inline RegFunctor compose_collapse(const RegFunctor& g, const RegFunctor& f) {
  if (f.kind == RegFunctor::Kind::Identity) return g;
  if (g.kind == RegFunctor::Kind::Identity) return f;
  return compose_functor(g, f);
}

// bounded image of a realizer set under a relation, as a finite set
inline RSet rel_image_set(const Rel& f, const Obj& src_carrier, const RSet& u,
                          const Budget& budget, const std::string& label) {
  bool exh = false;
  std::vector<Elem> members = rset_sample_members(u, src_carrier, budget, &exh);
  std::vector<Elem> img;
  for (const auto& a : members)
    for (const auto& b : f.image_of(a)) img.push_back(b);
  return RSet::finite(std::move(img), label);
}

}  // namespace detail

// Composite morphism (q after p on functors, relation composition on the
// middle world) with the synthesized tracker \x y. V (V gU x) y.
inline AppMorphism compose_applicative(const AppMorphism& fm, const AppMorphism& gm,
                                       const Budget& budget, std::string name = "") {
  require(obj_same_shape(fm.dst.carrier, gm.src.carrier),
          "compose_applicative: middle PCA mismatch");
  if (name.empty()) name = gm.name + "." + fm.name;
  RegFunctor pq = detail::compose_collapse(gm.p, fm.p);
  Rel comp = compose_rel(functor_apply(gm.p, fm.f), gm.f);

  RSet gU = detail::rel_image_set(gm.f, gm.tsrc.carrier,
                                  transport_rset(gm.p, fm.dst.carrier, fm.tracker), budget,
                                  gm.name + "(U)");
  std::optional<RSet> hint;
  TermPtr recipe;
  FilterCertPtr cert;
  // the recipe compiles to combinator leaves, so the target kit must carry k
  // and s; without them the plain search below takes over
  if (gm.dst.kit.has(KitSlot::K) && gm.dst.kit.has(KitSlot::S)) {
    TermPtr t = compile_lambda(parse_lambda("\\x y. g0 (g0 g1 x) y"));
    SetEval ev = eval_term_sets(gm.dst, t, {gm.tracker, gU}, budget);
    if (ev.defined == Tri::True) {
      hint = ev.value;
      recipe = t;
      MemberResult whyU = filter_member(gm.dst, gm.dst_phi, gU, budget);
      cert = FilterCert::by_term(
          t, {CertArg{gm.tracker, gm.cert}, CertArg{gU, whyU.cert}});
    }
  }

  AppMorphism m = check_applicative(pq, fm.src, fm.src_phi, gm.dst, gm.dst_phi, comp, hint,
                                    budget, std::move(name));
  if (hint && cert) {
    m.recipe = recipe;
    m.cert = cert;
    m.in_filter = replay_cert(gm.dst, gm.dst_phi, m.tracker, cert, budget);
    m.verdict = verdict_all({m.total, m.in_filter, m.tracked, m.images});
  }
  return m;
}

// Transport of a whole morphism along a functor; every part is re-verified
// over the transported data.
inline AppMorphism transport_morphism(const RegFunctor& F, const AppMorphism& m,
                                      const Budget& budget, std::string name = "") {
  if (name.empty()) name = F.name + "(" + m.name + ")";
  RegFunctor p2 = detail::compose_collapse(F, m.p);
  Rel f2 = functor_apply(F, m.f);
  RSet tracker = transport_rset(F, m.dst.carrier, m.tracker);
  Pca dst2 = transport_pca(F, m.dst);
  Filter psi2 = transport_filter(F, m.dst, m.dst_phi);

  AppMorphism out = check_applicative(p2, m.src, m.src_phi, dst2, psi2, f2, tracker, budget,
                                      std::move(name));
  if (m.cert) {
    FilterCertPtr tc = transport_cert(F, m.dst.carrier, m.cert);
    if (!tc) tc = FilterCert::by_transport(F.name, m.cert);
    Verdict replayed = replay_cert(dst2, psi2, out.tracker, tc, budget);
    if (replayed.ok()) {
      out.cert = tc;
      out.in_filter = replayed;
      out.verdict = verdict_all({out.total, out.in_filter, out.tracked, out.images});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// The preorder on applicative morphisms.

struct IneqCert {
  std::string label;
  RSet realizer;
  FilterCertPtr cert;
  TermPtr recipe;
  Verdict in_filter, realized, verdict;

  bool ok() const { return verdict.ok(); }
};

namespace detail {

// instances of the inequality clause: a source point, its realizers under f,
// and the comparison point fed to f' (the transformation component when
// present, the point itself otherwise)
struct IPoint {
  Elem base, target;
  std::vector<Elem> bs;
};

struct IData {
  std::vector<IPoint> points;
  bool exhaustive = true;
};

inline std::shared_ptr<const IData> i_data(const Pca& tsrc, const Rel& f,
                                           const std::optional<Arrow>& post,
                                           const Budget& budget) {
  auto out = std::make_shared<IData>();
  bool exh = false;
  std::vector<Elem> as =
      pca_samples(tsrc, std::min<std::size_t>(kPairGridCap, budget.samples), &exh);
  out->exhaustive = exh && f.finite;
  for (const auto& a : as) {
    std::vector<Elem> bs = f.image_of(a);
    if (bs.empty()) continue;
    out->points.push_back(
        IPoint{tsrc.carrier.base_of(a), post ? (*post)(a) : a, std::move(bs)});
  }
  return out;
}

inline RealizerFit i_fit(const Pca& dst, const Rel& fp,
                         const std::shared_ptr<const IData>& data, const Elem& r,
                         std::uint64_t fuel) {
  bool undecided = false;
  std::uint64_t passes = 0;
  for (const auto& p : data->points) {
    if (dst.world.fibered() && r.first() != p.base) continue;
    for (const auto& b : p.bs) {
      AppOutcome rb = dst.app(r, b, fuel);
      if (rb.is_undefined()) return RealizerFit::Fail;
      if (rb.is_unknown()) {
        undecided = true;
        continue;
      }
      if (!fp.holds(p.target, rb.val)) return RealizerFit::Fail;
      passes++;
    }
  }
  if (!undecided && data->exhaustive) return RealizerFit::Pass;
  return passes > 0 ? RealizerFit::PassSampled : RealizerFit::Undecided;
}

inline Verdict verify_ineq(const Pca& dst, const Rel& fp,
                           const std::shared_ptr<const IData>& data, const RSet& realizer,
                           const Budget& budget) {
  bool r_exh = false;
  std::vector<Elem> rs = rset_sample_members(realizer, dst.carrier, budget, &r_exh);
  if (rs.empty()) return Verdict::unknown("realizer set has no listable members");
  Coverage cov;
  bool undecided = false;
  for (const auto& r : rs) {
    for (const auto& p : data->points) {
      if (dst.world.fibered() && r.first() != p.base) continue;
      for (const auto& b : p.bs) {
        cov.checked++;
        AppOutcome rb = dst.app(r, b, budget.fuel);
        if (rb.is_unknown()) {
          cov.dunno++;
          undecided = true;
          continue;
        }
        if (rb.is_undefined())
          return Verdict::refuted("inequality fails: " + r.show() + " . " + b.show() +
                                      " undefined",
                                  cov);
        if (!fp.holds(p.target, rb.val))
          return Verdict::refuted("inequality fails: " + rb.val.show() +
                                      " does not realize " + p.target.show(),
                                  cov);
        cov.passed++;
      }
    }
  }
  if (data->exhaustive && r_exh && !undecided) {
    cov.domain = cov.checked;
    return Verdict::proven(cov);
  }
  if (cov.passed > 0) return Verdict::evidence(cov);
  return Verdict::unknown("no inequality instance could be decided", cov);
}

}  // namespace detail

// f <= f' in the preorder: some filter element sends each f-realizer of a to
// an f'-realizer of a.
inline IneqCert preorder_check(const AppMorphism& fm, const AppMorphism& fp,
                               const std::optional<RSet>& hint, const Budget& budget,
                               std::string label = "") {
  require(obj_same_shape(fm.f.src, fp.f.src) && obj_same_shape(fm.f.dst, fp.f.dst),
          "preorder_check: morphisms do not share their carriers");
  IneqCert c;
  c.label = label.empty() ? fm.name + " <= " + fp.name : std::move(label);
  auto data = detail::i_data(fm.tsrc, fm.f, std::nullopt, budget);

  auto finish = [&](RSet realizer, FilterCertPtr cert, Verdict in_filter) -> IneqCert {
    c.realizer = std::move(realizer);
    c.cert = std::move(cert);
    c.in_filter = std::move(in_filter);
    c.realized = detail::verify_ineq(fp.dst, fp.f, data, c.realizer, budget);
    c.verdict = verdict_all({c.in_filter, c.realized});
    return c;
  };

  if (hint) {
    MemberResult mem = filter_member(fp.dst, fp.dst_phi, *hint, budget);
    return finish(*hint, mem.cert, mem.verdict);
  }
  const Pca* D = &fp.dst;
  Rel fpc = fp.f;
  std::uint64_t fuel = budget.fuel;
  auto fit = [D, fpc, data, fuel](const Elem& r) {
    return detail::i_fit(*D, fpc, data, r, fuel);
  };
  GradedResult got = graded_search(fp.dst, fp.dst_phi, fit, "r_" + c.label, budget);
  if (got.member.verdict.ok())
    return finish(got.member.witness, got.member.cert, got.member.verdict);
  c.realizer = RSet::finite({}, "none");
  c.in_filter = got.member.verdict;
  c.realized = got.member.verdict;
  c.verdict = got.member.verdict;
  return c;
}

// Build an inequality certificate from a lambda recipe over given generator
// sets, then verify it.
inline IneqCert ineq_from_term(const std::string& lambda_src,
                               const std::vector<CertArg>& gens, const AppMorphism& fm,
                               const AppMorphism& fp, const Budget& budget,
                               std::string label = "") {
  IneqCert c;
  c.label = label.empty() ? fm.name + " <= " + fp.name : std::move(label);
  TermPtr t = compile_lambda(parse_lambda(lambda_src));
  std::vector<RSet> sets;
  for (const auto& g : gens) sets.push_back(g.set);
  SetEval ev = eval_term_sets(fp.dst, t, sets, budget);
  if (ev.defined == Tri::False) {
    c.verdict = Verdict::refuted("recipe evaluation undefined");
    c.in_filter = c.realized = c.verdict;
    return c;
  }
  c.recipe = t;
  c.realizer = ev.value;
  c.cert = FilterCert::by_term(t, gens);
  c.in_filter = replay_cert(fp.dst, fp.dst_phi, c.realizer, c.cert, budget);
  if (ev.defined == Tri::Dunno) c.in_filter = c.in_filter.capped();
  auto data = detail::i_data(fm.tsrc, fm.f, std::nullopt, budget);
  c.realized = detail::verify_ineq(fp.dst, fp.f, data, c.realizer, budget);
  c.verdict = verdict_all({c.in_filter, c.realized});
  return c;
}

// Transitivity: r' after r, packaged as \x. g1 (g0 x).
inline IneqCert compose_ineq(const IneqCert& c1, const IneqCert& c2, const AppMorphism& fm,
                             const AppMorphism& fpp, const Budget& budget,
                             std::string label = "") {
  return ineq_from_term("\\x. g1 (g0 x)",
                        {CertArg{c1.realizer, c1.cert}, CertArg{c2.realizer, c2.cert}}, fm,
                        fpp, budget,
                        label.empty() ? fm.name + " <= " + fpp.name : std::move(label));
}

// ---------------------------------------------------------------------------
// Pseudostructure: zero morphisms, finite products, pseudocoproducts.

// the everywhere-defined morphism through a chosen target filter element
inline AppMorphism zero_morphism(const Pca& A, const Filter& phiA, const Pca& B,
                                 const Filter& psiB, const RSet& W, const Budget& budget,
                                 std::string name = "zero") {
  require(W.is_finite(), "zero_morphism: target element must be finite");
  Rel f;
  if (A.carrier.finite()) {
    std::vector<std::pair<Elem, Elem>> ps;
    for (const auto& a : A.carrier.elements())
      for (const auto& w : W.elems) {
        if (A.world.fibered() && a.first() != w.first()) continue;
        ps.emplace_back(a, w);
      }
    f = rel_from_pairs(A.carrier, B.carrier, std::move(ps), name);
  } else {
    RSet Wc = W;
    Obj bc = B.carrier;
    bool fib = A.world.fibered();
    f = rel_fn(
        A.carrier, B.carrier,
        [Wc, bc](const Elem&, const Elem& b) { return Wc.contains(bc, b); },
        [Wc, fib](const Elem& a) {
          std::vector<Elem> out;
          for (const auto& w : Wc.elems)
            if (!fib || w.first() == a.first()) out.push_back(w);
          return out;
        },
        name);
  }
  std::optional<RSet> hint;
  if (B.kit.has(KitSlot::K)) hint = B.kit_set(KitSlot::K);
  return check_vertical(A, phiA, B, psiB, f, hint, budget, std::move(name));
}

inline AppMorphism morphism_to_unit(const Pca& A, const Filter& phiA, const Budget& budget) {
  Pca one = unit_pca(A.world);
  return zero_morphism(A, phiA, one, Filter::maximal(), one.kit_set(KitSlot::I), budget,
                       "!_" + A.name);
}

struct ZeroReport {
  MemberResult member;  // a filter element below every image
  Verdict verdict;
};

// is the whole of some filter element contained in every image of f?
inline ZeroReport is_zero(const AppMorphism& m, const Budget& budget) {
  bool exh = false;
  auto as = detail::pca_samples(m.tsrc, budget.samples, &exh);
  const Rel* f = &m.f;
  bool fib = m.tsrc.world.fibered();
  auto asp = std::make_shared<std::vector<Elem>>(std::move(as));
  bool sampled = !exh;
  auto fit = [f, fib, asp, sampled](const Elem& r) {
    for (const auto& a : *asp) {
      if (fib && a.first() != r.first()) continue;
      if (!f->holds(a, r)) return RealizerFit::Fail;
    }
    return sampled ? RealizerFit::PassSampled : RealizerFit::Pass;
  };
  ZeroReport rep;
  GradedResult got = graded_search(m.dst, m.dst_phi, fit, "zero_" + m.name, budget);
  rep.member = got.member;
  rep.verdict = got.member.verdict;
  return rep;
}

// f <= zero through \x. g0 g1 (a constant function onto W).
inline IneqCert below_zero(const AppMorphism& fm, const AppMorphism& zm, const RSet& W,
                           const FilterCertPtr& whyW, const Budget& budget) {
  require(zm.dst.kit.has(KitSlot::K), "below_zero: target kit needs K");
  MemberResult kmem = filter_member(zm.dst, zm.dst_phi, zm.dst.kit_set(KitSlot::K), budget);
  return ineq_from_term("g0 g1",
                        {CertArg{zm.dst.kit_set(KitSlot::K), kmem.cert}, CertArg{W, whyW}},
                        fm, zm, budget, fm.name + " <= " + zm.name);
}

// ---------------------------------------------------------------------------
// Finite products of PCAs over the power world.

namespace detail {

// restriction of a fibered set to one fiber, as a raw set over that factor
inline RSet restrict_rset_fiber(const RSet& u, const Elem& base, const Obj& factor_carrier) {
  if (u.kind == RSet::Kind::Full) return RSet::full();
  if (u.is_finite()) {
    std::vector<Elem> out;
    for (const auto& e : u.elems)
      if (e.tag() == Elem::Tag::Pair && e.first() == base) out.push_back(e.second());
    return RSet::finite(std::move(out), u.show() + "|" + base.show());
  }
  RSet uc = u;
  Elem b = base;
  return RSet::predicate(
      [uc, b](const Elem& v) { return uc.pred(Elem::pair(b, v)); },
      u.show() + "|" + base.show());
}

}  // namespace detail

struct PcaProduct {
  Pca pca;
  Filter phi;
  std::vector<AppMorphism> proj;
};

// Product over the n-fold power world; every factor lives on the set world.
// Membership in the product filter is componentwise, certified ByComponents.
inline PcaProduct product_pca(const std::vector<Pca>& factors,
                              const std::vector<Filter>& phis, const Budget& budget,
                              std::string name = "") {
  require(!factors.empty() && factors.size() == phis.size(), "product_pca: shape");
  for (const auto& a : factors)
    require(!a.world.fibered(), "product_pca: factors must live on the set world");
  std::size_t n = factors.size();
  std::vector<Elem> idx;
  for (std::size_t i = 0; i < n; ++i) idx.push_back(Elem::nat(static_cast<std::uint64_t>(i)));

  PcaProduct out;
  Pca& P = out.pca;
  if (name.empty()) {
    name = "prod(";
    for (std::size_t i = 0; i < n; ++i) name += (i ? "," : "") + factors[i].name;
    name += ")";
  }
  P.name = name;
  P.world = World::pow_world(idx);
  std::vector<Carrier> fibers;
  for (const auto& a : factors) fibers.push_back(a.carrier.fibers[0]);
  P.carrier = Obj{P.world, std::move(fibers)};

  auto fs = std::make_shared<std::vector<Pca>>(factors);
  P.app_raw = [fs](std::size_t fi, const Elem& a, const Elem& b, std::uint64_t fuel) {
    return (*fs)[fi].app_raw(0, a, b, fuel);
  };
  P.exact = true;
  for (const auto& a : factors) P.exact = P.exact && a.exact;
  for (KitSlot s : {KitSlot::K, KitSlot::S, KitSlot::I, KitSlot::Kbar, KitSlot::P,
                    KitSlot::P0, KitSlot::P1}) {
    bool all = true;
    std::vector<Elem> per;
    for (const auto& a : factors) {
      if (!a.kit.has(s)) {
        all = false;
        break;
      }
      per.push_back(a.kit.at(s, 0));
    }
    if (all) P.kit.slots[s] = std::move(per);
  }

  bool des_finite = true;
  for (const auto& a : factors) des_finite = des_finite && a.designated.is_finite();
  if (des_finite) {
    std::vector<Elem> elems;
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& v : factors[i].designated.elems) elems.push_back(Elem::pair(idx[i], v));
    P.designated = RSet::finite(std::move(elems), "C");
  } else {
    P.designated = RSet::predicate(
        [fs](const Elem& e) {
          if (e.tag() != Elem::Tag::Pair) return false;
          std::size_t i = static_cast<std::size_t>(e.first().nat_value());
          if (i >= fs->size()) return false;
          return (*fs)[i].designated.contains((*fs)[i].carrier, e.second());
        },
        "C");
  }
  P.designated_nth_raw = [fs](std::size_t fi, std::uint64_t i) -> std::optional<Elem> {
    const Pca& a = (*fs)[fi];
    if (a.designated.is_finite())
      return i < a.designated.elems.size() ? std::optional<Elem>(a.designated.elems[i])
                                           : std::nullopt;
    if (a.designated_nth_raw) return a.designated_nth_raw(0, i);
    return a.carrier.nth_elem(i);
  };
  P.sample_raw = [fs](std::size_t fi, Rng& rng) { return (*fs)[fi].sample_raw(0, rng); };
  P.defaults = factors[0].defaults;

  // the product filter: all factors generated -> generator tuples; all
  // singleton-style -> the fibered pool
  Filter& phi = out.phi;
  bool all_generated = true, all_singleton = true;
  for (const auto& ph : phis) {
    if (ph.mode != Filter::Mode::Generated) all_generated = false;
    if (ph.mode == Filter::Mode::Generated) all_singleton = false;
  }
  phi.name = "prod_phi";
  if (all_generated) {
    phi.mode = Filter::Mode::Generated;
    std::vector<std::size_t> pick(n, 0);
    while (true) {
      std::vector<Elem> elems;
      std::string gname;
      bool fin = true;
      for (std::size_t i = 0; i < n; ++i) {
        const FilterGen& g = phis[i].gens[pick[i]];
        gname += (i ? "x" : "") + g.name;
        if (!g.set.is_finite()) {
          fin = false;
          break;
        }
        for (const auto& v : g.set.elems) elems.push_back(Elem::pair(idx[i], v));
      }
      if (fin) phi.gens.push_back(FilterGen{RSet::finite(std::move(elems), gname), gname});
      std::size_t j = 0;
      while (j < n && ++pick[j] == phis[j].gens.size()) pick[j++] = 0;
      if (j == n) break;
    }
  } else {
    require(all_singleton, "product_pca: mixed filter modes are not supported");
    phi.mode = Filter::Mode::SingletonGenerated;
    bool pools_finite = true;
    for (const auto& ph : phis) pools_finite = pools_finite && ph.pool.is_finite();
    if (pools_finite) {
      std::vector<Elem> elems;
      for (std::size_t i = 0; i < n; ++i)
        for (const auto& v : phis[i].pool.elems) elems.push_back(Elem::pair(idx[i], v));
      phi.pool = RSet::finite(std::move(elems), "pool");
    } else {
      auto phsp = std::make_shared<std::vector<Filter>>(phis);
      phi.pool = RSet::predicate(
          [phsp, fs](const Elem& e) {
            if (e.tag() != Elem::Tag::Pair) return false;
            std::size_t i = static_cast<std::size_t>(e.first().nat_value());
            if (i >= phsp->size()) return false;
            return (*phsp)[i].pool.contains((*fs)[i].carrier, e.second());
          },
          "pool");
    }
  }

  auto phisp = std::make_shared<std::vector<Filter>>(phis);
  auto idxp = std::make_shared<std::vector<Elem>>(idx);
  std::string via = phi.name;
  phi.oracle = [fs, phisp, idxp, via](const Pca&, const RSet& u,
                                      const Budget& b) -> std::optional<MemberResult> {
    std::vector<Verdict> vs;
    std::vector<FilterCertPtr> parts;
    std::vector<Elem> witness;
    bool wit_ok = true;
    for (std::size_t i = 0; i < fs->size(); ++i) {
      RSet ui = detail::restrict_rset_fiber(u, (*idxp)[i], (*fs)[i].carrier);
      MemberResult mi = filter_member((*fs)[i], (*phisp)[i], ui, b);
      vs.push_back(mi.verdict);
      if (!mi.verdict.ok()) return MemberResult{verdict_all(vs), nullptr, RSet{}};
      parts.push_back(mi.cert);
      if (mi.witness.is_finite())
        for (const auto& w : mi.witness.elems) witness.push_back(Elem::pair((*idxp)[i], w));
      else
        wit_ok = false;
    }
    RSet w = wit_ok ? RSet::finite(std::move(witness), "{witness}") : u;
    return MemberResult{verdict_all(vs), FilterCert::by_components(via, parts), w};
  };
  phi.replay_hook = [fs, phisp, idxp, via](const Pca&, const RSet& u,
                                           const FilterCertPtr& cert,
                                           const Budget& b) -> std::optional<Verdict> {
    if (cert->kind != FilterCert::Kind::ByComponents || cert->via != via)
      return std::nullopt;
    if (cert->parts.size() != fs->size())
      return Verdict::refuted("component count does not match the factors");
    std::vector<Verdict> vs;
    for (std::size_t i = 0; i < fs->size(); ++i) {
      RSet ui = detail::restrict_rset_fiber(u, (*idxp)[i], (*fs)[i].carrier);
      vs.push_back(replay_cert((*fs)[i], (*phisp)[i], ui, cert->parts[i], b));
    }
    return verdict_all(vs);
  };

  for (std::size_t i = 0; i < n; ++i) {
    std::optional<RSet> hint;
    if (factors[i].kit.has(KitSlot::I)) hint = factors[i].kit_set(KitSlot::I);
    out.proj.push_back(check_applicative(
        projection_functor(P.world, idx[i]), P, phi, factors[i], phis[i],
        identity_rel(factors[i].carrier, "delta"), hint, budget,
        "pr" + std::to_string(i)));
  }
  return out;
}

// Tupling into the product along the diagonal functor.  The tracker is the
// section of the component trackers, certified componentwise.
inline AppMorphism product_pair(const PcaProduct& prod, const Pca& B, const Filter& chiB,
                                const std::vector<AppMorphism>& comps, const Budget& budget,
                                std::string name = "pair") {
  std::size_t n = prod.pca.fiber_count();
  require(comps.size() == n, "product_pair: one component per factor");
  for (const auto& c : comps)
    require(c.p.kind == RegFunctor::Kind::Identity && !c.src.world.fibered(),
            "product_pair: components must be vertical set-world morphisms");
  std::vector<Elem> idx = prod.pca.world.base;
  RegFunctor dg = diagonal_functor(idx);
  Obj dsrc = functor_apply(dg, B.carrier);

  bool fin = B.carrier.finite();
  for (const auto& c : comps) fin = fin && c.f.finite;
  Rel f;
  if (fin) {
    std::vector<std::pair<Elem, Elem>> ps;
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& [a, b] : comps[i].f.pairs)
        ps.emplace_back(Elem::pair(idx[i], a), Elem::pair(idx[i], b));
    f = rel_from_pairs(dsrc, prod.pca.carrier, std::move(ps), name);
  } else {
    auto cs = std::make_shared<std::vector<AppMorphism>>(comps);
    f = rel_fn(
        dsrc, prod.pca.carrier,
        [cs](const Elem& a, const Elem& b) {
          if (a.first() != b.first()) return false;
          std::size_t i = static_cast<std::size_t>(a.first().nat_value());
          return (*cs)[i].f.holds(a.second(), b.second());
        },
        [cs](const Elem& a) {
          std::size_t i = static_cast<std::size_t>(a.first().nat_value());
          std::vector<Elem> out;
          for (const auto& b : (*cs)[i].f.image_of(a.second()))
            out.push_back(Elem::pair(a.first(), b));
          return out;
        },
        name);
  }

  std::optional<RSet> hint;
  FilterCertPtr cert;
  bool trackers_finite = true;
  for (const auto& c : comps) trackers_finite = trackers_finite && c.tracker.is_finite();
  if (trackers_finite) {
    std::vector<Elem> elems;
    std::vector<FilterCertPtr> parts;
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& r : comps[i].tracker.elems) elems.push_back(Elem::pair(idx[i], r));
      parts.push_back(comps[i].cert);
    }
    hint = RSet::finite(std::move(elems), "<trackers>");
    bool all = true;
    for (const auto& p : parts) all = all && p != nullptr;
    if (all) cert = FilterCert::by_components(prod.phi.name, parts);
  }

  AppMorphism m = check_applicative(dg, B, chiB, prod.pca, prod.phi, f, hint, budget,
                                    std::move(name));
  if (cert) {
    Verdict replayed = replay_cert(prod.pca, prod.phi, m.tracker, cert, budget);
    if (replayed.ok()) {
      m.cert = cert;
      m.in_filter = replayed;
      m.verdict = verdict_all({m.total, m.in_filter, m.tracked, m.images});
    }
  }
  return m;
}

// Certificate translation between the two presentations of a two-factor
// product filter: from memberships U in <G> and V in <H> to a single term
// z t' s' over the product generators, with z the K x Kbar tuple.
inline FilterCertPtr product_cert_translate(const Filter& prod_phi, std::size_t nL,
                                            std::size_t nR, const FilterCertPtr& certL,
                                            const FilterCertPtr& certR, std::size_t iI_left,
                                            std::size_t iI_right, std::size_t iK_left,
                                            std::size_t iKbar_right) {
  auto normalize = [](const FilterCertPtr& c)
      -> std::optional<std::pair<TermPtr, std::vector<std::size_t>>> {
    if (!c) return std::nullopt;
    if (c->kind == FilterCert::Kind::ByGenerator)
      return std::make_pair(tvar("g0"), std::vector<std::size_t>{c->index});
    if (c->kind != FilterCert::Kind::ByTerm) return std::nullopt;
    std::vector<std::size_t> gidx;
    for (const auto& a : c->args) {
      if (!a.why || a.why->kind != FilterCert::Kind::ByGenerator) return std::nullopt;
      gidx.push_back(a.why->index);
    }
    return std::make_pair(c->term, gidx);
  };
  auto left = normalize(certL);
  auto right = normalize(certR);
  if (!left || !right) return nullptr;

  std::function<TermPtr(const TermPtr&, std::size_t)> shift =
      [&shift](const TermPtr& t, std::size_t off) -> TermPtr {
    if (t->tag == Term::Tag::App) return tapp(shift(t->fun, off), shift(t->arg, off));
    if (t->tag == Term::Tag::Var) {
      std::size_t i = static_cast<std::size_t>(std::stoul(t->var.substr(1)));
      return tvar("g" + std::to_string(i + off));
    }
    return t;
  };
  std::size_t aL = left->second.size(), aR = right->second.size();
  TermPtr body = tapp(tapp(tvar("g" + std::to_string(aL + aR)), shift(left->first, 0)),
                      shift(right->first, aL));

  // the product generators are emitted with the left index varying fastest
  auto prod_arg = [&prod_phi, nL](std::size_t i, std::size_t j) -> CertArg {
    std::size_t flat = j * nL + i;
    require(flat < prod_phi.gens.size(), "product_cert_translate: generator out of range");
    return CertArg{prod_phi.gens[flat].set, FilterCert::by_generator(flat)};
  };
  std::vector<CertArg> args;
  for (std::size_t k = 0; k < aL; ++k) args.push_back(prod_arg(left->second[k], iI_right));
  for (std::size_t k = 0; k < aR; ++k) args.push_back(prod_arg(iI_left, right->second[k]));
  args.push_back(prod_arg(iK_left, iKbar_right));
  (void)nR;
  return FilterCert::by_term(body, std::move(args));
}

// ---------------------------------------------------------------------------
// Pseudocoproducts: the product data pushed to the set world along the
// binary product functor, with tracked injections and copairing.

struct PcaCoproduct {
  PcaProduct two;
  Pca pca;
  Filter phi;
  AppMorphism k0, k1;
};

inline PcaCoproduct coproduct_pca(const Pca& A, const Filter& phiA, const Pca& B,
                                  const Filter& phiB, const Budget& budget,
                                  std::string name = "") {
  PcaCoproduct out;
  out.two = product_pca({A, B}, {phiA, phiB}, budget,
                        name.empty() ? A.name + "(+)" + B.name : name);
  RegFunctor F = binary_product_functor(out.two.pca.world);
  out.pca = transport_pca(F, out.two.pca);
  out.phi = transport_filter(F, out.two.pca, out.two.phi);

  auto injection = [&](const Pca& src, const Filter& src_phi, const Pca& other, bool left,
                       const std::optional<RSet>& hint, std::string iname) {
    Rel f;
    if (src.carrier.finite() && other.carrier.finite()) {
      std::vector<std::pair<Elem, Elem>> ps;
      for (const auto& a : src.carrier.elements())
        for (const auto& d : other.carrier.elements())
          ps.emplace_back(a, left ? Elem::pair(a, d) : Elem::pair(d, a));
      f = rel_from_pairs(src.carrier, out.pca.carrier, std::move(ps), iname);
    } else {
      Obj oc = other.carrier;
      Budget b = budget;
      f = rel_fn(
          src.carrier, out.pca.carrier,
          [left](const Elem& a, const Elem& pr) {
            if (pr.tag() != Elem::Tag::Pair) return false;
            return left ? pr.first() == a : pr.second() == a;
          },
          [oc, b, left](const Elem& a) {
            std::vector<Elem> outv;
            for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(b.samples); ++i) {
              auto d = oc.nth_elem(i);
              if (!d) break;
              outv.push_back(left ? Elem::pair(a, *d) : Elem::pair(*d, a));
            }
            return outv;
          },
          iname);
    }
    return check_vertical(src, src_phi, out.pca, out.phi, f, hint, budget, iname);
  };

  std::optional<RSet> h0, h1;
  if (A.kit.has(KitSlot::I) && B.kit.has(KitSlot::K))
    h0 = RSet::finite({Elem::pair(A.kit.at(KitSlot::I, 0), B.kit.at(KitSlot::K, 0))},
                      "{IxK}");
  if (A.kit.has(KitSlot::K) && B.kit.has(KitSlot::I))
    h1 = RSet::finite({Elem::pair(A.kit.at(KitSlot::K, 0), B.kit.at(KitSlot::I, 0))},
                      "{KxI}");
  out.k0 = injection(A, phiA, B, true, h0, "k0");
  out.k1 = injection(B, phiB, A, false, h1, "k1");
  return out;
}

// Copairing [f,g] through the target pairing combinator.
inline AppMorphism copair(const PcaCoproduct& cp, const AppMorphism& fm, const AppMorphism& gm,
                          const Budget& budget, std::string name = "copair") {
  require(obj_same_shape(fm.dst.carrier, gm.dst.carrier), "copair: shared target required");
  const Pca& C = fm.dst;
  require(C.kit.has(KitSlot::P) && C.kit.has(KitSlot::P0) && C.kit.has(KitSlot::P1),
          "copair: target kit needs P, P0, P1");
  Elem pc = C.kit.at(KitSlot::P, 0);
  Rel ff = fm.f, gf = gm.f;
  Budget b = budget;
  auto app = C.app_raw;
  auto values = [pc, ff, gf, app, b](const Elem& pr) {
    std::vector<Elem> out;
    if (pr.tag() != Elem::Tag::Pair) return out;
    for (const auto& c1 : ff.image_of(pr.first()))
      for (const auto& c2 : gf.image_of(pr.second())) {
        AppOutcome h = app(0, pc, c1, b.fuel);
        if (!h.is_value()) continue;
        AppOutcome w = app(0, h.val, c2, b.fuel);
        if (w.is_value()) out.push_back(w.val);
      }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };

  Rel f;
  if (cp.pca.carrier.finite() && ff.finite && gf.finite) {
    std::vector<std::pair<Elem, Elem>> ps;
    for (const auto& pr : cp.pca.carrier.elements())
      for (const auto& v : values(pr)) ps.emplace_back(pr, v);
    f = rel_from_pairs(cp.pca.carrier, C.carrier, std::move(ps), name);
  } else {
    f = rel_fn(
        cp.pca.carrier, C.carrier,
        [values](const Elem& pr, const Elem& c) {
          for (const auto& v : values(pr))
            if (v == c) return true;
          return false;
        },
        values, name);
  }

  TermPtr t = compile_lambda(
      parse_lambda("\\x y. P (g0 (P0 x) (P0 y)) (g1 (P1 x) (P1 y))"));
  SetEval ev = eval_term_sets(C, t, {fm.tracker, gm.tracker}, budget);
  std::optional<RSet> hint;
  FilterCertPtr cert;
  if (ev.defined == Tri::True) {
    hint = ev.value;
    cert = FilterCert::by_term(t, {CertArg{fm.tracker, fm.cert}, CertArg{gm.tracker, gm.cert}});
  }
  AppMorphism m = check_vertical(cp.pca, cp.phi, C, fm.dst_phi, f, hint, budget,
                                 std::move(name));
  if (cert) {
    m.recipe = t;
    m.cert = cert;
    m.in_filter = replay_cert(C, fm.dst_phi, m.tracker, cert, budget);
    m.verdict = verdict_all({m.total, m.in_filter, m.tracked, m.images});
  }
  return m;
}

// The two inequalities making copair-after-injection agree with the input
// component: the projection realizes one direction, pairing against the
// other component's image realizes the converse.
struct CopairLaw {
  AppMorphism composite;
  IneqCert fwd, bwd;
};

inline CopairLaw copair_law(const PcaCoproduct& cp, const AppMorphism& cop,
                            const AppMorphism& fm, const AppMorphism& gm, bool left,
                            const Budget& budget) {
  CopairLaw law;
  const AppMorphism& kappa = left ? cp.k0 : cp.k1;
  const AppMorphism& comp = left ? fm : gm;
  const AppMorphism& other = left ? gm : fm;
  std::string kn = left ? "k0" : "k1";
  law.composite = compose_applicative(kappa, cop, budget, "[f,g]." + kn);
  law.fwd = preorder_check(law.composite, comp,
                           cop.dst.kit_set(left ? KitSlot::P0 : KitSlot::P1), budget,
                           law.composite.name + " <= " + comp.name);
  // values over a short carrier prefix, so they stay inside the bounded
  // image enumeration of the composite
  bool exh = false;
  RSet prefix = RSet::finite(detail::pca_samples(other.tsrc, 4, &exh), "prefix");
  RSet otherImg = detail::rel_image_set(other.f, other.tsrc.carrier, prefix, budget,
                                        "im(" + other.name + ")");
  MemberResult omem = filter_member(cop.dst, cop.dst_phi, otherImg, budget);
  law.bwd = ineq_from_term(left ? "\\x. P x g0" : "\\x. P g0 x",
                           {CertArg{otherImg, omem.cert}}, comp, law.composite, budget,
                           comp.name + " <= " + law.composite.name);
  return law;
}

// Essential uniqueness: any two morphisms agreeing on the injections (as the
// given inequality certificates) are comparable.
inline IneqCert coproduct_unique(const PcaCoproduct& cp, const AppMorphism& h,
                                 const AppMorphism& k, const IneqCert& c0,
                                 const IneqCert& c1, const Budget& budget) {
  require(cp.two.pca.kit.has(KitSlot::K) && cp.two.pca.kit.has(KitSlot::Kbar),
          "coproduct_unique: factor kits need K and Kbar");
  Elem z = Elem::pair(cp.two.pca.kit.at(KitSlot::K, 0), cp.two.pca.kit.at(KitSlot::Kbar, 1));
  RSet kz = detail::rel_image_set(k.f, cp.pca.carrier, RSet::singleton(z, "{KxKbar}"),
                                  budget, "k(KxKbar)");
  MemberResult kzmem = filter_member(k.dst, k.dst_phi, kz, budget);
  return ineq_from_term("\\x. g0 (g0 g1 (g2 x)) (g3 x)",
                        {CertArg{k.tracker, k.cert}, CertArg{kz, kzmem.cert},
                         CertArg{c0.realizer, c0.cert}, CertArg{c1.realizer, c1.cert}},
                        h, k, budget, h.name + " <= " + k.name);
}

// ---------------------------------------------------------------------------
// Applicative transformations between morphisms with different functor parts.

struct NatTrans {
  RegFunctor p, q;
  std::function<Arrow(const Obj&)> at;
  std::string name;
};

inline NatTrans identity_nt(const RegFunctor& p, std::string name = "id") {
  RegFunctor pc = p;
  return NatTrans{p, p,
                  [pc](const Obj& x) { return identity_arrow(functor_apply(pc, x)); },
                  std::move(name)};
}

namespace detail {

inline Rel arrow_rel(const Arrow& a, const std::string& label) {
  if (a.src.finite()) return graph_of(a, label);
  auto fn = a.fn;
  return rel_fn(
      a.src, a.dst, [fn](const Elem& x, const Elem& y) { return fn(x) == y; },
      [fn](const Elem& x) { return std::vector<Elem>{fn(x)}; }, label);
}

}  // namespace detail

// The component at a PCA, checked as an applicative morphism between the two
// transports (tracked by I when the kit provides it).
inline AppMorphism mu_bar_morphism(const NatTrans& mu, const Pca& A, const Filter& phiA,
                                   const Budget& budget) {
  Pca pA = transport_pca(mu.p, A);
  Filter phiP = transport_filter(mu.p, A, phiA);
  Pca qA = transport_pca(mu.q, A);
  Filter phiQ = transport_filter(mu.q, A, phiA);
  Arrow comp = mu.at(A.carrier);
  require(obj_same_shape(comp.src, pA.carrier) && obj_same_shape(comp.dst, qA.carrier),
          "mu_bar_morphism: component does not match the transports");
  std::optional<RSet> hint;
  if (qA.kit.has(KitSlot::I)) hint = qA.kit_set(KitSlot::I);
  return check_vertical(pA, phiP, qA, phiQ,
                        detail::arrow_rel(comp, mu.name + "_" + A.name), hint, budget,
                        mu.name + "_" + A.name);
}

struct AppTransformation {
  NatTrans mu;
  Verdict natural;      // the squares on the supplied test arrows
  AppMorphism premorph; // the component as a morphism of transports
  IneqCert tracking;    // f <= g . mu
  Verdict verdict;

  bool ok() const { return verdict.ok(); }
};

inline AppTransformation transform(const NatTrans& mu, const AppMorphism& fm,
                                   const AppMorphism& gm,
                                   const std::vector<Arrow>& test_arrows,
                                   const std::optional<RSet>& hint, const Budget& budget) {
  AppTransformation t;
  t.mu = mu;

  Coverage cov;
  t.natural = Verdict::unknown("no naturality squares supplied");
  for (const auto& h : test_arrows) {
    cov.checked++;
    Arrow lhs = compose_arrow(mu.at(h.dst), functor_apply(mu.p, h));
    Arrow rhs = compose_arrow(functor_apply(mu.q, h), mu.at(h.src));
    if (!arrow_equal(lhs, rhs)) {
      t.natural = Verdict::refuted("naturality fails at " +
                                       (h.name.empty() ? std::string("an arrow") : h.name),
                                   cov);
      break;
    }
    cov.passed++;
  }
  if (!test_arrows.empty() && cov.passed == cov.checked) {
    cov.domain = cov.checked;
    t.natural = Verdict::proven(cov);
  }

  t.premorph = mu_bar_morphism(mu, fm.src, fm.src_phi, budget);

  Arrow comp = mu.at(fm.src.carrier);
  auto data = detail::i_data(fm.tsrc, fm.f, comp, budget);
  IneqCert& c = t.tracking;
  c.label = fm.name + " <= " + gm.name + "." + mu.name;
  auto finish = [&](RSet realizer, FilterCertPtr cert, Verdict in_filter) {
    c.realizer = std::move(realizer);
    c.cert = std::move(cert);
    c.in_filter = std::move(in_filter);
    c.realized = detail::verify_ineq(gm.dst, gm.f, data, c.realizer, budget);
    c.verdict = verdict_all({c.in_filter, c.realized});
  };
  if (hint) {
    MemberResult mem = filter_member(gm.dst, gm.dst_phi, *hint, budget);
    finish(*hint, mem.cert, mem.verdict);
  } else {
    const Pca* D = &gm.dst;
    Rel gf = gm.f;
    std::uint64_t fuel = budget.fuel;
    auto fit = [D, gf, data, fuel](const Elem& r) {
      return detail::i_fit(*D, gf, data, r, fuel);
    };
    GradedResult got = graded_search(gm.dst, gm.dst_phi, fit, "r_" + c.label, budget);
    if (got.member.verdict.ok())
      finish(got.member.witness, got.member.cert, got.member.verdict);
    else {
      c.realizer = RSet::finite({}, "none");
      c.in_filter = got.member.verdict;
      c.realized = got.member.verdict;
      c.verdict = got.member.verdict;
    }
  }
  t.verdict = verdict_all({t.natural, t.premorph.verdict, t.tracking.verdict});
  return t;
}

// ---------------------------------------------------------------------------
// The action on assemblies: objects, morphisms, transformations.

namespace detail {

inline RSet restrict_rset_base(const RSet& r, const Elem& base, const Obj& carrier) {
  if (r.is_finite()) {
    std::vector<Elem> out;
    for (const auto& e : r.elems)
      if (e.tag() == Elem::Tag::Pair && e.first() == base) out.push_back(e);
    return RSet::finite(std::move(out), r.show() + "|" + base.show());
  }
  RSet rc = r;
  Obj cc = carrier;
  Elem b = base;
  return RSet::predicate(
      [rc, cc, b](const Elem& e) {
        return e.tag() == Elem::Tag::Pair && e.first() == b && rc.contains(cc, e);
      },
      r.show() + "|" + base.show());
}

// |X| and E transported along the functor part
inline Assembly transport_assembly(const RegFunctor& F, const Pca& A, const Assembly& X) {
  switch (F.kind) {
    case RegFunctor::Kind::Identity: return X;
    case RegFunctor::Kind::Compose: {
      Pca mid = transport_pca(*F.before, A);
      return transport_assembly(*F.after, mid, transport_assembly(*F.before, A, X));
    }
    case RegFunctor::Kind::Terminal:
      return Assembly{F.name + "(" + X.name + ")", set_obj({Elem::unit()}),
                      [](const Elem&) { return RSet::full(); }};
    default: break;
  }
  Obj space = functor_apply(F, X.space);
  Obj carrier = functor_apply(F, A.carrier);
  RegFunctor Fc = F;
  Obj ac = A.carrier;
  auto E = X.E;
  if (F.kind == RegFunctor::Kind::Projection) {
    Elem i = F.index;
    return Assembly{F.name + "(" + X.name + ")", space, [Fc, ac, E, i](const Elem& v) {
                      return transport_rset(Fc, ac, E(Elem::pair(i, v)));
                    }};
  }
  if (F.kind == RegFunctor::Kind::Pullback || F.kind == RegFunctor::Kind::Diagonal) {
    auto re = F.reindex;
    bool fib = F.src_world.fibered();
    return Assembly{F.name + "(" + X.name + ")", space,
                    [Fc, ac, E, re, fib, carrier](const Elem& e) {
                      Elem old = fib ? Elem::pair(re.at(e.first()), e.second()) : e.second();
                      return restrict_rset_base(transport_rset(Fc, ac, E(old)), e.first(),
                                                carrier);
                    }};
  }
  require(F.kind == RegFunctor::Kind::BinaryProduct, "transport_assembly: unhandled kind");
  World pw = F.src_world;
  return Assembly{F.name + "(" + X.name + ")", space, [E, pw, ac](const Elem& x) {
                    RSet l = E(Elem::pair(pw.base[0], x.first()));
                    RSet r = E(Elem::pair(pw.base[1], x.second()));
                    if (l.is_finite() && r.is_finite()) {
                      std::vector<Elem> out;
                      for (const auto& a : l.elems)
                        for (const auto& b : r.elems)
                          out.push_back(Elem::pair(a.second(), b.second()));
                      return RSet::finite(std::move(out));
                    }
                    RSet lc = l, rc = r;
                    World pwc = pw;
                    Obj acc = ac;
                    return RSet::predicate(
                        [lc, rc, pwc, acc](const Elem& e) {
                          if (e.tag() != Elem::Tag::Pair) return false;
                          return lc.contains(acc, Elem::pair(pwc.base[0], e.first())) &&
                                 rc.contains(acc, Elem::pair(pwc.base[1], e.second()));
                        },
                        "ExE");
                  }};
}

}  // namespace detail

// F(X): the transported base with realizers pushed through the relation.
inline Assembly asm_apply_obj(const AppMorphism& m, const Assembly& X, const Budget& budget) {
  Assembly pX = detail::transport_assembly(m.p, m.src, X);
  Rel f = m.f;
  Obj tc = m.tsrc.carrier;
  Budget b = budget;
  auto Ep = pX.E;
  return Assembly{m.name + "(" + X.name + ")", pX.space, [f, tc, b, Ep](const Elem& x) {
                    bool exh = false;
                    std::vector<Elem> as = detail::rset_sample_members(Ep(x), tc, b, &exh);
                    std::vector<Elem> img;
                    for (const auto& a : as)
                      for (const auto& y : f.image_of(a)) img.push_back(y);
                    std::sort(img.begin(), img.end());
                    img.erase(std::unique(img.begin(), img.end()), img.end());
                    if (exh && f.finite) return RSet::finite(std::move(img));
                    RSet src = Ep(x);
                    Rel fc = f;
                    Obj tcc = tc;
                    Budget bc = b;
                    auto listed = std::make_shared<std::vector<Elem>>(std::move(img));
                    std::function<std::optional<Elem>(std::uint64_t)> nth;
                    if (!listed->empty())
                      // repeat the tail: the listing is partial, it must not
                      // signal exhaustion
                      nth = [listed](std::uint64_t i) -> std::optional<Elem> {
                        return i < listed->size() ? (*listed)[i] : listed->back();
                      };
                    return RSet::predicate(
                        [src, fc, tcc, bc](const Elem& y) {
                          bool e2 = false;
                          for (const auto& a :
                               detail::rset_sample_members(src, tcc, bc, &e2))
                            if (fc.holds(a, y)) return true;
                          return false;
                        },
                        "f(E)", nth);
                  }};
}

// F(k) for an assembly morphism k, tracked by \x. V W x with W = f(p(U)).
inline AsmMorphism asm_apply_map(const AppMorphism& m, const AsmMorphism& k,
                                 const Budget& budget) {
  Assembly FX = asm_apply_obj(m, k.src, budget);
  Assembly FY = asm_apply_obj(m, k.dst, budget);
  Arrow g = functor_apply(m.p, k.f);
  RSet pU = transport_rset(m.p, m.src.carrier, k.tracker);
  RSet W = detail::rel_image_set(m.f, m.tsrc.carrier, pU, budget, "f(p(U))");
  MemberResult wmem = filter_member(m.dst, m.dst_phi, W, budget);

  AsmMorphism out;
  out.name = m.name + "(" + k.name + ")";
  out.src = FX;
  out.dst = FY;
  out.f = g;
  // eta-short form of \x. g0 g1 x; a pure application keeps the recipe
  // available on kit-free targets
  TermPtr t = compile_lambda(parse_lambda("g0 g1"));
  SetEval ev = eval_term_sets(m.dst, t, {m.tracker, W}, budget);
  if (ev.defined != Tri::True) {
    out.tracker = RSet::finite({}, "none");
    out.in_filter = Verdict::unknown("tracker recipe did not evaluate");
    out.tracked = out.in_filter;
    out.verdict = out.in_filter;
    return out;
  }
  out.recipe = t;
  out.tracker = ev.value;
  out.cert = FilterCert::by_term(t, {CertArg{m.tracker, m.cert}, CertArg{W, wmem.cert}});
  out.in_filter = replay_cert(m.dst, m.dst_phi, out.tracker, out.cert, budget);
  out.tracked = verify_tracking(m.dst, FX, FY, g, out.tracker, budget, &out.log);
  out.verdict = verdict_all({out.in_filter, out.tracked});
  return out;
}

// The component of a transformation at an assembly, tracked by the
// transformation's realizer.
inline AsmMorphism asm_apply_nt(const AppTransformation& t, const AppMorphism& fm,
                                const AppMorphism& gm, const Assembly& X,
                                const Budget& budget) {
  Assembly FX = asm_apply_obj(fm, X, budget);
  Assembly GX = asm_apply_obj(gm, X, budget);
  AsmMorphism out;
  out.name = t.mu.name + "_" + X.name;
  out.src = FX;
  out.dst = GX;
  out.f = t.mu.at(X.space);
  out.tracker = t.tracking.realizer;
  out.cert = t.tracking.cert;
  out.in_filter = t.tracking.in_filter;
  out.tracked = verify_tracking(gm.dst, FX, GX, out.f, out.tracker, budget, &out.log);
  out.verdict = verdict_all({out.in_filter, out.tracked});
  return out;
}

// Whiskering a vertical 2-cell with a morphism on either side.
inline IneqCert whisker_post(const AppMorphism& h, const IneqCert& c, const AppMorphism& hf,
                             const AppMorphism& hg, const Budget& budget) {
  RSet hU = detail::rel_image_set(h.f, h.tsrc.carrier,
                                  transport_rset(h.p, h.src.carrier, c.realizer), budget,
                                  h.name + "(r)");
  MemberResult mem = filter_member(h.dst, h.dst_phi, hU, budget);
  return ineq_from_term("g0 g1", {CertArg{h.tracker, h.cert}, CertArg{hU, mem.cert}}, hf, hg,
                        budget, hf.name + " <= " + hg.name);
}

inline IneqCert whisker_pre(const IneqCert& c, const AppMorphism& fk, const AppMorphism& gk,
                            const Budget& budget) {
  IneqCert out;
  out.label = fk.name + " <= " + gk.name;
  out.realizer = c.realizer;
  out.cert = c.cert;
  out.in_filter = c.cert ? replay_cert(gk.dst, gk.dst_phi, out.realizer, c.cert, budget)
                         : filter_member(gk.dst, gk.dst_phi, out.realizer, budget).verdict;
  auto data = detail::i_data(fk.tsrc, fk.f, std::nullopt, budget);
  out.realized = detail::verify_ineq(gk.dst, gk.f, data, out.realizer, budget);
  out.verdict = verdict_all({out.in_filter, out.realized});
  return out;
}

// Membership of f(U) in the target filter: the preimage filter test.
inline MemberResult preimage_member(const AppMorphism& m, const RSet& u, const Budget& budget) {
  RSet img = detail::rel_image_set(m.f, m.tsrc.carrier, u, budget, "f(U)");
  return filter_member(m.dst, m.dst_phi, img, budget);
}

}  // namespace pcaw
