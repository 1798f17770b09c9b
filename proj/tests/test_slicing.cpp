#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "pcaw/backends.hpp"
#include "pcaw/slice.hpp"

using namespace pcaw;

namespace {

// exact five-point applicative structure over two probe points e0 = 0, e1 = 1:
// i0 = 2 is an identity, c0 = 3 sends e0 -> c0, e1 -> c1, and c1 = 4 swaps
Pca mixer() {
  Pca p;
  p.name = "mixer";
  p.world = World::set_world();
  p.carrier = set_obj({Elem::nat(0), Elem::nat(1), Elem::nat(2), Elem::nat(3), Elem::nat(4)});
  p.designated = RSet::finite({Elem::nat(2), Elem::nat(3), Elem::nat(4)}, "C");
  p.app_raw = [](std::size_t, const Elem& a, const Elem& b, std::uint64_t) {
    if (a == Elem::nat(2)) return AppOutcome::value(b);
    if (a == Elem::nat(3) && b == Elem::nat(0)) return AppOutcome::value(Elem::nat(3));
    if (a == Elem::nat(3) && b == Elem::nat(1)) return AppOutcome::value(Elem::nat(4));
    if (a == Elem::nat(4) && b == Elem::nat(0)) return AppOutcome::value(Elem::nat(4));
    if (a == Elem::nat(4) && b == Elem::nat(1)) return AppOutcome::value(Elem::nat(3));
    return AppOutcome::undefined();
  };
  p.exact = true;
  p.sample_raw = [](std::size_t, Rng& rng) { return Elem::nat(rng.below(5)); };
  return p;
}

// exact three-point cycle, every element designated: x . 0 steps the cycle
// 0 -> 1 -> 2 -> 0, so every |I|*(c) is some section r.f and conversely
Pca cycler() {
  Pca p;
  p.name = "cycler";
  p.world = World::set_world();
  p.carrier = set_obj({Elem::nat(0), Elem::nat(1), Elem::nat(2)});
  p.designated = RSet::finite({Elem::nat(0), Elem::nat(1), Elem::nat(2)}, "C");
  p.app_raw = [](std::size_t, const Elem& a, const Elem& b, std::uint64_t) {
    if (b != Elem::nat(0)) return AppOutcome::undefined();
    return AppOutcome::value(Elem::nat((a.nat_value() + 1) % 3));
  };
  p.exact = true;
  p.sample_raw = [](std::size_t, Rng& rng) { return Elem::nat(rng.below(3)); };
  return p;
}

Assembly two_point_index(const std::string& name, RSet e0, RSet e1) {
  return table_assembly(name, set_obj({Elem::nat(0), Elem::nat(1)}),
                        {{Elem::nat(0), std::move(e0)}, {Elem::nat(1), std::move(e1)}});
}

Elem at0(const Elem& v) { return Elem::pair(Elem::nat(0), v); }
Elem at1(const Elem& v) { return Elem::pair(Elem::nat(1), v); }

// every pair of per-fiber subsets drawn from the two pools
std::vector<RSet> battery(const std::vector<Elem>& p0, const std::vector<Elem>& p1) {
  std::vector<RSet> out;
  for (std::size_t m0 = 0; m0 < (std::size_t{1} << p0.size()); ++m0)
    for (std::size_t m1 = 0; m1 < (std::size_t{1} << p1.size()); ++m1) {
      std::vector<Elem> elems;
      for (std::size_t i = 0; i < p0.size(); ++i)
        if (m0 >> i & 1) elems.push_back(at0(p0[i]));
      for (std::size_t i = 0; i < p1.size(); ++i)
        if (m1 >> i & 1) elems.push_back(at1(p1[i]));
      out.push_back(RSet::finite(std::move(elems), "U"));
    }
  return out;
}

bool has(const RSet& u, const Elem& e) {
  return std::find(u.elems.begin(), u.elems.end(), e) != u.elems.end();
}

bool covered(const RSet& u, const std::vector<std::vector<Elem>>& members) {
  for (const auto& m : members) {
    bool all = true;
    for (const auto& e : m)
      if (!has(u, e)) {
        all = false;
        break;
      }
    if (all) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("slice over one point recovers the base") {
  Budget budget;

  // trivial base, two-point index: only the full section family is accepted
  Pca triv = make_trivial();
  Filter tphi = canonical_filter(triv);
  Assembly i2 = two_point_index("I2", RSet::finite({Elem::unit()}),
                                RSet::finite({Elem::unit()}));
  SlicePca st = slice_pca(triv, tphi, i2, budget);
  CHECK(st.phi.name == "phi_C/I2");
  for (const auto& u : battery({Elem::unit()}, {Elem::unit()})) {
    MemberResult m = filter_member(st.pca, st.phi, u, budget);
    if (u.elems.size() == 2) {
      CHECK(m.verdict.outcome == Outcome::Proven);
      REQUIRE(m.cert);
      CHECK(replay_cert(st.pca, st.phi, u, m.cert, budget).outcome == Outcome::Proven);
    } else {
      CHECK(m.verdict.outcome == Outcome::Refuted);
    }
  }

  // sk base, one-point index: membership agrees with phi_C on raw values
  Pca sk = make_sk();
  Filter phi = canonical_filter(sk);
  Assembly i1 = table_assembly("I1", set_obj({Elem::nat(0)}),
                               {{Elem::nat(0), RSet::finite({ce("k")})}});
  SlicePca s1 = slice_pca(sk, phi, i1, budget);

  std::optional<Elem> first = s1.pca.carrier.nth_elem(0);
  REQUIRE(first);
  CHECK(first->tag() == Elem::Tag::Pair);
  CHECK(first->first() == Elem::nat(0));

  Budget bb = budget;
  bb.enum_limit = 96;
  std::vector<Elem> probes{ce("k"), ce("k(skk)"), ce("a")};
  for (std::size_t m = 0; m < 8; ++m) {
    std::vector<Elem> raw, enc;
    for (std::size_t i = 0; i < probes.size(); ++i)
      if (m >> i & 1) {
        raw.push_back(probes[i]);
        enc.push_back(at0(probes[i]));
      }
    Outcome upstairs =
        filter_member(s1.pca, s1.phi, RSet::finite(enc), bb).verdict.outcome;
    Outcome downstairs = filter_member(sk, phi, RSet::finite(raw), bb).verdict.outcome;
    // phi_C membership is decided by designatedness alone, so the base can
    // refute; the slice only ever weakens a refutation to unknown
    CHECK((upstairs == Outcome::Proven) == (downstairs == Outcome::Proven));
    CHECK(upstairs != Outcome::Refuted);
  }

  // the inclusion (|I|*, delta) is an applicative morphism
  AppMorphism inc = slice_inclusion(s1, budget);
  CHECK(inc.verdict.outcome != Outcome::Refuted);
  CHECK(inc.tracked.ok());
  CHECK(inc.in_filter.ok());
}

TEST_CASE("exact finite base: the saturated family decides the slice filter") {
  Budget budget;
  Pca mx = mixer();
  Filter phi = canonical_filter(mx);
  Assembly imx = two_point_index("Imx", RSet::finite({Elem::nat(0)}),
                                 RSet::finite({Elem::nat(1)}));
  SlicePca s = slice_pca(mx, phi, imx, budget);

  // generated members, worked out from the application table by hand:
  // E_I, the three diagonals over the pool, and the two mixed sections
  // diag(c0).E_I and diag(c1).E_I
  std::vector<std::vector<Elem>> members = {
      {at0(Elem::nat(0)), at1(Elem::nat(1))},   // E_I
      {at0(Elem::nat(2)), at1(Elem::nat(2))},   // |I|*(i0)
      {at0(Elem::nat(3)), at1(Elem::nat(3))},   // |I|*(c0)
      {at0(Elem::nat(4)), at1(Elem::nat(4))},   // |I|*(c1)
      {at0(Elem::nat(3)), at1(Elem::nat(4))},   // diag(c0).E_I
      {at0(Elem::nat(4)), at1(Elem::nat(3))}};  // diag(c1).E_I

  std::vector<Elem> all{Elem::nat(0), Elem::nat(1), Elem::nat(2), Elem::nat(3), Elem::nat(4)};
  std::size_t proven = 0, refuted = 0;
  for (const auto& u : battery(all, all)) {
    MemberResult m = filter_member(s.pca, s.phi, u, budget);
    if (covered(u, members)) {
      REQUIRE(m.verdict.outcome == Outcome::Proven);
      REQUIRE(m.cert);
      CHECK(replay_cert(s.pca, s.phi, u, m.cert, budget).outcome == Outcome::Proven);
      proven++;
    } else {
      REQUIRE(m.verdict.outcome == Outcome::Refuted);
      refuted++;
    }
  }
  CHECK(proven > 0);
  CHECK(refuted > 0);
  CHECK(proven + refuted == 1024);

  // without a combinator kit the Lemma extraction degrades gracefully
  MemberResult me = filter_member(s.pca, s.phi, s.ei, budget);
  REQUIRE(me.cert);
  CHECK(me.cert->kind == FilterCert::Kind::ByGenerator);
  CHECK_FALSE(slice_lemma(s, me.cert, budget).has_value());
}

TEST_CASE("exact cyclic base matches the nabla-2 characterization") {
  Budget budget;
  Pca cy = cycler();
  Filter phi = canonical_filter(cy);
  // constant index: both points realized by 0, as in nabla 2
  Assembly i = two_point_index("n2", RSet::finite({Elem::nat(0)}),
                               RSet::finite({Elem::nat(0)}));
  SlicePca s = slice_pca(cy, phi, i, budget);
  PartitionedSlice ps = partitioned_slice_filter(s, budget);
  REQUIRE(ps.partitioned.outcome == Outcome::Proven);
  CHECK(ps.basics == std::vector<Elem>{Elem::nat(0), Elem::nat(0)});
  CHECK(ps.filter.gens.size() == 3);

  // every carrier element is designated and every diagonal is a section,
  // so membership is exactly U0 and U1 meeting: the nabla-2 description
  std::vector<Elem> all{Elem::nat(0), Elem::nat(1), Elem::nat(2)};
  for (const auto& u : battery(all, all)) {
    bool meets = false;
    for (const auto& v : all)
      if (has(u, at0(v)) && has(u, at1(v))) meets = true;

    MemberResult mg = filter_member(s.pca, s.phi, u, budget);
    MemberResult mp = filter_member(s.pca, ps.filter, u, budget);
    CHECK(mg.verdict.outcome == (meets ? Outcome::Proven : Outcome::Refuted));
    CHECK(mp.verdict.outcome == mg.verdict.outcome);
    if (mg.verdict.outcome == Outcome::Proven) {
      REQUIRE(mg.cert);
      CHECK(replay_cert(s.pca, s.phi, u, mg.cert, budget).outcome == Outcome::Proven);
      if (mp.cert)
        CHECK(replay_cert(s.pca, ps.filter, u, mp.cert, budget).outcome == Outcome::Proven);
    }
  }
}

TEST_CASE("sk slices: 1+1 and nabla-2 batteries") {
  Pca sk = make_sk();
  Filter phi = canonical_filter(sk);
  Budget budget;
  Budget bb = budget;
  bb.enum_limit = 96;

  Elem k = ce("k"), kbar = ce("k(skk)"), atom = ce("a");
  std::vector<Elem> probes{k, kbar, atom};

  SECTION("1+1: each fiber must meet the designated elements") {
    Assembly i11 = two_point_index("1+1", RSet::finite({k}), RSet::finite({kbar}));
    SlicePca s = slice_pca(sk, phi, i11, budget);

    for (const auto& u : battery(probes, probes)) {
      bool c0 = has(u, at0(k)) || has(u, at0(kbar));
      bool c1 = has(u, at1(k)) || has(u, at1(kbar));
      MemberResult m = filter_member(s.pca, s.phi, u, bb);
      if (c0 && c1) {
        REQUIRE(m.verdict.outcome == Outcome::Proven);
        REQUIRE(m.cert);
        CHECK(replay_cert(s.pca, s.phi, u, m.cert, bb).outcome == Outcome::Proven);
      } else {
        // rejected candidates stay unknown: sk cannot refute
        CHECK(m.verdict.outcome == Outcome::Unknown);
      }
    }

    // the crossed candidate needs the synthesized selector \x. x u0 u1
    RSet crossed = RSet::finite({at0(kbar), at1(k)});
    MemberResult mc = filter_member(s.pca, s.phi, crossed, bb);
    REQUIRE(mc.verdict.outcome == Outcome::Proven);
    REQUIRE(mc.cert);
    CHECK(mc.cert->kind == FilterCert::Kind::ByTerm);
  }

  SECTION("nabla 2: the fibers must meet each other inside C") {
    Assembly in2 = two_point_index("n2", RSet::finite({k}), RSet::finite({k}));
    SlicePca s = slice_pca(sk, phi, in2, budget);

    for (const auto& u : battery(probes, probes)) {
      bool meets = (has(u, at0(k)) && has(u, at1(k))) ||
                   (has(u, at0(kbar)) && has(u, at1(kbar)));
      MemberResult m = filter_member(s.pca, s.phi, u, bb);
      if (meets) {
        REQUIRE(m.verdict.outcome == Outcome::Proven);
        REQUIRE(m.cert);
        CHECK(replay_cert(s.pca, s.phi, u, m.cert, bb).outcome == Outcome::Proven);
      } else {
        CHECK(m.verdict.outcome == Outcome::Unknown);
      }
    }

    // the singleton-certificate search over nabla 2 stays honest: the
    // per-fiber candidate has no uniform section, so no verdict either way
    RSet apart = RSet::finite({at0(atom), at1(atom)});
    MemberResult ma = filter_member(s.pca, s.phi, apart, bb);
    CHECK(ma.verdict.outcome == Outcome::Unknown);
    CHECK(ma.verdict.cov.checked > 0);
  }
}

TEST_CASE("certificate interconversion between generator and Lemma form") {
  Pca sk = make_sk();
  Filter phi = canonical_filter(sk);
  Budget budget;
  Elem k = ce("k"), kbar = ce("k(skk)");
  Assembly i11 = two_point_index("1+1", RSet::finite({k}), RSet::finite({kbar}));
  SlicePca s = slice_pca(sk, phi, i11, budget);

  SECTION("generator 0 becomes V = I") {
    MemberResult m = filter_member(s.pca, s.phi, s.ei, budget);
    REQUIRE(m.verdict.outcome == Outcome::Proven);
    REQUIRE(m.cert);
    CHECK(m.cert->kind == FilterCert::Kind::ByGenerator);
    CHECK(m.cert->index == 0);

    auto lem = slice_lemma(s, m.cert, budget);
    REQUIRE(lem);
    CHECK(lem->v.elems == sk.kit_set(KitSlot::I).elems);
    REQUIRE(lem->why);
    CHECK(replay_cert(sk, phi, lem->v, lem->why, budget).outcome == Outcome::Proven);

    FilterCertPtr back = slice_cert(s, *lem);
    CHECK(replay_cert(s.pca, s.phi, s.ei, back, budget).outcome == Outcome::Proven);
  }

  SECTION("applications fold through S") {
    FilterCertPtr c = FilterCert::by_term(
        tapp(tvar("g0"), tvar("g1")),
        {CertArg{s.ei, FilterCert::by_generator(0)}, CertArg{s.ei, FilterCert::by_generator(0)}});
    SetApp ee = set_apply(s.pca, s.ei, s.ei, budget);
    REQUIRE(ee.defined == Tri::True);
    CHECK(replay_cert(s.pca, s.phi, ee.image, c, budget).outcome == Outcome::Proven);

    auto lem = slice_lemma(s, c, budget);
    REQUIRE(lem);
    REQUIRE(lem->why);
    CHECK(lem->why->kind == FilterCert::Kind::ByTerm);
    CHECK(replay_cert(sk, phi, lem->v, lem->why, budget).outcome == Outcome::Proven);
    CHECK(replay_cert(s.pca, s.phi, ee.image, slice_cert(s, *lem), budget).outcome ==
          Outcome::Proven);
  }

  SECTION("transported generators become V = K.g") {
    Filter phi2 = Filter::generated(
        {FilterGen{RSet::finite({ce("skk")}), "i"}, FilterGen{RSet::finite({k}), "k"}},
        "phi2");
    SlicePca s2 = slice_pca(sk, phi2, i11, budget);
    RSet diag_k = RSet::finite({at0(k), at1(k)});

    MemberResult m = filter_member(s2.pca, s2.phi, diag_k, budget);
    REQUIRE(m.verdict.outcome == Outcome::Proven);
    REQUIRE(m.cert);
    CHECK(m.cert->kind == FilterCert::Kind::ByGenerator);
    CHECK(m.cert->index == 2);

    auto lem = slice_lemma(s2, m.cert, budget);
    REQUIRE(lem);
    CHECK(lem->v.elems == std::vector<Elem>{ce("kk")});
    CHECK(replay_cert(sk, phi2, lem->v, lem->why, budget).outcome == Outcome::Proven);
    CHECK(replay_cert(s2.pca, s2.phi, diag_k, slice_cert(s2, *lem), budget).outcome ==
          Outcome::Proven);
  }
}

TEST_CASE("the equivalence between sliced assemblies and slice assemblies") {
  Pca sk = make_sk();
  Filter phi = canonical_filter(sk);
  Budget budget;
  Elem k = ce("k"), kbar = ce("k(skk)");
  Assembly i11 = two_point_index("1+1", RSet::finite({k}), RSet::finite({kbar}));
  SlicePca s = slice_pca(sk, phi, i11, budget);
  SliceEquivData eq = slice_equivalence(s, budget);

  // X -> I with the prone realizer pattern E_X = E_I . l
  Assembly x = table_assembly("X", set_obj({Elem::nat(10), Elem::nat(11)}),
                              {{Elem::nat(10), RSet::finite({k})},
                               {Elem::nat(11), RSet::finite({kbar})}});
  Arrow l = arrow_from_map(x.space, i11.space,
                           {{Elem::nat(10), Elem::nat(0)}, {Elem::nat(11), Elem::nat(1)}}, "l");
  AsmMorphism down = check_morphism(sk, phi, x, i11, l, sk.kit_set(KitSlot::I), budget, "l");
  REQUIRE(down.ok());

  SECTION("F on objects, and F of the identity is terminal-like") {
    Assembly fx = eq.F_obj(down);
    CHECK(fx.space.elements() == std::vector<Elem>{at0(Elem::nat(10)), at1(Elem::nat(11))});
    CHECK(fx.E(at0(Elem::nat(10))).elems == std::vector<Elem>{at0(k)});
    CHECK(fx.E(at1(Elem::nat(11))).elems == std::vector<Elem>{at1(kbar)});
    CHECK(assembly_valid(s.pca, fx, budget).outcome == Outcome::Proven);

    AsmMorphism idi = asm_identity(sk, phi, i11, budget);
    REQUIRE(idi.ok());
    Assembly fid = eq.F_obj(idi);
    CHECK(fid.space.elements() == std::vector<Elem>{at0(Elem::nat(0)), at1(Elem::nat(1))});
    CHECK(fid.E(at0(Elem::nat(0))).elems == std::vector<Elem>{at0(k)});
    CHECK(fid.E(at1(Elem::nat(1))).elems == std::vector<Elem>{at1(kbar)});
  }

  SECTION("E of GFX matches the exhaustive P pairing") {
    Assembly fx = eq.F_obj(down);
    Assembly gfx = eq.G_obj(fx);
    Elem p = sk.kit.at(KitSlot::P);
    AppOutcome pk = sk.app_raw(0, p, k, budget.fuel);
    REQUIRE(pk.is_value());
    AppOutcome pkk = sk.app_raw(0, pk.val, k, budget.fuel);
    REQUIRE(pkk.is_value());
    CHECK(gfx.E(at0(Elem::nat(10))).elems == std::vector<Elem>{pkk.val});

    AppOutcome pb = sk.app_raw(0, p, kbar, budget.fuel);
    REQUIRE(pb.is_value());
    AppOutcome pbb = sk.app_raw(0, pb.val, kbar, budget.fuel);
    REQUIRE(pbb.is_value());
    CHECK(gfx.E(at1(Elem::nat(11))).elems == std::vector<Elem>{pbb.val});
  }

  SECTION("F and G on morphisms") {
    Assembly y = table_assembly("Y", set_obj({Elem::nat(20), Elem::nat(21)}),
                                {{Elem::nat(20), RSet::finite({k})},
                                 {Elem::nat(21), RSet::finite({kbar})}});
    Arrow ly = arrow_from_map(y.space, i11.space,
                              {{Elem::nat(20), Elem::nat(0)}, {Elem::nat(21), Elem::nat(1)}},
                              "ly");
    Arrow g = arrow_from_map(x.space, y.space,
                             {{Elem::nat(10), Elem::nat(20)}, {Elem::nat(11), Elem::nat(21)}},
                             "g");
    AsmMorphism gm = check_morphism(sk, phi, x, y, g, sk.kit_set(KitSlot::I), budget, "g");
    REQUIRE(gm.ok());
    REQUIRE(gm.cert);

    AsmMorphism downy =
        check_morphism(sk, phi, y, i11, ly, sk.kit_set(KitSlot::I), budget, "ly");
    REQUIRE(downy.ok());

    Assembly fx = eq.F_obj(down), fy = eq.F_obj(downy);
    AsmMorphism fg = eq.F_map(gm, fx, fy);
    REQUIRE(fg.ok());
    CHECK(fg.f(at0(Elem::nat(10))) == at0(Elem::nat(20)));
    REQUIRE(fg.cert);
    CHECK(replay_cert(s.pca, s.phi, fg.tracker, fg.cert, budget).outcome == Outcome::Proven);

    Assembly gfx = eq.G_obj(fx), gfy = eq.G_obj(fy);
    AsmMorphism gfg = eq.G_map(fg, gfx, gfy);
    REQUIRE(gfg.ok());
    CHECK(gfg.f(at0(Elem::nat(10))) == at0(Elem::nat(20)));
    REQUIRE(gfg.cert);
    CHECK(replay_cert(sk, phi, gfg.tracker, gfg.cert, budget).outcome == Outcome::Proven);
  }

  SECTION("unit and counit round trips") {
    SliceRoundTrip u = eq.unit(down);
    CHECK(u.verdict.ok());
    CHECK(u.fwd.verdict.ok());
    CHECK(u.bwd.verdict.ok());
    CHECK(u.bwd.tracker.elems == sk.kit_set(KitSlot::P1).elems);

    Assembly fx = eq.F_obj(down);
    SliceRoundTrip c = eq.counit(fx);
    CHECK(c.verdict.ok());
    CHECK(c.fwd.verdict.ok());
    CHECK(c.bwd.verdict.ok());
    REQUIRE(c.fwd.cert);
    CHECK(replay_cert(s.pca, s.phi, c.fwd.tracker, c.fwd.cert, budget).outcome ==
          Outcome::Proven);
  }
}

TEST_CASE("constant objects match prone objects across the slice") {
  Pca sk = make_sk();
  Filter phi = canonical_filter(sk);
  Budget budget;
  Elem k = ce("k"), kbar = ce("k(skk)");
  Assembly i11 = two_point_index("1+1", RSet::finite({k}), RSet::finite({kbar}));
  SlicePca s = slice_pca(sk, phi, i11, budget);
  SliceEquivData eq = slice_equivalence(s, budget);

  // prone downstairs (E_X = E_I . l) becomes constant upstairs
  Assembly xp = table_assembly("Xp", set_obj({Elem::nat(10), Elem::nat(11)}),
                               {{Elem::nat(10), RSet::finite({k})},
                                {Elem::nat(11), RSet::finite({kbar})}});
  Arrow lp = arrow_from_map(xp.space, i11.space,
                            {{Elem::nat(10), Elem::nat(0)}, {Elem::nat(11), Elem::nat(1)}},
                            "lp");
  AsmMorphism dp = check_morphism(sk, phi, xp, i11, lp, sk.kit_set(KitSlot::I), budget);
  REQUIRE(dp.ok());
  ConstantReport cp = is_constant(s.pca, s.phi, eq.F_obj(dp), budget);
  CHECK(cp.verdict.outcome == Outcome::Proven);

  // a fiber with two different singleton realizer sets is not constant
  Assembly xn = table_assembly("Xn", set_obj({Elem::nat(30), Elem::nat(31), Elem::nat(32)}),
                               {{Elem::nat(30), RSet::finite({k})},
                                {Elem::nat(31), RSet::finite({ce("kk")})},
                                {Elem::nat(32), RSet::finite({kbar})}});
  Arrow ln = arrow_from_map(xn.space, i11.space,
                            {{Elem::nat(30), Elem::nat(0)},
                             {Elem::nat(31), Elem::nat(0)},
                             {Elem::nat(32), Elem::nat(1)}},
                            "ln");
  AsmMorphism dn = check_morphism(sk, phi, xn, i11, ln, std::nullopt, budget);
  ConstantReport cn = is_constant(s.pca, s.phi, eq.F_obj(dn), budget);
  CHECK_FALSE(cn.verdict.ok());

  // G of a constant object has a prone structure map: the canonical prone
  // assembly over the same base map is isomorphic to it, tracked both ways
  Assembly fxp = eq.F_obj(dp);
  Assembly gx = eq.G_obj(fxp);
  AsmMorphism dg = eq.G_down(gx);
  REQUIRE(dg.ok());

  std::map<Elem, RSet> pl_table;
  for (const auto& pt : gx.space.elements()) pl_table[pt] = i11.E(pt.first());
  Assembly pl = table_assembly("Pl", gx.space, std::move(pl_table));

  AsmMorphism fwd = check_morphism(sk, phi, gx, pl, identity_arrow(gx.space, "to_pl"),
                                   sk.kit_set(KitSlot::P0), budget, "to_pl");
  CHECK(fwd.ok());
  SetEval dup = eval_term_sets(sk, compile_lambda(parse_lambda("\\x. P x x")), {}, budget);
  REQUIRE(dup.defined == Tri::True);
  AsmMorphism bwd = check_morphism(sk, phi, pl, gx, identity_arrow(gx.space, "from_pl"),
                                   dup.value, budget, "from_pl");
  CHECK(bwd.ok());
}

TEST_CASE("pullback morphisms between slices") {
  Pca sk = make_sk();
  Filter phi = canonical_filter(sk);
  Budget budget;
  Elem k = ce("k"), kbar = ce("k(skk)");
  Assembly i11 = two_point_index("1+1", RSet::finite({k}), RSet::finite({kbar}));
  Assembly in2 = two_point_index("n2", RSet::finite({k}), RSet::finite({k}));
  SlicePca s11 = slice_pca(sk, phi, i11, budget);
  SlicePca sn2 = slice_pca(sk, phi, in2, budget);

  // f : 1+1 -> nabla 2 on the same two points, tracked by K k
  Arrow f = identity_arrow(i11.space, "f");
  AsmMorphism fm =
      check_morphism(sk, phi, i11, in2, f, RSet::finite({ce("kk")}), budget, "f");
  REQUIRE(fm.ok());

  AppMorphism pb = slice_pullback_morphism(s11, sn2, fm, budget);
  CHECK(pb.verdict.outcome != Outcome::Refuted);
  CHECK(pb.total.ok());
  CHECK(pb.tracked.ok());
  CHECK(pb.images.ok());
  CHECK(pb.in_filter.ok());

  // the identity index map gives the identity pullback morphism
  AsmMorphism idm = asm_identity(sk, phi, i11, budget);
  REQUIRE(idm.ok());
  AppMorphism pid = slice_pullback_morphism(s11, s11, idm, budget);
  CHECK(pid.verdict.outcome != Outcome::Refuted);
  CHECK(pid.total.ok());
  CHECK(pid.tracked.ok());
  CHECK(pid.in_filter.ok());

  // J = 1: the slice inclusion along the unique index map
  AppMorphism inc = slice_inclusion(s11, budget);
  CHECK(inc.verdict.outcome != Outcome::Refuted);
  CHECK(inc.tracked.ok());
  CHECK(inc.in_filter.ok());
}

TEST_CASE("partitioned indices") {
  Pca sk = make_sk();
  Filter phi = canonical_filter(sk);
  Budget budget;
  Budget bb = budget;
  bb.enum_limit = 96;
  Elem k = ce("k"), kbar = ce("k(skk)"), atom = ce("a");

  SECTION("a doubled fiber is refuted with the two values") {
    Assembly bad = two_point_index("bad", RSet::finite({k, ce("kk")}), RSet::finite({k}));
    SlicePca sb = slice_pca(sk, phi, bad, budget);
    PartitionedSlice ps = partitioned_slice_filter(sb, budget);
    CHECK(ps.partitioned.outcome == Outcome::Refuted);
    CHECK(ps.partitioned.detail.find("not single-valued") != std::string::npos);
  }

  SECTION("sections match a brute-force sweep of the designated prefix") {
    Assembly i11 = two_point_index("1+1", RSet::finite({k}), RSet::finite({kbar}));
    SlicePca s = slice_pca(sk, phi, i11, bb);
    PartitionedSlice ps = partitioned_slice_filter(s, bb);
    REQUIRE(ps.partitioned.outcome == Outcome::Proven);
    CHECK(ps.basics == std::vector<Elem>{k, kbar});
    CHECK(ps.filter.name == "phi_C@1+1");

    std::set<std::vector<Elem>> expected;
    for (std::uint64_t n = 0; n < static_cast<std::uint64_t>(bb.enum_limit); ++n) {
      auto r = sk.designated_nth_raw(0, n);
      if (!r) break;
      AppOutcome v0 = sk.app_raw(0, *r, k, bb.fuel);
      AppOutcome v1 = sk.app_raw(0, *r, kbar, bb.fuel);
      if (!v0.is_value() || !v1.is_value()) continue;
      std::vector<Elem> sec{at0(v0.val), at1(v1.val)};
      std::sort(sec.begin(), sec.end());
      expected.insert(sec);
    }
    std::set<std::vector<Elem>> got;
    for (const auto& g : ps.filter.gens) got.insert(g.set.elems);
    CHECK(got == expected);

    // the identity section is E_I
    CHECK(got.count(s.ei.elems) == 1);
  }

  SECTION("the partitioned filter agrees with the general oracle") {
    Assembly i11 = two_point_index("1+1", RSet::finite({k}), RSet::finite({kbar}));
    SlicePca s = slice_pca(sk, phi, i11, bb);
    PartitionedSlice ps = partitioned_slice_filter(s, bb);
    REQUIRE(ps.partitioned.outcome == Outcome::Proven);

    std::vector<Elem> probes{k, kbar, atom};
    for (const auto& u : battery(probes, probes)) {
      Outcome general = filter_member(s.pca, s.phi, u, bb).verdict.outcome;
      Outcome sections = filter_member(s.pca, ps.filter, u, bb).verdict.outcome;
      CHECK(general == sections);
    }
  }

  SECTION("a constant index recovers the nabla description") {
    Assembly in2 = two_point_index("n2", RSet::finite({k}), RSet::finite({k}));
    SlicePca s = slice_pca(sk, phi, in2, bb);
    PartitionedSlice ps = partitioned_slice_filter(s, bb);
    REQUIRE(ps.partitioned.outcome == Outcome::Proven);
    for (const auto& g : ps.filter.gens) {
      REQUIRE(g.set.elems.size() == 2);
      CHECK(g.set.elems[0].second() == g.set.elems[1].second());
    }
  }

  SECTION("one point: the sections are the designated elements themselves") {
    Assembly i1 = table_assembly("I1", set_obj({Elem::nat(0)}),
                                 {{Elem::nat(0), RSet::finite({ce("skk")})}});
    SlicePca s = slice_pca(sk, phi, i1, bb);
    PartitionedSlice ps = partitioned_slice_filter(s, bb);
    REQUIRE(ps.partitioned.outcome == Outcome::Proven);

    for (std::size_t m = 0; m < 8; ++m) {
      std::vector<Elem> probesv{k, kbar, atom}, raw, enc;
      for (std::size_t i = 0; i < probesv.size(); ++i)
        if (m >> i & 1) {
          raw.push_back(probesv[i]);
          enc.push_back(at0(probesv[i]));
        }
      Outcome sections = filter_member(s.pca, ps.filter, RSet::finite(enc), bb).verdict.outcome;
      Outcome base = filter_member(sk, phi, RSet::finite(raw), bb).verdict.outcome;
      CHECK((sections == Outcome::Proven) == (base == Outcome::Proven));
      CHECK(sections != Outcome::Refuted);
    }
  }
}

TEST_CASE("level-bounded graph model sanity for slicing fixtures") {
  // phi_N is maximal: any inhabited candidate is accepted outright
  Pca pw = make_graph(1u << 10);
  Filter mx = Filter::maximal("phi_N");
  Budget budget;
  std::optional<Elem> some = pw.carrier.nth_elem(3);
  REQUIRE(some);
  MemberResult m = filter_member(pw, mx, RSet::finite({*some}), budget);
  CHECK(m.verdict.outcome == Outcome::Proven);
  MemberResult e = filter_member(pw, mx, RSet::finite({}), budget);
  CHECK(e.verdict.outcome != Outcome::Proven);
}
