#include <catch2/catch_amalgamated.hpp>

#include "pcaw/assembly.hpp"
#include "pcaw/backends.hpp"

using namespace pcaw;

namespace {

// exact three-point partial PCA: 0 x = x, 1 . 1 = 2, everything else undefined
Pca mini_partial() {
  Pca p;
  p.name = "mini";
  p.world = World::set_world();
  p.carrier = set_obj({Elem::nat(0), Elem::nat(1), Elem::nat(2)});
  p.designated = RSet::full("A");
  p.app_raw = [](std::size_t, const Elem& a, const Elem& b, std::uint64_t) {
    if (a == Elem::nat(0)) return AppOutcome::value(b);
    if (a == Elem::nat(1) && b == Elem::nat(1)) return AppOutcome::value(Elem::nat(2));
    return AppOutcome::undefined();
  };
  p.sample_raw = [](std::size_t, Rng& rng) { return Elem::nat(rng.below(3)); };
  return p;
}

Assembly one_point(const Pca& pca, const std::string& name, const Elem& pt, RSet e) {
  return table_assembly(name, set_obj({pt}), {{pt, std::move(e)}});
}

bool injective(const Arrow& f) {
  std::map<Elem, Elem> seen;
  for (const auto& e : f.src.elements()) {
    auto [it, fresh] = seen.emplace(f(e), e);
    if (!fresh) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("assembly validity") {
  Pca sk = make_sk();
  Budget budget;

  Assembly x = table_assembly("X", set_obj({Elem::nat(0), Elem::nat(1)}),
                              {{Elem::nat(0), RSet::finite({ce("k")})},
                               {Elem::nat(1), RSet::finite({ce("s")})}});
  CHECK(assembly_valid(sk, x, budget).outcome == Outcome::Proven);

  Assembly bad = table_assembly("bad", set_obj({Elem::nat(0)}),
                                {{Elem::nat(0), RSet::finite({})}});
  Verdict v = assembly_valid(sk, bad, budget);
  CHECK(v.outcome == Outcome::Refuted);
  CHECK(v.detail.find("empty") != std::string::npos);

  // realizers outside the carrier are rejected
  Assembly junk = table_assembly("junk", set_obj({Elem::nat(0)}),
                                 {{Elem::nat(0), RSet::finite({Elem::nat(99)})}});
  CHECK(assembly_valid(sk, junk, budget).outcome == Outcome::Refuted);

  // nabla over an infinite carrier is still visibly inhabited
  CHECK(assembly_valid(sk, asm_terminal(sk), budget).outcome == Outcome::Proven);
}

TEST_CASE("morphism check on the exact mini PCA") {
  Pca mini = mini_partial();
  Filter phi = canonical_filter(mini);
  Budget budget;

  Assembly x = one_point(mini, "X", Elem::nat(10), RSet::finite({Elem::nat(1)}));
  Assembly good = one_point(mini, "Y", Elem::nat(20), RSet::finite({Elem::nat(1)}));
  Assembly badt = one_point(mini, "Y'", Elem::nat(20), RSet::finite({Elem::nat(0)}));

  Arrow f = arrow_from_map(x.space, good.space, {{Elem::nat(10), Elem::nat(20)}}, "f");

  AsmMorphism m = check_morphism(mini, phi, x, good, f, std::nullopt, budget);
  REQUIRE(m.ok());
  CHECK(m.verdict.outcome == Outcome::Proven);
  CHECK(m.tracker.elems == std::vector<Elem>{Elem::nat(0)});
  REQUIRE(m.cert);
  CHECK(m.cert->kind == FilterCert::Kind::BySection);
  CHECK(m.tracked.cov.checked == 1);

  // certificate replays, and fails against a tampered target
  CHECK(replay_cert(mini, phi, m.tracker, m.cert, budget).outcome == Outcome::Proven);
  CHECK(replay_cert(mini, phi, RSet::finite({Elem::nat(2)}), m.cert, budget).outcome ==
        Outcome::Refuted);

  // exact backend + exhaustible pool: a definite refutation
  Arrow g = arrow_from_map(x.space, badt.space, {{Elem::nat(10), Elem::nat(20)}}, "g");
  AsmMorphism r = check_morphism(mini, phi, x, badt, g, std::nullopt, budget);
  CHECK(r.verdict.outcome == Outcome::Refuted);
  CHECK(r.verdict.detail.find("section satisfies") != std::string::npos);

  // clause 1: a certified undefined application refutes tracking
  Verdict undef = verify_tracking(mini, x, good, f, RSet::finite({Elem::nat(2)}), budget);
  CHECK(undef.outcome == Outcome::Refuted);
  CHECK(undef.detail.find("undefined") != std::string::npos);
}

TEST_CASE("trivial PCA: every arrow is a morphism") {
  Pca t = make_trivial();
  Filter phi = canonical_filter(t);
  Budget budget;

  Assembly x = table_assembly("X", set_obj({Elem::nat(0), Elem::nat(1)}),
                              {{Elem::nat(0), RSet::finite({Elem::unit()})},
                               {Elem::nat(1), RSet::finite({Elem::unit()})}});
  std::vector<AsmMorphism> hom = enumerate_morphisms(t, phi, x, x, budget);
  CHECK(hom.size() == 4);
  for (const auto& m : hom) CHECK(m.verdict.outcome == Outcome::Proven);

  AsmMorphism id = asm_identity(t, phi, x, budget);
  AsmMorphism c = compose_morphisms(t, phi, id, hom[1], budget);
  CHECK(c.ok());
  CHECK(asm_morphism_eq(c, hom[1]));
  CHECK(c.tracker.elems == std::vector<Elem>{Elem::unit()});

  CHECK(is_constant(t, phi, object_of_realizers(t), budget).verdict.outcome ==
        Outcome::Proven);
}

TEST_CASE("sk fixtures: identity, constants, search, composition") {
  Pca sk = make_sk();
  Filter phi = canonical_filter(sk);
  Budget budget;

  Assembly x = table_assembly("X", set_obj({Elem::nat(0), Elem::nat(1)}),
                              {{Elem::nat(0), RSet::finite({ce("k")})},
                               {Elem::nat(1), RSet::finite({ce("s")})}});
  Assembly y1 = one_point(sk, "Y1", Elem::nat(7), RSet::finite({ce("k")}));
  Assembly y2 = table_assembly("Y2", set_obj({Elem::nat(5), Elem::nat(6)}),
                               {{Elem::nat(5), RSet::finite({ce("k")})},
                                {Elem::nat(6), RSet::finite({ce("s")})}});
  Assembly z2 = one_point(sk, "Z2", Elem::nat(9), RSet::finite({ce("kk")}));
  Assembly w = one_point(sk, "W", Elem::nat(4), RSet::finite({ce("s")}));

  AsmMorphism id = asm_identity(sk, phi, x, budget);
  REQUIRE(id.ok());
  CHECK(id.verdict.outcome == Outcome::Proven);
  CHECK(id.tracker.elems == std::vector<Elem>{ce("skk")});
  CHECK(id.tracked.cov.checked == 2);

  // constant map: searched tracker is the first fitting pool element
  Arrow c1a = arrow_from_map(x.space, y1.space,
                             {{Elem::nat(0), Elem::nat(7)}, {Elem::nat(1), Elem::nat(7)}},
                             "c1");
  AsmMorphism c1 = check_morphism(sk, phi, x, y1, c1a, std::nullopt, budget);
  REQUIRE(c1.ok());
  CHECK(c1.verdict.outcome == Outcome::Proven);
  CHECK(c1.tracker.elems == std::vector<Elem>{ce("kk")});
  REQUIRE(c1.cert);
  CHECK(c1.cert->kind == FilterCert::Kind::BySection);

  // kit fast path: the identity combinator tracks the relabeling
  Arrow f2a = arrow_from_map(x.space, y2.space,
                             {{Elem::nat(0), Elem::nat(5)}, {Elem::nat(1), Elem::nat(6)}},
                             "f2");
  AsmMorphism f2 = check_morphism(sk, phi, x, y2, f2a, std::nullopt, budget);
  REQUIRE(f2.ok());
  CHECK(f2.tracker.elems == std::vector<Elem>{ce("skk")});

  Arrow ga = arrow_from_map(y2.space, z2.space,
                            {{Elem::nat(5), Elem::nat(9)}, {Elem::nat(6), Elem::nat(9)}},
                            "g");
  AsmMorphism g = check_morphism(sk, phi, y2, z2, ga, std::nullopt, budget);
  REQUIRE(g.ok());
  CHECK(g.tracker.elems == std::vector<Elem>{ce("k(kk)")});

  Arrow ha = arrow_from_map(z2.space, w.space, {{Elem::nat(9), Elem::nat(4)}}, "h");
  AsmMorphism h = check_morphism(sk, phi, z2, w, ha, std::nullopt, budget);
  REQUIRE(h.ok());
  CHECK(h.tracker.elems == std::vector<Elem>{ce("ks")});

  // composition: synthesized tracker, ByTerm certificate, replay
  AsmMorphism gf = compose_morphisms(sk, phi, f2, g, budget);
  REQUIRE(gf.ok());
  CHECK(gf.verdict.outcome == Outcome::Proven);
  REQUIRE(gf.cert);
  CHECK(gf.cert->kind == FilterCert::Kind::ByTerm);
  CHECK(replay_cert(sk, phi, gf.tracker, gf.cert, budget).outcome == Outcome::Proven);
  CHECK(gf.f(Elem::nat(0)) == Elem::nat(9));

  // direct oracle: every tracker member tracks the composite arrow
  CHECK(verify_tracking(sk, x, z2, gf.f, gf.tracker, budget).outcome == Outcome::Proven);

  // category laws
  AsmMorphism gid = compose_morphisms(sk, phi, asm_identity(sk, phi, x, budget), f2, budget);
  CHECK(asm_morphism_eq(gid, f2));
  AsmMorphism a1 =
      compose_morphisms(sk, phi, compose_morphisms(sk, phi, f2, g, budget), h, budget);
  AsmMorphism a2 =
      compose_morphisms(sk, phi, f2, compose_morphisms(sk, phi, g, h, budget), budget);
  CHECK(asm_morphism_eq(a1, a2));
  CHECK(a1.ok());
  CHECK(a2.ok());

  // tampered replay
  CHECK(replay_cert(sk, phi, RSet::finite({ce("s")}), f2.cert, budget).outcome ==
        Outcome::Refuted);
}

TEST_CASE("sk products and mediating morphisms") {
  Pca sk = make_sk();
  Filter phi = canonical_filter(sk);
  Budget budget;

  Assembly x = table_assembly("X", set_obj({Elem::nat(0), Elem::nat(1)}),
                              {{Elem::nat(0), RSet::finite({ce("k")})},
                               {Elem::nat(1), RSet::finite({ce("s")})}});
  Assembly y1 = one_point(sk, "Y1", Elem::nat(7), RSet::finite({ce("k")}));

  AsmProduct pr = asm_product(sk, phi, x, y1, budget);
  CHECK(pr.obj.space.size() == 2);
  REQUIRE(pr.p0.ok());
  REQUIRE(pr.p1.ok());
  CHECK(pr.p0.verdict.outcome == Outcome::Proven);

  // pair realizers project correctly
  for (const auto& e : pr.obj.space.elements()) {
    RSet pe = pr.obj.E(e);
    REQUIRE(pe.is_finite());
    REQUIRE(pe.elems.size() == 1);
    Elem p = pe.elems[0];
    Elem left = sk.app(sk.kit_set(KitSlot::P0).elems[0], p, budget.fuel).val;
    Elem right = sk.app(sk.kit_set(KitSlot::P1).elems[0], p, budget.fuel).val;
    Elem xv = e.first();
    CHECK(left == (xv == Elem::nat(0) ? ce("k") : ce("s")));
    CHECK(right == ce("k"));
  }

  // mediating morphism <id, c1>
  Arrow c1a = arrow_from_map(x.space, y1.space,
                             {{Elem::nat(0), Elem::nat(7)}, {Elem::nat(1), Elem::nat(7)}},
                             "c1");
  AsmMorphism c1 = check_morphism(sk, phi, x, y1, c1a, std::nullopt, budget);
  AsmMorphism id = asm_identity(sk, phi, x, budget);
  AsmMorphism md = asm_pair(sk, phi, pr, id, c1, budget);
  REQUIRE(md.ok());
  CHECK(md.verdict.outcome == Outcome::Proven);
  CHECK(arrow_equal(compose_arrow(pr.p0.f, md.f), id.f));
  CHECK(arrow_equal(compose_arrow(pr.p1.f, md.f), c1.f));

  // universal property: md is the only base arrow satisfying both equations
  int competitors = 0;
  for (const auto& cand : enumerate_arrows(x.space, pr.obj.space)) {
    if (arrow_equal(compose_arrow(pr.p0.f, cand), id.f) &&
        arrow_equal(compose_arrow(pr.p1.f, cand), c1.f))
      competitors++;
  }
  CHECK(competitors == 1);
}

TEST_CASE("X x nabla1 is isomorphic to X") {
  Pca sk = make_sk();
  Filter phi = canonical_filter(sk);
  Budget budget;

  Assembly x = table_assembly("X", set_obj({Elem::nat(0), Elem::nat(1)}),
                              {{Elem::nat(0), RSet::finite({ce("k")})},
                               {Elem::nat(1), RSet::finite({ce("s")})}});
  Assembly one = asm_terminal(sk);

  AsmProduct pr = asm_product(sk, phi, x, one, budget);
  REQUIRE(pr.p0.ok());
  // the nabla factor forces sampled fibers, so tracking is evidence, not proof
  CHECK(pr.p0.tracked.outcome == Outcome::Evidence);

  AsmMorphism id = asm_identity(sk, phi, x, budget);
  AsmMorphism bang = check_morphism(
      sk, phi, x, one,
      arrow_fn(x.space, one.space, [&one](const Elem&) { return Elem::unit(); }, "!"),
      std::nullopt, budget);
  REQUIRE(bang.ok());
  CHECK(bang.tracker.elems == std::vector<Elem>{ce("skk")});

  AsmMorphism md = asm_pair(sk, phi, pr, id, bang, budget);
  REQUIRE(md.ok());
  CHECK(md.tracked.outcome == Outcome::Proven);

  CHECK(arrow_equal(compose_arrow(pr.p0.f, md.f), identity_arrow(x.space)));
  CHECK(arrow_equal(compose_arrow(md.f, pr.p0.f), identity_arrow(pr.obj.space)));
  AsmMorphism round1 = compose_morphisms(sk, phi, md, pr.p0, budget);
  AsmMorphism round2 = compose_morphisms(sk, phi, pr.p0, md, budget);
  CHECK(round1.ok());
  CHECK(round2.ok());

  // strict pair membership: a listed pair is in the fiber, a bare combinator is not
  RSet fiber = pr.obj.E(pr.obj.space.elements()[0]);
  bool exhaustive = false;
  std::vector<Elem> some = detail::rset_sample_members(fiber, sk.carrier, budget, &exhaustive);
  REQUIRE(!some.empty());
  CHECK(!exhaustive);
  CHECK(fiber.contains(sk.carrier, some[0]));
  CHECK(!fiber.contains(sk.carrier, ce("k")));
}

TEST_CASE("sk equalizer and image factorization") {
  Pca sk = make_sk();
  Filter phi = canonical_filter(sk);
  Budget budget;

  Assembly x = table_assembly("X", set_obj({Elem::nat(0), Elem::nat(1)}),
                              {{Elem::nat(0), RSet::finite({ce("k")})},
                               {Elem::nat(1), RSet::finite({ce("s")})}});
  Assembly y2 = table_assembly("Y2", set_obj({Elem::nat(5), Elem::nat(6)}),
                               {{Elem::nat(5), RSet::finite({ce("k")})},
                                {Elem::nat(6), RSet::finite({ce("s")})}});

  Arrow f2a = arrow_from_map(x.space, y2.space,
                             {{Elem::nat(0), Elem::nat(5)}, {Elem::nat(1), Elem::nat(6)}},
                             "f2");
  Arrow h2a = arrow_from_map(x.space, y2.space,
                             {{Elem::nat(0), Elem::nat(5)}, {Elem::nat(1), Elem::nat(5)}},
                             "h2");
  AsmMorphism f2 = check_morphism(sk, phi, x, y2, f2a, std::nullopt, budget);
  AsmMorphism h2 = check_morphism(sk, phi, x, y2, h2a, std::nullopt, budget);
  REQUIRE(f2.ok());
  REQUIRE(h2.ok());
  CHECK(h2.tracker.elems == std::vector<Elem>{ce("kk")});

  AsmEqualizer eq = asm_equalizer(sk, phi, f2, h2, budget);
  CHECK(eq.obj.space.elements() == std::vector<Elem>{Elem::nat(0)});
  CHECK(eq.obj.E(Elem::nat(0)).elems == std::vector<Elem>{ce("k")});
  REQUIRE(eq.incl.ok());
  CHECK(obj_same_shape(eq.obj.space, equalizer_obj(f2.f, h2.f)));

  AsmImage im = asm_image(sk, phi, h2, budget);
  CHECK(im.obj.space.elements() == std::vector<Elem>{Elem::nat(5)});
  CHECK(im.obj.E(Elem::nat(5)).elems == std::vector<Elem>{ce("k"), ce("s")});
  REQUIRE(im.e.ok());
  REQUIRE(im.m.ok());
  REQUIRE(im.w.ok());
  CHECK(im.w.realized.outcome == Outcome::Proven);
  CHECK(im.w.witness.elems == std::vector<Elem>{ce("skk")});
  CHECK(arrow_equal(compose_arrow(im.m.f, im.e.f), h2.f));

  // non-surjective arrow: epi check refutes on the base
  EpiWitness notepi = epi_check(sk, phi, h2, std::nullopt, budget);
  CHECK(notepi.verdict.outcome == Outcome::Refuted);
  CHECK(notepi.verdict.detail.find("misses") != std::string::npos);
}

TEST_CASE("pullback of a regular epi with the synthesized witness") {
  Pca sk = make_sk();
  Filter phi = canonical_filter(sk);
  Budget budget;

  Assembly x = table_assembly("X", set_obj({Elem::nat(0), Elem::nat(1)}),
                              {{Elem::nat(0), RSet::finite({ce("k")})},
                               {Elem::nat(1), RSet::finite({ce("s")})}});
  Assembly y2 = table_assembly("Y2", set_obj({Elem::nat(5), Elem::nat(6)}),
                               {{Elem::nat(5), RSet::finite({ce("k")})},
                                {Elem::nat(6), RSet::finite({ce("s")})}});
  Assembly w = one_point(sk, "W", Elem::nat(4), RSet::finite({ce("s")}));

  Arrow h2a = arrow_from_map(x.space, y2.space,
                             {{Elem::nat(0), Elem::nat(5)}, {Elem::nat(1), Elem::nat(5)}},
                             "h2");
  AsmMorphism h2 = check_morphism(sk, phi, x, y2, h2a, std::nullopt, budget);
  AsmImage im = asm_image(sk, phi, h2, budget);

  Arrow f3a = arrow_from_map(w.space, im.obj.space, {{Elem::nat(4), Elem::nat(5)}}, "f3");
  AsmMorphism f3 = check_morphism(sk, phi, w, im.obj, f3a, std::nullopt, budget);
  REQUIRE(f3.ok());

  AsmPullback pb = asm_pullback(sk, phi, im.e, f3, budget);
  CHECK(pb.obj.space.size() == 2);
  REQUIRE(pb.q0.ok());
  REQUIRE(pb.q1.ok());

  EpiWitness wit = pullback_epi_witness(sk, phi, pb, im.w, f3, budget);
  REQUIRE(wit.ok());
  CHECK(wit.verdict.outcome == Outcome::Proven);
  REQUIRE(wit.cert);
  CHECK(wit.cert->kind == FilterCert::Kind::ByTerm);
  CHECK(replay_cert(sk, phi, wit.witness, wit.cert, budget).outcome == Outcome::Proven);

  // Gamma preserves the pullback and the epi
  CHECK(obj_same_shape(pb.obj.space, pullback_obj(im.e.f, f3.f)));
  std::map<Elem, int> covered;
  for (const auto& e : pb.obj.space.elements()) covered[pb.q1.f(e)]++;
  for (const auto& e : w.space.elements()) CHECK(covered[e] > 0);
}

TEST_CASE("gamma and nabla: adjunction at fixture scale") {
  Pca sk = make_sk();
  Filter phi = canonical_filter(sk);
  Budget budget;

  Assembly x = table_assembly("X", set_obj({Elem::nat(0), Elem::nat(1)}),
                              {{Elem::nat(0), RSet::finite({ce("k")})},
                               {Elem::nat(1), RSet::finite({ce("s")})}});
  Obj y3 = set_obj({Elem::nat(0), Elem::nat(1), Elem::nat(2)});
  Assembly nb = nabla(sk, y3);

  // Gamma nabla Y = Y
  CHECK(obj_same_shape(gamma_obj(nb), y3));

  // hom(Gamma X, Y) and hom(X, nabla Y) have the same size
  std::vector<Arrow> base_hom = enumerate_arrows(x.space, y3);
  std::vector<AsmMorphism> asm_hom = enumerate_morphisms(sk, phi, x, nb, budget);
  CHECK(base_hom.size() == 9);
  CHECK(asm_hom.size() == base_hom.size());
  for (const auto& m : asm_hom) CHECK(m.tracker.elems == std::vector<Elem>{ce("skk")});

  // unit is monic with the identity underneath
  AsmMorphism eta = asm_unit_eta(sk, phi, x, budget);
  REQUIRE(eta.ok());
  CHECK(arrow_equal(eta.f, identity_arrow(x.space)));
  CHECK(injective(eta.f));

  // nabla of a base arrow is tracked by i
  Arrow cyc = arrow_from_map(y3, y3,
                             {{Elem::nat(0), Elem::nat(1)},
                              {Elem::nat(1), Elem::nat(2)},
                              {Elem::nat(2), Elem::nat(0)}},
                             "cyc");
  AsmMorphism nc = nabla_morphism(sk, phi, nb, nb, cyc, budget);
  REQUIRE(nc.ok());
  CHECK(nc.tracker.elems == std::vector<Elem>{ce("skk")});
}

TEST_CASE("prone morphisms") {
  Pca sk = make_sk();
  Filter phi = canonical_filter(sk);
  Budget budget;

  Assembly x = table_assembly("X", set_obj({Elem::nat(0), Elem::nat(1)}),
                              {{Elem::nat(0), RSet::finite({ce("k")})},
                               {Elem::nat(1), RSet::finite({ce("s")})}});
  Assembly y2 = table_assembly("Y2", set_obj({Elem::nat(5), Elem::nat(6)}),
                               {{Elem::nat(5), RSet::finite({ce("k")})},
                                {Elem::nat(6), RSet::finite({ce("s")})}});

  // a regular mono (equalizer inclusion) is prone
  Arrow f2a = arrow_from_map(x.space, y2.space,
                             {{Elem::nat(0), Elem::nat(5)}, {Elem::nat(1), Elem::nat(6)}},
                             "f2");
  Arrow h2a = arrow_from_map(x.space, y2.space,
                             {{Elem::nat(0), Elem::nat(5)}, {Elem::nat(1), Elem::nat(5)}},
                             "h2");
  AsmMorphism f2 = check_morphism(sk, phi, x, y2, f2a, std::nullopt, budget);
  AsmMorphism h2 = check_morphism(sk, phi, x, y2, h2a, std::nullopt, budget);
  AsmEqualizer eq = asm_equalizer(sk, phi, f2, h2, budget);
  ProneReport rep = is_prone(sk, phi, eq.incl, budget);
  REQUIRE(rep.verdict.ok());
  CHECK(rep.inverse.tracker.elems == std::vector<Elem>{ce("s(skk)(kk)")});

  // the identity into the constant object on the same base is not prone at
  // this scale: the existence relation is strictly finer than the pullback's
  Assembly nb2 = nabla(sk, x.space, "nabla2");
  AsmMorphism into = check_morphism(sk, phi, x, nb2, identity_arrow(x.space), std::nullopt,
                                    budget, "into");
  REQUIRE(into.ok());
  ProneReport rep2 = is_prone(sk, phi, into, budget);
  CHECK(rep2.verdict.outcome == Outcome::Unknown);

  // prone restriction of an assembly is prone
  ProneSub ps = prone_restriction(sk, phi, y2,
                                  [](const Elem& e) { return e == Elem::nat(5); }, budget);
  REQUIRE(ps.incl.ok());
  CHECK(ps.obj.space.elements() == std::vector<Elem>{Elem::nat(5)});
  ProneReport rep3 = is_prone(sk, phi, ps.incl, budget);
  CHECK(rep3.verdict.ok());
}

TEST_CASE("prone subobjects of the object of realizers") {
  Pca mini = mini_partial();
  Filter phi = canonical_filter(mini);
  Budget budget;

  Assembly r = object_of_realizers(mini);
  ProneSub ps = prone_sub(mini, phi, r, RSet::finite({Elem::nat(0), Elem::nat(1)}), budget);
  CHECK(ps.obj.space.elements() == std::vector<Elem>{Elem::nat(0), Elem::nat(1)});
  REQUIRE(ps.incl.ok());
  CHECK(ps.incl.tracker.elems == std::vector<Elem>{Elem::nat(0)});
}

TEST_CASE("constant objects") {
  Pca sk = make_sk();
  Filter phi = canonical_filter(sk);
  Budget budget;

  Obj y3 = set_obj({Elem::nat(0), Elem::nat(1), Elem::nat(2)});
  ConstantReport cnab = is_constant(sk, phi, nabla(sk, y3), budget);
  CHECK(cnab.verdict.outcome == Outcome::Proven);
  CHECK(cnab.member.witness.elems == std::vector<Elem>{ce("skk")});

  Assembly x = table_assembly("X", set_obj({Elem::nat(0), Elem::nat(1)}),
                              {{Elem::nat(0), RSet::finite({ce("k")})},
                               {Elem::nat(1), RSet::finite({ce("s")})}});
  CHECK(is_constant(sk, phi, x, budget).verdict.outcome == Outcome::Unknown);

  // the object of realizers over sk: no certificate at finite scale
  CHECK(is_constant(sk, phi, object_of_realizers(sk), budget).verdict.outcome ==
        Outcome::Unknown);
}

TEST_CASE("projectivity of the terminal") {
  Budget budget;

  // trivial: exact and exhaustive
  {
    Pca t = make_trivial();
    Filter phi = canonical_filter(t);
    Assembly x = table_assembly("X", set_obj({Elem::nat(0), Elem::nat(1)}),
                                {{Elem::nat(0), RSet::finite({Elem::unit()})},
                                 {Elem::nat(1), RSet::finite({Elem::unit()})}});
    Assembly one = asm_terminal(t);
    AsmMorphism e = check_morphism(
        t, phi, x, one,
        arrow_fn(x.space, one.space, [](const Elem&) { return Elem::unit(); }, "!"),
        std::nullopt, budget);
    REQUIRE(e.ok());
    EpiWitness w = epi_check(t, phi, e, std::nullopt, budget);
    REQUIRE(w.ok());
    CHECK(w.verdict.outcome == Outcome::Proven);
    ProjectivityReport rep = projectivity_report(t, phi, e, w, budget);
    CHECK(rep.verdict.outcome == Outcome::Proven);
    REQUIRE(rep.splitting);
  }

  // sk: evidence-grade splitting through the pool
  {
    Pca sk = make_sk();
    Filter phi = canonical_filter(sk);
    Assembly x = table_assembly("X", set_obj({Elem::nat(0), Elem::nat(1)}),
                                {{Elem::nat(0), RSet::finite({ce("k")})},
                                 {Elem::nat(1), RSet::finite({ce("s")})}});
    Assembly one = asm_terminal(sk);
    AsmMorphism e = check_morphism(
        sk, phi, x, one,
        arrow_fn(x.space, one.space, [](const Elem&) { return Elem::unit(); }, "!"),
        std::nullopt, budget);
    REQUIRE(e.ok());
    EpiWitness w = epi_check(sk, phi, e, RSet::finite({ce("kk")}), budget);
    REQUIRE(w.ok());
    ProjectivityReport rep = projectivity_report(sk, phi, e, w, budget);
    REQUIRE(rep.verdict.ok());
    REQUIRE(rep.splitting);
    CHECK(rep.splitting->tracker.elems == std::vector<Elem>{ce("kk")});
    CHECK(arrow_equal(compose_arrow(e.f, rep.splitting->f), identity_arrow(one.space)));

    // non-singleton presentations get an honest unknown
    Filter gen = Filter::generated({FilterGen{RSet::finite({ce("k")}), "g"}});
    CHECK(projectivity_report(sk, gen, e, w, budget).verdict.outcome == Outcome::Unknown);
  }
}

TEST_CASE("graph model smoke test") {
  Pca g = make_graph();
  Filter phi = canonical_filter(g);
  Budget budget;

  Assembly x = one_point(g, "Xg", Elem::nat(0), RSet::finite({Elem::set({Elem::nat(1)})}));
  AsmMorphism id = asm_identity(g, phi, x, budget);
  REQUIRE(id.ok());
  CHECK(id.verdict.outcome == Outcome::Proven);
  CHECK(id.tracker.elems == std::vector<Elem>{Elem::sym("i")});
  CHECK(replay_cert(g, phi, id.tracker, id.cert, budget).outcome == Outcome::Proven);
}
