#pragma once

// Regular-category backends at desk scale: the set world, finite powers,
// slices over a finite base.  Objects are fibered carriers; relations and
// functors act on encoded elements (raw values in the set world, pairs
// (base point, value) in fibered worlds).

#include <map>

#include "pcaw/core.hpp"

namespace pcaw {

enum class WorldKind { SetW, PowW, SliceW };

struct World {
  WorldKind kind = WorldKind::SetW;
  std::vector<Elem> base;  // SetW: exactly {unit}

  static World set_world() { return World{WorldKind::SetW, {Elem::unit()}}; }
  static World pow_world(std::vector<Elem> idx) {
    require(!idx.empty(), "pow_world: empty index");
    return World{WorldKind::PowW, std::move(idx)};
  }
  static World slice_world(std::vector<Elem> base_pts) {
    require(!base_pts.empty(), "slice_world: empty base");
    return World{WorldKind::SliceW, std::move(base_pts)};
  }

  bool fibered() const { return kind != WorldKind::SetW; }

  std::size_t fiber_index(const Elem& b) const {
    for (std::size_t i = 0; i < base.size(); ++i)
      if (base[i] == b) return i;
    fail("world: unknown base point " + b.show());
  }

  friend bool operator==(const World& a, const World& b) {
    return a.kind == b.kind && a.base == b.base;
  }
  friend bool operator!=(const World& a, const World& b) { return !(a == b); }

  std::string show() const {
    switch (kind) {
      case WorldKind::SetW: return "Set";
      case WorldKind::PowW: return "Set^" + std::to_string(base.size());
      case WorldKind::SliceW: return "Set/" + show_list(base);
    }
    return "?";
  }
};

// ---------------------------------------------------------------------------
// Carriers: finite listings or enumerated (total injective enumeration plus a
// decidable membership test).

struct Carrier {
  bool finite = true;
  std::vector<Elem> elems;
  std::function<std::optional<Elem>(std::uint64_t)> nth;
  std::function<bool(const Elem&)> member;

  static Carrier of(std::vector<Elem> xs) {
    Carrier c;
    c.finite = true;
    c.elems = std::move(xs);
    return c;
  }
  static Carrier enumerated(std::function<std::optional<Elem>(std::uint64_t)> nth,
                            std::function<bool(const Elem&)> member) {
    Carrier c;
    c.finite = false;
    c.nth = std::move(nth);
    c.member = std::move(member);
    return c;
  }

  bool contains(const Elem& e) const {
    if (finite) return std::find(elems.begin(), elems.end(), e) != elems.end();
    return member(e);
  }
};

struct Obj {
  World world;
  std::vector<Carrier> fibers;  // parallel to world.base

  bool finite() const {
    for (const auto& f : fibers)
      if (!f.finite) return false;
    return true;
  }

  std::uint64_t size() const {
    require(finite(), "obj: size of an enumerated object");
    std::uint64_t n = 0;
    for (const auto& f : fibers) n += f.elems.size();
    return n;
  }

  Elem encode(std::size_t fiber, const Elem& v) const {
    if (!world.fibered()) return v;
    return Elem::pair(world.base[fiber], v);
  }

  Elem base_of(const Elem& e) const {
    if (!world.fibered()) return Elem::unit();
    require(e.tag() == Elem::Tag::Pair, "obj: element not fibered: " + e.show());
    return e.first();
  }

  Elem value_of(const Elem& e) const { return world.fibered() ? e.second() : e; }

  std::size_t fiber_of(const Elem& e) const {
    return world.fibered() ? world.fiber_index(e.first()) : 0;
  }

  bool contains(const Elem& e) const {
    if (!world.fibered()) return fibers[0].contains(e);
    if (e.tag() != Elem::Tag::Pair) return false;
    for (std::size_t i = 0; i < world.base.size(); ++i)
      if (world.base[i] == e.first()) return fibers[i].contains(e.second());
    return false;
  }

  // All encoded elements, fiber-major (finite objects only).
  std::vector<Elem> elements() const {
    require(finite(), "obj: elements() of an enumerated object");
    std::vector<Elem> out;
    for (std::size_t i = 0; i < fibers.size(); ++i)
      for (const auto& v : fibers[i].elems) out.push_back(encode(i, v));
    return out;
  }

  // Total injective enumeration: finite fibers first (fiber-major), then the
  // enumerated fibers interleaved round-robin.
  std::optional<Elem> nth_elem(std::uint64_t n) const {
    std::uint64_t finite_total = 0;
    std::vector<std::size_t> inf;
    for (std::size_t i = 0; i < fibers.size(); ++i) {
      if (fibers[i].finite)
        finite_total += fibers[i].elems.size();
      else
        inf.push_back(i);
    }
    if (n < finite_total) {
      for (std::size_t i = 0; i < fibers.size(); ++i) {
        if (!fibers[i].finite) continue;
        if (n < fibers[i].elems.size()) return encode(i, fibers[i].elems[n]);
        n -= fibers[i].elems.size();
      }
    }
    if (inf.empty()) return std::nullopt;
    std::uint64_t j = n - finite_total;
    std::size_t fi = inf[j % inf.size()];
    auto v = fibers[fi].nth(j / inf.size());
    if (!v) return std::nullopt;
    return encode(world.fiber_index(world.base[fi]), *v);
  }
};

inline Obj set_obj(std::vector<Elem> xs) {
  return Obj{World::set_world(), {Carrier::of(std::move(xs))}};
}

inline Obj fibered_obj(const World& w, std::vector<Carrier> fibers) {
  require(w.base.size() == fibers.size(), "fibered_obj: fiber count mismatch");
  return Obj{w, std::move(fibers)};
}

inline Obj terminal_obj(const World& w) {
  std::vector<Carrier> fs(w.base.size(), Carrier::of({Elem::unit()}));
  return Obj{w, std::move(fs)};
}

inline bool obj_same_shape(const Obj& a, const Obj& b) {
  if (a.world != b.world) return false;
  for (std::size_t i = 0; i < a.fibers.size(); ++i) {
    if (a.fibers[i].finite != b.fibers[i].finite) return false;
    if (a.fibers[i].finite && a.fibers[i].elems != b.fibers[i].elems) return false;
  }
  return true;
}

// Fiberwise product object (finite fibers; values paired).
inline Obj product_obj(const Obj& a, const Obj& b) {
  require(a.world == b.world, "product_obj: world mismatch");
  std::vector<Carrier> fs;
  for (std::size_t i = 0; i < a.fibers.size(); ++i) {
    require(a.fibers[i].finite && b.fibers[i].finite, "product_obj: enumerated fiber");
    std::vector<Elem> xs;
    for (const auto& x : a.fibers[i].elems)
      for (const auto& y : b.fibers[i].elems) xs.push_back(Elem::pair(x, y));
    fs.push_back(Carrier::of(std::move(xs)));
  }
  return Obj{a.world, std::move(fs)};
}

// ---------------------------------------------------------------------------
// Arrows: total fiber-preserving maps on encoded elements.

struct Arrow {
  Obj src, dst;
  std::function<Elem(const Elem&)> fn;
  std::string name;

  Elem operator()(const Elem& e) const { return fn(e); }
};

inline Arrow arrow_from_map(const Obj& src, const Obj& dst, std::map<Elem, Elem> m,
                            const std::string& name = "") {
  require(src.finite(), "arrow_from_map: enumerated source");
  for (const auto& e : src.elements()) {
    auto it = m.find(e);
    require(it != m.end(), "arrow_from_map: not total at " + e.show());
    require(dst.contains(it->second),
            "arrow_from_map: image outside target at " + e.show() + " -> " + it->second.show());
    require(src.base_of(e) == dst.base_of(it->second),
            "arrow_from_map: fiber not preserved at " + e.show());
  }
  auto mp = std::make_shared<std::map<Elem, Elem>>(std::move(m));
  return Arrow{src, dst,
               [mp](const Elem& e) {
                 auto it = mp->find(e);
                 require(it != mp->end(), "arrow: outside domain: " + e.show());
                 return it->second;
               },
               name};
}

inline Arrow arrow_fn(const Obj& src, const Obj& dst, std::function<Elem(const Elem&)> f,
                      const std::string& name = "") {
  return Arrow{src, dst, std::move(f), name};
}

inline Arrow identity_arrow(const Obj& x, const std::string& name = "id") {
  return Arrow{x, x, [](const Elem& e) { return e; }, name};
}

inline Arrow compose_arrow(const Arrow& g, const Arrow& f, const std::string& name = "") {
  auto gf = g.fn;
  auto ff = f.fn;
  return Arrow{f.src, g.dst, [gf, ff](const Elem& e) { return gf(ff(e)); },
               name.empty() ? g.name + "." + f.name : name};
}

inline bool arrow_equal(const Arrow& f, const Arrow& g) {
  require(f.src.finite(), "arrow_equal: enumerated source");
  if (!obj_same_shape(f.src, g.src)) return false;
  for (const auto& e : f.src.elements())
    if (f(e) != g(e)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Relations: subobjects of src x dst, finite listings or decidable predicates
// with a per-source image enumerator.  Fibered relations only relate elements
// over the same base point.

struct Rel {
  Obj src, dst;
  bool finite = true;
  std::vector<std::pair<Elem, Elem>> pairs;  // sorted, deduped
  std::function<bool(const Elem&, const Elem&)> holds_fn;
  std::function<std::vector<Elem>(const Elem&)> image_fn;  // bounded when infinite
  std::string label;

  bool holds(const Elem& a, const Elem& b) const {
    if (finite)
      return std::binary_search(pairs.begin(), pairs.end(), std::make_pair(a, b));
    return holds_fn(a, b);
  }

  std::vector<Elem> image_of(const Elem& a) const {
    if (finite) {
      std::vector<Elem> out;
      for (const auto& [x, y] : pairs)
        if (x == a) out.push_back(y);
      return out;
    }
    return image_fn(a);
  }
};

inline Rel rel_from_pairs(const Obj& src, const Obj& dst,
                          std::vector<std::pair<Elem, Elem>> ps, const std::string& label = "") {
  for (const auto& [a, b] : ps) {
    require(src.contains(a) && dst.contains(b),
            "rel: pair outside carriers: (" + a.show() + ", " + b.show() + ")");
    require(src.base_of(a) == dst.base_of(b), "rel: pair crosses fibers: " + a.show());
  }
  std::sort(ps.begin(), ps.end());
  ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  return Rel{src, dst, true, std::move(ps), nullptr, nullptr, label};
}

inline Rel rel_fn(const Obj& src, const Obj& dst,
                  std::function<bool(const Elem&, const Elem&)> holds,
                  std::function<std::vector<Elem>(const Elem&)> image,
                  const std::string& label = "") {
  return Rel{src, dst, false, {}, std::move(holds), std::move(image), label};
}

inline Rel graph_of(const Arrow& f, const std::string& label = "") {
  require(f.src.finite(), "graph_of: enumerated source");
  std::vector<std::pair<Elem, Elem>> ps;
  for (const auto& e : f.src.elements()) ps.emplace_back(e, f(e));
  return rel_from_pairs(f.src, f.dst, std::move(ps), label.empty() ? f.name : label);
}

inline Rel identity_rel(const Obj& x, const std::string& label = "id") {
  if (x.finite()) return graph_of(identity_arrow(x), label);
  return rel_fn(
      x, x, [](const Elem& a, const Elem& b) { return a == b; },
      [](const Elem& a) { return std::vector<Elem>{a}; }, label);
}

inline Rel compose_rel(const Rel& f, const Rel& g) {
  require(obj_same_shape(f.dst, g.src), "compose_rel: middle object mismatch");
  if (f.finite && g.finite) {
    std::vector<std::pair<Elem, Elem>> out;
    for (const auto& [a, b] : f.pairs)
      for (const auto& [b2, c] : g.pairs)
        if (b == b2) out.emplace_back(a, c);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return Rel{f.src, g.dst, true, std::move(out), nullptr, nullptr,
               g.label + "." + f.label};
  }
  Rel fc = f, gc = g;
  return rel_fn(
      f.src, g.dst,
      [fc, gc](const Elem& a, const Elem& c) {
        for (const auto& b : fc.image_of(a))
          if (gc.holds(b, c)) return true;
        return false;
      },
      [fc, gc](const Elem& a) {
        std::vector<Elem> out;
        for (const auto& b : fc.image_of(a))
          for (const auto& c : gc.image_of(b)) out.push_back(c);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
      },
      g.label + "." + f.label);
}

inline bool rel_equal(const Rel& f, const Rel& g) {
  require(f.finite && g.finite, "rel_equal: infinite relation");
  return f.pairs == g.pairs;
}

inline bool rel_subset(const Rel& f, const Rel& g) {
  require(f.finite, "rel_subset: infinite left side");
  for (const auto& [a, b] : f.pairs)
    if (!g.holds(a, b)) return false;
  return true;
}

// Image of a subset under a relation.
inline std::vector<Elem> rel_image(const Rel& r, const std::vector<Elem>& xs) {
  std::vector<Elem> out;
  for (const auto& x : xs)
    for (const auto& y : r.image_of(x)) out.push_back(y);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Finite-limit helpers.

struct ImageFactorization {
  Arrow epi;   // X ->> Im
  Obj image;   // Im
  Arrow mono;  // Im >-> Y
};

inline ImageFactorization image_factor(const Arrow& f) {
  require(f.src.finite(), "image_factor: enumerated source");
  std::vector<Carrier> fs(f.dst.world.base.size(), Carrier::of({}));
  Obj im{f.dst.world, fs};
  for (const auto& e : f.src.elements()) {
    Elem y = f(e);
    std::size_t fi = f.dst.fiber_of(y);
    auto& bucket = im.fibers[fi].elems;
    Elem v = f.dst.value_of(y);
    if (std::find(bucket.begin(), bucket.end(), v) == bucket.end()) bucket.push_back(v);
  }
  Arrow epi{f.src, im, f.fn, f.name + "!"};
  Arrow mono{im, f.dst, [](const Elem& e) { return e; }, f.name + "_inc"};
  return ImageFactorization{epi, im, mono};
}

inline Obj sub_obj(const Obj& x, const std::function<bool(const Elem&)>& keep) {
  require(x.finite(), "sub_obj: enumerated object");
  Obj out = x;
  for (std::size_t i = 0; i < x.fibers.size(); ++i) {
    std::vector<Elem> kept;
    for (const auto& v : x.fibers[i].elems)
      if (keep(x.encode(i, v))) kept.push_back(v);
    out.fibers[i] = Carrier::of(std::move(kept));
  }
  return out;
}

inline Obj equalizer_obj(const Arrow& f, const Arrow& g) {
  return sub_obj(f.src, [&](const Elem& e) { return f(e) == g(e); });
}

// Pullback of f: X -> Z and g: Y -> Z as a subobject of X x Y.
inline Obj pullback_obj(const Arrow& f, const Arrow& g) {
  Obj prod = product_obj(f.src, g.src);
  return sub_obj(prod, [&](const Elem& e) {
    Elem v = prod.value_of(e);
    std::size_t fi = prod.fiber_of(e);
    return f(f.src.encode(fi, v.first())) == g(g.src.encode(fi, v.second()));
  });
}

// ---------------------------------------------------------------------------
// Regular functors: the shapes the constructions need, plus composites.

struct RegFunctor;
using RegFunctorPtr = std::shared_ptr<const RegFunctor>;

struct RegFunctor {
  enum class Kind { Identity, Projection, Pullback, Diagonal, BinaryProduct, Terminal, Compose };
  Kind kind = Kind::Identity;
  World src_world, dst_world;
  Elem index;                    // Projection
  std::map<Elem, Elem> reindex;  // Pullback/Diagonal: dst base point -> src base point
  RegFunctorPtr after, before;   // Compose: after . before
  std::string name = "id";
};

inline RegFunctor identity_functor(const World& w) {
  return RegFunctor{RegFunctor::Kind::Identity, w, w, Elem(), {}, nullptr, nullptr, "id"};
}

inline RegFunctor projection_functor(const World& w, const Elem& i) {
  require(w.fibered(), "projection: source not fibered");
  (void)w.fiber_index(i);
  return RegFunctor{RegFunctor::Kind::Projection, w, World::set_world(), i, {}, nullptr,
                    nullptr, "pr[" + i.show() + "]"};
}

// Pullback along a map of base points u: I -> J, as a functor from the world
// over J to the world over I.  src may be the set world (J = point).
inline RegFunctor pullback_functor(const World& src, const World& dst,
                                   std::map<Elem, Elem> u, const std::string& name = "") {
  require(dst.fibered(), "pullback: target not fibered");
  for (const auto& b : dst.base) {
    auto it = u.find(b);
    require(it != u.end(), "pullback: reindex not total at " + b.show());
    (void)src.fiber_index(it->second);
  }
  return RegFunctor{RegFunctor::Kind::Pullback, src, dst, Elem(), std::move(u), nullptr,
                    nullptr, name.empty() ? "pullback" : name};
}

inline RegFunctor pullback_to_slice(const std::vector<Elem>& base) {
  World dst = World::slice_world(base);
  std::map<Elem, Elem> u;
  for (const auto& b : base) u[b] = Elem::unit();
  RegFunctor f = pullback_functor(World::set_world(), dst, std::move(u), "reindex");
  return f;
}

inline RegFunctor diagonal_functor(const std::vector<Elem>& idx) {
  World dst = World::pow_world(idx);
  std::map<Elem, Elem> u;
  for (const auto& b : idx) u[b] = Elem::unit();
  return RegFunctor{RegFunctor::Kind::Diagonal, World::set_world(), dst, Elem(),
                    std::move(u), nullptr, nullptr, "diag"};
}

inline RegFunctor binary_product_functor(const World& pow2) {
  require(pow2.kind == WorldKind::PowW && pow2.base.size() == 2,
          "binary_product: source must be a two-fold power");
  return RegFunctor{RegFunctor::Kind::BinaryProduct, pow2, World::set_world(), Elem(), {},
                    nullptr, nullptr, "prod"};
}

inline RegFunctor terminal_functor(const World& src) {
  return RegFunctor{RegFunctor::Kind::Terminal, src, World::set_world(), Elem(), {}, nullptr,
                    nullptr, "!"};
}

inline RegFunctor compose_functor(const RegFunctor& g, const RegFunctor& f) {
  require(f.dst_world == g.src_world, "compose_functor: world mismatch");
  return RegFunctor{RegFunctor::Kind::Compose,
                    f.src_world,
                    g.dst_world,
                    Elem(),
                    {},
                    std::make_shared<RegFunctor>(g),
                    std::make_shared<RegFunctor>(f),
                    g.name + "." + f.name};
}

inline Obj functor_apply(const RegFunctor& F, const Obj& x) {
  require(x.world == F.src_world, "functor_apply: object world mismatch");
  switch (F.kind) {
    case RegFunctor::Kind::Identity: return x;
    case RegFunctor::Kind::Compose:
      return functor_apply(*F.after, functor_apply(*F.before, x));
    case RegFunctor::Kind::Projection: {
      std::size_t fi = x.world.fiber_index(F.index);
      return Obj{World::set_world(), {x.fibers[fi]}};
    }
    case RegFunctor::Kind::Pullback:
    case RegFunctor::Kind::Diagonal: {
      std::vector<Carrier> fs;
      for (const auto& b : F.dst_world.base)
        fs.push_back(x.fibers[x.world.fiber_index(F.reindex.at(b))]);
      return Obj{F.dst_world, std::move(fs)};
    }
    case RegFunctor::Kind::BinaryProduct: {
      const Carrier& a = x.fibers[0];
      const Carrier& b = x.fibers[1];
      if (a.finite && b.finite) {
        std::vector<Elem> xs;
        for (const auto& u : a.elems)
          for (const auto& v : b.elems) xs.push_back(Elem::pair(u, v));
        return set_obj(std::move(xs));
      }
      auto na = a, nb = b;
      auto nth = [na, nb](std::uint64_t n) -> std::optional<Elem> {
        // diagonal pairing over the two enumerations
        std::uint64_t d = 0, t = 0;
        while (t + d + 1 <= n) t += ++d;
        std::uint64_t i = n - t, j = d - i;
        auto u = na.finite ? (i < na.elems.size() ? std::optional<Elem>(na.elems[i])
                                                  : std::nullopt)
                           : na.nth(i);
        auto v = nb.finite ? (j < nb.elems.size() ? std::optional<Elem>(nb.elems[j])
                                                  : std::nullopt)
                           : nb.nth(j);
        if (!u || !v) return std::nullopt;
        return Elem::pair(*u, *v);
      };
      auto member = [na, nb](const Elem& e) {
        if (e.tag() != Elem::Tag::Pair) return false;
        return na.contains(e.first()) && nb.contains(e.second());
      };
      return Obj{World::set_world(), {Carrier::enumerated(nth, member)}};
    }
    case RegFunctor::Kind::Terminal: return set_obj({Elem::unit()});
  }
  fail("functor_apply: unhandled kind");
}

inline Arrow functor_apply(const RegFunctor& F, const Arrow& f) {
  Obj sx = functor_apply(F, f.src);
  Obj sy = functor_apply(F, f.dst);
  switch (F.kind) {
    case RegFunctor::Kind::Identity: return f;
    case RegFunctor::Kind::Compose: {
      Arrow mid = functor_apply(*F.before, f);
      return functor_apply(*F.after, mid);
    }
    case RegFunctor::Kind::Projection: {
      auto src = f.src;
      auto fn = f.fn;
      Elem i = F.index;
      return Arrow{sx, sy,
                   [src, fn, i](const Elem& v) {
                     Elem r = fn(Elem::pair(i, v));
                     return r.second();
                   },
                   F.name + "(" + f.name + ")"};
    }
    case RegFunctor::Kind::Pullback:
    case RegFunctor::Kind::Diagonal: {
      auto src = f.src;
      auto fn = f.fn;
      auto re = F.reindex;
      bool src_fibered = F.src_world.fibered();
      return Arrow{sx, sy,
                   [src, fn, re, src_fibered](const Elem& e) {
                     Elem old = src_fibered ? Elem::pair(re.at(e.first()), e.second())
                                            : e.second();
                     Elem r = fn(old);
                     return Elem::pair(e.first(), src_fibered ? r.second() : r);
                   },
                   F.name + "(" + f.name + ")"};
    }
    case RegFunctor::Kind::BinaryProduct: {
      auto fn = f.fn;
      World pw = F.src_world;
      return Arrow{sx, sy,
                   [fn, pw](const Elem& e) {
                     Elem a = fn(Elem::pair(pw.base[0], e.first()));
                     Elem b = fn(Elem::pair(pw.base[1], e.second()));
                     return Elem::pair(a.second(), b.second());
                   },
                   F.name + "(" + f.name + ")"};
    }
    case RegFunctor::Kind::Terminal:
      return Arrow{sx, sy, [](const Elem&) { return Elem::unit(); }, "!"};
  }
  fail("functor_apply: unhandled kind");
}

inline Rel functor_apply(const RegFunctor& F, const Rel& r) {
  Obj sx = functor_apply(F, r.src);
  Obj sy = functor_apply(F, r.dst);
  switch (F.kind) {
    case RegFunctor::Kind::Identity: return r;
    case RegFunctor::Kind::Compose:
      return functor_apply(*F.after, functor_apply(*F.before, r));
    case RegFunctor::Kind::Projection: {
      Elem i = F.index;
      if (r.finite) {
        std::vector<std::pair<Elem, Elem>> ps;
        for (const auto& [a, b] : r.pairs)
          if (a.first() == i) ps.emplace_back(a.second(), b.second());
        return rel_from_pairs(sx, sy, std::move(ps), F.name + "(" + r.label + ")");
      }
      Rel rc = r;
      return rel_fn(
          sx, sy,
          [rc, i](const Elem& a, const Elem& b) {
            return rc.holds(Elem::pair(i, a), Elem::pair(i, b));
          },
          [rc, i](const Elem& a) {
            std::vector<Elem> out;
            for (const auto& y : rc.image_of(Elem::pair(i, a))) out.push_back(y.second());
            return out;
          },
          F.name + "(" + r.label + ")");
    }
    case RegFunctor::Kind::Pullback:
    case RegFunctor::Kind::Diagonal: {
      auto re = F.reindex;
      bool src_fibered = F.src_world.fibered();
      auto decode = [re, src_fibered](const Elem& e) {
        return src_fibered ? Elem::pair(re.at(e.first()), e.second()) : e.second();
      };
      if (r.finite) {
        std::vector<std::pair<Elem, Elem>> ps;
        for (const auto& b : F.dst_world.base) {
          Elem old = re.at(b);
          for (const auto& [x, y] : r.pairs) {
            if (src_fibered && x.first() != old) continue;
            Elem xv = src_fibered ? x.second() : x;
            Elem yv = src_fibered ? y.second() : y;
            ps.emplace_back(Elem::pair(b, xv), Elem::pair(b, yv));
          }
        }
        return rel_from_pairs(sx, sy, std::move(ps), F.name + "(" + r.label + ")");
      }
      Rel rc = r;
      return rel_fn(
          sx, sy,
          [rc, decode](const Elem& a, const Elem& b) {
            if (a.first() != b.first()) return false;
            return rc.holds(decode(a), decode(b));
          },
          [rc, decode, src_fibered](const Elem& a) {
            std::vector<Elem> out;
            for (const auto& y : rc.image_of(decode(a)))
              out.push_back(Elem::pair(a.first(), src_fibered ? y.second() : y));
            return out;
          },
          F.name + "(" + r.label + ")");
    }
    case RegFunctor::Kind::BinaryProduct: {
      World pw = F.src_world;
      Rel rc = r;
      auto holds = [rc, pw](const Elem& a, const Elem& b) {
        return rc.holds(Elem::pair(pw.base[0], a.first()), Elem::pair(pw.base[0], b.first())) &&
               rc.holds(Elem::pair(pw.base[1], a.second()), Elem::pair(pw.base[1], b.second()));
      };
      if (r.finite && sx.finite()) {
        std::vector<std::pair<Elem, Elem>> ps;
        for (const auto& a : sx.elements())
          for (const auto& b : sy.elements())
            if (holds(a, b)) ps.emplace_back(a, b);
        return rel_from_pairs(sx, sy, std::move(ps), F.name + "(" + r.label + ")");
      }
      return rel_fn(
          sx, sy, holds,
          [rc, pw](const Elem& a) {
            std::vector<Elem> out;
            for (const auto& y0 : rc.image_of(Elem::pair(pw.base[0], a.first())))
              for (const auto& y1 : rc.image_of(Elem::pair(pw.base[1], a.second())))
                out.push_back(Elem::pair(y0.second(), y1.second()));
            return out;
          },
          F.name + "(" + r.label + ")");
    }
    case RegFunctor::Kind::Terminal: {
      // the collapse functor identifies all subobjects; relations land on the
      // full relation over the point
      return rel_from_pairs(sx, sy, {{Elem::unit(), Elem::unit()}}, "!");
    }
  }
  fail("functor_apply: unhandled kind");
}

// Transport of a finite subset (the object it lives in must be supplied for
// fiber bookkeeping).
inline std::vector<Elem> functor_subset(const RegFunctor& F, const Obj& src_obj,
                                        const std::vector<Elem>& xs) {
  switch (F.kind) {
    case RegFunctor::Kind::Identity: return xs;
    case RegFunctor::Kind::Compose: {
      Obj mid = functor_apply(*F.before, src_obj);
      return functor_subset(*F.after, mid, functor_subset(*F.before, src_obj, xs));
    }
    case RegFunctor::Kind::Projection: {
      std::vector<Elem> out;
      for (const auto& e : xs)
        if (e.first() == F.index) out.push_back(e.second());
      return out;
    }
    case RegFunctor::Kind::Pullback:
    case RegFunctor::Kind::Diagonal: {
      bool src_fibered = F.src_world.fibered();
      std::vector<Elem> out;
      for (const auto& b : F.dst_world.base) {
        Elem old = F.reindex.at(b);
        for (const auto& e : xs) {
          if (src_fibered && e.first() != old) continue;
          out.push_back(Elem::pair(b, src_fibered ? e.second() : e));
        }
      }
      return out;
    }
    case RegFunctor::Kind::BinaryProduct: {
      std::vector<Elem> l, r;
      for (const auto& e : xs) {
        if (e.first() == F.src_world.base[0]) l.push_back(e.second());
        if (e.first() == F.src_world.base[1]) r.push_back(e.second());
      }
      std::vector<Elem> out;
      for (const auto& a : l)
        for (const auto& b : r) out.push_back(Elem::pair(a, b));
      return out;
    }
    case RegFunctor::Kind::Terminal: return {Elem::unit()};
  }
  fail("functor_subset: unhandled kind");
}

// Membership-test transport for predicate-presented subsets.
inline std::function<bool(const Elem&)> functor_subset_pred(
    const RegFunctor& F, const Obj& src_obj, std::function<bool(const Elem&)> pred) {
  switch (F.kind) {
    case RegFunctor::Kind::Identity: return pred;
    case RegFunctor::Kind::Compose: {
      Obj mid = functor_apply(*F.before, src_obj);
      return functor_subset_pred(*F.after, mid,
                                 functor_subset_pred(*F.before, src_obj, std::move(pred)));
    }
    case RegFunctor::Kind::Projection: {
      Elem i = F.index;
      return [pred, i](const Elem& v) { return pred(Elem::pair(i, v)); };
    }
    case RegFunctor::Kind::Pullback:
    case RegFunctor::Kind::Diagonal: {
      auto re = F.reindex;
      bool src_fibered = F.src_world.fibered();
      return [pred, re, src_fibered](const Elem& e) {
        if (e.tag() != Elem::Tag::Pair) return false;
        auto it = re.find(e.first());
        if (it == re.end()) return false;
        return pred(src_fibered ? Elem::pair(it->second, e.second()) : e.second());
      };
    }
    case RegFunctor::Kind::BinaryProduct: {
      World pw = F.src_world;
      return [pred, pw](const Elem& e) {
        if (e.tag() != Elem::Tag::Pair) return false;
        return pred(Elem::pair(pw.base[0], e.first())) &&
               pred(Elem::pair(pw.base[1], e.second()));
      };
    }
    case RegFunctor::Kind::Terminal:
      return [](const Elem& e) { return e == Elem::unit(); };
  }
  fail("functor_subset_pred: unhandled kind");
}

// ---------------------------------------------------------------------------
// Regular formulas and sequent checking.  Atoms are binary relation symbols;
// formula terms are variables or chains of unary function symbols.

struct FTerm {
  std::string var;
  std::string arrow;  // empty: plain variable
  std::shared_ptr<const FTerm> sub;

  static FTerm v(const std::string& name) { return FTerm{name, "", nullptr}; }
  static FTerm ap(const std::string& arrow, FTerm inner) {
    return FTerm{"", arrow, std::make_shared<FTerm>(std::move(inner))};
  }
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum class Tag { Top, Eq, Atom, And, Exists };
  Tag tag = Tag::Top;
  FTerm a, b;
  std::string rel;
  FormulaPtr l, r;
  std::string xvar;
  Obj xtype;
  FormulaPtr body;

  static FormulaPtr top() { return std::make_shared<Formula>(); }
  static FormulaPtr eq(FTerm x, FTerm y) {
    auto f = std::make_shared<Formula>();
    f->tag = Tag::Eq;
    f->a = std::move(x);
    f->b = std::move(y);
    return f;
  }
  static FormulaPtr atom(const std::string& rel, FTerm x, FTerm y) {
    auto f = std::make_shared<Formula>();
    f->tag = Tag::Atom;
    f->rel = rel;
    f->a = std::move(x);
    f->b = std::move(y);
    return f;
  }
  static FormulaPtr land(FormulaPtr x, FormulaPtr y) {
    auto f = std::make_shared<Formula>();
    f->tag = Tag::And;
    f->l = std::move(x);
    f->r = std::move(y);
    return f;
  }
  static FormulaPtr exists(const std::string& x, Obj ty, FormulaPtr b) {
    auto f = std::make_shared<Formula>();
    f->tag = Tag::Exists;
    f->xvar = x;
    f->xtype = std::move(ty);
    f->body = std::move(b);
    return f;
  }
};

struct FormulaEnv {
  std::map<std::string, Rel> rels;
  std::map<std::string, Arrow> arrows;
};

struct Sequent {
  std::vector<std::pair<std::string, Obj>> ctx;
  std::vector<FormulaPtr> hyps;
  FormulaPtr concl;
};

namespace detail {

inline Elem eval_fterm(const FTerm& t, const std::map<std::string, Elem>& asgn,
                       const FormulaEnv& env) {
  if (!t.arrow.empty()) {
    Elem inner = eval_fterm(*t.sub, asgn, env);
    auto it = env.arrows.find(t.arrow);
    require(it != env.arrows.end(), "sequent: unbound function symbol " + t.arrow);
    return it->second(inner);
  }
  auto it = asgn.find(t.var);
  require(it != asgn.end(), "sequent: unbound variable " + t.var);
  return it->second;
}

inline Tri eval_formula(const FormulaPtr& f, std::map<std::string, Elem>& asgn,
                        const FormulaEnv& env, std::size_t fiber, const Budget& budget) {
  switch (f->tag) {
    case Formula::Tag::Top: return Tri::True;
    case Formula::Tag::Eq:
      return eval_fterm(f->a, asgn, env) == eval_fterm(f->b, asgn, env) ? Tri::True
                                                                        : Tri::False;
    case Formula::Tag::Atom: {
      auto it = env.rels.find(f->rel);
      require(it != env.rels.end(), "sequent: unbound relation symbol " + f->rel);
      return it->second.holds(eval_fterm(f->a, asgn, env), eval_fterm(f->b, asgn, env))
                 ? Tri::True
                 : Tri::False;
    }
    case Formula::Tag::And:
      return tri_and(eval_formula(f->l, asgn, env, fiber, budget),
                     eval_formula(f->r, asgn, env, fiber, budget));
    case Formula::Tag::Exists: {
      const Carrier& c = f->xtype.fibers[fiber];
      bool bounded = !c.finite;
      std::uint64_t limit = c.finite ? c.elems.size()
                                     : static_cast<std::uint64_t>(budget.enum_limit);
      bool saw_dunno = bounded;
      for (std::uint64_t i = 0; i < limit; ++i) {
        std::optional<Elem> v = c.finite ? std::optional<Elem>(c.elems[i]) : c.nth(i);
        if (!v) {
          saw_dunno = false;  // enumeration actually ended: exhaustive after all
          break;
        }
        asgn[f->xvar] = f->xtype.encode(fiber, *v);
        Tri t = eval_formula(f->body, asgn, env, fiber, budget);
        asgn.erase(f->xvar);
        if (t == Tri::True) return Tri::True;
        if (t == Tri::Dunno) saw_dunno = true;
      }
      return saw_dunno ? Tri::Dunno : Tri::False;
    }
  }
  return Tri::Dunno;
}

}  // namespace detail

inline Verdict check_sequent(const World& world, const Sequent& seq, const FormulaEnv& env,
                             const Budget& budget) {
  for (const auto& [_, ty] : seq.ctx)
    require(ty.world == world, "check_sequent: context type in wrong world");

  bool exhaustive = true;
  for (const auto& [_, ty] : seq.ctx)
    if (!ty.finite()) exhaustive = false;

  Coverage cov;
  bool any_dunno = false;

  auto consider = [&](std::map<std::string, Elem>& asgn, std::size_t fiber) -> std::optional<Verdict> {
    Tri hyp = Tri::True;
    for (const auto& h : seq.hyps) hyp = tri_and(hyp, detail::eval_formula(h, asgn, env, fiber, budget));
    if (hyp == Tri::False) return std::nullopt;  // vacuous
    Tri c = detail::eval_formula(seq.concl, asgn, env, fiber, budget);
    cov.checked++;
    if (hyp == Tri::Dunno || c == Tri::Dunno) {
      cov.dunno++;
      any_dunno = true;
      return std::nullopt;
    }
    if (c == Tri::False) {
      std::string cex;
      for (const auto& [n, e] : asgn) cex += (cex.empty() ? "" : ", ") + n + " = " + e.show();
      return Verdict::refuted(cex.empty() ? "empty context" : cex, cov);
    }
    cov.passed++;
    return std::nullopt;
  };

  if (exhaustive) {
    for (std::size_t fi = 0; fi < world.base.size(); ++fi) {
      std::vector<std::uint64_t> idx(seq.ctx.size(), 0);
      bool roll = false;
      for (const auto& [_, ty] : seq.ctx)
        if (ty.fibers[fi].elems.empty()) roll = true;
      if (roll && !seq.ctx.empty()) continue;  // empty fiber: vacuously true
      while (true) {
        std::map<std::string, Elem> asgn;
        for (std::size_t v = 0; v < seq.ctx.size(); ++v)
          asgn[seq.ctx[v].first] =
              seq.ctx[v].second.encode(fi, seq.ctx[v].second.fibers[fi].elems[idx[v]]);
        if (auto bad = consider(asgn, fi)) return *bad;
        // odometer
        std::size_t v = 0;
        for (; v < idx.size(); ++v) {
          if (++idx[v] < seq.ctx[v].second.fibers[fi].elems.size()) break;
          idx[v] = 0;
        }
        if (v == idx.size()) break;
      }
    }
    if (any_dunno) return Verdict::unknown("existential search budget exhausted", cov);
    cov.domain = cov.checked;
    return Verdict::proven(cov);
  }

  // sampled evaluation
  Rng rng(budget.seed);
  for (int k = 0; k < budget.samples; ++k) {
    std::size_t fi = static_cast<std::size_t>(rng.below(world.base.size()));
    std::map<std::string, Elem> asgn;
    bool ok = true;
    for (const auto& [n, ty] : seq.ctx) {
      const Carrier& c = ty.fibers[fi];
      std::optional<Elem> v;
      if (c.finite) {
        if (c.elems.empty()) { ok = false; break; }
        v = c.elems[rng.below(c.elems.size())];
      } else {
        v = c.nth(rng.below(static_cast<std::uint64_t>(budget.enum_limit)));
      }
      if (!v) { ok = false; break; }
      asgn[n] = ty.encode(fi, *v);
    }
    if (!ok) continue;
    if (auto bad = consider(asgn, fi)) return *bad;
  }
  return Verdict::evidence(cov);
}

}  // namespace pcaw
