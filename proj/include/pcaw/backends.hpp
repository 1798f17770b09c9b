#pragma once

// Concrete PCAs: the one-point algebra, closed normal forms over k and s with
// fuel-bounded reduction, and a graph-style algebra on finite sets of numbers
// driven by a pairing of codes.

#include <cmath>

#include "pcaw/pca.hpp"

namespace pcaw {

// ---------------------------------------------------------------------------
// One-point PCA.

inline Pca make_trivial() {
  Pca p;
  p.name = "trivial";
  p.world = World::set_world();
  p.carrier = set_obj({Elem::unit()});
  p.designated = RSet::full("A");
  p.app_raw = [](std::size_t, const Elem&, const Elem&, std::uint64_t) {
    return AppOutcome::value(Elem::unit());
  };
  p.exact = true;
  p.sample_raw = [](std::size_t, Rng&) { return Elem::unit(); };
  p.designated_nth_raw = [](std::size_t, std::uint64_t i) -> std::optional<Elem> {
    if (i == 0) return Elem::unit();
    return std::nullopt;
  };
  p.kit.slots = {{KitSlot::K, {Elem::unit()}},   {KitSlot::S, {Elem::unit()}},
                 {KitSlot::I, {Elem::unit()}},   {KitSlot::Kbar, {Elem::unit()}},
                 {KitSlot::P, {Elem::unit()}},   {KitSlot::P0, {Elem::unit()}},
                 {KitSlot::P1, {Elem::unit()}}};
  return p;
}

// ---------------------------------------------------------------------------
// Closed normal forms over k, s and a few inert atoms.  Application reduces
// leftmost-outermost under a fuel bound; running out of fuel is an honest
// unknown, never a definite undefined.

namespace sk {

struct Spine {
  CombPtr head;
  std::vector<CombPtr> args;  // outermost last? no: args[0] applied first
};

inline Spine unwind(const CombPtr& c) {
  Spine s;
  CombPtr cur = c;
  std::vector<CombPtr> rev;
  while (cur->tag == Comb::Tag::App) {
    rev.push_back(cur->arg);
    cur = cur->fun;
  }
  s.head = cur;
  s.args.assign(rev.rbegin(), rev.rend());
  return s;
}

inline CombPtr rebuild(CombPtr head, const std::vector<CombPtr>& args, std::size_t from = 0) {
  CombPtr out = std::move(head);
  for (std::size_t i = from; i < args.size(); ++i) out = Comb::app(out, args[i]);
  return out;
}

// one leftmost-outermost step, or null when already normal
inline CombPtr step(const CombPtr& c) {
  if (c->tag != Comb::Tag::App) return nullptr;
  Spine sp = unwind(c);
  if (sp.head->tag == Comb::Tag::K && sp.args.size() >= 2)
    return rebuild(sp.args[0], sp.args, 2);
  if (sp.head->tag == Comb::Tag::S && sp.args.size() >= 3) {
    CombPtr redex =
        Comb::app(Comb::app(sp.args[0], sp.args[2]), Comb::app(sp.args[1], sp.args[2]));
    return rebuild(redex, sp.args, 3);
  }
  for (std::size_t i = 0; i < sp.args.size(); ++i) {
    if (CombPtr stepped = step(sp.args[i])) {
      auto args = sp.args;
      args[i] = stepped;
      return rebuild(sp.head, args);
    }
  }
  return nullptr;
}

inline bool is_normal(const CombPtr& c) {
  if (c->tag != Comb::Tag::App) return true;
  Spine sp = unwind(c);
  if (sp.head->tag == Comb::Tag::K && sp.args.size() >= 2) return false;
  if (sp.head->tag == Comb::Tag::S && sp.args.size() >= 3) return false;
  for (const auto& a : sp.args)
    if (!is_normal(a)) return false;
  return true;
}

inline std::optional<CombPtr> reduce(CombPtr c, std::uint64_t fuel) {
  for (std::uint64_t used = 0; used <= fuel; ++used) {
    CombPtr next = step(c);
    if (!next) return c;
    c = next;
  }
  return std::nullopt;
}

inline bool uses_only_atoms(const CombPtr& c, int n_atoms) {
  switch (c->tag) {
    case Comb::Tag::K:
    case Comb::Tag::S: return true;
    case Comb::Tag::Atom:
      return c->atom.size() == 1 && c->atom[0] >= 'a' &&
             c->atom[0] < static_cast<char>('a' + n_atoms);
    case Comb::Tag::App: return uses_only_atoms(c->fun, n_atoms) && uses_only_atoms(c->arg, n_atoms);
  }
  return false;
}

inline bool atom_free(const CombPtr& c) {
  switch (c->tag) {
    case Comb::Tag::K:
    case Comb::Tag::S: return true;
    case Comb::Tag::Atom: return false;
    case Comb::Tag::App: return atom_free(c->fun) && atom_free(c->arg);
  }
  return false;
}

// Normal forms enumerated by leaf count, leaves first; deterministic.
struct NfEnum {
  int n_atoms;
  std::vector<std::vector<CombPtr>> by_size;  // by_size[n]: NFs with n leaves
  std::vector<CombPtr> flat;

  explicit NfEnum(int atoms) : n_atoms(atoms) {
    by_size.resize(2);
    by_size[1].push_back(Comb::k());
    by_size[1].push_back(Comb::s());
    for (int i = 0; i < n_atoms; ++i)
      by_size[1].push_back(Comb::make_atom(std::string(1, static_cast<char>('a' + i))));
    flat = by_size[1];
  }

  void grow() {
    std::size_t sz = by_size.size();
    require(sz <= 40, "sk enumeration grew past its cap");
    std::vector<CombPtr> bucket;
    for (std::size_t ls = 1; ls < sz; ++ls) {
      for (const auto& l : by_size[ls]) {
        for (const auto& r : by_size[sz - ls]) {
          CombPtr c = Comb::app(l, r);
          Spine sp = unwind(c);
          if (sp.head->tag == Comb::Tag::K && sp.args.size() >= 2) continue;
          if (sp.head->tag == Comb::Tag::S && sp.args.size() >= 3) continue;
          bucket.push_back(c);
          flat.push_back(c);
        }
      }
    }
    by_size.push_back(std::move(bucket));
  }

  CombPtr nth(std::uint64_t i) {
    while (flat.size() <= i) grow();
    return flat[i];
  }
};

}  // namespace sk

inline Pca make_sk(int n_atoms = 2, std::uint64_t fuel = 3000) {
  Pca p;
  p.name = "sk";
  p.world = World::set_world();

  auto nfs = std::make_shared<sk::NfEnum>(n_atoms);
  auto pure = std::make_shared<sk::NfEnum>(0);

  auto member = [n_atoms](const Elem& e) {
    return e.tag() == Elem::Tag::Comb && sk::is_normal(e.comb_value()) &&
           sk::uses_only_atoms(e.comb_value(), n_atoms);
  };
  auto nth = [nfs](std::uint64_t i) -> std::optional<Elem> {
    return Elem::comb(nfs->nth(i));
  };
  p.carrier = Obj{p.world, {Carrier::enumerated(nth, member)}};

  p.designated = RSet::predicate(
      [](const Elem& e) {
        return e.tag() == Elem::Tag::Comb && sk::is_normal(e.comb_value()) &&
               sk::atom_free(e.comb_value());
      },
      "C",
      [pure](std::uint64_t i) -> std::optional<Elem> { return Elem::comb(pure->nth(i)); });
  p.designated_nth_raw = [pure](std::size_t, std::uint64_t i) -> std::optional<Elem> {
    return Elem::comb(pure->nth(i));
  };

  p.app_raw = [](std::size_t, const Elem& a, const Elem& b, std::uint64_t fuel_) {
    auto red = sk::reduce(Comb::app(a.comb_value(), b.comb_value()), fuel_);
    if (!red) return AppOutcome::unknown();
    return AppOutcome::value(Elem::comb(*red));
  };
  p.exact = false;  // reduction can run out of fuel

  p.sample_raw = [nfs](std::size_t, Rng& rng) {
    return Elem::comb(nfs->nth(rng.below(64)));
  };

  std::vector<Elem> k1{Elem::comb(Comb::k())}, s1{Elem::comb(Comb::s())};
  p.kit = derive_kit(p.app_raw, k1, s1, fuel);
  p.defaults.fuel = fuel;
  return p;
}

// ---------------------------------------------------------------------------
// Graph-style PCA: elements are finite sets of naturals plus a stock of
// primitive combinators given directly by decidable membership predicates.
// Application against a primitive truncates its search at a level bound.

namespace graph {

inline std::uint64_t cantor(std::uint64_t x, std::uint64_t y) {
  unsigned __int128 s = static_cast<unsigned __int128>(x) + y;
  unsigned __int128 v = s * (s + 1) / 2 + y;
  const std::uint64_t big = ~std::uint64_t{0};
  return v > big ? big : static_cast<std::uint64_t>(v);
}

inline std::pair<std::uint64_t, std::uint64_t> uncantor(std::uint64_t n) {
  // largest s with s(s+1)/2 <= n
  std::uint64_t s = static_cast<std::uint64_t>((std::sqrt(8.0 * static_cast<double>(n) + 1) - 1) / 2);
  while (s * (s + 1) / 2 > n) --s;
  while ((s + 1) * (s + 2) / 2 <= n) ++s;
  std::uint64_t y = n - s * (s + 1) / 2;
  return {s - y, y};
}

inline std::uint64_t code_of(const std::vector<std::uint64_t>& xs) {
  std::uint64_t c = 0;
  for (auto x : xs) {
    require(x < 63, "graph: set element too large to code");
    c |= std::uint64_t{1} << x;
  }
  return c;
}

inline std::vector<std::uint64_t> decode_set(std::uint64_t c) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 0; i < 63; ++i)
    if (c & (std::uint64_t{1} << i)) out.push_back(i);
  return out;
}

// exact application of two finite sets: scan the left side's pairs
inline std::vector<std::uint64_t> app_fin(const std::vector<std::uint64_t>& u,
                                          const std::vector<std::uint64_t>& v) {
  std::vector<std::uint64_t> out;
  for (auto n : u) {
    auto [x, m] = uncantor(n);
    bool sub = true;
    for (auto i : decode_set(x))
      if (!std::binary_search(v.begin(), v.end(), i)) {
        sub = false;
        break;
      }
    if (sub) out.push_back(m);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline bool prim_member(const std::string& name, std::uint64_t n);

inline bool prim_subset(const std::vector<std::uint64_t>& xs, const std::string& name) {
  for (auto x : xs)
    if (!prim_member(name, x)) return false;
  return true;
}

inline bool prim_member(const std::string& name, std::uint64_t n) {
  if (name == "k") {
    auto [a, rest] = uncantor(n);
    auto [b, m] = uncantor(rest);
    (void)b;
    return m < 63 && ((a >> m) & 1u);
  }
  if (name == "kbar") {
    auto [a, rest] = uncantor(n);
    (void)a;
    auto [b, m] = uncantor(rest);
    return m < 63 && ((b >> m) & 1u);
  }
  if (name == "i") {
    auto [a, m] = uncantor(n);
    return m < 63 && ((a >> m) & 1u);
  }
  if (name == "s") {
    auto [a, r1] = uncantor(n);
    auto [b, r2] = uncantor(r1);
    auto [c, m] = uncantor(r2);
    auto A = decode_set(a), B = decode_set(b), C = decode_set(c);
    auto lhs = app_fin(app_fin(A, C), app_fin(B, C));
    return std::binary_search(lhs.begin(), lhs.end(), m);
  }
  if (name == "P") {
    auto [a, r1] = uncantor(n);
    auto [b, r2] = uncantor(r1);
    auto [c, m] = uncantor(r2);
    auto A = decode_set(a), B = decode_set(b), C = decode_set(c);
    auto val = app_fin(app_fin(C, A), B);
    return std::binary_search(val.begin(), val.end(), m);
  }
  if (name == "P0" || name == "P1") {
    auto [a, m] = uncantor(n);
    auto A = decode_set(a);
    // m in A . k (resp. A . kbar): scan A's pairs whose code side lies in the prim
    const char* prim = name == "P0" ? "k" : "kbar";
    for (auto p : A) {
      auto [x, mm] = uncantor(p);
      if (mm == m && prim_subset(decode_set(x), prim)) return true;
    }
    return false;
  }
  fail("graph: unknown primitive " + name);
}

inline std::vector<std::uint64_t> elem_nats(const Elem& e) {
  std::vector<std::uint64_t> out;
  for (const auto& x : e.set_items()) out.push_back(x.nat_value());
  return out;
}

inline Elem nats_elem(const std::vector<std::uint64_t>& xs) {
  std::vector<Elem> items;
  items.reserve(xs.size());
  for (auto x : xs) items.push_back(Elem::nat(x));
  return Elem::set(std::move(items));
}

inline bool mem(const Elem& e, std::uint64_t n) {
  if (e.tag() == Elem::Tag::Sym) return prim_member(e.sym_value(), n);
  return std::binary_search(e.set_items().begin(), e.set_items().end(), Elem::nat(n));
}

inline AppOutcome app(const Elem& u, const Elem& v, std::uint64_t level) {
  bool u_prim = u.tag() == Elem::Tag::Sym;
  bool v_prim = v.tag() == Elem::Tag::Sym;
  if (!u_prim) {
    // exact: walk the pairs listed in u
    std::vector<std::uint64_t> out;
    for (const auto& n : u.set_items()) {
      auto [x, m] = uncantor(n.nat_value());
      bool sub = true;
      for (auto i : decode_set(x))
        if (!mem(v, i)) {
          sub = false;
          break;
        }
      if (sub) out.push_back(m);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return AppOutcome::value(nats_elem(out));
  }
  if (v_prim) return AppOutcome::unknown();  // no finite listing to feed the search
  // truncated: subsets of v against the primitive's predicate
  std::vector<std::uint64_t> vs = elem_nats(v);
  std::vector<std::uint64_t> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << vs.size()); ++mask) {
    std::vector<std::uint64_t> e;
    for (std::size_t i = 0; i < vs.size(); ++i)
      if (mask & (std::uint64_t{1} << i)) e.push_back(vs[i]);
    std::uint64_t ce = code_of(e);
    for (std::uint64_t m = 0; cantor(ce, m) < level; ++m)
      if (prim_member(u.sym_value(), cantor(ce, m))) out.push_back(m);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return AppOutcome::value(nats_elem(out));
}

}  // namespace graph

inline Pca make_graph(std::uint64_t level = std::uint64_t{1} << 26) {
  Pca p;
  p.name = "graph";
  p.world = World::set_world();

  static const std::vector<std::string> prim_names = {"k", "s", "i", "kbar", "P", "P0", "P1"};
  auto member = [](const Elem& e) {
    if (e.tag() == Elem::Tag::Sym)
      return std::find(prim_names.begin(), prim_names.end(), e.sym_value()) !=
             prim_names.end();
    if (e.tag() != Elem::Tag::Set) return false;
    for (const auto& x : e.set_items())
      if (x.tag() != Elem::Tag::Nat) return false;
    return true;
  };
  auto nth = [](std::uint64_t i) -> std::optional<Elem> {
    return graph::nats_elem(graph::decode_set(i));
  };
  p.carrier = Obj{p.world, {Carrier::enumerated(nth, member)}};
  p.designated = RSet::full("A");
  p.designated_nth_raw = [nth](std::size_t, std::uint64_t i) { return nth(i); };

  p.app_raw = [level](std::size_t, const Elem& a, const Elem& b, std::uint64_t) {
    return graph::app(a, b, level);
  };
  p.exact = false;  // primitive against primitive stays unknown

  // small sets over {0..3}, at most two elements
  static const std::vector<std::vector<std::uint64_t>> pool = {
      {},     {0},    {1},    {2},    {3},    {0, 1},
      {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  p.sample_raw = [](std::size_t, Rng& rng) {
    return graph::nats_elem(pool[rng.below(pool.size())]);
  };

  for (KitSlot s :
       {KitSlot::K, KitSlot::S, KitSlot::I, KitSlot::Kbar, KitSlot::P, KitSlot::P0, KitSlot::P1})
    p.kit.slots[s] = {Elem::sym(kit_slot_name(s))};
  p.defaults.fuel = level;
  return p;
}

}  // namespace pcaw
