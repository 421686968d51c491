"""Pi-labelled trees, partial (k,S)-tree verification, bag surgery, and the
maximal partial k-tree construction.

A PiTree's vertices are bags (masks, possibly empty) or flower vertices
labelled A or D; D vertices carry a cyclic order on their incident edges.
Bags partition the ground set; edges and flower vertices display
k-separations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .bitset import popcount, submasks
from .core import ConnectivitySystem
from .closure import (Separation, TreeCompatibleSet, closure_pair, full_closure,
                      full_closure_sequence)
from .errors import (NotAFlowerVertex, PreconditionFailed, SearchSpaceTooLarge,
                     TangleforgeError, ViolationFound)
from .flowers import (ANEMONE, DAISY, Flower, classify, concatenate,
                      displayed_kS, displayed_separations, loose_petals,
                      maximal_flower_from, verify_flower)
from .tangles import Tangle, is_robust


class PiTree:
    """Immutable labelled tree; surgery returns new instances."""

    def __init__(self, k: int, bags: Dict[int, int], labels: Dict[int, str],
                 edges: Sequence[Tuple[int, int]],
                 cyclic: Optional[Dict[int, Tuple[int, ...]]] = None):
        self.k = k
        self.bags = dict(bags)
        self.labels = dict(labels)
        self.edge_list = tuple(tuple(sorted(e)) for e in edges)
        self.cyclic = dict(cyclic or {})
        adj: Dict[int, List[int]] = {v: [] for v in self.vertices()}
        for u, v in self.edge_list:
            adj[u].append(v)
            adj[v].append(u)
        self.adj = {v: tuple(sorted(ns)) for v, ns in adj.items()}

    def vertices(self) -> List[int]:
        return sorted(set(self.bags) | set(self.labels))

    def edges(self) -> Tuple[Tuple[int, int], ...]:
        return self.edge_list

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return self.adj[v]

    def is_leaf(self, v: int) -> bool:
        return len(self.adj[v]) == 1

    def is_bag_vertex(self, v: int) -> bool:
        return v in self.bags

    def fresh_vertex(self) -> int:
        return max(self.vertices()) + 1

    def validate_structure(self, sys: ConnectivitySystem) -> List[str]:
        """Tree-ness, bag partition, label sanity, cyclic-order sanity."""
        problems = []
        verts = self.vertices()
        if set(self.bags) & set(self.labels):
            problems.append("vertex both bag and flower vertex")
        if len(self.edge_list) != len(verts) - 1:
            problems.append("edge count is not |V|-1")
        seen = set()
        stack = [verts[0]]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(self.adj.get(v, ()))
        if seen != set(verts):
            problems.append("graph is not connected")
        union = 0
        for b in self.bags.values():
            if union & b:
                problems.append("bags overlap")
                break
            union |= b
        if union != sys.full:
            problems.append("bags do not cover the ground set")
        for v, lab in self.labels.items():
            if lab not in ("A", "D"):
                problems.append(f"vertex {v} has label {lab!r}")
            if lab == "D":
                cyc = self.cyclic.get(v)
                if cyc is None or sorted(cyc) != sorted(self.adj[v]):
                    problems.append(f"D vertex {v} lacks a cyclic order over its edges")
        return problems

    def replaced(self, bags=None, labels=None, edges=None, cyclic=None) -> "PiTree":
        return PiTree(self.k,
                      self.bags if bags is None else bags,
                      self.labels if labels is None else labels,
                      self.edge_list if edges is None else edges,
                      self.cyclic if cyclic is None else cyclic)


def single_bag_tree(sys: ConnectivitySystem, k: int) -> PiTree:
    return PiTree(k, {0: sys.full}, {}, [])


def _component_vertices(t: PiTree, start: int, blocked_edge: Tuple[int, int]) -> Set[int]:
    blocked = set(blocked_edge)
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in t.adj[v]:
            if {v, w} == blocked:
                continue
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def side_of_edge(t: PiTree, u: int, v: int) -> int:
    """Union of bags in u's component of t minus the edge (u,v)."""
    comp = _component_vertices(t, u, (u, v))
    mask = 0
    for w in comp:
        mask |= t.bags.get(w, 0)
    return mask


def displayed_by_edge(sys: ConnectivitySystem, t: PiTree, edge: Tuple[int, int]) -> Separation:
    u, v = edge
    return Separation.make(sys, side_of_edge(t, u, v), t.k)


def flower_at(sys: ConnectivitySystem, tangle: Tangle, t: PiTree, v: int) -> Flower:
    """The flower displayed by a non-bag vertex: component bag-unions in the
    vertex's edge order (cyclic for D, sorted for A)."""
    if t.is_bag_vertex(v):
        raise NotAFlowerVertex(f"vertex {v} is a bag vertex")
    order = t.cyclic.get(v, t.adj[v])
    petals = []
    for w in order:
        comp = _component_vertices(t, w, (v, w))
        comp.discard(v)
        mask = 0
        for x in comp:
            mask |= t.bags.get(x, 0)
        petals.append(mask)
    return verify_flower(sys, tangle, petals, t.k)


def displayed_by_flower_vertex(sys: ConnectivitySystem, tangle: Tangle,
                               t: PiTree, v: int) -> List[Separation]:
    return displayed_separations(sys, tangle, flower_at(sys, tangle, t, v))


def displayed_by_tree(sys: ConnectivitySystem, tangle: Tangle, t: PiTree) -> List[Separation]:
    """All k-separations displayed by edges or flower vertices, deduplicated.

    Edge partitions that are not k-separations (or have an empty side) are
    omitted here; verification reports them separately under (P1).
    """
    out = set()
    for u, v in t.edges():
        x = side_of_edge(t, u, v)
        if x != 0 and x != sys.full and sys.lam(x) <= t.k:
            out.add(Separation.make(sys, x, t.k))
    for v in t.labels:
        try:
            out.update(displayed_by_flower_vertex(sys, tangle, t, v))
        except TangleforgeError:
            pass  # bad flower vertices are (P3)/(P4) failures, not displays
    return sorted(out)


def displayed_tree_class_ids(sys: ConnectivitySystem, tangle: Tangle,
                             s_family: TreeCompatibleSet, t: PiTree) -> FrozenSet[int]:
    ids = set()
    for sep in displayed_by_tree(sys, tangle, t):
        if s_family.is_kS_separation(sep):
            cid = s_family.class_id(sep)
            if cid is not None:
                ids.add(cid)
    return frozenset(ids)


def conforms_with_tree(sys: ConnectivitySystem, tangle: Tangle,
                       s_family: TreeCompatibleSet, sep: Separation,
                       t: PiTree) -> bool:
    """Equivalent to a displayed separation, or an equivalent has a side
    inside a bag."""
    displayed = set(displayed_by_tree(sys, tangle, t))
    bags = [b for b in t.bags.values() if b]
    for member in s_family.class_of(sep):
        if member in displayed:
            return True
        a, b = member.sides(sys)
        for bag in bags:
            if a & ~bag == 0 or b & ~bag == 0:
                return True
    return False


@dataclass
class TreeVerdict:
    """Per-axiom outcome of partial (k,S)-tree verification."""

    passed: Dict[str, bool] = field(default_factory=dict)
    failures: List[Tuple[str, object]] = field(default_factory=list)
    displayed: List[Separation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def to_json(self):
        from .bitset import elements_of
        return {
            "ok": self.ok,
            "passed": self.passed,
            "failures": [{"axiom": a, "witness": repr(w)} for a, w in self.failures],
            "displayed": [sorted(elements_of(s.side)) for s in self.displayed],
        }


def verify_partial_kS_tree(sys: ConnectivitySystem, tangle: Tangle,
                           s_family: TreeCompatibleSet, t: PiTree) -> TreeVerdict:
    """Check (P1)-(P5); (P5) scans every enumerated (k,S)-separation."""
    verdict = TreeVerdict()
    structural = t.validate_structure(sys)
    verdict.passed["P2"] = not structural
    for msg in structural:
        verdict.failures.append(("P2", msg))

    ok1 = True
    for u, v in t.edges():
        x = side_of_edge(t, u, v)
        y = sys.full ^ x
        if sys.lam(x) > t.k or tangle.is_weak(x) or tangle.is_weak(y):
            ok1 = False
            verdict.failures.append(("P1", (u, v)))
            continue
        if t.is_bag_vertex(u) and t.is_bag_vertex(v):
            if not s_family.is_kS_separation(Separation.make(sys, x, t.k)):
                ok1 = False
                verdict.failures.append(("P1", (u, v)))
    verdict.passed["P1"] = ok1

    ok3 = ok4 = True
    for v, lab in t.labels.items():
        axiom = "P3" if lab == "A" else "P4"
        try:
            f = flower_at(sys, tangle, t, v)
            klass = classify(sys, f)
            want_ok = (klass == ANEMONE) if lab == "A" else (klass == DAISY or f.n <= 3)
            classes = {s_family.class_id(s) for s in displayed_kS(sys, tangle, s_family, f)}
            if not want_ok or len(classes) < 2 or loose_petals(sys, tangle, f):
                raise ViolationFound("flower vertex fails label/order/looseness", v)
        except Exception as exc:
            if lab == "A":
                ok3 = False
            else:
                ok4 = False
            verdict.failures.append((axiom, (v, str(exc))))
    verdict.passed["P3"] = ok3
    verdict.passed["P4"] = ok4

    ok5 = True
    for sep in s_family.separations():
        if not conforms_with_tree(sys, tangle, s_family, sep, t):
            ok5 = False
            verdict.failures.append(("P5", sep))
            break
    verdict.passed["P5"] = ok5

    verdict.displayed = displayed_by_tree(sys, tangle, t)
    return verdict


def laminarity_check(sys: ConnectivitySystem, t: PiTree) -> bool:
    """Edge-displayed separations pairwise non-crossing (all four pairwise
    intersections non-empty means crossing)."""
    sides = [side_of_edge(t, u, v) for u, v in t.edges()]
    full = sys.full
    for i in range(len(sides)):
        for j in range(i + 1, len(sides)):
            a, b = sides[i], full ^ sides[i]
            c, d = sides[j], full ^ sides[j]
            if a & c and a & d and b & c and b & d:
                return False
    return True


def flower_to_tree(sys: ConnectivitySystem, tangle: Tangle, f: Flower) -> PiTree:
    """One bag for n=1, two adjacent bags for n=2, a labelled star for n>=3."""
    if f.n == 1:
        return PiTree(f.k, {0: f.petals[0]}, {}, [])
    if f.n == 2:
        return PiTree(f.k, {0: f.petals[0], 1: f.petals[1]}, {}, [(0, 1)])
    klass = classify(sys, f)
    center = 0
    bags = {i + 1: p for i, p in enumerate(f.petals)}
    edges = [(center, i + 1) for i in range(f.n)]
    cyclic = {center: tuple(i + 1 for i in range(f.n))} if klass == DAISY else None
    return PiTree(f.k, bags, {center: "A" if klass == ANEMONE else "D"}, edges, cyclic)


# -- bag surgery -----------------------------------------------------------


def _require_s_terminal(sys, tangle, s_family, t, leaf) -> int:
    if not t.is_bag_vertex(leaf) or not t.is_leaf(leaf):
        raise PreconditionFailed("vertex is not a leaf bag vertex")
    b = t.bags[leaf]
    if not s_family.is_kS_separation(Separation.make(sys, b, t.k)):
        raise PreconditionFailed("terminal bag is not an S-terminal bag")
    return b


def grow_terminal_bag(sys: ConnectivitySystem, tangle: Tangle,
                      s_family: TreeCompatibleSet, t: PiTree,
                      leaf: int, x: int) -> PiTree:
    """Absorb a weak set into an S-terminal bag, stripping it elsewhere."""
    b = _require_s_terminal(sys, tangle, s_family, t, leaf)
    if x == 0 or x & b or tangle.is_strong(x):
        raise PreconditionFailed("x must be a non-empty weak subset of E-B")
    if sys.lam(b | x) > t.k:
        raise PreconditionFailed("B | x is not k-separating")
    bags = {v: (bag | x if v == leaf else bag & ~x) for v, bag in t.bags.items()}
    return t.replaced(bags=bags)


def split_terminal_bag(sys: ConnectivitySystem, tangle: Tangle,
                       s_family: TreeCompatibleSet, t: PiTree,
                       leaf: int, x: int) -> PiTree:
    """Carve a weak set out of an S-terminal bag into the old vertex; the
    shrunken bag moves to a fresh leaf."""
    b = _require_s_terminal(sys, tangle, s_family, t, leaf)
    if x == 0 or x & ~b or tangle.is_strong(x):
        raise PreconditionFailed("x must be a non-empty weak subset of B")
    if sys.lam(b & ~x) > t.k:
        raise PreconditionFailed("B - x is not k-separating")
    v = t.fresh_vertex()
    bags = dict(t.bags)
    bags[leaf] = x
    bags[v] = b & ~x
    return t.replaced(bags=bags, edges=list(t.edge_list) + [(leaf, v)])


def retarget_terminal_bag(sys: ConnectivitySystem, tangle: Tangle,
                          s_family: TreeCompatibleSet, t: PiTree,
                          leaf: int, c: int) -> Tuple[PiTree, int]:
    """Replace an S-terminal bag B by C with fcl(B) = fcl(C): grow to the
    closure along B's maximal partial k-sequence, then split back down along
    C's reversed one.  Returns the tree and the vertex now holding C."""
    b = _require_s_terminal(sys, tangle, s_family, t, leaf)
    if not s_family.is_kS_separation(Separation.make(sys, c, t.k)):
        raise PreconditionFailed("(C, E-C) is not a (k,S)-separation")
    fcl_b, grow_steps = full_closure_sequence(sys, tangle, b)
    fcl_c, shrink_steps = full_closure_sequence(sys, tangle, c)
    if fcl_b != fcl_c:
        raise PreconditionFailed("closures differ")
    cur = t
    for y in grow_steps:
        cur = grow_terminal_bag(sys, tangle, s_family, cur, leaf, y)
    holder = leaf
    for y in reversed(shrink_steps):
        cur = split_terminal_bag(sys, tangle, s_family, cur, holder, y)
        holder = max(cur.vertices())
    assert cur.bags[holder] == c
    return cur, holder


# -- the extension step and the main construction --------------------------


def _find_rep_in_bag(sys, tangle, s_family, t, target):
    """A class member of `target` with a side inside a bag; None if the
    class is equivalent to a displayed separation instead."""
    displayed = set(displayed_by_tree(sys, tangle, t))
    members = s_family.class_of(target)
    if any(m in displayed for m in members):
        return None
    for member in members:
        for side in member.sides(sys):
            for v, bag in sorted(t.bags.items()):
                if bag and side & ~bag == 0:
                    return member, side, v
    raise ViolationFound("separation neither displayed-equivalent nor in a bag (P5 broken)",
                         target)


def _maximal_k_separating_between(sys, tangle, lower: int, upper: int,
                                  allow_equal: bool) -> int:
    """Subset-maximal k-separating Z with lower <= Z <= upper (Z proper in
    upper unless allow_equal); ties broken by smallest mask."""
    k = tangle.k
    gap = upper & ~lower
    candidates = []
    for s in submasks(gap):
        z = lower | s
        if z == upper and not allow_equal:
            continue
        if sys.lam(z) <= k:
            candidates.append(z)
    if not candidates:
        raise PreconditionFailed("no k-separating set in the interval")
    maximal = [z for z in candidates
               if not any(z != w and z & ~w == 0 for w in candidates)]
    return min(maximal)


def _attach_flower_star(sys, tangle, s_family, t, holder, flower_prefix, klass):
    """Relabel `holder` to the empty bag and hang a flower vertex with leaf
    bags `flower_prefix` off it; D vertices get the cyclic edge order
    (v v_1, ..., v v_j, v holder)."""
    v = t.fresh_vertex()
    bags = dict(t.bags)
    bags[holder] = 0
    labels = dict(t.labels)
    labels[v] = "A" if klass == ANEMONE else "D"
    edges = list(t.edge_list) + [(holder, v)]
    leaf_ids = []
    nxt = v + 1
    for p in flower_prefix:
        bags[nxt] = p
        edges.append((v, nxt))
        leaf_ids.append(nxt)
        nxt += 1
    cyclic = dict(t.cyclic)
    if labels[v] == "D":
        cyclic[v] = tuple(leaf_ids) + (holder,)
    return PiTree(t.k, bags, labels, edges, cyclic)


def _arrange_prefix(sys, tangle, f: Flower, c: int) -> Tuple[Flower, int]:
    """Relabel f so the displayed union C occupies a petal prefix; returns
    the relabelled flower and the prefix length j."""
    klass = classify(sys, f)
    in_c = [i for i, p in enumerate(f.petals) if p & ~c == 0]
    assert sum(popcount(f.petals[i]) for i in in_c) == popcount(c)
    if klass == ANEMONE:
        order = in_c + [i for i in range(f.n) if i not in in_c]
        g = Flower(tuple(f.petals[i] for i in order), f.k, ANEMONE)
        return g, len(in_c)
    # Daisy: C's petals form a cyclic run; rotate its start to position 0.
    start = None
    for i in in_c:
        if (i - 1) % f.n not in in_c:
            start = i
            break
    assert start is not None
    return f.rotated(start), len(in_c)


def extend_tree(sys: ConnectivitySystem, tangle: Tangle,
                s_family: TreeCompatibleSet, t: PiTree) -> Optional[PiTree]:
    """One extension step: returns a tree displaying a strictly larger set
    of (k,S)-classes, or None when every class is already displayed.

    The construction: pick a non-displayed class, move an equivalent side
    into a terminal bag (splitting internal bags on the way), fully close
    the bag's complement, choose a maximal k-separating Z around the side,
    then either attach Z as a new leaf (when B & W is not k-separating) or
    graft a maximal flower grown from the 3-petal flower (Z, B & W, E - B).
    """
    if not is_robust(tangle):
        raise PreconditionFailed("tangle is not robust")
    k = t.k
    base_ids = displayed_tree_class_ids(sys, tangle, s_family, t)
    all_ids = set(range(len(s_family.classes())))
    missing = sorted(all_ids - base_ids)
    if not missing:
        return None
    target = min((s for cid in missing for s in s_family.classes()[cid]),
                 key=lambda s: s.side)
    if not base_ids:
        # Trivial tree: replace it by the tree of a maximal flower seeded at
        # the target class (vacuously above the input in the quasi-order).
        return _seed_tree(sys, tangle, s_family, target)
    work = t
    for _ in range(4 * (1 << sys.n) + 16):
        if len(displayed_tree_class_ids(sys, tangle, s_family, work)) > len(base_ids):
            return work
        found = _find_rep_in_bag(sys, tangle, s_family, work, target)
        assert found is not None
        rep, side, u = found

        if not work.is_leaf(u):
            # Case II: split the internal bag around a maximal Z and retry.
            z = _maximal_k_separating_between(sys, tangle, side, work.bags[u],
                                              allow_equal=True)
            assert s_family.is_kS_separation(Separation.make(sys, z, k))
            v = work.fresh_vertex()
            bags = dict(work.bags)
            bags[u] = bags[u] & ~z
            bags[v] = z
            work = work.replaced(bags=bags, edges=list(work.edge_list) + [(u, v)])
            continue

        # Case I: u is a leaf with bag B containing the side properly.
        b = work.bags[u]
        fcl_co, steps = full_closure_sequence(sys, tangle, sys.full ^ b)
        holder = u
        for y in steps:
            work = split_terminal_bag(sys, tangle, s_family, work, holder, y)
            holder = max(work.vertices())
        b1 = sys.full ^ fcl_co
        r1 = sys.full ^ full_closure(sys, tangle, sys.full ^ side)
        assert r1 and r1 & ~b1 == 0 and r1 != b1
        z = _maximal_k_separating_between(sys, tangle, r1, b1, allow_equal=False)
        w = sys.full ^ z
        wz = Separation.make(sys, z, k)
        assert s_family.is_kS_separation(wz)
        bw = b1 & w
        if sys.lam(bw) > k:
            # New leaf Z; the old terminal vertex keeps B & W.
            v = work.fresh_vertex()
            bags = dict(work.bags)
            bags[holder] = bw
            bags[v] = z
            work = work.replaced(bags=bags, edges=list(work.edge_list) + [(holder, v)])
            continue
        # Flower route: (Z, B & W, E - B) seeds a maximal flower.
        assert tangle.is_strong(bw)
        f0 = verify_flower(sys, tangle, (z, bw, sys.full ^ b1), k)
        fstar = maximal_flower_from(sys, tangle, s_family, f0)
        pair_b = closure_pair(sys, tangle, Separation.make(sys, b1, k))
        fcl_of_b1 = full_closure(sys, tangle, b1)
        c = None
        for s in displayed_kS(sys, tangle, s_family, fstar):
            if closure_pair(sys, tangle, s) == pair_b:
                for cand in s.sides(sys):
                    if (full_closure(sys, tangle, cand) == fcl_of_b1
                            and b1 & ~cand == 0):
                        c = cand
                        break
            if c is not None:
                break
        assert c is not None, "maximal flower lost the terminal-bag class"
        pair_wz = closure_pair(sys, tangle, wz)
        zprime = None
        for s in displayed_kS(sys, tangle, s_family, fstar):
            if closure_pair(sys, tangle, s) == pair_wz:
                for cand in s.sides(sys):
                    if cand & ~c == 0:
                        zprime = cand
                        break
            if zprime is not None:
                break
        assert zprime is not None, "no displayed equivalent of (W,Z) inside C"
        arranged, j = _arrange_prefix(sys, tangle, fstar, c)
        fpp = concatenate(arranged, list(range(1, j + 1)) + [arranged.n])
        fpp = verify_flower(sys, tangle, fpp.petals, k)
        work, holder = retarget_terminal_bag(sys, tangle, s_family, work, holder, c)
        work = _attach_flower_star(sys, tangle, s_family, work, holder,
                                   arranged.petals[:j], classify(sys, fpp))
    raise SearchSpaceTooLarge("extension step did not converge")


def _seed_tree(sys: ConnectivitySystem, tangle: Tangle,
               s_family: TreeCompatibleSet, seed: Separation) -> PiTree:
    """The tree of a maximal flower displaying seed's class, concatenated to
    two petals when it displays only one class (its flower vertex would
    otherwise have S-order < 3)."""
    from .flowers import displayed_class_ids, maximal_flower
    f = maximal_flower(sys, tangle, s_family, seed)
    ids = displayed_class_ids(sys, tangle, s_family, f)
    if len(ids) == 1 and f.n > 2:
        x = displayed_kS(sys, tangle, s_family, f)[0].side
        f = verify_flower(sys, tangle, (x, sys.full ^ x), tangle.k)
    return flower_to_tree(sys, tangle, f)


def build_maximal_tree(sys: ConnectivitySystem, tangle: Tangle,
                       s_family: TreeCompatibleSet) -> PiTree:
    """Iterate extend_tree from a maximal-flower seed until every
    (k,S)-equivalence class is displayed by the tree."""
    seps = s_family.separations()
    if not seps:
        return single_bag_tree(sys, tangle.k)
    t = _seed_tree(sys, tangle, s_family, seps[0])
    while True:
        nxt = extend_tree(sys, tangle, s_family, t)
        if nxt is None:
            return t
        t = nxt
