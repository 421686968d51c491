"""Independent exhaustive recomputation of every structure at desk scale.

Shares only the lambda evaluation with the engines; weak tests, closures,
classes, flowers, and tree certification are recomputed literally from the
definitions so differential tests mean something.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from .bitset import elements_of
from .core import ConnectivitySystem
from .closure import Separation, TreeCompatibleSet
from .errors import SearchSpaceTooLarge
from .flowers import Flower
from .tangles import Tangle
from .trees import PiTree

ORACLE_MAX_N = 14
ORACLE_MAX_PETALS = 8


def _guard(sys: ConnectivitySystem):
    if sys.n > ORACLE_MAX_N:
        raise SearchSpaceTooLarge(f"oracle requires n <= {ORACLE_MAX_N}")


def _weak(tangle: Tangle, x: int) -> bool:
    return any(x & ~m == 0 for m in tangle.members)


def _fully_closed(sys: ConnectivitySystem, tangle: Tangle, x: int) -> bool:
    """Literal definition: no non-empty weak Y in E-X keeps X|Y k-separating."""
    k = tangle.k
    rest = sys.full ^ x
    y = rest
    while y:
        if _weak(tangle, y) and sys.lam(x | y) <= k:
            return False
        y = (y - 1) & rest
    return True


def oracle_full_closure(sys: ConnectivitySystem, tangle: Tangle, x: int) -> int:
    """Intersection of every fully-closed k-separating superset of X.

    Memoized on the tangle (recomputation is deterministic, so caching does
    not compromise independence from the greedy engine).
    """
    _guard(sys)
    cache = tangle.__dict__.setdefault("_oracle_fcl_cache", {})
    hit = cache.get(x)
    if hit is not None:
        return hit
    k = tangle.k
    rest = sys.full ^ x
    acc = None
    s = rest
    while True:
        f = x | s
        if sys.lam(f) <= k and _fully_closed(sys, tangle, f):
            acc = f if acc is None else acc & f
        if s == 0:
            break
        s = (s - 1) & rest
    assert acc is not None, "E itself is always fully closed and k-separating"
    cache[x] = acc
    return acc


def _sequential(sys: ConnectivitySystem, tangle: Tangle, x: int) -> bool:
    co = sys.full ^ x
    if _weak(tangle, co):
        return False
    return oracle_full_closure(sys, tangle, co) == sys.full


def _in_S(sys: ConnectivitySystem, tangle: Tangle,
          s_family: Optional[TreeCompatibleSet], x: int) -> bool:
    """Membership recomputed from the definition for default mode; explicit
    families are raw data, taken as given."""
    if s_family is not None and s_family.mode == "explicit":
        return x in s_family._explicit
    co = sys.full ^ x
    return (sys.lam(x) <= tangle.k and not _weak(tangle, co)
            and oracle_full_closure(sys, tangle, co) != sys.full)


def oracle_kS_separations(sys: ConnectivitySystem, tangle: Tangle,
                          s_family: Optional[TreeCompatibleSet] = None) -> List[Separation]:
    _guard(sys)
    out = []
    for x in range(1 << sys.n):
        if not x & 1:
            continue
        if _in_S(sys, tangle, s_family, x) and _in_S(sys, tangle, s_family, sys.full ^ x):
            out.append(Separation(x, tangle.k))
    return out


def oracle_classes(sys: ConnectivitySystem, tangle: Tangle,
                   s_family: Optional[TreeCompatibleSet] = None) -> List[List[Separation]]:
    """T-equivalence classes of the (k,S)-separations, by closure pairs."""
    groups: Dict[FrozenSet[int], List[Separation]] = {}
    for sep in oracle_kS_separations(sys, tangle, s_family):
        a, b = sep.sides(sys)
        key = frozenset((oracle_full_closure(sys, tangle, a),
                         oracle_full_closure(sys, tangle, b)))
        groups.setdefault(key, []).append(sep)
    classes = sorted(groups.values(), key=lambda g: min(s.side for s in g))
    for cls in classes:
        cls.sort()
    return classes


def _oracle_equivalent(sys, tangle, s1: Separation, s2: Separation) -> bool:
    a, b = s1.sides(sys)
    c, d = s2.sides(sys)
    fa = oracle_full_closure(sys, tangle, a)
    fb = oracle_full_closure(sys, tangle, b)
    fc = oracle_full_closure(sys, tangle, c)
    fd = oracle_full_closure(sys, tangle, d)
    return {fa, fb} == {fc, fd}


# -- flower enumeration ----------------------------------------------------


def _partitions_into_blocks(n: int, max_blocks: int):
    """All set partitions of range(n) into at most max_blocks blocks, as
    tuples of masks with block minima increasing."""
    blocks: List[int] = []

    def rec(e: int):
        if e == n:
            yield tuple(blocks)
            return
        for i in range(len(blocks)):
            blocks[i] |= 1 << e
            yield from rec(e + 1)
            blocks[i] &= ~(1 << e)
        if len(blocks) < max_blocks:
            blocks.append(1 << e)
            yield from rec(e + 1)
            blocks.pop()

    yield from rec(0)


def _flower_class_literal(sys: ConnectivitySystem, f: Flower) -> str:
    """Anemone/daisy decided by checking every union against the definition."""
    n = f.n
    if n <= 2:
        return "anemone"
    sep = set()
    consec = set()
    for bits in range(1, (1 << n) - 1):
        union = 0
        for i in range(n):
            if bits >> i & 1:
                union |= f.petals[i]
        if sys.lam(union) <= f.k:
            sep.add(bits)
        runs = sum(1 for i in range(n) if bits >> i & 1 and not bits >> ((i + 1) % n) & 1)
        if runs == 1:
            consec.add(bits)
    if len(sep) == (1 << n) - 2:
        return "anemone"
    if sep == consec:
        return "daisy"
    return "neither"


def _daisy_canonical(petals: Tuple[int, ...]) -> Tuple[int, ...]:
    """Minimal rotation/reflection of the cyclic petal tuple."""
    n = len(petals)
    best = None
    for seq in (petals, tuple(reversed(petals))):
        for r in range(n):
            cand = seq[r:] + seq[:r]
            if best is None or cand < best:
                best = cand
    return best


def oracle_flowers(sys: ConnectivitySystem, tangle: Tangle,
                   max_petals: int) -> List[Flower]:
    """Every verified flower with at most max_petals petals, deduplicated up
    to labels (any permutation for anemones, n-gon symmetry for daisies)."""
    _guard(sys)
    if max_petals > ORACLE_MAX_PETALS:
        raise SearchSpaceTooLarge(f"petal cap is {ORACLE_MAX_PETALS}")
    k = tangle.k
    seen_keys: Set[object] = set()
    out: List[Flower] = []
    for blocks in _partitions_into_blocks(sys.n, max_petals):
        if any(_weak(tangle, b) for b in blocks):
            continue
        if any(sys.lam(b) > k for b in blocks):
            continue
        m = len(blocks)
        if m <= 2:
            f = Flower(blocks, k)
            f.klass = _flower_class_literal(sys, f)
            key = ("a", frozenset(blocks))
            if key not in seen_keys:
                seen_keys.add(key)
                out.append(f)
            continue
        first, rest = blocks[0], blocks[1:]
        for perm in permutations(rest):
            if perm > tuple(reversed(perm)):
                continue  # reflection through the fixed block
            petals = (first,) + perm
            if all(sys.lam(petals[i] | petals[(i + 1) % m]) <= k for i in range(m)):
                f = Flower(petals, k)
                klass = _flower_class_literal(sys, f)
                f.klass = klass
                if klass == "anemone":
                    key = ("a", frozenset(petals))
                elif klass == "daisy":
                    key = ("d", _daisy_canonical(petals))
                else:
                    key = ("x", petals)
                if key not in seen_keys:
                    seen_keys.add(key)
                    out.append(f)
    out.sort(key=lambda f: (f.n, f.petals))
    return out


# -- tree certification ----------------------------------------------------


def _tree_component_mask(t: PiTree, start: int, blocked: Tuple[int, int]) -> int:
    seen = {start}
    stack = [start]
    mask = 0
    while stack:
        v = stack.pop()
        mask |= t.bags.get(v, 0)
        for w in t.adj[v]:
            if {v, w} == set(blocked):
                continue
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return mask


def _tree_displayed(sys: ConnectivitySystem, tangle: Tangle, t: PiTree) -> List[Separation]:
    out = set()
    for u, v in t.edges():
        x = _tree_component_mask(t, u, (u, v))
        if 0 != x != sys.full and sys.lam(x) <= t.k:
            out.add(Separation.make(sys, x, t.k))
    for v in t.labels:
        order = t.cyclic.get(v, t.adj[v])
        petals = [_tree_component_mask(t, w, (v, w)) for w in order]
        n = len(petals)
        for bits in range(1, (1 << n) - 1):
            union = 0
            for i in range(n):
                if bits >> i & 1:
                    union |= petals[i]
            if sys.lam(union) <= t.k:
                out.add(Separation.make(sys, union, t.k))
    return sorted(out)


def oracle_certify_tree(sys: ConnectivitySystem, tangle: Tangle,
                        s_family: Optional[TreeCompatibleSet], t: PiTree,
                        require_maximal: bool = True) -> Tuple[bool, List[str]]:
    """Literal (P1)-(P5) check; with require_maximal also demand that every
    (k,S)-separation is equivalent to a displayed one.
    """
    _guard(sys)
    problems: List[str] = []
    k = t.k
    union = 0
    for b in t.bags.values():
        if union & b:
            problems.append("bags overlap")
        union |= b
    if union != sys.full:
        problems.append("bags do not cover E")

    displayed = _tree_displayed(sys, tangle, t)
    for u, v in t.edges():
        x = _tree_component_mask(t, u, (u, v))
        y = sys.full ^ x
        if sys.lam(x) > k or _weak(tangle, x) or _weak(tangle, y):
            problems.append(f"P1 fails at edge ({u},{v})")
        elif u in t.bags and v in t.bags:
            if not (_in_S(sys, tangle, s_family, x) and _in_S(sys, tangle, s_family, y)):
                problems.append(f"P1 (k,S) clause fails at edge ({u},{v})")

    for v, lab in t.labels.items():
        order = t.cyclic.get(v, t.adj[v])
        petals = tuple(_tree_component_mask(t, w, (v, w)) for w in order)
        n = len(petals)
        ok = (n >= 3 and all(p for p in petals)
              and not any(_weak(tangle, p) for p in petals)
              and all(sys.lam(p) <= k for p in petals)
              and all(sys.lam(petals[i] | petals[(i + 1) % n]) <= k for i in range(n)))
        if not ok:
            problems.append(f"flower vertex {v} does not display a flower")
            continue
        f = Flower(petals, k)
        klass = _flower_class_literal(sys, f)
        if lab == "A" and klass != "anemone":
            problems.append(f"P3 fails at vertex {v}: {klass}")
        if lab == "D" and klass != "daisy" and n > 3:
            problems.append(f"P4 fails at vertex {v}: {klass}")
        shown = [s for s in _tree_displayed_at_vertex(sys, t, petals)
                 if _in_S(sys, tangle, s_family, s.side)
                 and _in_S(sys, tangle, s_family, sys.full ^ s.side)]
        keys = set()
        for s in shown:
            a, b = s.sides(sys)
            keys.add(frozenset((oracle_full_closure(sys, tangle, a),
                                oracle_full_closure(sys, tangle, b))))
        if len(keys) < 2:
            problems.append(f"flower vertex {v} has S-order < 3")
        for i in range(n):
            for j in (range(n) if klass == "anemone" else [(i - 1) % n, (i + 1) % n]):
                if j == i:
                    continue
                fcl_j = oracle_full_closure(sys, tangle, petals[j])
                if petals[i] & ~fcl_j == 0:
                    problems.append(f"petal {i} at vertex {v} is loose")

    ks = oracle_kS_separations(sys, tangle, s_family)
    bags = [b for b in t.bags.values() if b]
    for sep in ks:
        cls = [o for o in ks if _oracle_equivalent(sys, tangle, sep, o)]
        conf = False
        for member in cls:
            if member in displayed:
                conf = True
                break
            a, b = member.sides(sys)
            if any(a & ~bag == 0 or b & ~bag == 0 for bag in bags):
                conf = True
                break
        if not conf:
            problems.append(f"P5 fails for side {elements_of(sep.side)}")
        elif require_maximal and not any(m in displayed for m in cls):
            problems.append(f"class of side {elements_of(sep.side)} not displayed")
    return not problems, problems


def _tree_displayed_at_vertex(sys: ConnectivitySystem, t: PiTree,
                              petals: Tuple[int, ...]) -> List[Separation]:
    n = len(petals)
    out = set()
    for bits in range(1, (1 << n) - 1):
        union = 0
        for i in range(n):
            if bits >> i & 1:
                union |= petals[i]
        if sys.lam(union) <= t.k:
            out.add(Separation.make(sys, union, t.k))
    return sorted(out)


# -- differential report ---------------------------------------------------


@dataclass
class OracleReport:
    """Engine-vs-oracle agreement record; every disagreement carries a
    minimal reproducing witness."""

    system_kind: str
    n: int
    k: int
    closure_checks: int = 0
    class_count: int = 0
    flower_count: Optional[int] = None
    disagreements: List[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def to_json(self):
        return {
            "system_kind": self.system_kind,
            "n": self.n,
            "k": self.k,
            "closure_checks": self.closure_checks,
            "class_count": self.class_count,
            "flower_count": self.flower_count,
            "ok": self.ok,
            "disagreements": self.disagreements,
        }


def differential_report(sys: ConnectivitySystem, tangle: Tangle,
                        s_family: TreeCompatibleSet,
                        max_petals: Optional[int] = None) -> OracleReport:
    """Compare greedy closures, class partitions, and (optionally) flower
    classification against the oracle on the whole desk-scale domain."""
    from .closure import full_closure
    from .flowers import classify

    _guard(sys)
    report = OracleReport(sys.kind, sys.n, tangle.k)
    for x in range(1 << sys.n):
        if sys.lam(x) <= tangle.k and not _weak(tangle, x):
            got = full_closure(sys, tangle, x)
            want = oracle_full_closure(sys, tangle, x)
            report.closure_checks += 1
            if got != want:
                report.disagreements.append(
                    {"op": "full_closure", "x": elements_of(x),
                     "engine": elements_of(got), "oracle": elements_of(want)})
    engine_classes = [[s.side for s in cls] for cls in s_family.classes()]
    oracle_cls = [[s.side for s in cls] for cls in oracle_classes(sys, tangle, s_family)]
    report.class_count = len(oracle_cls)
    if engine_classes != oracle_cls:
        report.disagreements.append(
            {"op": "classes", "engine": engine_classes, "oracle": oracle_cls})
    if max_petals:
        flowers = oracle_flowers(sys, tangle, max_petals)
        report.flower_count = len(flowers)
        for f in flowers:
            lit = f.klass
            eng = classify(sys, Flower(f.petals, f.k))
            if lit != eng and not (f.n <= 2 and lit == "anemone"):
                report.disagreements.append(
                    {"op": "classify", "petals": [elements_of(p) for p in f.petals],
                     "engine": eng, "oracle": lit})
    return report
