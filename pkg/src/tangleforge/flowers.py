"""k-flowers in a tangle: verification, classification, tightening,
conformity, refinement, and maximal-flower search.

A k-flower is a cyclically ordered T-strong partition whose petals and
consecutive petal unions are k-separating.  Every flower is an anemone
(all petal unions k-separating) or a daisy (exactly the cyclically
consecutive ones).
"""

from __future__ import annotations

from typing import FrozenSet, List, Optional, Sequence, Set

from .core import ConnectivitySystem
from .closure import (Separation, TreeCompatibleSet, full_closure)
from .errors import (DichotomyViolation, InvalidBreakpoints, NonRobustObstruction,
                     NotAPartition, NotKSeparating, PreconditionFailed,
                     ViolationFound, WeakPetal)
from .tangles import Tangle

ANEMONE = "anemone"
DAISY = "daisy"

UNCROSSED = "uncrossed"
STRONG = "strong"
WEAK = "weak"
MIXED = "mixed"


class Flower:
    """Cyclic petal list of a verified k-flower; immutable value object."""

    def __init__(self, petals: Sequence[int], k: int, klass: Optional[str] = None):
        self.petals = tuple(petals)
        self.k = k
        self.klass = klass

    @property
    def n(self) -> int:
        return len(self.petals)

    def rotated(self, shift: int) -> "Flower":
        n = self.n
        shift %= n
        return Flower(self.petals[shift:] + self.petals[:shift], self.k, self.klass)

    def reflected(self) -> "Flower":
        return Flower(tuple(reversed(self.petals)), self.k, self.klass)

    def __repr__(self):
        return f"Flower(k={self.k}, petals={[bin(p) for p in self.petals]}, klass={self.klass})"

    def __eq__(self, other):
        return (isinstance(other, Flower) and self.k == other.k
                and self.petals == other.petals)

    def __hash__(self):
        return hash((self.k, self.petals))


def verify_flower(sys: ConnectivitySystem, tangle: Tangle,
                  petals: Sequence[int], k: Optional[int] = None) -> Flower:
    """Full-definition check: strong partition, petals and consecutive
    unions k-separating.  Raises with a witness on failure."""
    if k is None:
        k = tangle.k
    union = 0
    for p in petals:
        if p == 0 or union & p:
            raise NotAPartition("petals must be non-empty and disjoint")
        union |= p
    if union != sys.full:
        raise NotAPartition("petals do not cover the ground set")
    for i, p in enumerate(petals):
        if tangle.is_weak(p):
            raise WeakPetal(i)
    n = len(petals)
    for i, p in enumerate(petals):
        v = sys.lam(p)
        if v > k:
            raise NotKSeparating(p, v, k)
        if n >= 2:
            u = p | petals[(i + 1) % n]
            v = sys.lam(u)
            if v > k:
                raise NotKSeparating(u, v, k)
    return Flower(petals, k)


def flower_shortcut_holds(sys: ConnectivitySystem, tangle: Tangle,
                          petals: Sequence[int], k: Optional[int] = None) -> bool:
    """The economical test for n >= 4: a strong partition with
    P_i | P_{i+1} k-separating for i in [n-1] (no wrap) is a flower."""
    if k is None:
        k = tangle.k
    n = len(petals)
    if n < 4:
        raise PreconditionFailed("shortcut applies to n >= 4 only")
    union = 0
    for p in petals:
        if p == 0 or union & p or tangle.is_weak(p):
            return False
        union |= p
    if union != sys.full:
        return False
    return all(sys.lam(petals[i] | petals[i + 1]) <= k for i in range(n - 1))


def _is_cyclic_run(indices: FrozenSet[int], n: int) -> bool:
    """True iff the index set is consecutive in the cyclic order on [n]."""
    boundaries = sum(1 for i in indices if (i + 1) % n not in indices)
    return boundaries == 1


def classify(sys: ConnectivitySystem, f: Flower) -> str:
    """Anemone iff every petal union is k-separating; daisy iff exactly the
    cyclically consecutive ones.  Flowers with at most two petals count as
    anemones by convention.  Anything else raises DichotomyViolation."""
    if f.klass is not None:
        return f.klass
    n = f.n
    if n <= 2:
        f.klass = ANEMONE
        return ANEMONE
    sep_sets: Set[FrozenSet[int]] = set()
    consec: Set[FrozenSet[int]] = set()
    for bits in range(1, (1 << n) - 1):
        idx = frozenset(i for i in range(n) if bits >> i & 1)
        union = 0
        for i in idx:
            union |= f.petals[i]
        if sys.lam(union) <= f.k:
            sep_sets.add(idx)
        if _is_cyclic_run(idx, n):
            consec.add(idx)
    if len(sep_sets) == (1 << n) - 2:
        f.klass = ANEMONE
        return ANEMONE
    if sep_sets == consec:
        f.klass = DAISY
        return DAISY
    witness = next(iter(sep_sets.symmetric_difference(consec) - sep_sets), None)
    if witness is None:
        witness = next(iter(sep_sets - consec))
    raise DichotomyViolation(witness)


def concatenate(f: Flower, breakpoints: Sequence[int]) -> Flower:
    """Merge petals into the consecutive runs [0:j1], [j1:j2], ..., [jm-1:n].

    Breakpoints are the strictly increasing run ends, the last being n.
    Concatenations of flowers are flowers, so no re-verification is needed.
    """
    n = f.n
    bs = list(breakpoints)
    if not bs or bs[-1] != n or any(b <= 0 or b > n for b in bs) or sorted(set(bs)) != bs:
        raise InvalidBreakpoints(f"breakpoints {bs} invalid for {n} petals")
    out = []
    start = 0
    for b in bs:
        u = 0
        for i in range(start, b):
            u |= f.petals[i]
        out.append(u)
        start = b
    return Flower(out, f.k)


def petal_union(f: Flower, indices) -> int:
    u = 0
    for i in indices:
        u |= f.petals[i]
    return u


def displayed_separations(sys: ConnectivitySystem, tangle: Tangle,
                          f: Flower) -> List[Separation]:
    """k-separations displayed by f: k-separating proper petal unions."""
    n = f.n
    out = set()
    for bits in range(1, (1 << n) - 1):
        union = petal_union(f, (i for i in range(n) if bits >> i & 1))
        if sys.lam(union) <= f.k:
            out.add(Separation.make(sys, union, f.k))
    return sorted(out)


def displayed_kS(sys: ConnectivitySystem, tangle: Tangle,
                 s_family: TreeCompatibleSet, f: Flower) -> List[Separation]:
    return [s for s in displayed_separations(sys, tangle, f)
            if s_family.is_kS_separation(s)]


def displayed_class_ids(sys: ConnectivitySystem, tangle: Tangle,
                        s_family: TreeCompatibleSet, f: Flower) -> FrozenSet[int]:
    """Equivalence-class ids of the displayed (k,S)-separations."""
    return frozenset(s_family.class_id(s)
                     for s in displayed_kS(sys, tangle, s_family, f))


def loose_petals(sys: ConnectivitySystem, tangle: Tangle, f: Flower) -> List[int]:
    """Indices i with P_i inside fcl(P_j) for a petal P_j consecutive with
    P_i up to labels: cyclic neighbours for a daisy, any other petal for an
    anemone (whose petals can always be relabelled adjacent)."""
    n = f.n
    if n < 2:
        return []
    klass = classify(sys, f)
    out = []
    for i in range(n):
        if klass == ANEMONE:
            others = [j for j in range(n) if j != i]
        else:
            others = sorted({(i - 1) % n, (i + 1) % n} - {i})
        for j in others:
            if f.petals[i] & ~full_closure(sys, tangle, f.petals[j]) == 0:
                out.append(i)
                break
    return out


def tighten(sys: ConnectivitySystem, tangle: Tangle, f: Flower,
            s_family: Optional[TreeCompatibleSet] = None) -> Flower:
    """Absorb loose petals (lowest index first) into an absorbing neighbour
    until none remain.  Output is loose-free; displayed (k,S)-classes are
    preserved.  Exact S-tightness is certified only at oracle scale."""
    cur = f
    while True:
        loose = loose_petals(sys, tangle, cur)
        if not loose:
            return cur
        i = loose[0]
        n = cur.n
        klass = classify(sys, cur)
        if klass == ANEMONE:
            order = [(i - 1) % n, (i + 1) % n] + [j for j in range(n)
                                                  if j not in {i, (i - 1) % n, (i + 1) % n}]
        else:
            order = [(i - 1) % n, (i + 1) % n]
        absorber = None
        for j in order:
            if j != i and cur.petals[i] & ~full_closure(sys, tangle, cur.petals[j]) == 0:
                absorber = j
                break
        assert absorber is not None
        merged = list(cur.petals)
        merged[absorber] |= merged[i]
        del merged[i]
        cur = verify_flower(sys, tangle, merged, cur.k)


def petal_cross_kind(tangle: Tangle, part: int, r: int, g: int) -> str:
    a, b = part & r, part & g
    if not a or not b:
        return UNCROSSED
    sa, sb = tangle.is_strong(a), tangle.is_strong(b)
    if sa and sb:
        return STRONG
    if not sa and not sb:
        return WEAK
    return MIXED


def crossing_profile(sys: ConnectivitySystem, tangle: Tangle, sep: Separation,
                     f: Flower, indices) -> str:
    """Classification of the petal union P_I relative to the separation."""
    union = petal_union(f, indices)
    r, g = sep.sides(sys)
    return petal_cross_kind(tangle, union, r, g)


def conforms_with_flower(sys: ConnectivitySystem, tangle: Tangle,
                         s_family: TreeCompatibleSet, sep: Separation,
                         f: Flower) -> bool:
    """True iff some equivalent separation is displayed by f or has a side
    inside a petal.  The scan covers the whole equivalence class, which by
    (S1) is exactly the strong equivalents."""
    displayed = set(displayed_separations(sys, tangle, f))
    for member in s_family.class_of(sep):
        if member in displayed:
            return True
        a, b = member.sides(sys)
        for p in f.petals:
            if a & ~p == 0 or b & ~p == 0:
                return True
    return False


def phi_minimum_representative(sys: ConnectivitySystem, tangle: Tangle,
                               s_family: TreeCompatibleSet, sep: Separation,
                               f: Flower) -> Separation:
    """Class member crossing the fewest petals; ties by canonical side."""
    if not s_family.is_kS_separation(sep):
        raise PreconditionFailed("not a (k,S)-separation")

    def crossed_count(s: Separation) -> int:
        r, g = s.sides(sys)
        return sum(1 for p in f.petals if p & r and p & g)

    return min(s_family.class_of(sep), key=lambda s: (crossed_count(s), s.side))


def _split_crossed_petal(sys: ConnectivitySystem, tangle: Tangle, f: Flower,
                         i: int, r: int, g: int) -> Flower:
    """One refinement step: split crossed petal i into its r- and g-parts,
    oriented so the flower conditions are forced by uncrossing."""
    n = f.n
    if n == 2:
        p1, p2 = f.petals[i], f.petals[1 - i]
        parts = (p1 & g, p1 & r, p2 & r, p2 & g)
        if not all(p and tangle.is_strong(p) for p in parts):
            raise ViolationFound("two-petal split needs both petals strongly crossed",
                                 Separation.make(sys, r, f.k))
        return verify_flower(sys, tangle, parts, f.k)
    q = f.petals[i:] + f.petals[:i]
    q0, q1 = q[0], q[1]
    rest = 0
    for p in q[2:]:
        rest |= p
    if q1 & r and q1 & g:
        if tangle.is_strong(rest & g):
            a, b = r, g
        elif tangle.is_strong(rest & r):
            a, b = g, r
        else:
            raise ViolationFound("no strong remainder side", Separation.make(sys, r, f.k))
    else:
        a = r if q1 & r else g
        b = g if a == r else r
        if not tangle.is_strong(rest & b):
            raise ViolationFound("no strong remainder side", Separation.make(sys, r, f.k))
    new_petals = (q0 & b, q0 & a) + q[1:]
    return verify_flower(sys, tangle, new_petals, f.k)


def refine_with(sys: ConnectivitySystem, tangle: Tangle,
                s_family: TreeCompatibleSet, f: Flower,
                sep: Separation) -> Optional[Flower]:
    """Refine a loose-free flower so it displays an equivalent of `sep`.

    Splits crossed petals of the phi-minimum representative while every
    petal is (R,G)-strong; returns None when all petals are weakly crossed
    (possible only for non-robust tangles).  A strong/weak mix on a
    loose-free flower would force a loose petal, so it is an invariant
    violation.
    """
    if loose_petals(sys, tangle, f):
        raise PreconditionFailed("flower has loose petals")
    if conforms_with_flower(sys, tangle, s_family, sep, f):
        raise PreconditionFailed("separation already conforms")
    rep = phi_minimum_representative(sys, tangle, s_family, sep, f)
    r, g = rep.sides(sys)
    kinds = [petal_cross_kind(tangle, p, r, g) for p in f.petals]
    if MIXED in kinds:
        raise ViolationFound("mixed-crossed petal for a phi-minimum separation",
                             (f.petals[kinds.index(MIXED)],))
    if all(kd == WEAK for kd in kinds):
        return None
    if WEAK in kinds:
        raise ViolationFound("weakly crossed petal on a loose-free flower",
                             (f.petals[kinds.index(WEAK)],))
    work = f
    while True:
        crossed = [idx for idx, p in enumerate(work.petals) if p & r and p & g]
        if not crossed:
            return work
        work = _split_crossed_petal(sys, tangle, work, crossed[0], r, g)


def maximal_flower_from(sys: ConnectivitySystem, tangle: Tangle,
                        s_family: TreeCompatibleSet, f: Flower) -> Flower:
    """Tighten-and-refine loop: stop when every (k,S)-separation conforms.

    Each refinement displays a previously non-conforming class, so the loop
    terminates; raises NonRobustObstruction when refinement is impossible.
    """
    while True:
        f = tighten(sys, tangle, f, s_family)
        target = None
        for sep in s_family.separations():
            if not conforms_with_flower(sys, tangle, s_family, sep, f):
                target = sep  # separations() is ordered by canonical side
                break
        if target is None:
            return f
        refined = refine_with(sys, tangle, s_family, f, target)
        if refined is None:
            raise NonRobustObstruction(target, flower=f)
        f = refined


def maximal_flower(sys: ConnectivitySystem, tangle: Tangle,
                   s_family: TreeCompatibleSet, seed: Separation) -> Flower:
    """Grow a loose-free flower displaying (an equivalent of) `seed` until
    every (k,S)-separation conforms with it."""
    if not s_family.is_kS_separation(seed):
        raise PreconditionFailed("seed must be a (k,S)-separation")
    f = verify_flower(sys, tangle, seed.sides(sys), tangle.k)
    return maximal_flower_from(sys, tangle, s_family, f)


def s_order(sys: ConnectivitySystem, tangle: Tangle,
            s_family: TreeCompatibleSet, f: Flower,
            max_petals: Optional[int] = None) -> int:
    """Minimum petal count among flowers displaying the same (k,S)-classes.

    Zero classes give 1, one class gives 2; otherwise exhaustive flower
    enumeration at desk scale decides, which may raise SearchSpaceTooLarge.
    """
    classes = displayed_class_ids(sys, tangle, s_family, f)
    if not classes:
        return 1
    if len(classes) == 1:
        return 2
    from .oracle import oracle_flowers
    cap = max_petals if max_petals is not None else f.n
    best = f.n
    for g in oracle_flowers(sys, tangle, max_petals=cap):
        if g.n < best and displayed_class_ids(sys, tangle, s_family, g) == classes:
            best = g.n
    return best


def loose_free_petal_count(sys: ConnectivitySystem, tangle: Tangle, f: Flower) -> int:
    """Upper bound for the S-order: petal count after tightening."""
    return tighten(sys, tangle, f).n
