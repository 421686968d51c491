"""Full closures, sequential and equivalent separations, tree-compatible sets.

The full closure fcl(X) of a strong k-separating set X is the minimal fully
closed k-separating superset; it is computed greedily by absorbing weak sets
(a maximal partial k-sequence), which is order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .bitset import nonempty_submasks, popcount
from .core import ConnectivitySystem, Violation
from .errors import PreconditionFailed, SearchSpaceTooLarge
from .tangles import Tangle

ENUM_CAP_N = 20


def _require_strong_k_separating(sys: ConnectivitySystem, tangle: Tangle, x: int):
    if sys.lam(x) > tangle.k:
        raise PreconditionFailed(f"set is not {tangle.k}-separating")
    if tangle.is_weak(x):
        raise PreconditionFailed("set is weak in the tangle")


def weak_extension_candidates(tangle: Tangle, rest: int) -> List[int]:
    """Non-empty weak subsets of `rest`, smallest first, lexicographic in size.

    Every weak set lies inside a maximal member, so candidates are submasks
    of (member & rest) only.
    """
    seen = set()
    for m in tangle.maximal_members:
        inter = m & rest
        if inter:
            for y in nonempty_submasks(inter):
                seen.add(y)
    return sorted(seen, key=lambda y: (popcount(y), y))


def is_fully_closed(sys: ConnectivitySystem, tangle: Tangle, x: int) -> bool:
    """No non-empty weak Y inside E-X keeps X | Y k-separating."""
    _require_strong_k_separating(sys, tangle, x)
    k = tangle.k
    rest = sys.full ^ x
    return all(sys.lam(x | y) > k for y in weak_extension_candidates(tangle, rest))


def full_closure_sequence(sys: ConnectivitySystem, tangle: Tangle,
                          x: int) -> Tuple[int, List[int]]:
    """fcl(X) together with the greedy maximal partial k-sequence reaching it.

    Greedy order: smallest candidate first, lexicographic within a size;
    the endpoint is order-independent, the recorded steps are not.
    """
    _require_strong_k_separating(sys, tangle, x)
    k = tangle.k
    cur = x
    steps: List[int] = []
    while True:
        rest = sys.full ^ cur
        for y in weak_extension_candidates(tangle, rest):
            if sys.lam(cur | y) <= k:
                cur |= y
                steps.append(y)
                break
        else:
            tangle._fcl_cache[x] = cur
            return cur, steps


def full_closure(sys: ConnectivitySystem, tangle: Tangle, x: int) -> int:
    cached = tangle._fcl_cache.get(x)
    if cached is not None:
        return cached
    return full_closure_sequence(sys, tangle, x)[0]


def validate_partial_k_sequence(sys: ConnectivitySystem, tangle: Tangle,
                                x: int, seq: Sequence[int]) -> bool:
    """Pairwise disjoint non-empty weak subsets of E-X whose cumulative
    unions with X stay k-separating."""
    k = tangle.k
    cur = x
    used = x
    for y in seq:
        if y == 0 or y & used or tangle.is_strong(y):
            return False
        cur |= y
        used |= y
        if sys.lam(cur) > k:
            return False
    return True


def is_sequential(sys: ConnectivitySystem, tangle: Tangle, x: int) -> bool:
    """X is sequential iff E-X is strong and fcl(E-X) = E."""
    if sys.lam(x) > tangle.k:
        raise PreconditionFailed(f"set is not {tangle.k}-separating")
    co = sys.full ^ x
    if tangle.is_weak(co):
        return False
    return full_closure(sys, tangle, co) == sys.full


@dataclass(frozen=True, order=True)
class Separation:
    """An unordered strong k-separation, stored by its canonical side.

    The canonical side is the one containing element 0, which makes the
    canonicalization an involution-stable dedup key.
    """

    side: int
    k: int

    @staticmethod
    def make(sys: ConnectivitySystem, side: int, k: int) -> "Separation":
        if side & ~sys.full:
            raise PreconditionFailed("side outside ground set")
        if not side & 1:
            side = sys.full ^ side
        return Separation(side, k)

    def sides(self, sys: ConnectivitySystem) -> Tuple[int, int]:
        return self.side, sys.full ^ self.side


def closure_pair(sys: ConnectivitySystem, tangle: Tangle, sep: Separation) -> FrozenSet[int]:
    a, b = sep.sides(sys)
    return frozenset((full_closure(sys, tangle, a), full_closure(sys, tangle, b)))


def equivalent_separations(sys: ConnectivitySystem, tangle: Tangle,
                           s1: Separation, s2: Separation) -> bool:
    """Unordered pairs of full closures coincide.  Both separations must be
    T-strong."""
    for s in (s1, s2):
        a, b = s.sides(sys)
        if tangle.is_weak(a) or tangle.is_weak(b):
            raise PreconditionFailed("separation is not T-strong")
    return closure_pair(sys, tangle, s1) == closure_pair(sys, tangle, s2)


def equivalent_one_sided(sys: ConnectivitySystem, tangle: Tangle,
                         s1: Separation, s2: Separation) -> bool:
    """The economical one-sided test for non-sequential separations:
    fcl(A) equals the closure of either side of the other separation."""
    a = full_closure(sys, tangle, s1.side)
    c, d = s2.sides(sys)
    return a == full_closure(sys, tangle, c) or a == full_closure(sys, tangle, d)


class TreeCompatibleSet:
    """A tree-compatible family S of k-separating sets.

    Default mode: all non-sequential k-separating sets with T-strong
    complements.  Explicit mode: a fixed family, verified against (S1)/(S2)
    on demand.  Membership and the (k,S)-separation index are cached.
    """

    def __init__(self, sys: ConnectivitySystem, tangle: Tangle,
                 mode: str = "default_nonsequential",
                 explicit: Optional[Iterable[int]] = None):
        self.sys = sys
        self.tangle = tangle
        self.mode = mode
        self._explicit = frozenset(explicit) if explicit is not None else None
        if mode == "explicit" and self._explicit is None:
            raise PreconditionFailed("explicit mode needs a mask family")
        self._member_cache: Dict[int, bool] = {}
        self._separations: Optional[List[Separation]] = None
        self._classes: Optional[List[List[Separation]]] = None
        self._class_index: Dict[Separation, int] = {}

    @property
    def k(self) -> int:
        return self.tangle.k

    def contains(self, x: int) -> bool:
        if self.mode == "explicit":
            return x in self._explicit
        v = self._member_cache.get(x)
        if v is None:
            sys, tangle = self.sys, self.tangle
            co = sys.full ^ x
            v = (sys.lam(x) <= tangle.k and tangle.is_strong(co)
                 and full_closure(sys, tangle, co) != sys.full)
            self._member_cache[x] = v
        return v

    def is_kS_separation(self, sep: Separation) -> bool:
        a, b = sep.sides(self.sys)
        return self.contains(a) and self.contains(b)

    # -- cached enumeration ------------------------------------------------

    def separations(self) -> List[Separation]:
        if self._separations is None:
            self._separations = enumerate_kS_separations(self.sys, self.tangle, self)
        return self._separations

    def classes(self) -> List[List[Separation]]:
        if self._classes is None:
            groups: Dict[FrozenSet[int], List[Separation]] = {}
            for sep in self.separations():
                groups.setdefault(closure_pair(self.sys, self.tangle, sep), []).append(sep)
            classes = sorted(groups.values(), key=lambda g: min(s.side for s in g))
            for cls in classes:
                cls.sort()
            self._classes = classes
            self._class_index = {s: i for i, cls in enumerate(classes) for s in cls}
        return self._classes

    def class_of(self, sep: Separation) -> List[Separation]:
        self.classes()
        idx = self._class_index.get(sep)
        if idx is not None:
            return self._classes[idx]
        # Not a (k,S)-separation of record; compare closure pairs directly.
        key = closure_pair(self.sys, self.tangle, sep)
        for cls in self._classes:
            if closure_pair(self.sys, self.tangle, cls[0]) == key:
                return cls
        return [sep]

    def class_id(self, sep: Separation) -> Optional[int]:
        self.classes()
        return self._class_index.get(sep)


def build_default_S(sys: ConnectivitySystem, tangle: Tangle) -> TreeCompatibleSet:
    return TreeCompatibleSet(sys, tangle)


def strong_k_separations(sys: ConnectivitySystem, tangle: Tangle) -> List[Separation]:
    """All T-strong k-separations, canonical sides ascending."""
    if sys.n > ENUM_CAP_N:
        raise SearchSpaceTooLarge(f"separation scan needs n <= {ENUM_CAP_N}")
    k = tangle.k
    out = []
    for x in range(1 << sys.n):
        if not x & 1:
            continue
        co = sys.full ^ x
        if sys.lam(x) <= k and tangle.is_strong(x) and tangle.is_strong(co):
            out.append(Separation(x, k))
    return out


def enumerate_kS_separations(sys: ConnectivitySystem, tangle: Tangle,
                             s_family: TreeCompatibleSet) -> List[Separation]:
    """All (k,S)-separations, canonicalized and deduplicated."""
    if sys.n > ENUM_CAP_N:
        raise SearchSpaceTooLarge(f"separation scan needs n <= {ENUM_CAP_N}")
    out = []
    for x in range(1 << sys.n):
        if not x & 1:
            continue
        if s_family.contains(x) and s_family.contains(sys.full ^ x):
            out.append(Separation(x, tangle.k))
    return out


def verify_tree_compatible(sys: ConnectivitySystem, tangle: Tangle,
                           s_family: TreeCompatibleSet) -> List[Violation]:
    """Check the definitional preamble (members are non-sequential
    k-separating sets with strong complements), then (S1) closure under
    equivalence and (S2) upward closure along strong k-separations.
    Exhaustive, so desk scale only."""
    out = []
    for x in range(1 << sys.n):
        if not s_family.contains(x):
            continue
        if (sys.lam(x) > tangle.k or tangle.is_weak(sys.full ^ x)
                or is_sequential(sys, tangle, x)):
            out.append(Violation("S-definition", (x,)))
    strong = strong_k_separations(sys, tangle)
    ks_seps = [s for s in strong if s_family.is_kS_separation(s)]
    for sep in ks_seps:
        for other in strong:
            if equivalent_separations(sys, tangle, sep, other):
                if not s_family.is_kS_separation(other):
                    out.append(Violation("S1", (sep.side, other.side)))
    members = [x for x in range(1 << sys.n) if s_family.contains(x)]
    for x in members:
        for sep in strong:
            for y in sep.sides(sys):
                if x & ~y == 0 and not s_family.contains(y):
                    out.append(Violation("S2", (x, y)))
    return out
