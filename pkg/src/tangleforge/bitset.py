"""Subsets of a ground set encoded as int bitmasks.

Masks are plain Python ints with only the low n bits possibly set, so the
set operations are the machine ones: | & ^ and complement via full_mask ^ x.
Everything here is total and closed over valid masks.
"""

from __future__ import annotations

from typing import Iterable, Iterator, List


def full_mask(n: int) -> int:
    """Mask with all n ground-set bits set."""
    return (1 << n) - 1


def mask_of(elements: Iterable[int], n: int) -> int:
    """Build a mask from element indices, validating the range."""
    m = 0
    for e in elements:
        if not 0 <= e < n:
            raise ValueError(f"element {e} outside ground set of size {n}")
        m |= 1 << e
    return m


def elements_of(mask: int) -> List[int]:
    """Sorted list of element indices in the mask."""
    out = []
    e = 0
    while mask:
        if mask & 1:
            out.append(e)
        mask >>= 1
        e += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def complement(mask: int, n: int) -> int:
    return mask ^ full_mask(n)


def submasks(mask: int) -> Iterator[int]:
    """All submasks of mask, including 0 and mask itself.

    Standard descending-submask walk; 2^popcount(mask) values.
    """
    s = mask
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & mask


def nonempty_submasks(mask: int) -> Iterator[int]:
    for s in submasks(mask):
        if s:
            yield s


def submasks_by_size(mask: int) -> List[int]:
    """Submasks sorted by (popcount, value): smallest witnesses first."""
    return sorted(submasks(mask), key=lambda s: (popcount(s), s))


def is_subset(a: int, b: int) -> bool:
    return a & ~b == 0


def masks_of_size(n: int, size: int) -> Iterator[int]:
    """All masks over n elements with exactly `size` bits, ascending."""
    if size == 0:
        yield 0
        return
    # Gosper's hack.
    v = (1 << size) - 1
    top = 1 << n
    while v < top:
        yield v
        c = v & -v
        r = v + c
        v = (((r ^ v) >> 2) // c) | r
