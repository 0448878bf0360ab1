"""Independent reference implementations used to cross-check the package.

Nothing here touches the lattice index tables: subgroups are frozensets of
group elements and relations are sets of pairs of frozensets.
"""

from __future__ import annotations

import cmath
import itertools
import math
from functools import lru_cache

from ninfty.groups import build_group, subgroup_lattice


def element_closure(G, gens) -> frozenset:
    out = {0}
    frontier = [0]
    gens = list(gens)
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = G.m(x, g)
            if y not in out:
                out.add(y)
                frontier.append(y)
    return frozenset(out)


def subgroups_by_subsets(G, max_gens: int = 3) -> set[frozenset]:
    """Every subgroup generated by at most ``max_gens`` elements."""
    found = set()
    for r in range(max_gens + 1):
        for gens in itertools.combinations(range(G.order), r):
            found.add(element_closure(G, gens))
    return found


def conjugate(G, H: frozenset, g: int) -> frozenset:
    return frozenset(G.conj(g, x) for x in H)


def naive_is_transfer(G, subs, rel: set) -> bool:
    """Definition checked literally on sets of elements."""
    for H in subs:
        if (H, H) not in rel:
            return False
    for K, H in rel:
        if not K <= H:
            return False
        for g in range(G.order):
            if (conjugate(G, K, g), conjugate(G, H, g)) not in rel:
                return False
        for M in subs:
            if M <= H and (M & K, M) not in rel:
                return False
    for (a, b) in rel:
        for (c, d) in rel:
            if b == c and (a, d) not in rel:
                return False
    return True


def naive_transfer_systems(spec: str) -> list[set]:
    G = build_group(spec)
    subs = sorted(subgroups_by_subsets(G), key=lambda s: (len(s), sorted(s)))
    proper = [(K, H) for K in subs for H in subs if K < H]
    refl = {(H, H) for H in subs}
    out = []
    for r in range(len(proper) + 1):
        for chosen in itertools.combinations(proper, r):
            rel = refl | set(chosen)
            if naive_is_transfer(G, subs, rel):
                out.append(rel)
    return out


def catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def cyclic_generator(G) -> int:
    return next(x for x in range(G.order) if G.element_orders[x] == G.order)


def cyclic_log(G) -> dict[int, int]:
    """``x -> k`` with ``x = g^k`` for a fixed generator ``g``."""
    g = cyclic_generator(G)
    out, x = {}, 0
    for k in range(G.order):
        out[x] = k
        x = G.m(x, g)
    return out


def cyclic_characters(G) -> list[list[complex]]:
    n = G.order
    lg = cyclic_log(G)
    return [[cmath.exp(2j * math.pi * m * lg[x] / n) for x in range(n)] for m in range(n)]


def cyclic_disc_by_stabilizers(n: int, index_set, k: int, h: int) -> bool:
    """``C_k -> C_h`` in D(U_I) from stabilisers of points in each lambda(m), by brute force.

    ``C_h`` is the multiples of ``n/h`` in ``Z/n``. A nonzero point of
    ``lambda(m)`` is fixed by ``x`` iff ``m x = 0 mod n``; stabilisers of points of
    sums are intersections of those.
    """
    if h % k:
        return False
    H = frozenset(range(0, n, n // h))
    K = frozenset(range(0, n, n // k))
    stabs = {H} | {frozenset(x for x in H if (m * x) % n == 0) for m in index_set}
    closed = set(stabs)
    while True:
        new = {a & b for a in closed for b in closed} - closed
        if not new:
            break
        closed |= new
    return K in closed


def residue_search(n: int, d: int, e: int, i: int) -> list[int]:
    return [m for m in range(1, n + 1) if m % d == i % d and math.gcd(m, n) == e]


@lru_cache(maxsize=None)
def lattice(spec: str):
    return subgroup_lattice(build_group(spec))
