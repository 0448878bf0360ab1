"""Small finite groups as multiplication tables, and their subgroup lattices.

Elements are integers ``0..order-1`` with ``0`` the identity. Subgroups are
Python ints used as bitmasks over element indices.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

MAX_ORDER = 64
SUBGROUP_SOFT_CAP = 40


class GroupError(ValueError):
    """Base class for group construction problems."""


class GroupSpecError(GroupError):
    """Malformed group-spec string."""


class GroupSizeError(GroupError):
    """Group order above the hard cap."""


class NotNormalError(GroupError):
    pass


def bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True, eq=False)
class GroupTable:
    order: int
    mul: np.ndarray
    inv: tuple[int, ...]
    name: str = "G"
    gens: tuple[int, ...] = ()
    labels: tuple[str, ...] | None = None

    identity = 0

    def __post_init__(self):
        self.mul.setflags(write=False)

    def __repr__(self):
        return f"GroupTable({self.name!r}, order={self.order})"

    def m(self, a: int, b: int) -> int:
        return int(self.mul[a, b])

    def conj(self, g: int, x: int) -> int:
        """``g x g^-1``."""
        return int(self.mul[self.mul[g, x], self.inv[g]])

    @cached_property
    def element_orders(self) -> tuple[int, ...]:
        out = []
        for g in range(self.order):
            k, x = 1, g
            while x != 0:
                x = int(self.mul[x, g])
                k += 1
            out.append(k)
        return tuple(out)

    @cached_property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul, self.mul.T))

    @property
    def full_mask(self) -> int:
        return (1 << self.order) - 1

    def closure(self, gens: Iterable[int]) -> int:
        """Bitmask of the subgroup generated by ``gens``."""
        gens = sorted(set(gens) - {0})
        if not gens:
            return 1
        seen = np.zeros(self.order, dtype=bool)
        seen[0] = True
        seen[gens] = True
        frontier = np.array([0] + gens)
        g = np.array(gens)
        while frontier.size:
            prods = np.unique(self.mul[np.ix_(frontier, g)])
            new = prods[~seen[prods]]
            seen[new] = True
            frontier = new
        return sum(1 << int(i) for i in np.flatnonzero(seen))

    def is_abelian_mask(self, mask: int) -> bool:
        els = bits(mask)
        sub = self.mul[np.ix_(els, els)]
        return bool(np.array_equal(sub, sub.T))

    def validate(self) -> None:
        n = self.order
        mul = self.mul
        if mul.shape != (n, n):
            raise GroupError("multiplication table has the wrong shape")
        idx = np.arange(n)
        if not (np.array_equal(mul[0], idx) and np.array_equal(mul[:, 0], idx)):
            raise GroupError("element 0 is not a two-sided identity")
        for row in mul:
            if len(set(row.tolist())) != n:
                raise GroupError("multiplication table is not a Latin square")
        inv = np.asarray(self.inv)
        if not (np.all(mul[idx, inv] == 0) and np.all(mul[inv, idx] == 0)):
            raise GroupError("inverse table is wrong")
        # (ab)c == a(bc) for all triples
        left = mul[mul[:, :, None], idx[None, None, :]]
        right = mul[idx[:, None, None], mul[None, :, :]]
        if not np.array_equal(left, right):
            raise GroupError("multiplication is not associative")


def table_from_elements(
    identity: Hashable,
    gens: Sequence[Hashable],
    mul: Callable[[Hashable, Hashable], Hashable],
    name: str,
    label: Callable[[Hashable], str] = str,
) -> GroupTable:
    """BFS-close ``gens`` under right multiplication and tabulate.

    The identity gets index 0; other elements are numbered in the order the
    BFS discovers them.
    """
    elements = [identity]
    index = {identity: 0}
    queue = 0
    gens = [g for g in gens if g != identity]
    while queue < len(elements):
        x = elements[queue]
        queue += 1
        for g in gens:
            y = mul(x, g)
            if y not in index:
                if len(elements) >= MAX_ORDER:
                    raise GroupSizeError(f"{name}: order exceeds {MAX_ORDER}")
                index[y] = len(elements)
                elements.append(y)
    n = len(elements)
    table = np.empty((n, n), dtype=np.int64)
    for i, a in enumerate(elements):
        for j, b in enumerate(elements):
            table[i, j] = index[mul(a, b)]
    inv = tuple(int(np.flatnonzero(table[i] == 0)[0]) for i in range(n))
    gen_idx = tuple(sorted({index[g] for g in gens}))
    G = GroupTable(n, table, inv, name, gen_idx, tuple(label(e) for e in elements))
    G.validate()
    return G


# --- group-spec parsing -----------------------------------------------------


def _cyclic(n: int) -> GroupTable:
    return table_from_elements(0, [1 % n], lambda a, b: (a + b) % n, f"C{n}")


def _dihedral(order: int) -> GroupTable:
    if order < 2 or order % 2:
        raise GroupSpecError(f"dihedral group order must be even, got D{order}")
    n = order // 2

    def mul(a, b):
        (k1, s1), (k2, s2) = a, b
        return ((k1 + (-1) ** s1 * k2) % n, s1 ^ s2)

    def label(x):
        k, s = x
        return ("r^%d" % k if k else "") + ("s" if s else "") or "e"

    return table_from_elements((0, 0), [(1 % n, 0), (0, 1)], mul, f"D{order}", label)


def _quaternion(order: int) -> GroupTable:
    if order < 4 or order % 4:
        raise GroupSpecError(f"quaternion group order must be divisible by 4, got Q{order}")
    n = order // 4
    m = 2 * n

    def mul(a, b):
        (k, e), (l, f) = a, b
        k2 = k + (-1) ** e * l
        if e and f:
            return ((k2 + n) % m, 0)
        return (k2 % m, e ^ f)

    return table_from_elements((0, 0), [(1 % m, 0), (0, 1)], mul, f"Q{order}")


def _perm_mul(p, q):
    # apply q, then p
    return tuple(p[i] for i in q)


def _perm_label(p) -> str:
    seen, cycles = set(), []
    for i in range(len(p)):
        if i in seen or p[i] == i:
            continue
        c, j = [], i
        while j not in seen:
            seen.add(j)
            c.append(j + 1)
            j = p[j]
        cycles.append("(" + " ".join(map(str, c)) + ")")
    return "".join(cycles) or "()"


def _symmetric(n: int) -> GroupTable:
    if n < 1:
        raise GroupSpecError("S<n> needs n >= 1")
    if math.factorial(n) > MAX_ORDER:
        raise GroupSizeError(f"S{n} has order {math.factorial(n)} > {MAX_ORDER}")
    e = tuple(range(n))
    gens = []
    if n >= 2:
        gens.append(tuple([1, 0] + list(range(2, n))))
        gens.append(tuple(list(range(1, n)) + [0]))
    return table_from_elements(e, gens, _perm_mul, f"S{n}", _perm_label)


def _alternating(n: int) -> GroupTable:
    if n < 1:
        raise GroupSpecError("A<n> needs n >= 1")
    if n >= 3 and math.factorial(n) // 2 > MAX_ORDER:
        raise GroupSizeError(f"A{n} has order {math.factorial(n) // 2} > {MAX_ORDER}")
    e = tuple(range(n))
    gens = []
    for k in range(2, n):
        p = list(range(n))
        p[0], p[1], p[k] = 1, k, 0
        gens.append(tuple(p))
    return table_from_elements(e, gens, _perm_mul, f"A{n}", _perm_label)


_CYCLES = re.compile(r"\(([^()]*)\)")


def _parse_perm(text: str, degree: int) -> tuple[int, ...]:
    p = list(range(degree))
    rest = _CYCLES.sub("", text).strip()
    if rest:
        raise GroupSpecError(f"bad cycle notation: {text!r}")
    for body in _CYCLES.findall(text):
        pts = [int(t) - 1 for t in body.replace(",", " ").split()]
        if len(set(pts)) != len(pts):
            raise GroupSpecError(f"repeated point in cycle ({body})")
        for a, b in zip(pts, pts[1:] + pts[:1]):
            if p[a] != a:
                raise GroupSpecError(f"cycles are not disjoint in {text!r}")
            p[a] = b
    return tuple(p)


def _permgroup(body: str) -> GroupTable:
    gens_txt = [s.strip() for s in body.split(";") if s.strip()]
    points = [int(t) for t in re.findall(r"\d+", body)]
    degree = max(points, default=1)
    if degree > 8 or min(points, default=1) < 1:
        raise GroupSpecError("permutation points must lie in 1..8")
    gens = [_parse_perm(t, degree) for t in gens_txt]
    return table_from_elements(tuple(range(degree)), gens, _perm_mul, f"perm:{body}", _perm_label)


def direct_product(A: GroupTable, B: GroupTable, name: str | None = None) -> GroupTable:
    if A.order * B.order > MAX_ORDER:
        raise GroupSizeError(f"{A.name}x{B.name} has order {A.order * B.order} > {MAX_ORDER}")
    gens = [(g, 0) for g in A.gens] + [(0, h) for h in B.gens]

    def mul(x, y):
        return (A.m(x[0], y[0]), B.m(x[1], y[1]))

    return table_from_elements((0, 0), gens, mul, name or f"{A.name}x{B.name}")


_ATOM = re.compile(r"^([CDQSA])(\d+)$")


def _split_product(spec: str) -> list[str]:
    if spec.startswith("perm:"):
        return [spec]
    return spec.split("x")


def build_group(spec: str) -> GroupTable:
    """Build a group from a spec such as ``C4``, ``D8``, ``Q8xC3`` or ``perm:(1 2 3);(1 2)``."""
    spec = spec.strip()
    if not spec:
        raise GroupSpecError("empty group spec")
    if spec == "trivial":
        return _cyclic(1)
    parts = _split_product(spec)
    if len(parts) > 1:
        G = build_group(parts[0])
        for p in parts[1:]:
            G = direct_product(G, build_group(p))
        return GroupTable(G.order, G.mul, G.inv, spec, G.gens, G.labels)
    if spec.startswith("perm:"):
        return _permgroup(spec[5:])
    m = _ATOM.match(spec)
    if not m:
        raise GroupSpecError(f"cannot parse group spec {spec!r}")
    kind, n = m.group(1), int(m.group(2))
    if kind in "CDQ" and n > MAX_ORDER:
        raise GroupSizeError(f"{spec} has order {n} > {MAX_ORDER}")
    if kind == "C":
        if n < 1:
            raise GroupSpecError("C<n> needs n >= 1")
        return _cyclic(n)
    if kind == "D":
        return _dihedral(n)
    if kind == "Q":
        return _quaternion(n)
    if kind == "S":
        return _symmetric(n)
    return _alternating(n)


def is_isomorphic(A: GroupTable, B: GroupTable) -> bool:
    """Brute-force isomorphism test by extending images of A's generators."""
    if A.order != B.order or A.is_abelian != B.is_abelian:
        return False
    if sorted(A.element_orders) != sorted(B.element_orders):
        return False
    gens = list(A.gens) or [0]
    # words: each element of A as (parent, generator) from a BFS spanning tree
    parent = {0: None}
    order = [0]
    for x in order:
        for gi, g in enumerate(gens):
            y = A.m(x, g)
            if y not in parent:
                parent[y] = (x, gi)
                order.append(y)
    cands = [[b for b in range(B.order) if B.element_orders[b] == A.element_orders[g]] for g in gens]
    for images in itertools.product(*cands):
        phi = {0: 0}
        for y in order[1:]:
            x, gi = parent[y]
            phi[y] = B.m(phi[x], images[gi])
        if len(set(phi.values())) != A.order:
            continue
        if all(phi[A.m(a, b)] == B.m(phi[a], phi[b]) for a in range(A.order) for b in range(A.order)):
            return True
    return False


# --- subgroup lattice ------------------------------------------------------


@dataclass(frozen=True)
class Subgroup:
    mask: int
    index_in_lattice: int

    @property
    def order(self) -> int:
        return self.mask.bit_count()


class SubgroupLattice:
    """All subgroups of ``G`` ordered by (order, mask), with meet/join and conjugation tables.

    ``leq[i]`` is the bitmask of indices ``j`` with ``i <= j``; ``below[j]``
    the transpose. ``conj_action[g][i]`` is the index of ``g H_i g^-1``.
    """

    def __init__(self, G: GroupTable):
        self.group = G
        masks = _enumerate_subgroups(G)
        masks.sort(key=lambda m: (m.bit_count(), m))
        self.masks: tuple[int, ...] = tuple(masks)
        self.index: dict[int, int] = {m: i for i, m in enumerate(masks)}
        n = self.size = len(masks)
        self.orders = tuple(m.bit_count() for m in masks)

        leq = [0] * n
        below = [0] * n
        for i, a in enumerate(masks):
            for j, b in enumerate(masks):
                if a & b == a:
                    leq[i] |= 1 << j
                    below[j] |= 1 << i
        self.leq = tuple(leq)
        self.below = tuple(below)

        self.meet = tuple(tuple(self.index[a & b] for b in masks) for a in masks)
        join = []
        for i, a in enumerate(masks):
            row = []
            for j, b in enumerate(masks):
                u = a | b
                # first (smallest) subgroup containing both
                row.append(next(k for k in bits(leq[i] & leq[j]) if masks[k] & u == u))
            join.append(tuple(row))
        self.join = tuple(join)

        conj_el = [[G.conj(g, x) for x in range(G.order)] for g in range(G.order)]
        conj_action = []
        for g in range(G.order):
            cg = conj_el[g]
            perm = []
            for m in masks:
                perm.append(self.index[sum(1 << cg[x] for x in bits(m))])
            conj_action.append(tuple(perm))
        self.conj_action = tuple(conj_action)
        self.normal = tuple(all(conj_action[g][i] == i for g in range(G.order)) for i in range(n))
        full = G.full_mask
        self.cocyclic = tuple(
            self.normal[i] and any(self.join[i][self.index[G.closure([g])]] == n - 1 for g in range(G.order))
            for i in range(n)
        )
        self._cache: dict = {}

    def __repr__(self):
        return f"SubgroupLattice({self.group.name}, {self.size} subgroups)"

    def __len__(self):
        return self.size

    @property
    def top(self) -> int:
        return self.size - 1

    def subgroup(self, i: int) -> Subgroup:
        return Subgroup(self.masks[i], i)

    def le(self, i: int, j: int) -> bool:
        return bool(self.leq[i] >> j & 1)

    def find(self, mask: int) -> int:
        return self.index[mask]

    def generated(self, elements: Iterable[int]) -> int:
        return self.index[self.group.closure(elements)]

    @cached_property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        """All containment pairs ``(i, j)`` with ``i <= j``, including reflexive ones."""
        return tuple((i, j) for i in range(self.size) for j in bits(self.leq[i]))

    @cached_property
    def conj_perms(self) -> tuple[tuple[int, ...], ...]:
        """Distinct non-identity permutations of subgroup indices induced by conjugation."""
        ident = tuple(range(self.size))
        return tuple(sorted(set(self.conj_action) - {ident}))

    @cached_property
    def normal_indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.size) if self.normal[i])

    def is_abelian(self, i: int) -> bool:
        return self.group.is_abelian_mask(self.masks[i])

    def conjugates(self, i: int, within: int | None = None) -> set[int]:
        els = range(self.group.order) if within is None else bits(self.masks[within])
        return {self.conj_action[g][i] for g in els}

    @cached_property
    def hasse_edges(self) -> tuple[tuple[int, int], ...]:
        edges = []
        for i in range(self.size):
            ups = self.leq[i] & ~(1 << i)
            for j in bits(ups):
                # j covers i if nothing strictly between
                between = ups & self.below[j] & ~(1 << j)
                if not between:
                    edges.append((i, j))
        return tuple(edges)

    @cached_property
    def commutator(self) -> int:
        G = self.group
        comms = {G.m(G.m(a, b), G.m(G.inv[a], G.inv[b])) for a in range(G.order) for b in range(G.order)}
        return self.generated(comms)

    def label(self, i: int) -> str:
        if i == 0:
            return "1"
        if i == self.top:
            return self.group.name
        same = [k for k in range(self.size) if self.orders[k] == self.orders[i]]
        suffix = "" if len(same) == 1 else chr(ord("a") + same.index(i))
        return f"H{self.orders[i]}{suffix}"

    def to_json(self) -> dict:
        return {
            "group": self.group.name,
            "subgroups": [{"order": self.orders[i], "mask": self.masks[i]} for i in range(self.size)],
            "normal": [i for i in range(self.size) if self.normal[i]],
            "hasse_edges": [list(e) for e in self.hasse_edges],
        }

    def to_dot(self) -> str:
        lines = [f'digraph "{self.group.name}" {{', "  rankdir=BT;"]
        for i in range(self.size):
            shape = "box" if self.normal[i] else "ellipse"
            lines.append(f'  {i} [label="{self.label(i)}", shape={shape}];')
        for i, j in self.hasse_edges:
            lines.append(f"  {i} -> {j};")
        lines.append("}")
        return "\n".join(lines)

    # -- subgroups and quotients as standalone groups, cached --

    def embedding(self, h: int) -> "SubgroupEmbedding":
        key = ("emb", h)
        if key not in self._cache:
            self._cache[key] = SubgroupEmbedding(self, h)
        return self._cache[key]

    def quotient(self, n: int) -> "QuotientData":
        key = ("quot", n)
        if key not in self._cache:
            self._cache[key] = QuotientData(self, n)
        return self._cache[key]


def _enumerate_subgroups(G: GroupTable) -> list[int]:
    """Meet-closed BFS over joins, seeded with the cyclic subgroups."""
    cyclic = {}
    for g in range(G.order):
        cyclic.setdefault(G.closure([g]), g)
    found = {m: [g] if g else [] for m, g in cyclic.items()}
    queue = list(found)
    while queue:
        S = queue.pop()
        for C, c in cyclic.items():
            if C & S == C:
                continue
            J = G.closure(found[S] + [c])
            if J not in found:
                found[J] = found[S] + [c]
                queue.append(J)
    return list(found)


def subgroup_lattice(G: GroupTable) -> SubgroupLattice:
    return SubgroupLattice(G)


def normal_core(L: SubgroupLattice, h: int, ambient: int) -> int:
    """Intersection of the conjugates of ``h`` by elements of ``ambient``."""
    if not L.le(h, ambient):
        raise GroupError(f"subgroup {h} is not contained in {ambient}")
    mask = L.group.full_mask
    for c in L.conjugates(h, within=ambient):
        mask &= L.masks[c]
    return L.index[mask]


class SubgroupEmbedding:
    """A subgroup ``H`` of ``G`` as a group in its own right.

    ``to_parent[k]`` sends subgroup ``k`` of ``H``'s own lattice to its index in
    the lattice of ``G``; ``from_parent`` is the partial inverse.
    """

    def __init__(self, parent: SubgroupLattice, h: int):
        G = parent.group
        self.parent = parent
        self.h = h
        mask = parent.masks[h]
        # generators of H: greedy, in element order
        gens, span = [], 1
        for x in bits(mask):
            if not span >> x & 1:
                gens.append(x)
                span = G.closure(gens)
        name = G.name if h == parent.top else f"{parent.label(h)}<{G.name}"
        self.group = table_from_elements(0, gens, G.m, name)
        # table_from_elements indexes by discovery order; the "elements" were G indices
        self.elements = tuple(_bfs_order(G, gens))
        self.lattice = SubgroupLattice(self.group)
        to_parent = []
        for m in self.lattice.masks:
            pm = sum(1 << self.elements[x] for x in bits(m))
            to_parent.append(parent.index[pm])
        self.to_parent = tuple(to_parent)
        self.from_parent = {p: k for k, p in enumerate(to_parent)}


def _bfs_order(G: GroupTable, gens: Sequence[int]) -> list[int]:
    elements, seen = [0], {0}
    for x in elements:
        for g in gens:
            y = G.m(x, g)
            if y not in seen:
                seen.add(y)
                elements.append(y)
    return elements


class QuotientData:
    """``G/N`` with the projection and the subgroup correspondence.

    ``subgroup_lift[k]`` is the index in ``L`` of the preimage of subgroup ``k``
    of ``G/N``; ``subgroup_drop`` is the inverse on subgroups containing ``N``.
    """

    def __init__(self, L: SubgroupLattice, n: int):
        if not L.normal[n]:
            raise NotNormalError(f"subgroup {n} is not normal in {L.group.name}")
        G = L.group
        self.parent = L
        self.n = n
        N = bits(L.masks[n])
        coset_of = {}
        cosets = []
        for x in range(G.order):
            if x in coset_of:
                continue
            c = frozenset(G.m(x, y) for y in N)
            for y in c:
                coset_of[y] = len(cosets)
            cosets.append(c)
        reps = [min(c) for c in cosets]

        def mul(a, b):
            return coset_of[G.m(reps[a], reps[b])]

        gens = sorted({coset_of[g] for g in G.gens} - {0})
        name = f"{G.name}/{L.label(n)}"
        self.quotient = table_from_elements(0, gens, mul, name)
        order = _bfs_order_by(mul, gens)
        pos = {c: i for i, c in enumerate(order)}
        self.proj = tuple(pos[coset_of[x]] for x in range(G.order))
        self.lattice = SubgroupLattice(self.quotient)
        lift = []
        for m in self.lattice.masks:
            pm = 0
            for x in range(G.order):
                if m >> self.proj[x] & 1:
                    pm |= 1 << x
            lift.append(L.index[pm])
        self.subgroup_lift = tuple(lift)
        self.subgroup_drop = {p: k for k, p in enumerate(lift)}


def _bfs_order_by(mul, gens) -> list[int]:
    elements, seen = [0], {0}
    for x in elements:
        for g in gens:
            y = mul(x, g)
            if y not in seen:
                seen.add(y)
                elements.append(y)
    return elements


def quotient(L: SubgroupLattice, n: int) -> QuotientData:
    return L.quotient(n)


def modular_product_check(L: SubgroupLattice) -> bool:
    """Check ``NH`` is the join of ``N`` and ``H`` and the two modular identities, for all triples."""
    G = L.group
    for N in L.normal_indices:
        nels = bits(L.masks[N])
        for H in range(L.size):
            hels = bits(L.masks[H])
            prod = 0
            for a in nels:
                for b in hels:
                    prod |= 1 << G.m(a, b)
            NH = L.join[N][H]
            if prod != L.masks[NH]:
                return False
            for K in range(L.size):
                if L.le(N, K) and L.meet[NH][K] != L.join[N][L.meet[H][K]]:
                    return False
                if L.le(H, K) and L.meet[NH][K] != L.join[L.meet[N][K]][H]:
                    return False
    return True


def is_minimal_nonabelian(G: GroupTable, L: SubgroupLattice | None = None) -> bool:
    if G.is_abelian:
        return False
    L = L or SubgroupLattice(G)
    return all(L.is_abelian(i) for i in range(L.size - 1))
