"""Transfer systems on a subgroup lattice, stored as one bitmask row per source subgroup.

``rows[i]`` has bit ``j`` set when ``i -> j``.
"""

from __future__ import annotations

import json
import logging
from functools import cached_property
from typing import Iterable

from .groups import SUBGROUP_SOFT_CAP, SubgroupLattice, bits, build_group, subgroup_lattice

log = logging.getLogger(__name__)


class TransferError(ValueError):
    pass


class LatticeMismatchError(TransferError):
    pass


class FeasibilityError(RuntimeError):
    """Exhaustive computation refused because the input is over a configured cap."""


def same_lattice(A: SubgroupLattice, B: SubgroupLattice) -> bool:
    return A is B or (A.masks == B.masks and (A.group.mul == B.group.mul).all())


class Relation:
    """A binary relation on subgroup indices that refines containment."""

    def __init__(self, lattice: SubgroupLattice, rows: Iterable[int] | None = None):
        self.lattice = lattice
        rows = tuple(rows) if rows is not None else (0,) * lattice.size
        if len(rows) != lattice.size:
            raise TransferError("row count does not match the lattice")
        for i, r in enumerate(rows):
            if r & ~lattice.leq[i]:
                j = bits(r & ~lattice.leq[i])[0]
                raise TransferError(f"pair {i}->{j} does not respect containment")
        self.rows: tuple[int, ...] = rows

    @classmethod
    def from_pairs(cls, lattice: SubgroupLattice, pairs: Iterable[tuple[int, int]]) -> "Relation":
        rows = [0] * lattice.size
        for i, j in pairs:
            rows[i] |= 1 << j
        return cls(lattice, rows)

    def has(self, i: int, j: int) -> bool:
        return bool(self.rows[i] >> j & 1)

    def pairs(self, reflexive: bool = False) -> list[tuple[int, int]]:
        return [(i, j) for i, r in enumerate(self.rows) for j in bits(r) if reflexive or i != j]

    @cached_property
    def cols(self) -> tuple[int, ...]:
        cols = [0] * self.lattice.size
        for i, r in enumerate(self.rows):
            for j in bits(r):
                cols[j] |= 1 << i
        return tuple(cols)

    def __eq__(self, other):
        if not isinstance(other, Relation):
            return NotImplemented
        return self.rows == other.rows and same_lattice(self.lattice, other.lattice)

    def __hash__(self):
        return hash(self.rows)

    def __len__(self):
        return sum(r.bit_count() for r in self.rows)

    def __repr__(self):
        return f"{type(self).__name__}({self.lattice.group.name}, {self.pairs()})"

    def sort_key(self) -> tuple[int, ...]:
        # lexicographic on the bit matrix, row-major, column 0 first
        n = self.lattice.size
        return tuple(int(format(r, f"0{n}b")[::-1], 2) for r in self.rows)

    def to_json(self) -> dict:
        return {"group": self.lattice.group.name, "pairs": [list(p) for p in self.pairs()]}

    def to_dot(self) -> str:
        L = self.lattice
        lines = [f'digraph "{L.group.name}" {{', "  rankdir=BT;"]
        for i in range(L.size):
            lines.append(f'  {i} [label="{L.label(i)}"];')
        strict = [r & ~(1 << i) for i, r in enumerate(self.rows)]
        for i, r in enumerate(strict):
            for j in bits(r):
                # Hasse edge unless some k gives i -> k -> j
                if not any(strict[k] >> j & 1 for k in bits(r) if k != j):
                    lines.append(f"  {i} -> {j};")
        lines.append("}")
        return "\n".join(lines)


class TransferSystem(Relation):
    """A transfer system. Build with :func:`generate` or :meth:`from_relation`."""

    @classmethod
    def from_relation(cls, R: Relation) -> "TransferSystem":
        if not validate(R):
            raise TransferError(f"not a transfer system: {R!r}")
        return cls(R.lattice, R.rows)

    @cached_property
    def minimal_fibrant(self) -> int:
        L = self.lattice
        mask = L.group.full_mask
        for h in bits(self.cols[L.top]):
            mask &= L.masks[h]
        return L.index[mask]


def transfer_from_json(data: dict | str, lattice: SubgroupLattice | None = None) -> TransferSystem:
    if isinstance(data, str):
        data = json.loads(data)
    L = lattice or subgroup_lattice(build_group(data["group"]))
    pairs = [tuple(p) for p in data["pairs"]] + [(i, i) for i in range(L.size)]
    return TransferSystem.from_relation(Relation.from_pairs(L, pairs))


# --- closure ----------------------------------------------------------------


def _conjugation_step(L: SubgroupLattice, rows: list[int]) -> bool:
    changed = False
    for perm in L.conj_perms:
        for i, r in enumerate(list(rows)):
            mapped = 0
            for j in bits(r):
                mapped |= 1 << perm[j]
            t = perm[i]
            if mapped & ~rows[t]:
                rows[t] |= mapped
                changed = True
    return changed


def _restriction_step(L: SubgroupLattice, rows: list[int]) -> bool:
    # l -> h and k <= h  gives  (k meet l) -> k
    changed = False
    meet, below = L.meet, L.below
    for l in range(L.size):
        for h in bits(rows[l]):
            for k in bits(below[h]):
                m = meet[k][l]
                if not rows[m] >> k & 1:
                    rows[m] |= 1 << k
                    changed = True
    return changed


def _transitive_step(rows: list[int]) -> bool:
    changed = False
    n = len(rows)
    for k in range(n):
        rk = rows[k]
        for i in range(n):
            if rows[i] >> k & 1 and rk & ~rows[i]:
                rows[i] |= rk
                changed = True
    return changed


def _close_stepwise(L: SubgroupLattice, rows: Iterable[int]) -> tuple[int, ...]:
    rows = [r | 1 << i for i, r in enumerate(rows)]
    # conjugation, restriction, transitivity; repeated to a global fixpoint
    while True:
        a = _conjugation_step(L, rows)
        b = _restriction_step(L, rows)
        c = _transitive_step(rows)
        if not (a or b or c):
            return tuple(rows)


def _close(L: SubgroupLattice, rows: Iterable[int]) -> tuple[int, ...]:
    """Worklist closure: each new pair is pushed through the three rules exactly once."""
    rows = [r | 1 << i for i, r in enumerate(rows)]
    cols = [0] * len(rows)
    todo = []
    for i, r in enumerate(rows):
        for j in bits(r):
            cols[j] |= 1 << i
            if i != j:
                todo.append((i, j))
    perms, meet, below = L.conj_perms, L.meet, L.below

    def add(i, j):
        if not rows[i] >> j & 1:
            rows[i] |= 1 << j
            cols[j] |= 1 << i
            todo.append((i, j))

    while todo:
        l, h = todo.pop()
        for perm in perms:
            add(perm[l], perm[h])
        ml = meet[l]
        for k in bits(below[h]):
            add(ml[k], k)
        for j in bits(rows[h]):
            add(l, j)
        for i in bits(cols[l]):
            add(i, h)
    return tuple(rows)


def generate(R: Relation) -> TransferSystem:
    """Least transfer system containing ``R``."""
    return TransferSystem(R.lattice, _close(R.lattice, R.rows))


def generate_pairs(L: SubgroupLattice, pairs: Iterable[tuple[int, int]]) -> TransferSystem:
    return generate(Relation.from_pairs(L, pairs))


def minimal(L: SubgroupLattice) -> TransferSystem:
    return TransferSystem(L, tuple(1 << i for i in range(L.size)))


def maximal(L: SubgroupLattice) -> TransferSystem:
    return TransferSystem(L, L.leq)


def validate(R: Relation) -> bool:
    """Reflexive, containment-refining, restriction- and conjugation-closed, transitive."""
    L = R.lattice
    rows = list(R.rows)
    if any(not r >> i & 1 for i, r in enumerate(rows)):
        return False
    if any(r & ~L.leq[i] for i, r in enumerate(rows)):
        return False
    return not (
        _transitive_step(list(rows))
        or _restriction_step(L, list(rows))
        or _conjugation_step(L, list(rows))
    )


def _check(A: Relation, B: Relation) -> None:
    if not same_lattice(A.lattice, B.lattice):
        raise LatticeMismatchError(f"{A.lattice.group.name} vs {B.lattice.group.name}")


def refines(A: Relation, B: Relation) -> bool:
    _check(A, B)
    return all(a & ~b == 0 for a, b in zip(A.rows, B.rows))


def meet(A: TransferSystem, B: TransferSystem) -> TransferSystem:
    _check(A, B)
    return TransferSystem(A.lattice, tuple(a & b for a, b in zip(A.rows, B.rows)))


def join(A: TransferSystem, B: TransferSystem) -> TransferSystem:
    _check(A, B)
    return TransferSystem(A.lattice, _close(A.lattice, (a | b for a, b in zip(A.rows, B.rows))))


def minimal_fibrant(T: TransferSystem) -> int:
    return T.minimal_fibrant


# --- predicates -------------------------------------------------------------


def _saturated_direct(T: Relation) -> bool:
    L = T.lattice
    cols = T.cols
    for l, r in enumerate(T.rows):
        for h in bits(r):
            if L.leq[l] & L.below[h] & ~cols[h]:
                return False
    return True


def _saturated_two_of_three(T: Relation) -> bool:
    L = T.lattice
    for l in range(L.size):
        for h in bits(L.leq[l]):
            for k in bits(L.leq[l] & L.below[h]):
                if T.has(l, k) + T.has(k, h) + T.has(l, h) == 2:
                    return False
    return True


def is_saturated(T: TransferSystem) -> bool:
    result = _saturated_direct(T)
    if __debug__:
        assert result == _saturated_two_of_three(T), f"saturation formulations disagree on {T!r}"
    return result


def is_disclike(T: TransferSystem) -> bool:
    top = T.lattice.top
    return generate_pairs(T.lattice, ((h, top) for h in bits(T.cols[top]))) == T


def is_bisaturated(T: TransferSystem) -> bool:
    return is_saturated(T) and is_disclike(T)


# --- enumeration ------------------------------------------------------------


def _pair_orbit_reps(L: SubgroupLattice) -> list[tuple[int, int]]:
    reps, seen = [], set()
    for i, j in L.pairs:
        if i == j or (i, j) in seen:
            continue
        reps.append((i, j))
        for perm in L.conj_action:
            seen.add((perm[i], perm[j]))
    return reps


def enumerate_all(L: SubgroupLattice, cap: int = SUBGROUP_SOFT_CAP) -> list[TransferSystem]:
    """Every transfer system on ``L``, sorted by bit matrix.

    BFS from the minimal system, adjoining one containment pair (up to
    conjugacy) at a time and closing.
    """
    if L.size > cap:
        raise FeasibilityError(f"{L.group.name} has {L.size} subgroups (cap {cap})")
    key = ("transfer_systems",)
    if key in L._cache:
        return L._cache[key]
    reps = _pair_orbit_reps(L)
    start = minimal(L).rows
    seen = {start}
    queue = [start]
    for rows in queue:
        for i, j in reps:
            if rows[i] >> j & 1:
                continue
            grown = list(rows)
            grown[i] |= 1 << j
            new = _close(L, grown)
            if new not in seen:
                seen.add(new)
                queue.append(new)
    out = sorted((TransferSystem(L, r) for r in seen), key=Relation.sort_key)
    L._cache[key] = out
    log.debug("enumerated %d transfer systems on %s", len(out), L.group.name)
    return out


def witness_OHG(L: SubgroupLattice, h: int) -> TransferSystem:
    """``l -> k`` iff ``l == k`` or ``l <= k <= h^g`` for some ``g``."""
    rows = [1 << i for i in range(L.size)]
    for c in L.conjugates(h):
        for k in bits(L.below[c]):
            rows_k = L.below[k]
            for l in bits(rows_k):
                rows[l] |= 1 << k
    T = TransferSystem(L, tuple(rows))
    if not validate(T) or not is_saturated(T):
        raise TransferError(f"O_H^G for subgroup {h} failed validation")
    return T


def enumerate_disclike(L: SubgroupLattice, cap: int = 24) -> list[TransferSystem]:
    """Every disc-like transfer system: one generation per conjugation-closed set of arrows into ``G``."""
    orbits = sorted({tuple(sorted(L.conjugates(i))) for i in range(L.size) if i != L.top})
    if len(orbits) > cap:
        raise FeasibilityError(f"{L.group.name} has {len(orbits)} subgroup classes (cap {cap})")
    key = ("disclike",)
    if key in L._cache:
        return L._cache[key]
    seen = set()
    for choice in range(1 << len(orbits)):
        pairs = [(h, L.top) for b in bits(choice) for h in orbits[b]]
        seen.add(generate_pairs(L, pairs).rows)
    out = sorted((TransferSystem(L, r) for r in seen), key=Relation.sort_key)
    L._cache[key] = out
    return out
