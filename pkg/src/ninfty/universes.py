"""G-universes as irreducible supports, and the transfer systems D(U) and L(U).

A universe is the set of complex irreducibles occurring in it (as a bitmask
over the rows of the character table). Real universes are the supports that
are closed under complex conjugation.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np

from .characters import TOL, CharacterTable, lattice_table, round_int
from .groups import GroupError, SubgroupLattice, bits, build_group, is_isomorphic, subgroup_lattice
from .transfer import TransferError, TransferSystem, is_disclike, is_saturated, same_lattice, validate

REAL = "real"
COMPLEX = "complex"
MAX_IRR_SCAN = 20


class UniverseError(ValueError):
    pass


class UniverseContext:
    """Per-group character data and the bit tables used to evaluate D and L quickly."""

    def __init__(self, L: SubgroupLattice):
        self.lattice = L
        self.group = L.group
        self.table: CharacterTable = lattice_table(L)
        self.n_irr = len(self.table)
        self.full = (1 << self.n_irr) - 1
        ev = self.table.element_values
        # fixdim[v, s] = dim V^{H_s}
        ind = np.array([[m >> x & 1 for x in range(self.group.order)] for m in L.masks], dtype=float)
        raw = ev @ ind.T / np.asarray(L.orders)
        if np.abs(raw - np.round(raw.real)).max() > TOL:
            raise UniverseError("non-integral fixed-space dimension")
        self.fixdim = np.round(raw.real).astype(int)

    @classmethod
    def of(cls, L: SubgroupLattice) -> "UniverseContext":
        key = ("universe_ctx",)
        if key not in L._cache:
            L._cache[key] = cls(L)
        return L._cache[key]

    def __repr__(self):
        return f"UniverseContext({self.group.name}, {self.n_irr} irreducibles)"

    @cached_property
    def conj_perm(self) -> tuple[int, ...]:
        return self.table.conj_pairing

    def conj_mask(self, support: int) -> int:
        out = 0
        for v in bits(support):
            out |= 1 << self.conj_perm[v]
        return out

    def kernel_mask(self, n: int) -> int:
        """Irreducibles on which subgroup ``n`` acts trivially."""
        return sum(1 << v for v in range(self.n_irr) if self.fixdim[v, n] == self.table.dims[v])

    # -- D --

    @cached_property
    def disc_requirements(self) -> dict[tuple[int, int], tuple[int, ...]]:
        """For each proper pair ``k < h``, one irreducible-mask per ``h`` in ``H\\K``.

        ``K -> H`` in D(U) iff the support meets every mask: some ``V`` has
        ``dim V^<K,h> < dim V^K``.
        """
        L = self.lattice
        G = self.group
        drop: dict[tuple[int, int], int] = {}
        req = {}
        for k, h in L.pairs:
            if k == h:
                continue
            joins = set()
            for x in bits(L.masks[h] & ~L.masks[k]):
                joins.add(L.join[k][L.generated([x])])
            masks = []
            for j in sorted(joins):
                if (k, j) not in drop:
                    drop[k, j] = sum(
                        1 << v for v in range(self.n_irr) if self.fixdim[v, j] < self.fixdim[v, k]
                    )
                masks.append(drop[k, j])
            req[k, h] = tuple(sorted(set(masks)))
        return req

    # -- L --

    @cached_property
    def linear_tables(self) -> tuple[dict, dict]:
        """``(ind, res)``: ``ind[k, h][v]`` is the mask of ``H``-irreducibles in
        ``ind_K^H res_K V``; ``res[h][v]`` those in ``res_H V``."""
        L = self.lattice
        ev = self.table.element_values
        res, ind = {}, {}
        for h in range(L.size):
            emb = L.embedding(h)
            ctx_h = UniverseContext.of(emb.lattice)
            # H-irreducibles as element values in G indexing
            W = np.zeros((ctx_h.n_irr, self.group.order), dtype=complex)
            W[:, list(emb.elements)] = ctx_h.table.element_values
            hels = bits(L.masks[h])
            mult = W[:, hels] @ ev[:, hels].conj().T / len(hels)
            res[h] = tuple(
                sum(1 << w for w in range(ctx_h.n_irr) if round_int(mult[w, v], "multiplicity") > 0)
                for v in range(self.n_irr)
            )
            for k in bits(L.below[h]):
                kels = bits(L.masks[k])
                m = W[:, kels] @ ev[:, kels].conj().T / len(kels)
                ind[k, h] = tuple(
                    sum(1 << w for w in range(ctx_h.n_irr) if round_int(m[w, v], "multiplicity") > 0)
                    for v in range(self.n_irr)
                )
        return ind, res

    @cached_property
    def _linear_chunks(self):
        # 8-bit lookup tables: OR of per-irreducible masks over a byte of the support
        ind, res = self.linear_tables
        nchunks = (self.n_irr + 7) // 8

        def tabulate(per_v):
            out = []
            for c in range(nchunks):
                vs = per_v[8 * c : 8 * c + 8]
                t = [0] * 256
                for s in range(1, 256):
                    low = s & -s
                    b = low.bit_length() - 1
                    t[s] = t[s ^ low] | (vs[b] if b < len(vs) else 0)
                out.append(t)
            return out

        ind_t = {p: tabulate(v) for p, v in ind.items()}
        res_t = {h: tabulate(v) for h, v in res.items()}
        return nchunks, ind_t, res_t

    def disc_rows(self, support: int) -> tuple[int, ...]:
        L = self.lattice
        rows = [1 << i for i in range(L.size)]
        for (k, h), masks in self.disc_requirements.items():
            if all(support & m for m in masks):
                rows[k] |= 1 << h
        return tuple(rows)

    def linear_rows(self, support: int) -> tuple[int, ...]:
        L = self.lattice
        nchunks, ind_t, res_t = self._linear_chunks
        chunks = [(support >> (8 * c)) & 0xFF for c in range(nchunks)]
        got = {}
        for h, tabs in res_t.items():
            r = 0
            for c in range(nchunks):
                r |= tabs[c][chunks[c]]
            got[h] = r
        rows = [0] * L.size
        for (k, h), tabs in ind_t.items():
            need = 0
            for c in range(nchunks):
                need |= tabs[c][chunks[c]]
            if need & ~got[h] == 0:
                rows[k] |= 1 << h
        return tuple(rows)

    # -- scans --

    def supports(self, field: str = REAL) -> Iterator[int]:
        """All supports containing the trivial irreducible; conjugation-closed ones when real."""
        if self.n_irr > MAX_IRR_SCAN:
            from .transfer import FeasibilityError

            raise FeasibilityError(f"{self.group.name} has {self.n_irr} irreducibles (cap {MAX_IRR_SCAN})")
        if field == COMPLEX:
            for s in range(1 << (self.n_irr - 1)):
                yield 1 | s << 1
            return
        orbits = sorted({tuple(sorted({v, self.conj_perm[v]})) for v in range(1, self.n_irr)})
        for choice in range(1 << len(orbits)):
            s = 1
            for b in bits(choice):
                for v in orbits[b]:
                    s |= 1 << v
            yield s


    # -- vectorised scans --

    def support_array(self, field: str = REAL) -> np.ndarray:
        return np.fromiter(self.supports(field), dtype=np.int64)

    def disc_signature(self, supports: np.ndarray) -> np.ndarray:
        """Boolean matrix: row per support, column per proper pair of ``disc_requirements``."""
        req = self.disc_requirements
        out = np.ones((len(supports), len(req)), dtype=bool)
        for c, masks in enumerate(req.values()):
            for m in masks:
                out[:, c] &= (supports & m) != 0
        return out

    def linear_signature(self, supports: np.ndarray) -> np.ndarray:
        """Same columns as ``disc_signature``, for L instead of D."""
        ind, res = self.linear_tables
        present = [(supports >> v) & 1 == 1 for v in range(self.n_irr)]

        def spread(per_v):
            out = np.zeros(len(supports), dtype=np.int64)
            for v, m in enumerate(per_v):
                if m:
                    out[present[v]] |= m
            return out

        got = {h: spread(res[h]) for h in res}
        req = self.disc_requirements
        out = np.empty((len(supports), len(req)), dtype=bool)
        for c, (k, h) in enumerate(req):
            out[:, c] = spread(ind[k, h]) & ~got[h] == 0
        return out

    def closure_table(self, field: str = REAL) -> dict[int, int]:
        """``support -> support of its closure`` for every universe, computed in bulk."""
        key = ("closure_table", field)
        if key not in self.lattice._cache:
            S = self.support_array(field)
            order = np.argsort(S)
            S_sorted = S[order]
            sig = self.disc_signature(S)
            closed = S.copy()
            done = set()
            for v in range(1, self.n_irr):
                extra = 1 << v
                if field == REAL:
                    extra |= 1 << self.conj_perm[v]
                if extra in done:
                    continue
                done.add(extra)
                T = S | extra
                idx = order[np.searchsorted(S_sorted, T)]
                same = (sig[idx] == sig).all(axis=1)
                closed[same] |= extra
            self.lattice._cache[key] = dict(zip(S.tolist(), closed.tolist()))
        return self.lattice._cache[key]

    def restrict_support(self, support: int, h: int) -> int:
        _, res = self.linear_tables
        out = 0
        for v in bits(support):
            out |= res[h][v]
        return out


@dataclass(frozen=True, eq=False)
class Universe:
    ctx: UniverseContext
    support: int
    field_tag: str = REAL

    def __post_init__(self):
        if self.field_tag not in (REAL, COMPLEX):
            raise UniverseError(f"unknown field tag {self.field_tag!r}")
        if not self.support & 1:
            raise UniverseError("a universe must contain the trivial representation")
        if self.support & ~self.ctx.full:
            raise UniverseError("support mentions a non-existent irreducible")
        if self.field_tag == REAL and self.ctx.conj_mask(self.support) != self.support:
            raise UniverseError("real universe support is not closed under complex conjugation")

    def __eq__(self, other):
        if not isinstance(other, Universe):
            return NotImplemented
        return (
            self.support == other.support
            and self.field_tag == other.field_tag
            and same_lattice(self.ctx.lattice, other.ctx.lattice)
        )

    def __hash__(self):
        return hash((self.ctx.group.order, self.support, self.field_tag))

    def __repr__(self):
        return f"Universe({self.ctx.group.name}, irr:{{{','.join(map(str, self.irreducibles))}}}, {self.field_tag})"

    @property
    def lattice(self) -> SubgroupLattice:
        return self.ctx.lattice

    @property
    def irreducibles(self) -> list[int]:
        return bits(self.support)

    def embeds_in(self, other: "Universe") -> bool:
        return self.support & ~other.support == 0

    def is_complete(self) -> bool:
        return self.support == self.ctx.full

    def to_json(self) -> dict:
        return {"group": self.ctx.group.name, "field": self.field_tag, "irr": self.irreducibles}


def context(L_or_spec) -> UniverseContext:
    if isinstance(L_or_spec, str):
        L_or_spec = subgroup_lattice(build_group(L_or_spec))
    return UniverseContext.of(L_or_spec)


def complete_universe(ctx: UniverseContext, field: str = REAL) -> Universe:
    return Universe(ctx, ctx.full, field)


def trivial_universe(ctx: UniverseContext, field: str = REAL) -> Universe:
    return Universe(ctx, 1, field)


def all_universes(ctx: UniverseContext, field: str = REAL) -> Iterator[Universe]:
    for s in ctx.supports(field):
        yield Universe(ctx, s, field)


def _same(U: Universe, W: Universe) -> None:
    if not same_lattice(U.lattice, W.lattice):
        raise UniverseError("universes over different groups")
    if U.field_tag != W.field_tag:
        raise UniverseError(f"field tag mismatch: {U.field_tag} vs {W.field_tag}")


def universe_join(U: Universe, W: Universe) -> Universe:
    _same(U, W)
    return Universe(U.ctx, U.support | W.support, U.field_tag)


def universe_meet(U: Universe, W: Universe) -> Universe:
    _same(U, W)
    return Universe(U.ctx, U.support & W.support, U.field_tag)


def regular_quotient_universe(ctx: UniverseContext, n: int) -> Universe:
    """Support of ``R[G/N]^infty``: the irreducibles with ``N`` in the kernel."""
    if not ctx.lattice.normal[n]:
        raise GroupError(f"subgroup {n} is not normal")
    return Universe(ctx, ctx.kernel_mask(n), REAL)


def disc_transfer(U: Universe, check: bool = True) -> TransferSystem:
    T = TransferSystem(U.lattice, U.ctx.disc_rows(U.support))
    if check and not (validate(T) and is_disclike(T)):
        raise TransferError(f"D(U) failed validation for {U!r}")
    return T


def linear_transfer(U: Universe, check: bool = True) -> TransferSystem:
    T = TransferSystem(U.lattice, U.ctx.linear_rows(U.support))
    if check and not (validate(T) and is_saturated(T)):
        raise TransferError(f"L(U) failed validation for {U!r}")
    return T


def _adjoin(U: Universe, v: int) -> int:
    extra = 1 << v
    if U.field_tag == REAL:
        extra |= 1 << U.ctx.conj_perm[v]
    return U.support | extra


def closure(U: Universe, order: list[int] | None = None) -> Universe:
    """Largest universe with the same D; built by adjoining irreducibles that leave D unchanged."""
    ctx = U.ctx
    target = ctx.disc_rows(U.support)
    support = U.support
    for v in order if order is not None else range(ctx.n_irr):
        if support >> v & 1:
            continue
        if ctx.disc_rows(_adjoin(U, v)) == target:
            support |= 1 << v
            if U.field_tag == REAL:
                support |= 1 << ctx.conj_perm[v]
    out = Universe(ctx, support, U.field_tag)
    if __debug__ and order is None:
        assert closure(U, list(range(ctx.n_irr))[::-1]) == out, "closure depends on adjunction order"
    return out


def is_closed(U: Universe) -> bool:
    return closure(U) == U


def dim_gt1_universe(ctx: UniverseContext) -> Universe:
    """Complex universe of every irreducible of degree > 1, plus the trivial one."""
    s = 1 | sum(1 << v for v, d in enumerate(ctx.table.dims) if d > 1)
    return Universe(ctx, s, COMPLEX)


# --- cyclic groups and index sets ------------------------------------------


@dataclass(frozen=True)
class IndexSet:
    n: int
    members: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(m % self.n for m in self.members))
        if 0 not in self.members:
            raise UniverseError("index set must contain 0")
        if any((-m) % self.n not in self.members for m in self.members):
            raise UniverseError("index set must be closed under negation")

    def mod(self, d: int) -> "IndexSet":
        return IndexSet(d, frozenset(m % d for m in self.members))


def cyclic_generator(ctx: UniverseContext) -> int:
    G = ctx.group
    for g in range(G.order):
        if G.element_orders[g] == G.order:
            return g
    raise GroupError(f"{G.name} is not cyclic")


def _character_index(ctx: UniverseContext, gen: int, m: int) -> int:
    n = ctx.group.order
    target = np.exp(2j * np.pi * m / n)
    vals = ctx.table.element_values[:, gen]
    v = int(np.argmin(np.abs(vals - target)))
    if abs(vals[v] - target) > TOL:
        raise UniverseError("no character with the requested value on the generator")
    return v


def index_set_to_universe(ctx: UniverseContext, I: IndexSet) -> Universe:
    """``U_I``: the real universe with one lambda_n(m) = {chi_m, chi_-m} per member."""
    gen = cyclic_generator(ctx)
    if I.n != ctx.group.order:
        raise UniverseError(f"index set modulus {I.n} != |G| = {ctx.group.order}")
    s = 0
    for m in I.members:
        s |= 1 << _character_index(ctx, gen, m)
    return Universe(ctx, s, REAL)


def universe_to_index_set(U: Universe) -> IndexSet:
    ctx = U.ctx
    gen = cyclic_generator(ctx)
    n = ctx.group.order
    members = set()
    for m in range(n):
        if U.support >> _character_index(ctx, gen, m) & 1:
            members.add(m)
    members |= {(-m) % n for m in members}
    return IndexSet(n, frozenset(members))


def cyclic_disc_oracle(I: IndexSet, k: int, h: int) -> bool:
    """``C_k -> C_h`` in D(U_I) by stabilisers: a nonzero point of lambda(m)
    restricted to ``C_h`` has stabiliser of order ``gcd(m, h)``; sums intersect."""
    if h % k:
        return False
    stabs = {h}
    for m in I.members:
        stabs.add(math.gcd(m, h))
    # gcd-closure of the stabiliser orders
    closed = set(stabs)
    while True:
        new = {math.gcd(a, b) for a in closed for b in closed} - closed
        if not new:
            break
        closed |= new
    return k in closed


def is_closed_index_set(I: IndexSet) -> bool:
    n = I.n
    for d in (d for d in range(1, n + 1) if n % d == 0):
        if d == n or not cyclic_disc_oracle(I, d, n):
            continue
        if any(math.gcd(i, n) == d and i % n not in I.members for i in range(1, n + 1)):
            return False
    return True


def _largest_coprime_divisor(n: int, d: int) -> int:
    j = n
    g = math.gcd(j, d)
    while g > 1:
        j //= g
        g = math.gcd(j, d)
    return j


def find_residue(n: int, d: int, e: int, i: int) -> int:
    """Some ``m <= n`` with ``m = i mod d`` and ``gcd(m, n) = e``, via CRT."""
    if n % d or n % e or math.gcd(d, e) != 1 or math.gcd(i, d) != 1:
        raise ValueError(f"preconditions fail for n={n}, d={d}, e={e}, i={i}")
    j = _largest_coprime_divisor(n, d)
    # m = i (mod d), m = e (mod j)
    m = (i * j * pow(j, -1, d) + e * d * pow(d, -1, j)) % (d * j) if d > 1 else e % j
    if m == 0:
        m = d * j
    assert m % d == i % d and math.gcd(m, n) == e
    return m


# --- change of group for universes ----------------------------------------


def _inflation_map(ctx: UniverseContext, n: int) -> tuple[UniverseContext, tuple[int, ...]]:
    """Context of ``G/N`` and, per irreducible of ``G/N``, its inflation's index in Irr(G)."""
    key = ("inflation_map", n)
    L = ctx.lattice
    if key not in L._cache:
        Q = L.quotient(n)
        qctx = UniverseContext.of(Q.lattice)
        lifted = qctx.table.element_values[:, list(Q.proj)]
        out = []
        for row in lifted:
            diffs = np.abs(ctx.table.element_values - row).max(axis=1)
            v = int(np.argmin(diffs))
            if diffs[v] > TOL:
                raise UniverseError("inflated character is not irreducible")
            out.append(v)
        L._cache[key] = (qctx, tuple(out))
    return L._cache[key]


def universe_fixed_points(U: Universe, n: int) -> Universe:
    """``U^N`` as a ``G/N``-universe."""
    if not U.lattice.normal[n]:
        raise GroupError(f"subgroup {n} is not normal")
    qctx, lift = _inflation_map(U.ctx, n)
    s = sum(1 << q for q, v in enumerate(lift) if U.support >> v & 1)
    return Universe(qctx, s, U.field_tag)


def universe_inflate(W: Universe, ctx: UniverseContext, n: int) -> Universe:
    qctx, lift = _inflation_map(ctx, n)
    if not same_lattice(W.lattice, qctx.lattice):
        raise UniverseError("universe is not over the quotient by this subgroup")
    return Universe(ctx, sum(1 << lift[q] for q in W.irreducibles), W.field_tag)


def universe_restrict(U: Universe, h: int) -> Universe:
    ctx = U.ctx
    emb = ctx.lattice.embedding(h)
    hctx = UniverseContext.of(emb.lattice)
    _, res = ctx.linear_tables
    s = 0
    for v in U.irreducibles:
        s |= res[h][v]
    return Universe(hctx, s, U.field_tag)


def universe_induce(U: Universe, ctx: UniverseContext, h: int) -> Universe:
    """Induction from subgroup ``h`` of an abelian group: every ``V`` whose restriction meets the support."""
    if not ctx.group.is_abelian:
        raise GroupError("universe induction is implemented for abelian groups only")
    emb = ctx.lattice.embedding(h)
    if not same_lattice(U.lattice, emb.lattice):
        raise UniverseError("universe is not over this subgroup")
    _, res = ctx.linear_tables
    s = sum(1 << v for v in range(ctx.n_irr) if res[h][v] & U.support)
    return Universe(ctx, s, U.field_tag)


# --- literal syntax ---------------------------------------------------------

_SET = re.compile(r"^\{\s*([\d\s,]*)\}$")


def _parse_set(text: str) -> list[int]:
    m = _SET.match(text.strip())
    if not m:
        raise UniverseError(f"expected a set like {{0,1,3}}, got {text!r}")
    return [int(t) for t in re.split(r"[\s,]+", m.group(1).strip()) if t]


def find_normal_subgroup(L: SubgroupLattice, spec: str) -> int:
    """A normal subgroup by ``#index`` or by isomorphism type (must be unique)."""
    if spec.startswith("#"):
        return int(spec[1:])
    target = build_group(spec)
    hits = [
        n
        for n in L.normal_indices
        if L.orders[n] == target.order and is_isomorphic(L.embedding(n).group, target)
    ]
    if len(hits) != 1:
        raise UniverseError(f"{spec} matches {len(hits)} normal subgroups of {L.group.name}; use #index")
    return hits[0]


def parse_universe(ctx: UniverseContext, text: str, field: str = REAL) -> Universe:
    text = text.strip()
    if text == "complete":
        return complete_universe(ctx, field)
    if text == "trivial":
        return trivial_universe(ctx, field)
    if text.startswith("regular:"):
        U = regular_quotient_universe(ctx, find_normal_subgroup(ctx.lattice, text[8:]))
        return Universe(ctx, U.support, field)
    if text.startswith("irr:"):
        return Universe(ctx, sum(1 << v for v in _parse_set(text[4:])) | 1, field)
    if text.startswith("index:"):
        I = IndexSet(ctx.group.order, frozenset(_parse_set(text[6:])))
        U = index_set_to_universe(ctx, I)
        return Universe(ctx, U.support, field)
    raise UniverseError(f"cannot parse universe literal {text!r}")
