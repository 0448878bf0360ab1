"""Change of group for transfer systems: restriction, induction, coinduction,
fixed points and inflation.

Subgroups of ``H`` and of ``G/N`` are translated to subgroups of ``G`` through
the cached :class:`SubgroupEmbedding` and :class:`QuotientData` maps.
"""

from __future__ import annotations

import logging

from .groups import GroupError, NotNormalError, SubgroupLattice, bits
from .transfer import (
    LatticeMismatchError,
    Relation,
    TransferError,
    TransferSystem,
    _close,
    _transitive_step,
    generate,
    same_lattice,
    validate,
)

log = logging.getLogger(__name__)


def _embedding(L: SubgroupLattice, h: int, P: TransferSystem | None = None):
    emb = L.embedding(h)
    if P is not None and not same_lattice(P.lattice, emb.lattice):
        raise LatticeMismatchError(f"transfer system is not over subgroup {L.label(h)} of {L.group.name}")
    return emb


def _require_normal(L: SubgroupLattice, n: int) -> None:
    if not L.normal[n]:
        raise NotNormalError(f"{L.label(n)} is not normal in {L.group.name}")


def restrict(T: TransferSystem, h: int) -> TransferSystem:
    emb = _embedding(T.lattice, h)
    up = emb.to_parent
    rows = []
    for i in range(emb.lattice.size):
        r = 0
        for j in bits(emb.lattice.leq[i]):
            if T.has(up[i], up[j]):
                r |= 1 << j
        rows.append(r)
    return TransferSystem(emb.lattice, tuple(rows))


def induce(P: TransferSystem, L: SubgroupLattice, h: int) -> TransferSystem:
    """Reflexive-transitive closure of all conjugates of the pushed-forward pairs.

    If that closure is not restriction-closed we fall back to the generated
    transfer system and log the offending relation.
    """
    emb = _embedding(L, h, P)
    up = emb.to_parent
    rows = [1 << i for i in range(L.size)]
    for i, j in P.pairs():
        for perm in L.conj_action:
            rows[perm[up[i]]] |= 1 << perm[up[j]]
    while _transitive_step(rows):
        pass
    R = Relation(L, rows)
    if validate(R):
        return TransferSystem(L, R.rows)
    log.warning("induced relation on %s is not a transfer system; generating instead: %r", L.group.name, R)
    return generate(R)


def coinduce(P: TransferSystem, L: SubgroupLattice, h: int) -> TransferSystem:
    """``K' -> K`` iff ``K' meet H -> K meet H`` in ``P``. Abelian groups only."""
    if not L.group.is_abelian:
        raise GroupError("coinduction is only implemented for abelian groups")
    emb = _embedding(L, h, P)
    down = emb.from_parent
    rows = []
    for i in range(L.size):
        r = 0
        a = down[L.meet[i][h]]
        for j in bits(L.leq[i]):
            if P.has(a, down[L.meet[j][h]]):
                r |= 1 << j
        rows.append(r)
    T = Relation(L, rows)
    if not validate(T):
        raise TransferError(f"coinduced relation on {L.group.name} is not a transfer system")
    return TransferSystem(L, T.rows)


def fixed_points(T: TransferSystem, n: int) -> TransferSystem:
    L = T.lattice
    _require_normal(L, n)
    Q = L.quotient(n)
    lift = Q.subgroup_lift
    rows = []
    for i in range(Q.lattice.size):
        r = 0
        for j in bits(Q.lattice.leq[i]):
            if T.has(lift[i], lift[j]):
                r |= 1 << j
        rows.append(r)
    return TransferSystem(Q.lattice, tuple(rows))


def inflate(Q_T: TransferSystem, L: SubgroupLattice, n: int) -> TransferSystem:
    """Least transfer system on ``G`` containing the lifts of the pairs of ``Q_T``."""
    _require_normal(L, n)
    Q = L.quotient(n)
    if not same_lattice(Q_T.lattice, Q.lattice):
        raise LatticeMismatchError(f"transfer system is not over {L.group.name}/{L.label(n)}")
    lift = Q.subgroup_lift
    rows = [0] * L.size
    for i, j in Q_T.pairs():
        rows[lift[i]] |= 1 << lift[j]
    out = TransferSystem(L, _close(L, rows))
    if __debug__:
        assert out == _inflate_by_restriction(Q_T, L, n)
    return out


def _inflate_by_restriction(Q_T: TransferSystem, L: SubgroupLattice, n: int) -> TransferSystem:
    # the lifted pairs closed under restriction alone; should already be a transfer system
    Q = L.quotient(n)
    lift = Q.subgroup_lift
    rows = [1 << i for i in range(L.size)]
    for i, j in Q_T.pairs():
        a, b = lift[i], lift[j]
        for k in bits(L.below[b]):
            rows[L.meet[k][a]] |= 1 << k
    return TransferSystem(L, tuple(rows))


def transport(T: TransferSystem, src_elements, target: SubgroupLattice, target_elements) -> TransferSystem:
    """Move ``T`` to another lattice of the same group.

    ``src_elements`` and ``target_elements`` map local element indices to a
    common ambient indexing.
    """
    src = T.lattice
    pos = {a: x for x, a in enumerate(target_elements)}

    def idx(i):
        mask = 0
        for x in bits(src.masks[i]):
            mask |= 1 << pos[src_elements[x]]
        return target.index[mask]

    mapping = [idx(i) for i in range(src.size)]
    rows = [0] * target.size
    for i, j in T.pairs(reflexive=True):
        rows[mapping[i]] |= 1 << mapping[j]
    return TransferSystem(target, tuple(rows))
