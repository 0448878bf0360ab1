import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ninfty.groups import bits
from ninfty.transfer import (
    FeasibilityError,
    LatticeMismatchError,
    Relation,
    TransferError,
    TransferSystem,
    _close_stepwise,
    enumerate_all,
    enumerate_disclike,
    generate,
    generate_pairs,
    is_bisaturated,
    is_disclike,
    is_saturated,
    join,
    maximal,
    meet,
    minimal,
    refines,
    transfer_from_json,
    validate,
    witness_OHG,
)
from oracles import catalan, lattice, naive_transfer_systems

SMALL = ["C1", "C2", "C4", "C6", "C8", "C12", "C2xC2", "S3", "Q8", "D8", "A4", "C2xC4"]


def by_order(L, order, nth=0):
    return [i for i in range(L.size) if L.orders[i] == order][nth]


def c4():
    L = lattice("C4")
    return L, 0, 1, 2


# --- examples -------------------------------------------------------------------


def test_validate_examples():
    L, e, c2, g = c4()
    assert validate(minimal(L))
    assert validate(maximal(L))
    bad = Relation.from_pairs(L, [(i, i) for i in range(3)] + [(e, g)])
    assert not validate(bad)
    with pytest.raises(TransferError):
        Relation.from_pairs(L, [(g, e)])


def test_generate_examples():
    L, e, c2, g = c4()
    assert generate(Relation(L)) == minimal(L)
    T = generate_pairs(L, [(e, g)])
    assert T.pairs() == [(e, c2), (e, g)]
    for spec in ["C12", "S3", "Q8", "D8"]:
        L = lattice(spec)
        for n in L.normal_indices:
            T = generate_pairs(L, [(h, L.top) for h in range(L.size) if L.le(n, h)])
            assert T.minimal_fibrant == n


def test_refines_meet_join_examples():
    L, e, c2, g = c4()
    a = generate_pairs(L, [(e, c2)])
    b = generate_pairs(L, [(e, g)])
    assert refines(a, b) and refines(minimal(L), b) and refines(b, b)
    assert join(a, generate_pairs(L, [(c2, g)])).has(e, g)
    for T in enumerate_all(L):
        assert meet(T, maximal(L)) == T
        assert join(T, minimal(L)) == T
    with pytest.raises(LatticeMismatchError):
        refines(a, minimal(lattice("C6")))


def test_predicate_examples():
    L, e, c2, g = c4()
    assert is_saturated(minimal(L)) and is_saturated(maximal(L))
    assert not is_saturated(generate_pairs(L, [(e, g)]))
    assert is_disclike(minimal(L)) and is_disclike(maximal(L))
    assert not is_disclike(generate_pairs(L, [(e, c2)]))
    assert sum(is_bisaturated(T) for T in enumerate_all(L)) == 3
    assert maximal(L).minimal_fibrant == 0
    assert minimal(L).minimal_fibrant == L.top


def test_witness_ohg():
    L = lattice("S3")
    a3 = by_order(L, 3)
    assert witness_OHG(L, a3).pairs() == [(0, a3)]
    assert witness_OHG(L, L.top) == maximal(L)
    assert witness_OHG(L, 0) == minimal(L)


@pytest.mark.parametrize(
    "spec, total, sat, disc, bisat",
    [
        ("C1", 1, 1, 1, 1),
        ("C2", 2, 2, 2, 2),
        ("C4", 5, 4, 4, 3),
        ("C8", 14, 8, 8, 4),
        ("C6", 10, 7, 7, 4),
        ("C12", 68, 23, 23, 6),
        ("C2xC2", 19, 12, 12, 5),
        ("S3", 9, 6, 6, 3),
        ("Q8", 68, 24, 24, 6),
        ("A4", 20, 9, 10, 3),
        ("D8", 294, 48, 60, 6),
    ],
)
def test_enumeration_counts(spec, total, sat, disc, bisat):
    systems = enumerate_all(lattice(spec))
    assert len(systems) == total
    assert sum(map(is_saturated, systems)) == sat
    assert sum(map(is_disclike, systems)) == disc
    assert sum(map(is_bisaturated, systems)) == bisat


@pytest.mark.parametrize("n", range(0, 5))
def test_catalan(n):
    assert len(enumerate_all(lattice(f"C{2 ** n}"))) == catalan(n + 1)
    if n <= 3:
        assert len(enumerate_all(lattice(f"C{3 ** n}"))) == catalan(n + 1)


def test_catalan_split_by_minimal_fibrant():
    # grouping by minimal fibrant subgroup C_{p^k} gives Catalan(k+1) * Catalan(n-k) systems
    for n in range(1, 5):
        L = lattice(f"C{2 ** n}")
        counts = {}
        for T in enumerate_all(L):
            counts[L.orders[T.minimal_fibrant]] = counts.get(L.orders[T.minimal_fibrant], 0) + 1
        for k in range(n + 1):
            assert counts[2**k] == catalan(k) * catalan(n - k)


@pytest.mark.parametrize("spec", ["C4", "C6", "C2xC2", "S3"])
def test_enumeration_matches_naive_oracle(spec):
    L = lattice(spec)
    naive = naive_transfer_systems(spec)

    def as_sets(T):
        m = L.masks
        return frozenset((frozenset(bits(m[i])), frozenset(bits(m[j]))) for i, j in T.pairs(reflexive=True))

    assert {as_sets(T) for T in enumerate_all(L)} == {frozenset(r) for r in naive}


@pytest.mark.parametrize("spec", SMALL)
def test_enumeration_invariants(spec):
    L = lattice(spec)
    systems = enumerate_all(L)
    assert len(set(systems)) == len(systems)
    assert [T.sort_key() for T in systems] == sorted(T.sort_key() for T in systems)
    for T in systems:
        assert validate(T)
        assert generate(T) == T
        assert L.normal[T.minimal_fibrant]
        assert T.has(T.minimal_fibrant, L.top)
    for A in systems[:40]:
        for B in systems:
            if refines(A, B):
                assert L.le(B.minimal_fibrant, A.minimal_fibrant)
    assert enumerate_disclike(L) == [T for T in systems if is_disclike(T)]


def test_feasibility_cap():
    with pytest.raises(FeasibilityError):
        enumerate_all(lattice("S4"), cap=20)


def test_json_roundtrip_and_dot():
    L = lattice("Q8")
    for T in enumerate_all(L):
        assert transfer_from_json(json.dumps(T.to_json()), L) == T
    T = maximal(lattice("C4"))
    dot = T.to_dot()
    assert "0 -> 1" in dot and "1 -> 2" in dot and "0 -> 2" not in dot


# --- closure-operator properties on random relations ------------------------------


def relations(spec):
    L = lattice(spec)
    pairs = [(i, j) for i, j in L.pairs if i != j]
    return st.sets(st.sampled_from(pairs)).map(lambda s: Relation.from_pairs(L, s))


GROUPS_16 = ["C2", "C4", "C6", "C8", "C12", "C16", "C2xC2", "C2xC4", "S3", "Q8", "D8", "A4", "C2xC2xC2", "Q16", "D12"]


@given(st.sampled_from(GROUPS_16).flatmap(lambda g: st.tuples(relations(g), relations(g))))
def test_generate_is_a_closure_operator(rs):
    R, S = rs
    T = generate(R)
    assert validate(T)
    assert refines(R, T)
    assert generate(T) == T
    U = Relation(R.lattice, tuple(a | b for a, b in zip(R.rows, S.rows)))
    assert refines(T, generate(U))
    assert T.rows == _close_stepwise(R.lattice, R.rows)


@given(st.sampled_from(["C8", "C12", "S3", "Q8"]).flatmap(relations))
def test_generate_is_intersection_of_containing(R):
    L = R.lattice
    rows = L.leq
    for T in enumerate_all(L):
        if refines(R, T):
            rows = tuple(a & b for a, b in zip(rows, T.rows))
    assert generate(R).rows == tuple(r | 1 << i for i, r in enumerate(rows))


@given(st.sampled_from(["S3", "A4", "D8", "Q8"]).flatmap(lambda g: st.tuples(st.just(g), st.integers(0, 400))))
def test_saturated_formulations_agree(args):
    from ninfty.transfer import _saturated_direct, _saturated_two_of_three

    spec, k = args
    systems = enumerate_all(lattice(spec))
    T = systems[k % len(systems)]
    assert _saturated_direct(T) == _saturated_two_of_three(T)


def test_transfer_system_rejects_unclosed():
    L, e, c2, g = c4()
    with pytest.raises(TransferError):
        TransferSystem.from_relation(Relation.from_pairs(L, [(0, 0), (1, 1), (2, 2), (e, g)]))
