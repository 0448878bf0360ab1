import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ninfty.characters import (
    TOL,
    CharacterError,
    abelianization_order,
    appears_in_induced,
    character_table,
    class_fusion,
    conjugacy_classes,
    fixed_space_dim,
    lattice_table,
    restriction_multiplicity,
    table_from_json,
)
from ninfty.groups import build_group
from oracles import cyclic_characters, lattice

GROUPS = ["C1", "C2", "C3", "C4", "C6", "C12", "C2xC2", "C2xC4", "S3", "Q8", "D8", "A4", "D12", "Q8xC3", "S4", "A5"]


def full_mask(G):
    return (1 << G.order) - 1


@pytest.mark.parametrize(
    "spec, dims",
    [
        ("C3", (1, 1, 1)),
        ("S3", (1, 1, 2)),
        ("Q8", (1, 1, 1, 1, 2)),
        ("D8", (1, 1, 1, 1, 2)),
        ("A4", (1, 1, 1, 3)),
        ("S4", (1, 1, 2, 3, 3)),
        ("A5", (1, 3, 3, 4, 5)),
    ],
)
def test_degrees(spec, dims):
    assert lattice_table(lattice(spec)).dims == dims


@pytest.mark.parametrize("spec", GROUPS)
def test_table_invariants(spec):
    L = lattice(spec)
    G = L.group
    T = lattice_table(L)
    cc = T.classes
    assert sum(cc.sizes) == G.order and cc.class_of[0] == 0
    assert sum(d * d for d in T.dims) == G.order
    # column orthogonality
    col = T.values.conj().T @ T.values
    assert np.allclose(col, np.diag(G.order / np.asarray(cc.sizes)), atol=TOL)
    assert np.abs(T.values[0] - 1).max() < TOL
    # the degree-sum identity over non-linear characters
    assert sum(d * d for d in T.dims if d > 1) == G.order - abelianization_order(L)
    # conjugation pairing is an involution fixing exactly the real rows
    p = T.conj_pairing
    assert all(p[p[a]] == a for a in range(len(T)))
    real = {a for a in range(len(T)) if np.abs(T.values[a].imag).max() < TOL}
    assert set(T.real_rows) == real
    # permutation character of G/K is the regular character's K-fixed part
    regular = sum(d * T.element_values[v] for v, d in enumerate(T.dims))
    for k in range(L.size):
        assert fixed_space_dim(regular, L.masks[k]) == G.order // L.orders[k]


def test_c3_values_and_abelian_oracle():
    for spec in ["C3", "C4", "C5", "C6", "C8", "C12"]:
        G = build_group(spec)
        T = character_table(G)
        assert all(d == 1 for d in T.dims)
        ours = {tuple(np.round(r, 6)) for r in T.element_values}
        oracle = {tuple(np.round(np.array(r), 6)) for r in cyclic_characters(G)}
        assert ours == oracle
    w = np.exp(2j * np.pi / 3)
    vals = lattice_table(lattice("C3")).element_values
    for row in vals[1:]:
        assert {round(complex(z).real, 6) for z in row} <= {1.0, round(w.real, 6)}


def test_fixed_space_dims():
    L = lattice("S3")
    T = lattice_table(L)
    two = T.dims.index(2)
    a3 = next(i for i in range(L.size) if L.orders[i] == 3)
    chi = T.element_values[two]
    assert fixed_space_dim(chi, L.masks[a3]) == 0
    assert fixed_space_dim(chi, L.masks[0]) == 2
    for k in range(L.size):
        assert fixed_space_dim(T.element_values[0], L.masks[k]) == 1


def test_restriction_multiplicities():
    L = lattice("S3")
    T = lattice_table(L)
    a3 = next(i for i in range(L.size) if L.orders[i] == 3)
    emb = L.embedding(a3)
    sub = lattice_table(emb.lattice)
    fusion = class_fusion(sub, T, emb.elements)
    two = T.dims.index(2)
    mults = [restriction_multiplicity(T.values[two], sub.values[w], fusion, sub) for w in range(len(sub))]
    assert mults == [0, 1, 1]
    assert restriction_multiplicity(T.values[0], sub.values[0], fusion, sub) == 1
    # restriction to G itself is the identity matrix
    full = L.embedding(L.top)
    subG = lattice_table(full.lattice)
    fG = class_fusion(subG, T, full.elements)
    M = [[restriction_multiplicity(T.values[v], subG.values[w], fG, subG) for w in range(len(subG))] for v in range(len(T))]
    assert sorted(map(sum, M)) == [1] * len(T) and all(sum(c) == 1 for c in zip(*M))


def test_appears_in_induced_examples():
    L = lattice("C4")
    T = lattice_table(L)
    ev = T.element_values
    c2 = 1
    kernel_c2 = [v for v in range(4) if v and fixed_space_dim(ev[v], L.masks[c2]) == 1][0]
    faithful = [v for v in range(4) if fixed_space_dim(ev[v], L.masks[c2]) == 0]
    # W occurs in ind_{C2}^{C4} res V iff W and V agree on C2
    for w in faithful:
        assert not appears_in_induced(ev[w], ev[kernel_c2], L.masks[c2])
        assert appears_in_induced(ev[w], ev[faithful[0]], L.masks[c2])
    assert appears_in_induced(ev[0], ev[0], L.masks[c2])
    # K = H reduces to equality of irreducibles
    for v in range(4):
        for w in range(4):
            assert appears_in_induced(ev[w], ev[v], L.masks[L.top]) == (v == w)


@pytest.mark.parametrize("spec", ["S3", "Q8", "A4", "C6"])
def test_json_roundtrip(spec):
    T = lattice_table(lattice(spec))
    back = table_from_json(json.dumps(T.to_json()))
    assert np.allclose(back.values, T.values)


def test_injected_table_is_validated():
    T = lattice_table(lattice("S3"))
    data = T.to_json()
    data["chars"][2][0] = [3.0, 0.0]
    with pytest.raises(CharacterError):
        table_from_json(data)


@given(st.integers(0, 2**31 - 1))
def test_seed_independence(seed):
    G = build_group("Q8xC3")
    a = character_table(G, seed=seed)
    b = lattice_table(lattice("Q8xC3"))
    assert np.allclose(a.values, b.values, atol=1e-6)


def test_env_seed(monkeypatch):
    monkeypatch.setenv("NINFTY_SEED", "7")
    T = character_table(build_group("A4"))
    assert T.dims == (1, 1, 1, 3)


def test_classes():
    cc = conjugacy_classes(build_group("S4"))
    assert sorted(cc.sizes) == [1, 3, 6, 6, 8]
