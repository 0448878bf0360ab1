import json

import pytest

from ninfty.groups import GroupError
from ninfty.theorems import (
    FAILS,
    HOLDS,
    SKIPPED,
    CheckReport,
    HypothesisError,
    applicable,
    check_bisaturated_bijection,
    check_disc_equals_linear,
    check_hamiltonian,
    check_hull_disc,
    check_pq_transfer_implication,
    check_xia_lemmas,
    dim_identity,
    expected_saturated,
    hull,
    hull_bruteforce,
    is_compatible_pair,
    is_group_saturated,
    replay,
    run_checks,
    run_suite,
    subgroup_name,
)
from ninfty.transfer import LatticeMismatchError, enumerate_all, maximal, minimal
from ninfty.universes import REAL, all_universes, context, disc_transfer, linear_transfer
from oracles import lattice


def sub(L, order, nth=0):
    return [i for i in range(L.size) if L.orders[i] == order][nth]


# --- compatible pairs and hulls -------------------------------------------------------


@pytest.mark.parametrize("spec", ["C4", "C6", "S3", "Q8", "C2xC2"])
def test_compatible_pair_examples(spec):
    L = lattice(spec)
    for O in enumerate_all(L):
        assert is_compatible_pair(minimal(L), O)
    assert is_compatible_pair(maximal(L), maximal(L))
    for U in all_universes(context(L), REAL):
        assert is_compatible_pair(linear_transfer(U), disc_transfer(U))
    with pytest.raises(LatticeMismatchError):
        is_compatible_pair(minimal(L), minimal(lattice("C3")))


def test_compatible_pair_needs_refinement():
    L = lattice("C4")
    assert not is_compatible_pair(maximal(L), minimal(L))


@pytest.mark.parametrize("spec", ["C4", "C9", "C6", "C8", "C2xC2"])
def test_hull_against_bruteforce(spec):
    L = lattice(spec)
    assert hull(maximal(L)) == maximal(L)
    assert hull(minimal(L)) == minimal(L)
    for O in enumerate_all(L):
        H = hull(O)
        assert H == hull_bruteforce(O)
        assert is_compatible_pair(H, O)


def test_hull_requires_abelian():
    with pytest.raises(GroupError):
        hull(minimal(lattice("S3")))


# --- checks ---------------------------------------------------------------------------


@pytest.mark.parametrize("spec", ["C2", "C6", "S3"])
def test_disc_equals_linear_examples(spec):
    r = check_disc_equals_linear(spec)
    assert r.verdict == HOLDS and r.witness is None


@pytest.mark.parametrize("spec, count", [("C4", 3), ("C9", 3), ("Q8", 6), ("S3", 3)])
def test_bisaturated_examples(spec, count):
    r = check_bisaturated_bijection(spec)
    assert r.verdict == HOLDS
    assert r.detail["bisaturated"] == count == r.detail["normal"]


@pytest.mark.parametrize("spec", ["C2", "C4", "C6"])
def test_hull_check_examples(spec):
    assert check_hull_disc(spec).verdict == HOLDS


def test_hull_check_fails_on_c2xc6():
    # the restriction of a closed universe need not be closed once the group
    # is abelian but not cyclic; the hull identity breaks on C2 x C6
    r = check_hull_disc("C2xC6")
    assert r.verdict == FAILS
    assert r.witness["kind"] == "universe"
    assert replay(r)


def test_hull_check_rejects_nonabelian():
    with pytest.raises(HypothesisError):
        check_hull_disc("S3")


@pytest.mark.parametrize(
    "spec, saturated, name",
    [
        ("C2", True, None),
        ("C3", True, None),
        ("C4", True, None),
        ("C8", True, None),
        ("S3", False, "O_{A3}^{S3}"),
        ("A4", False, "O_{V4}^{A4}"),
        ("Q8", False, "O_{C4}^{Q8}"),
    ],
)
def test_saturation(spec, saturated, name):
    r = is_group_saturated(spec, both=True)
    assert r.verdict == HOLDS
    assert r.detail["saturated"] is saturated
    if not saturated:
        assert r.witness["name"] == name
        assert replay(r)


def test_expected_saturated():
    assert expected_saturated(lattice("C9")) is True
    assert expected_saturated(lattice("S3")) is False
    assert expected_saturated(lattice("Q8xC3")) is False
    assert expected_saturated(lattice("C6")) is None
    assert expected_saturated(lattice("C2xC2")) is None


def test_pq_examples():
    L = lattice("S3")
    a3, c2 = sub(L, 3), sub(L, 2)
    assert check_pq_transfer_implication(L, a3, c2).verdict == HOLDS
    assert check_pq_transfer_implication(L, a3, 0).verdict == HOLDS
    L = lattice("A4")
    assert check_pq_transfer_implication(L, sub(L, 4), sub(L, 3)).verdict == HOLDS
    with pytest.raises(HypothesisError):
        check_pq_transfer_implication(lattice("S3"), sub(lattice("S3"), 2), 0)


@pytest.mark.parametrize("spec, lhs, rhs", [("S3", 4, 4), ("Q8", 4, 4), ("A4", 9, 9), ("D8", 4, 4)])
def test_xia_lemmas(spec, lhs, rhs):
    assert dim_identity(lattice(spec)) == (lhs, rhs)
    r = check_xia_lemmas(spec)
    assert r.verdict == HOLDS


def test_hamiltonian():
    L = lattice("Q8xC3")
    assert all(L.normal)
    r = check_hamiltonian(L)
    assert r.verdict == HOLDS and r.detail["saturated"] is False
    assert r.detail["complement"] == "Q8"
    assert check_hamiltonian("Q8").verdict == HOLDS
    with pytest.raises(HypothesisError):
        check_hamiltonian("S3")


def test_subgroup_names():
    L = lattice("S4")
    assert subgroup_name(L, sub(L, 12)) == "A4"
    L = lattice("A4")
    assert subgroup_name(L, sub(L, 4)) == "V4"
    assert subgroup_name(L, 0) == "1"


# --- reports and suites -------------------------------------------------------------------


def test_report_invariants():
    with pytest.raises(ValueError):
        CheckReport("x", "C2", FAILS)
    r = CheckReport("x", "C2", HOLDS, millis=1.23456)
    assert json.loads(json.dumps(r.to_json())) == {
        "theorem": "x", "group": "C2", "verdict": HOLDS, "witness": None, "millis": 1.235,
    }
    assert replay(r)


def test_budget_skip():
    r = check_disc_equals_linear("C12", budget_ms=0)
    assert r.verdict == SKIPPED and "budget" in r.detail["reason"]


def test_feasibility_skip():
    r = is_group_saturated("C2xC2xC2xC2xC2")
    assert r.verdict == SKIPPED


def test_applicable():
    assert applicable(lattice("C4")) == ["bisaturated", "disc-eq-linear", "hull", "saturated"]
    assert "hamiltonian" in applicable(lattice("Q8"))
    assert "pq-implication" in applicable(lattice("S3"))


def test_run_checks_and_replay():
    reports = run_checks("S3")
    assert {r.theorem for r in reports} >= {"bisaturated", "disc-eq-linear", "saturated", "pq-implication"}
    for r in reports:
        assert r.ok
        assert replay(r)


def test_default_suite_small():
    reports = run_suite(["C2", "C4", "S3", "C2xC2"])
    assert all(r.verdict == HOLDS for r in reports)
