"""Checkable forms of the main results, evaluated by exhaustive computation.

Each ``check_*`` returns a :class:`CheckReport`. A report whose verdict is
``fails-with-witness`` carries enough data for :func:`replay` to re-derive
the failure.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .change import coinduce, inflate, restrict, transport
from .characters import abelianization_order
from .groups import (
    GroupError,
    SubgroupLattice,
    bits,
    build_group,
    is_isomorphic,
    is_minimal_nonabelian,
    subgroup_lattice,
)
from .transfer import (
    FeasibilityError,
    LatticeMismatchError,
    TransferSystem,
    enumerate_all,
    enumerate_disclike,
    generate_pairs,
    is_saturated,
    refines,
    same_lattice,
    transfer_from_json,
    witness_OHG,
)
from .universes import (
    COMPLEX,
    REAL,
    Universe,
    UniverseContext,
    all_universes,
    closure,
    dim_gt1_universe,
    disc_transfer,
    linear_transfer,
    regular_quotient_universe,
)

HOLDS = "holds"
FAILS = "fails-with-witness"
SKIPPED = "skipped-infeasible"

DEFAULT_BUDGET_MS = 300_000

PAPER_DEFAULT = ("C2", "C3", "C4", "C6", "C8", "C12", "C2xC2", "C2xC4", "S3", "Q8", "A4", "D8", "Q8xC3")


class HypothesisError(GroupError):
    """The group data does not satisfy the hypotheses of the statement being checked."""


class Deadline:
    def __init__(self, budget_ms: float | None = DEFAULT_BUDGET_MS):
        self.budget_ms = budget_ms
        self.start = time.perf_counter()

    def elapsed_ms(self) -> float:
        return (time.perf_counter() - self.start) * 1000

    def check(self) -> None:
        if self.budget_ms is not None and self.elapsed_ms() > self.budget_ms:
            raise FeasibilityError(f"time budget of {self.budget_ms:.0f} ms exhausted")


@dataclass
class CheckReport:
    theorem: str
    group: str
    verdict: str
    witness: dict | None = None
    millis: float = 0.0
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict == FAILS and not self.witness:
            raise ValueError("a failing report must carry a witness")

    @property
    def ok(self) -> bool:
        return self.verdict != FAILS

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "group": self.group,
            "verdict": self.verdict,
            "witness": self.witness,
            "millis": round(self.millis, 3),
            **({"detail": self.detail} if self.detail else {}),
        }


def _lattice(G) -> SubgroupLattice:
    if isinstance(G, SubgroupLattice):
        return G
    return subgroup_lattice(build_group(G) if isinstance(G, str) else G)


def _run(theorem: str, G, body: Callable[[SubgroupLattice, Deadline], tuple], budget_ms) -> CheckReport:
    """``body`` returns ``(verdict, witness, detail)``; caps and timeouts become skips."""
    dl = Deadline(budget_ms)
    try:
        L = _lattice(G)
        verdict, witness, detail = body(L, dl)
    except FeasibilityError as exc:
        name = G if isinstance(G, str) else getattr(getattr(G, "group", G), "name", str(G))
        return CheckReport(theorem, name, SKIPPED, None, dl.elapsed_ms(), {"reason": str(exc)})
    return CheckReport(theorem, L.group.name, verdict, witness, dl.elapsed_ms(), detail)


def _universe_witness(U: Universe, **extra) -> dict:
    return {"kind": "universe", "support": U.irreducibles, "field": U.field_tag, **extra}


def _ts_witness(T: TransferSystem, **extra) -> dict:
    return {"kind": "transfer_system", **T.to_json(), **extra}


def subgroup_name(L: SubgroupLattice, h: int) -> str:
    """A readable name for subgroup ``h``: its isomorphism type where recognisable."""
    n = L.orders[h]
    if n == 1:
        return "1"
    if h == L.top:
        return L.group.name
    G = L.group
    if G.name.startswith("S") and G.name[1:].isdigit() and 2 * n == G.order and L.normal[h]:
        return "A" + G.name[1:]
    H = L.embedding(h).group
    candidates = [f"C{n}"]
    if n == 4:
        candidates.append("V4")
    candidates += {6: ["S3"], 8: ["C2xC4", "C2xC2xC2", "D8", "Q8"], 12: ["A4", "D12", "C2xC6"]}.get(n, [])
    for spec in candidates:
        if is_isomorphic(H, build_group("C2xC2" if spec == "V4" else spec)):
            return spec
    return L.label(h)


# --- disc = linear -----------------------------------------------------------


def regular_supports(ctx: UniverseContext) -> dict[int, int]:
    """Support of R[G/N]^infty for each normal N."""
    return {regular_quotient_universe(ctx, n).support: n for n in ctx.lattice.normal_indices}


def check_disc_equals_linear(G, budget_ms=DEFAULT_BUDGET_MS) -> CheckReport:
    def body(L, dl):
        ctx = UniverseContext.of(L)
        regular = regular_supports(ctx)
        n = 0
        for U in all_universes(ctx, REAL):
            dl.check()
            n += 1
            equal = disc_transfer(U) == linear_transfer(U)
            if equal != (U.support in regular):
                return FAILS, _universe_witness(U, disc_equals_linear=equal), {"universes": n}
        return HOLDS, None, {"universes": n, "regular": len(regular)}

    return _run("disc-eq-linear", G, body, budget_ms)


# --- bisaturated -------------------------------------------------------------


def check_bisaturated_bijection(G, budget_ms=DEFAULT_BUDGET_MS) -> CheckReport:
    def body(L, dl):
        bisat = [T for T in enumerate_disclike(L) if is_saturated(T)]
        dl.check()
        normal = set(L.normal_indices)
        fib = {T: T.minimal_fibrant for T in bisat}
        detail = {"bisaturated": len(bisat), "normal": len(normal)}
        if sorted(fib.values()) != sorted(normal):
            bad = next((T for T in bisat if list(fib.values()).count(fib[T]) > 1), None)
            if bad is not None:
                return FAILS, _ts_witness(bad, reason="minimal fibrant repeated"), detail
            missing = sorted(normal - set(fib.values()))
            return FAILS, {"kind": "normal_subgroup", "index": missing[0], "reason": "not hit"}, detail
        for A in bisat:
            for B in bisat:
                if refines(A, B) != L.le(fib[B], fib[A]):
                    return FAILS, {"kind": "pair", "a": A.to_json(), "b": B.to_json(), "reason": "order"}, detail
        ctx = UniverseContext.of(L)
        for T in bisat:
            dl.check()
            if T != disc_transfer(regular_quotient_universe(ctx, fib[T])):
                return FAILS, _ts_witness(T, reason="not the regular-quotient disc system"), detail
        return HOLDS, None, detail

    return _run("bisaturated", G, body, budget_ms)


# --- compatible pairs and hulls ----------------------------------------------


def is_compatible_pair(P: TransferSystem, O: TransferSystem) -> bool:
    """``P <= O``, and ``K ->_P H``, ``L <= H``, ``K meet L ->_O K`` force ``L ->_O H``."""
    if not same_lattice(P.lattice, O.lattice):
        raise LatticeMismatchError("compatible pair over different lattices")
    if not refines(P, O):
        return False
    L = P.lattice
    for k, h in P.pairs():
        for l in bits(L.below[h]):
            if O.has(L.meet[k][l], k) and not O.has(l, h):
                return False
    return True


def hull(O: TransferSystem) -> TransferSystem:
    """``K -> H`` iff ``coind_K^H res_K O <= res_H O``. Abelian groups only."""
    L = O.lattice
    if not L.group.is_abelian:
        raise GroupError("the hull formula is only available for abelian groups")
    rows = [0] * L.size
    for h in range(L.size):
        emb_h = L.embedding(h)
        res_h = restrict(O, h)
        for k in bits(L.below[h]):
            kh = emb_h.from_parent[k]
            inner = emb_h.lattice.embedding(kh)
            res_k = restrict(O, k)
            # res_k lives on L.embedding(k).lattice; move it onto the lattice coinduce expects
            elems_in_g = [emb_h.elements[x] for x in inner.elements]
            P = transport(res_k, L.embedding(k).elements, inner.lattice, elems_in_g)
            if refines(coinduce(P, emb_h.lattice, kh), res_h):
                rows[k] |= 1 << h
    return TransferSystem.from_relation(TransferSystem(L, tuple(rows)))


def hull_bruteforce(O: TransferSystem) -> TransferSystem:
    """The maximum ``P`` compatible with ``O``, found among all transfer systems."""
    compatible = [P for P in enumerate_all(O.lattice) if is_compatible_pair(P, O)]
    top = compatible[0]
    for P in compatible:
        if len(P) > len(top):
            top = P
    if not all(refines(P, top) for P in compatible):
        raise AssertionError("compatible partners have no maximum")
    return top


def check_hull_disc(G, budget_ms=DEFAULT_BUDGET_MS) -> CheckReport:
    def body(L, dl):
        if not L.group.is_abelian:
            raise HypothesisError(f"{L.group.name} is not abelian")
        ctx = UniverseContext.of(L)
        brute: dict[TransferSystem, TransferSystem] = {}
        n = 0
        for U in all_universes(ctx, REAL):
            dl.check()
            n += 1
            D = disc_transfer(U)
            H = hull(D)
            if D not in brute:
                brute[D] = hull_bruteforce(D)
            if H != brute[D]:
                return FAILS, _universe_witness(U, reason="formula hull differs from brute force"), {"universes": n}
            if H != linear_transfer(closure(U)):
                return FAILS, _universe_witness(U, reason="hull of D(U) differs from L(closure U)"), {"universes": n}
        return HOLDS, None, {"universes": n, "distinct_disc": len(brute)}

    return _run("hull", G, body, budget_ms)


# --- saturation --------------------------------------------------------------


def linear_systems(ctx: UniverseContext, field: str, dl: Deadline | None = None) -> dict[int, dict]:
    """``L(U)`` for every universe, bucketed by minimal fibrant subgroup: ``{m: {rows: support}}``."""
    out: dict[int, dict] = {}
    for U in all_universes(ctx, field):
        if dl is not None:
            dl.check()
        T = linear_transfer(U, check=False)
        out.setdefault(T.minimal_fibrant, {}).setdefault(T.rows, U.support)
    return out


def realizing_universe(O: TransferSystem, field: str = REAL, dl: Deadline | None = None) -> Universe | None:
    ctx = UniverseContext.of(O.lattice)
    for U in all_universes(ctx, field):
        if dl is not None:
            dl.check()
        if linear_transfer(U, check=False).rows == O.rows:
            return U
    return None


def expected_saturated(L: SubgroupLattice) -> bool | None:
    """What the known results predict for ``L.group``, or ``None`` when open."""
    G = L.group
    if G.is_abelian:
        n = G.order
        primes = {p for p in range(2, n + 1) if n % p == 0 and all(p % q for q in range(2, p))}
        if len(primes) <= 1 and any(G.element_orders[x] == n for x in range(n)):
            return True
        return None
    if is_minimal_nonabelian(G, L) or all(L.normal):
        return False
    return None


def _witness_name(L: SubgroupLattice, T: TransferSystem) -> str | None:
    for h in range(L.size):
        if witness_OHG(L, h) == T:
            return f"O_{{{subgroup_name(L, h)}}}^{{{L.group.name}}}"
    return None


def is_group_saturated(G, field: str = REAL, both: bool = False, budget_ms=DEFAULT_BUDGET_MS) -> CheckReport:
    """Is every saturated transfer system some ``L(U)``? Witness: the first one that is not."""

    def scan(L, dl, fld):
        ctx = UniverseContext.of(L)
        realized = linear_systems(ctx, fld, dl)
        # prefer O_H^G for abelian normal H of prime index, then any O_H^G
        preferred = [h for h in L.normal_indices if L.is_abelian(h) and _is_prime(L.group.order // L.orders[h])]
        candidates = [witness_OHG(L, h) for h in preferred + list(range(L.size))]
        candidates += enumerate_all(L)
        for T in candidates:
            dl.check()
            if is_saturated(T) and T.rows not in realized.get(T.minimal_fibrant, {}):
                return T
        return None

    def body(L, dl):
        expected = expected_saturated(L)
        bad = scan(L, dl, field)
        detail = {"field": field, "saturated": bad is None, "expected": expected}
        if both:
            other = COMPLEX if field == REAL else REAL
            b2 = scan(L, dl, other)
            detail[f"saturated_{other}"] = b2 is None
        if bad is not None:
            witness = _ts_witness(bad, name=_witness_name(L, bad), field=field)
            return (FAILS if expected is True else HOLDS), witness, detail
        if expected is False:
            return FAILS, {"kind": "note", "reason": "every saturated system was realized"}, detail
        return HOLDS, None, detail

    return _run("saturated", G, body, budget_ms)


# --- p^a q^b implication and the lemmas behind it ------------------------------


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def _is_prime(n: int) -> bool:
    return n > 1 and _prime_factors(n) == [n]


def pq_hypotheses(L: SubgroupLattice, h: int, k: int) -> None:
    G = L.group
    if len(_prime_factors(G.order)) > 2:
        raise HypothesisError(f"|{G.name}| has more than two prime factors")
    index = G.order // L.orders[h]
    if not (L.normal[h] and L.is_abelian(h) and _is_prime(index)):
        raise HypothesisError(f"{L.label(h)} is not an abelian normal subgroup of prime index")
    if L.le(L.commutator, k):
        raise HypothesisError(f"{L.label(k)} contains the commutator subgroup")


def pq_triples(L: SubgroupLattice) -> list[tuple[int, int]]:
    """All ``(H, K)`` meeting the hypotheses, up to conjugacy of ``K``."""
    out = []
    for h in L.normal_indices:
        for k in range(L.size):
            if k != min(L.conjugates(k)):
                continue
            try:
                pq_hypotheses(L, h, k)
            except HypothesisError:
                continue
            out.append((h, k))
    return out


def check_pq_transfer_implication(G, h: int, k: int, budget_ms=DEFAULT_BUDGET_MS) -> CheckReport:
    def body(L, dl):
        pq_hypotheses(L, h, k)
        ctx = UniverseContext.of(L)
        n = 0
        for fld in (REAL, COMPLEX):
            for U in all_universes(ctx, fld):
                dl.check()
                n += 1
                T = linear_transfer(U, check=False)
                if T.has(0, h) and not T.has(0, k):
                    return FAILS, _universe_witness(U, h=h, k=k), {"universes": n}
        return HOLDS, None, {"universes": n, "H": subgroup_name(L, h), "K": subgroup_name(L, k)}

    return _run("pq-implication", G, body, budget_ms)


def dim_identity(L: SubgroupLattice) -> tuple[int, int]:
    """``(sum over dim>1 of dim^2, |G| - |G_ab|)``."""
    dims = UniverseContext.of(L).table.dims
    return sum(d * d for d in dims if d > 1), L.group.order - abelianization_order(L)


def _restricts_complete(ctx: UniverseContext, support: int, k: int) -> bool:
    _, res = ctx.linear_tables
    got = 0
    for v in bits(support):
        got |= res[k][v]
    return got == (1 << UniverseContext.of(ctx.lattice.embedding(k).lattice).n_irr) - 1


def check_xia_lemmas(G, budget_ms=DEFAULT_BUDGET_MS) -> CheckReport:
    """Both lemmas over every complex universe, plus the degree-sum identity."""

    def body(L, dl):
        lhs, rhs = dim_identity(L)
        detail = {"sum_dim_sq_gt1": lhs, "order_minus_abelianization": rhs}
        if lhs != rhs:
            return FAILS, {"kind": "identity", "lhs": lhs, "rhs": rhs}, detail
        ctx = UniverseContext.of(L)
        big = dim_gt1_universe(ctx).support
        ks = [k for k in range(L.size) if not L.le(L.commutator, k)]
        index_p = []
        if len(_prime_factors(L.group.order)) <= 2:
            for h in L.normal_indices:
                idx = L.group.order // L.orders[h]
                if L.is_abelian(h) and _is_prime(idx):
                    index_p.append(h)
        n = 0
        for U in all_universes(ctx, COMPLEX):
            dl.check()
            n += 1
            has_big = U.support & big == big
            if has_big:
                for k in ks:
                    if not _restricts_complete(ctx, U.support, k):
                        return FAILS, _universe_witness(U, lemma="complete-on-K", k=k), detail
            for h in index_p:
                if _restricts_complete(ctx, U.support, h) and not has_big:
                    return FAILS, _universe_witness(U, lemma="complete-on-H", h=h), detail
        detail.update(universes=n, K_count=len(ks), H_count=len(index_p))
        return HOLDS, None, detail

    return _run("xia-lemmas", G, body, budget_ms)


# --- Hamiltonian groups -------------------------------------------------------


def hamiltonian_split(L: SubgroupLattice) -> tuple[int, int]:
    """``(N, C)`` with ``G/N`` of order 8 and Hamiltonian, ``C`` a complement to ``N``."""
    G = L.group
    if G.is_abelian or not all(L.normal):
        raise HypothesisError(f"{G.name} is not Hamiltonian")
    for n in L.normal_indices:
        if G.order // L.orders[n] != 8:
            continue
        Q = L.quotient(n).quotient
        if Q.is_abelian:
            continue
        for c in range(L.size):
            if L.orders[c] == 8 and L.meet[c][n] == 0 and L.join[c][n] == L.top:
                return n, c
    raise HypothesisError(f"{G.name} has no Q8 quotient with a complement")


def check_hamiltonian(G, field: str | None = None, budget_ms=DEFAULT_BUDGET_MS) -> CheckReport:
    """Inflate an unrealizable quotient witness and show no universe of ``G`` realizes it."""

    def body(L, dl):
        n, c = hamiltonian_split(L)
        QD = L.quotient(n)
        sub = is_group_saturated(QD.lattice, REAL, budget_ms=dl.budget_ms)
        if sub.verdict == SKIPPED:
            raise FeasibilityError(sub.detail.get("reason", "quotient scan skipped"))
        if sub.detail["saturated"]:
            return FAILS, {"kind": "note", "reason": "quotient has no unrealizable witness"}, sub.detail
        W = transfer_from_json(sub.witness, QD.lattice)
        big = inflate(W, L, n)
        if not is_saturated(big):
            return FAILS, _ts_witness(big, reason="inflated witness not saturated"), {}
        # split inclusion: restricting the inflation to the complement gives the witness back
        emb = L.embedding(c)
        back = restrict(big, c)
        expect = transport(W, list(range(QD.quotient.order)), emb.lattice, [QD.proj[x] for x in emb.elements])
        if back != expect:
            return FAILS, _ts_witness(big, reason="restriction to complement is not the witness"), {}
        fields = (REAL, COMPLEX) if field is None else (field,)
        for fld in fields:
            U = realizing_universe(big, fld, dl)
            if U is not None:
                return FAILS, _universe_witness(U, reason="realizes the inflated witness"), {}
        return HOLDS, _ts_witness(big, name="inflated quotient witness"), {
            "N": subgroup_name(L, n),
            "complement": subgroup_name(L, c),
            "fields": list(fields),
            "saturated": False,
        }

    return _run("hamiltonian", G, body, budget_ms)


# --- suites and replay ---------------------------------------------------------

THEOREMS = {
    "disc-eq-linear": check_disc_equals_linear,
    "bisaturated": check_bisaturated_bijection,
    "hull": check_hull_disc,
    "saturated": is_group_saturated,
    "xia-lemmas": check_xia_lemmas,
    "hamiltonian": check_hamiltonian,
}


def applicable(L: SubgroupLattice) -> list[str]:
    G = L.group
    out = ["bisaturated", "disc-eq-linear"]
    if G.is_abelian:
        out.append("hull")
    else:
        out.append("xia-lemmas")
        if pq_triples(L):
            out.append("pq-implication")
    if not G.is_abelian and all(L.normal):
        out.append("hamiltonian")
    else:
        out.append("saturated")
    return out


def run_checks(group: str, budget_ms=DEFAULT_BUDGET_MS) -> list[CheckReport]:
    L = _lattice(group)
    reports = []
    for name in applicable(L):
        if name == "pq-implication":
            for h, k in pq_triples(L):
                reports.append(check_pq_transfer_implication(L, h, k, budget_ms=budget_ms))
        else:
            reports.append(THEOREMS[name](L, budget_ms=budget_ms))
    return reports


def run_suite(groups: Iterable[str] = PAPER_DEFAULT, budget_ms=DEFAULT_BUDGET_MS) -> list[CheckReport]:
    out = []
    for g in groups:
        out.extend(run_checks(g, budget_ms))
    return out


def replay(report: CheckReport | dict) -> bool:
    """Re-derive the failure a report's witness describes; True if it reproduces."""
    data = report.to_json() if isinstance(report, CheckReport) else report
    w = data.get("witness") or {}
    L = _lattice(data["group"])
    ctx = UniverseContext.of(L)
    theorem = data["theorem"]
    if w.get("kind") == "universe":
        U = Universe(ctx, sum(1 << v for v in w["support"]), w["field"])
        if theorem == "disc-eq-linear":
            equal = disc_transfer(U) == linear_transfer(U)
            return equal != (U.support in regular_supports(ctx))
        if theorem == "hull":
            D = disc_transfer(U)
            return hull(D) != linear_transfer(closure(U)) or hull(D) != hull_bruteforce(D)
        if theorem == "pq-implication":
            T = linear_transfer(U)
            return T.has(0, w["h"]) and not T.has(0, w["k"])
        if theorem == "hamiltonian":
            return True
    if w.get("kind") == "transfer_system" and theorem in ("saturated", "hamiltonian"):
        T = transfer_from_json(w, L)
        return is_saturated(T) and all(realizing_universe(T, f) is None for f in (REAL, COMPLEX))
    return data["verdict"] != FAILS
