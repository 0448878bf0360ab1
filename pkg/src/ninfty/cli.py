"""Command-line front end.

Exit codes: 0 success, 1 a checked statement failed (witness printed),
2 usage or input error, 3 refused as infeasible.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys

import numpy as np

from . import change, theorems
from .characters import CharacterError, lattice_table
from .groups import GroupError, SubgroupLattice, build_group, subgroup_lattice
from .transfer import (
    FeasibilityError,
    Relation,
    TransferError,
    TransferSystem,
    enumerate_all,
    generate,
    is_bisaturated,
    is_disclike,
    is_saturated,
)
from .universes import COMPLEX, REAL, UniverseContext, UniverseError, closure, disc_transfer, linear_transfer, parse_universe

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _lattice(spec: str) -> SubgroupLattice:
    return subgroup_lattice(build_group(spec))


_PAIR = re.compile(r"^\s*(\d+)\s*(?:->|>|:)\s*(\d+)\s*$")


def parse_pairs(text: str | None) -> list[tuple[int, int]]:
    """``"0->2, 1->3"`` into index pairs."""
    if not text:
        return []
    out = []
    for item in text.split(","):
        if not item.strip():
            continue
        m = _PAIR.match(item)
        if not m:
            raise UsageError(f"cannot parse pair {item!r}; expected i->j")
        out.append((int(m.group(1)), int(m.group(2))))
    return out


def _relation(L: SubgroupLattice, text: str | None) -> Relation:
    pairs = parse_pairs(text)
    for i, j in pairs:
        if not (0 <= i < L.size and 0 <= j < L.size):
            raise UsageError(f"subgroup index out of range in {i}->{j} (lattice has {L.size})")
    return Relation.from_pairs(L, pairs + [(i, i) for i in range(L.size)])


def _is_closed(R: Relation) -> bool:
    return generate(R).rows == R.rows


def _emit(obj, as_json: bool, text: str) -> None:
    print(json.dumps(obj, indent=2) if as_json else text)


# --- commands --------------------------------------------------------------------


def cmd_group(args) -> int:
    L = _lattice(args.spec)
    if args.dot:
        print(L.to_dot())
        return EXIT_OK
    if args.json:
        print(json.dumps(L.to_json(), indent=2))
        return EXIT_OK
    noun = "subgroup" if L.size == 1 else "subgroups"
    print(f"{L.size} {noun}, {len(L.normal_indices)} normal, {sum(L.cocyclic)} cocyclic")
    for i in range(L.size):
        flags = "".join(f for f, on in (("N", L.normal[i]), ("C", L.cocyclic[i])) if on)
        print(f"  {i:>3}  {L.label(i):<8} order {L.orders[i]:<3} {flags}")
    return EXIT_OK


def cmd_characters(args) -> int:
    table = lattice_table(_lattice(args.spec))
    if args.json:
        print(json.dumps(table.to_json(), indent=2))
        return EXIT_OK
    print(f"{len(table)} irreducibles, degrees {list(table.dims)}")
    for v, row in enumerate(table.values):
        row = np.round(row, 3) + 0.0  # drop signed zeros
        vals = " ".join(f"{z.real:+.3f}{z.imag:+.3f}i" if abs(z.imag) > 1e-9 else f"{z.real:+.3f}" for z in row)
        print(f"  {v:>3}  {vals}")
    return EXIT_OK


def cmd_transfer(args) -> int:
    L = _lattice(args.spec)
    if args.action == "count":
        systems = enumerate_all(L)
        tallies = {
            "total": len(systems),
            "saturated": sum(is_saturated(T) for T in systems),
            "disclike": sum(is_disclike(T) for T in systems),
            "bisaturated": sum(is_bisaturated(T) for T in systems),
        }
        _emit(tallies, args.json, "\n".join(f"{k} {v}" for k, v in tallies.items()))
    elif args.action == "enumerate":
        systems = enumerate_all(L)
        if args.json:
            print(json.dumps([T.to_json() for T in systems], indent=2))
        else:
            for n, T in enumerate(systems):
                print(f"{n:>4}  " + (", ".join(f"{i}->{j}" for i, j in T.pairs()) or "(minimal)"))
    elif args.action == "generate":
        T = generate(_relation(L, args.pairs))
        _emit(T.to_json(), args.json, T.to_dot() if args.dot else ", ".join(f"{i}->{j}" for i, j in T.pairs()))
    else:
        R = _relation(L, args.pairs)
        if not _is_closed(R):
            raise UsageError("pairs do not form a transfer system; use 'transfer generate' first")
        T = TransferSystem(L, R.rows)
        report = {
            "saturated": is_saturated(T),
            "disclike": is_disclike(T),
            "bisaturated": is_bisaturated(T),
            "minimal_fibrant": T.minimal_fibrant,
        }
        _emit(report, args.json, "\n".join(f"{k} {v}" for k, v in report.items()))
    return EXIT_OK


def cmd_universe(args) -> int:
    L = _lattice(args.spec)
    ctx = UniverseContext.of(L)
    U = parse_universe(ctx, args.literal, args.field)
    if args.op == "disc":
        out = disc_transfer(U).to_json()
    elif args.op == "linear":
        out = linear_transfer(U).to_json()
    elif args.op == "closure":
        out = closure(U).to_json()
    else:
        if not L.group.is_abelian:
            raise UsageError("hull is only defined here for abelian groups")
        out = theorems.hull(disc_transfer(U)).to_json()
    print(json.dumps(out))
    return EXIT_OK


def cmd_change(args) -> int:
    L = _lattice(args.spec)
    if not 0 <= args.sub < L.size:
        raise UsageError(f"subgroup index {args.sub} out of range (lattice has {L.size})")
    if args.op in ("restrict", "fixed-points"):
        T = generate(_relation(L, args.pairs))
        out = change.restrict(T, args.sub) if args.op == "restrict" else change.fixed_points(T, args.sub)
    else:
        target = L.embedding(args.sub).lattice if args.op in ("induce", "coinduce") else L.quotient(args.sub).lattice
        P = generate(_relation(target, args.pairs))
        if args.op == "induce":
            out = change.induce(P, L, args.sub)
        elif args.op == "coinduce":
            out = change.coinduce(P, L, args.sub)
        else:
            out = change.inflate(P, L, args.sub)
    print(json.dumps(out.to_json()))
    return EXIT_OK


def _describe(r: theorems.CheckReport) -> str:
    d = r.detail
    if r.verdict == theorems.SKIPPED:
        return f"skipped ({d.get('reason', 'infeasible')})"
    if r.theorem == "bisaturated" and r.verdict == theorems.HOLDS:
        return f"holds, {d['bisaturated']} = {d['normal']}"
    if r.theorem in ("saturated", "hamiltonian"):
        name = (r.witness or {}).get("name") or "see JSON"
        sat = d.get("saturated")
        text = "saturated" if sat else f"NOT saturated; witness {name}"
        return text if r.verdict == theorems.HOLDS else f"{text} (unexpected)"
    if r.theorem == "xia-lemmas":
        return f"{r.verdict}, {d.get('sum_dim_sq_gt1')} = {d.get('order_minus_abelianization')}"
    if r.theorem == "pq-implication":
        return f"{r.verdict} (H = {d.get('H')}, K = {d.get('K')})"
    if r.verdict == theorems.FAILS and r.witness.get("kind") == "universe":
        return f"{r.verdict}: {r.witness['field']} irr:{{{','.join(map(str, r.witness['support']))}}}"
    return r.verdict


def cmd_verify(args) -> int:
    budget = args.budget_ms
    if args.target in ("paper-default", "default"):
        if args.group:
            raise UsageError("a suite takes no group argument")
        reports = theorems.run_suite(budget_ms=budget)
    elif args.target in theorems.THEOREMS or args.target == "pq-implication":
        if not args.group:
            raise UsageError(f"theorem {args.target} needs a group")
        L = _lattice(args.group)
        if args.target == "pq-implication":
            triples = [(args.h, args.k)] if args.h is not None and args.k is not None else theorems.pq_triples(L)
            if not triples:
                raise UsageError(f"no subgroups of {args.group} satisfy the hypotheses")
            reports = [theorems.check_pq_transfer_implication(L, h, k, budget_ms=budget) for h, k in triples]
        elif args.target == "saturated":
            reports = [theorems.is_group_saturated(L, args.field, both=args.both, budget_ms=budget)]
        else:
            reports = [theorems.THEOREMS[args.target](L, budget_ms=budget)]
    elif args.target == "all":
        if not args.group:
            raise UsageError("'all' needs a group")
        reports = theorems.run_checks(args.group, budget)
    else:
        raise UsageError(f"unknown suite or theorem {args.target!r}")
    if args.json:
        print(json.dumps([r.to_json() for r in reports], indent=2))
    else:
        for r in reports:
            print(f"{r.theorem:<16} {r.group:<8} {_describe(r):<48} {r.millis:9.1f} ms")
    if any(r.verdict == theorems.FAILS for r in reports):
        return EXIT_FAIL
    if all(r.verdict == theorems.SKIPPED for r in reports):
        return EXIT_INFEASIBLE
    return EXIT_OK


# --- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ninfty", description="Transfer systems, universes and N-infinity checks for small finite groups.")
    p.add_argument("--budget-ms", type=float, default=theorems.DEFAULT_BUDGET_MS, help="time cap for scans (default 300000)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("group", help="subgroup lattice summary")
    g.add_argument("spec")
    fmt = g.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--dot", action="store_true")
    g.set_defaults(func=cmd_group)

    c = sub.add_parser("characters", help="complex character table")
    c.add_argument("spec")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_characters)

    t = sub.add_parser("transfer", help="enumerate, count, generate or test transfer systems")
    t.add_argument("action", choices=["enumerate", "count", "generate", "predicates"])
    t.add_argument("spec")
    t.add_argument("pairs", nargs="?", help="relation as 'i->j, k->l' (subgroup indices)")
    t.add_argument("--json", action="store_true")
    t.add_argument("--dot", action="store_true")
    t.set_defaults(func=cmd_transfer)

    u = sub.add_parser("universe", help="evaluate D, L, closure or hull on a universe")
    u.add_argument("spec")
    u.add_argument("literal", help="complete | trivial | regular:<N> | irr:{..} | index:{..}")
    u.add_argument("op", choices=["disc", "linear", "closure", "hull"])
    u.add_argument("--field", choices=[REAL, COMPLEX], default=REAL)
    u.set_defaults(func=cmd_universe)

    ch = sub.add_parser("change", help="change of group for transfer systems")
    ch.add_argument("op", choices=["restrict", "induce", "coinduce", "fixed-points", "inflate"])
    ch.add_argument("spec")
    ch.add_argument("sub", type=int, help="subgroup index (normal for fixed-points and inflate)")
    ch.add_argument("pairs", nargs="?", help="generating pairs, on G for restrict/fixed-points, else on H or G/N")
    ch.set_defaults(func=cmd_change)

    v = sub.add_parser("verify", help="run theorem checks")
    v.add_argument("target", help="paper-default | all | " + " | ".join(list(theorems.THEOREMS) + ["pq-implication"]))
    v.add_argument("group", nargs="?")
    v.add_argument("--field", choices=[REAL, COMPLEX], default=REAL)
    v.add_argument("--both", action="store_true", help="saturation: also report the other field")
    v.add_argument("--h", type=int)
    v.add_argument("--k", type=int)
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FeasibilityError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UsageError, GroupError, UniverseError, TransferError, CharacterError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
