"""Complex character tables of small groups via class-sum eigenvectors.

The class multiplication constants define commuting matrices whose common
eigenvectors are the central characters; a random real combination of them
separates the eigenspaces. Everything consumed downstream is rounded to an
integer and checked against ``TOL`` first.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .groups import MAX_ORDER, GroupError, GroupTable, SubgroupLattice, bits, build_group

TOL = 1e-6
DEFAULT_SEED = 1729
MAX_RETRIES = 8


class CharacterError(ArithmeticError):
    pass


def default_seed() -> int:
    return int(os.environ.get("NINFTY_SEED", DEFAULT_SEED))


def round_int(x, what: str = "value") -> int:
    x = complex(x)
    r = round(x.real)
    if abs(x - r) > TOL:
        raise CharacterError(f"{what} {x} is not integral within {TOL}")
    return int(r)


@dataclass(frozen=True)
class ConjugacyClasses:
    class_of: tuple[int, ...]
    representatives: tuple[int, ...]
    sizes: tuple[int, ...]

    def __len__(self):
        return len(self.sizes)


def conjugacy_classes(G: GroupTable) -> ConjugacyClasses:
    class_of = [-1] * G.order
    reps, sizes = [], []
    for x in range(G.order):
        if class_of[x] >= 0:
            continue
        orbit = {G.conj(g, x) for g in range(G.order)}
        for y in orbit:
            class_of[y] = len(reps)
        reps.append(x)
        sizes.append(len(orbit))
    return ConjugacyClasses(tuple(class_of), tuple(reps), tuple(sizes))


class CharacterTable:
    """Irreducible characters as rows, one column per conjugacy class.

    Row 0 is the trivial character; rows are ordered by degree and then by
    rounded values, descending.
    """

    def __init__(self, group: GroupTable, classes: ConjugacyClasses, values: np.ndarray):
        self.group = group
        self.classes = classes
        self.values = np.asarray(values, dtype=complex)
        self.values.setflags(write=False)
        self.dims = tuple(round_int(v, "degree") for v in self.values[:, 0])
        self.trivial_index = 0
        self._validate()

    def __len__(self):
        return len(self.dims)

    def __repr__(self):
        return f"CharacterTable({self.group.name}, dims={self.dims})"

    @cached_property
    def element_values(self) -> np.ndarray:
        """``|Irr| x |G|`` array of character values on elements."""
        return self.values[:, list(self.classes.class_of)]

    @cached_property
    def conj_pairing(self) -> tuple[int, ...]:
        out = []
        conj = self.values.conj()
        for a in range(len(self)):
            diffs = np.abs(self.values - conj[a]).max(axis=1)
            b = int(np.argmin(diffs))
            if diffs[b] > TOL:
                raise CharacterError("complex conjugate of a row is missing")
            out.append(b)
        return tuple(out)

    @cached_property
    def real_rows(self) -> tuple[int, ...]:
        return tuple(a for a, b in enumerate(self.conj_pairing) if a == b)

    def inner(self, a: np.ndarray, b: np.ndarray) -> complex:
        """Class-weighted inner product of two class functions given per class."""
        w = np.asarray(self.classes.sizes)
        return complex(np.sum(w * a * np.conj(b)) / self.group.order)

    def _validate(self) -> None:
        n = self.group.order
        r = len(self.classes)
        if self.values.shape != (r, r):
            raise CharacterError(f"expected {r} irreducibles, got {self.values.shape[0]}")
        w = np.asarray(self.classes.sizes)
        gram = (self.values * w) @ self.values.conj().T / n
        resid = np.abs(gram - np.eye(r)).max()
        if resid > TOL:
            raise CharacterError(f"row orthogonality residual {resid:.2e} for {self.group.name}")
        if sum(d * d for d in self.dims) != n:
            raise CharacterError("squared degrees do not sum to the group order")
        if np.abs(self.values[0] - 1).max() > TOL:
            raise CharacterError("row 0 is not the trivial character")

    def to_json(self) -> dict:
        return {
            "group": self.group.name,
            "classes": list(self.classes.sizes),
            "chars": [[[float(z.real), float(z.imag)] for z in row] for row in self.values],
        }


def table_from_json(data: dict | str, G: GroupTable | None = None) -> CharacterTable:
    if isinstance(data, str):
        data = json.loads(data)
    G = G or build_group(data["group"])
    classes = conjugacy_classes(G)
    if list(classes.sizes) != list(data["classes"]):
        raise CharacterError("class sizes in the JSON do not match the group")
    values = np.array([[complex(re, im) for re, im in row] for row in data["chars"]])
    return CharacterTable(G, classes, values)


def class_constants(G: GroupTable, cc: ConjugacyClasses) -> np.ndarray:
    """``c[j, k, l]`` = number of ``x`` in class ``j`` with ``x^-1 z`` in class ``k``, ``z`` the rep of ``l``."""
    r = len(cc)
    c = np.zeros((r, r, r))
    cls = np.asarray(cc.class_of)
    inv = np.asarray(G.inv)
    for l, z in enumerate(cc.representatives):
        ys = G.mul[inv, z]
        np.add.at(c, (cls, cls[ys], l), 1)
    return c


def _row_key(row: np.ndarray):
    vals = np.round(row, 6) + 0.0
    return tuple((-float(z.real) + 0.0, -float(z.imag) + 0.0) for z in vals)


def character_table(G: GroupTable, seed: int | None = None) -> CharacterTable:
    if G.order > MAX_ORDER:
        raise GroupError(f"order {G.order} > {MAX_ORDER}")
    cc = conjugacy_classes(G)
    r = len(cc)
    sizes = np.asarray(cc.sizes, dtype=float)
    c = class_constants(G, cc)
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    last = None
    for _ in range(MAX_RETRIES):
        coeffs = rng.standard_normal(r)
        A = np.tensordot(coeffs, c, axes=1)
        w, vecs = np.linalg.eig(A)
        gaps = np.abs(w[:, None] - w[None, :]) + np.eye(r) * 1e9
        if r > 1 and gaps.min() < 1e-6 * max(1.0, np.abs(w).max()):
            last = "eigenvalue collision"
            continue
        rows = []
        for v in vecs.T:
            omega = v / v[0]
            deg2 = G.order / np.sum(np.abs(omega) ** 2 / sizes)
            rows.append(np.sqrt(deg2) * omega / sizes)
        rows.sort(key=lambda row: (round(row[0].real), _row_key(row)))
        try:
            return CharacterTable(G, cc, np.array(rows))
        except CharacterError as exc:
            last = str(exc)
    raise CharacterError(f"character table for {G.name} failed after {MAX_RETRIES} tries: {last}")


@dataclass(frozen=True)
class ClassFusion:
    """``maps[c]`` is the class of ``G`` containing class ``c`` of the subgroup."""

    maps: tuple[int, ...]


def class_fusion(sub: CharacterTable, parent: CharacterTable, elements: tuple[int, ...]) -> ClassFusion:
    """``elements[x]`` is the parent index of element ``x`` of the subgroup."""
    return ClassFusion(tuple(parent.classes.class_of[elements[rep]] for rep in sub.classes.representatives))


def fixed_space_dim(chi: np.ndarray, K: int) -> int:
    """``dim V^K`` from the element values of ``V``'s character and the mask of ``K``."""
    els = bits(K)
    return round_int(np.sum(chi[els]) / len(els), "fixed-space dimension")


def restriction_multiplicity(chi_G: np.ndarray, chi_H: np.ndarray, fusion: ClassFusion, sub: CharacterTable) -> int:
    """``<res chi_G, chi_H>_H``; ``chi_G`` per class of ``G``, ``chi_H`` per class of ``H``."""
    restricted = np.asarray(chi_G)[list(fusion.maps)]
    return round_int(sub.inner(restricted, np.asarray(chi_H)), "restriction multiplicity")


def appears_in_induced(W: np.ndarray, V: np.ndarray, K: int) -> bool:
    """Whether the ``H``-irreducible ``W`` occurs in ``ind_K^H res_K V``.

    By Frobenius reciprocity this is ``<res_K W, res_K V>_K > 0``; both
    arguments are element-value arrays in a common ambient indexing.
    """
    els = bits(K)
    m = round_int(np.sum(W[els] * np.conj(V[els])) / len(els), "induced multiplicity")
    return m > 0


def lattice_table(L: SubgroupLattice) -> CharacterTable:
    key = ("character_table",)
    if key not in L._cache:
        L._cache[key] = character_table(L.group)
    return L._cache[key]


def abelianization_order(L: SubgroupLattice) -> int:
    return L.group.order // L.orders[L.commutator]
