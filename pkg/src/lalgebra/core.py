"""Finite L-algebra tables: validation, order structure, morphisms, canonical forms.

An algebra is stored as an n x n table of element indices with the logical
unit pinned at index 0, so ``table[i][j]`` is the index of ``x_i . x_j``.
Everything here is immutable and safe to share between workers.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    IndexOutOfRange,
    MalformedTable,
    NotAnLAlgebra,
    PropertyFalsified,
)

UNIT = 0

# identity names used as witness keys in classification reports
AX_UNIT = "unit"
AX_CYCLOID = "cycloid"
AX_ANTISYMMETRY = "antisymmetry"
AX_KL = "kl"
AX_CKL = "ckl"
AX_HILBERT = "hilbert"
AX_LINEAR = "linear"
AX_BOUNDED = "bounded"
AX_SIMPLE = "simple"


def _freeze_table(rows: Iterable[Iterable[int]]) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(v) for v in row) for row in rows)


@dataclass(frozen=True)
class AlgebraTable:
    """A finite magma given by its multiplication table, unit at index 0.

    Construction only checks well-formedness (shape and entry range); the
    L-algebra axioms are the business of :func:`validate`, which reports
    failures with witnesses instead of raising.
    """

    n: int
    table: tuple[tuple[int, ...], ...]
    names: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "table", _freeze_table(self.table))
        if self.names is not None:
            object.__setattr__(self, "names", tuple(str(s) for s in self.names))
        if self.n < 1:
            raise MalformedTable(f"need at least one element, got n={self.n}")
        if len(self.table) != self.n or any(len(r) != self.n for r in self.table):
            raise MalformedTable(f"table is not {self.n}x{self.n}")
        for i, row in enumerate(self.table):
            for j, v in enumerate(row):
                if not 0 <= v < self.n:
                    raise MalformedTable(f"entry ({i},{j}) = {v} out of range [0,{self.n})")
        if self.names is not None and len(self.names) != self.n:
            raise MalformedTable("names length does not match n")

    # -- basic access -------------------------------------------------

    def op(self, i: int, j: int) -> int:
        return self.table[i][j]

    def check_index(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexOutOfRange(f"index {i} out of range [0,{self.n})")
        return i

    def element_name(self, i: int) -> str:
        if self.names is not None:
            return self.names[i]
        return "1" if i == 0 else f"x{i}"

    @property
    def flat(self) -> tuple[int, ...]:
        return tuple(v for row in self.table for v in row)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.table, dtype=np.int64)

    def relabel(self, perm: Sequence[int]) -> "AlgebraTable":
        """Apply a permutation (``perm[old] = new``, with ``perm[0] == 0``)."""
        n = self.n
        if sorted(perm) != list(range(n)) or perm[0] != 0:
            raise MalformedTable("relabeling must be a permutation fixing index 0")
        new = [[0] * n for _ in range(n)]
        for i in range(n):
            ti = self.table[i]
            pi = perm[i]
            row = new[pi]
            for j in range(n):
                row[perm[j]] = perm[ti[j]]
        names = None
        if self.names is not None:
            names = [""] * n
            for i in range(n):
                names[perm[i]] = self.names[i]
            names = tuple(names)
        return AlgebraTable(n, _freeze_table(new), names)

    # -- text / JSON formats (format v1) ------------------------------

    def to_text(self) -> str:
        lines = [str(self.n)]
        for row in self.table:
            lines.append(" ".join(str(v) for v in row))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "AlgebraTable":
        tables = parse_table_stream(text)
        if len(tables) != 1:
            raise MalformedTable(f"expected exactly one table, found {len(tables)}")
        return tables[0]

    def to_json_dict(self) -> dict:
        d = {"n": self.n, "table": [list(r) for r in self.table]}
        if self.names is not None:
            d["names"] = list(self.names)
        return d

    @staticmethod
    def from_json_dict(d: dict) -> "AlgebraTable":
        try:
            n = int(d["n"])
            table = d["table"]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedTable(f"bad JSON table object: {exc}") from exc
        names = d.get("names")
        return AlgebraTable(n, _freeze_table(table), tuple(names) if names else None)


def parse_table_stream(text: str) -> list[AlgebraTable]:
    """Parse one or more text-format tables separated by blank lines.

    ``#`` starts a comment; the first number of each block is n, followed by
    n rows of n space-separated indices.
    """
    tokens_per_block: list[list[int]] = [[]]
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            if tokens_per_block[-1]:
                tokens_per_block.append([])
            continue
        try:
            tokens_per_block[-1].extend(int(tok) for tok in line.split())
        except ValueError as exc:
            raise MalformedTable(f"non-integer token in table file: {raw!r}") from exc
    tables = []
    for tokens in tokens_per_block:
        if not tokens:
            continue
        n = tokens[0]
        if n < 1 or len(tokens) != 1 + n * n:
            raise MalformedTable(f"block with n={n} has {len(tokens) - 1} entries, expected {n * n}")
        rows = [tokens[1 + i * n : 1 + (i + 1) * n] for i in range(n)]
        tables.append(AlgebraTable(n, _freeze_table(rows)))
    return tables


def load_table(path: str) -> AlgebraTable:
    """Load a single table from a `.json` or text-format file."""
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return AlgebraTable.from_json_dict(json.loads(text))
    return AlgebraTable.from_text(text)


# -- classification -----------------------------------------------------


@dataclass(frozen=True)
class ClassificationReport:
    """Boolean profile of a table, with a violating tuple per failed identity.

    ``witnesses`` maps an identity name to one concrete violating tuple of
    element indices; only identities that concretely fail carry a witness.
    """

    is_l: bool
    is_kl: bool
    is_ckl: bool
    is_hilbert: bool
    is_linear: bool
    is_bounded: bool
    is_simple: bool
    witnesses: dict = field(default_factory=dict)

    def flags(self) -> dict:
        return {
            "L": self.is_l,
            "KL": self.is_kl,
            "CKL": self.is_ckl,
            "Hilbert": self.is_hilbert,
            "linear": self.is_linear,
            "bounded": self.is_bounded,
            "simple": self.is_simple,
        }

    def to_json_dict(self) -> dict:
        return {
            "flags": self.flags(),
            "witnesses": {k: list(v) for k, v in self.witnesses.items()},
        }


def _first_bad(mask: np.ndarray) -> tuple[int, ...]:
    # mask is True where the identity is violated; argwhere returns
    # lexicographic order, so [0] is the first witness
    return tuple(int(v) for v in np.argwhere(mask)[0])


@lru_cache(maxsize=65536)
def _axiom_profile(table: AlgebraTable) -> ClassificationReport:
    """Identity-level classification only; is_simple is left False here.

    Kept separate so the ideal machinery can ask for the table's class
    without re-entering :func:`validate` (which needs ideals for is_simple).
    """
    n = table.n
    T = table.as_array()
    idx = np.arange(n)
    witnesses: dict = {}

    unit_bad_row = T[0] != idx
    unit_bad_col = T[:, 0] != 0
    unit_bad_diag = np.diagonal(T) != 0
    unit_ok = not (unit_bad_row.any() or unit_bad_col.any() or unit_bad_diag.any())
    if not unit_ok:
        if unit_bad_row.any():
            witnesses[AX_UNIT] = (0, int(np.argwhere(unit_bad_row)[0][0]))
        elif unit_bad_col.any():
            witnesses[AX_UNIT] = (int(np.argwhere(unit_bad_col)[0][0]), 0)
        else:
            i = int(np.argwhere(unit_bad_diag)[0][0])
            witnesses[AX_UNIT] = (i, i)

    # A[x,y,z] = (x.y).(x.z); the cycloid law is A[x,y,z] == A[y,x,z]
    A = T[T[:, :, None], T[:, None, :]]
    cyc_bad = A != A.transpose(1, 0, 2)
    cycloid_ok = not cyc_bad.any()
    if not cycloid_ok:
        witnesses[AX_CYCLOID] = _first_bad(cyc_bad)

    Z = T == 0
    anti_bad = Z & Z.T & ~np.eye(n, dtype=bool)
    antisym_ok = not anti_bad.any()
    if not antisym_ok:
        witnesses[AX_ANTISYMMETRY] = _first_bad(anti_bad)

    is_l = unit_ok and cycloid_ok and antisym_ok

    # x.(y.x) = 1
    K = T[idx[:, None], T.T]
    kl_bad = K != 0
    if kl_bad.any():
        witnesses[AX_KL] = _first_bad(kl_bad)
    # C[x,y,z] = x.(y.z); the CKL law is C[x,y,z] == C[y,x,z]
    C = T[idx[:, None, None], T[None, :, :]]
    ckl_bad = C != C.transpose(1, 0, 2)
    if ckl_bad.any():
        witnesses[AX_CKL] = _first_bad(ckl_bad)
    # Hilbert law: x.(y.z) == (x.y).(x.z)
    hil_bad = C != A
    if hil_bad.any():
        witnesses[AX_HILBERT] = _first_bad(hil_bad)

    lin_bad = ~Z & ~Z.T
    if lin_bad.any():
        witnesses[AX_LINEAR] = _first_bad(lin_bad)

    minima = [i for i in range(n) if Z[i].all()]
    bounded = len(minima) == 1 if n > 1 else True
    if not bounded:
        # two distinct minimal elements witness the missing minimum
        minimal = [i for i in range(n) if not (Z[:, i] & ~np.eye(n, dtype=bool)[:, i]).any()]
        witnesses[AX_BOUNDED] = tuple(minimal[:2])

    is_kl = is_l and not kl_bad.any()
    is_ckl = is_l and not ckl_bad.any()
    is_hilbert = is_l and not hil_bad.any()
    is_linear = is_l and not lin_bad.any()
    is_bounded = is_l and bounded

    return ClassificationReport(
        is_l=is_l,
        is_kl=is_kl,
        is_ckl=is_ckl,
        is_hilbert=is_hilbert,
        is_linear=is_linear,
        is_bounded=is_bounded,
        is_simple=False,
        witnesses=witnesses,
    )


@lru_cache(maxsize=65536)
def validate(table: AlgebraTable) -> ClassificationReport:
    """Classify a table by exhaustive check of every axiom and subclass law."""
    profile = _axiom_profile(table)
    witnesses = dict(profile.witnesses)
    is_simple = False
    if profile.is_l:
        from . import ideals  # deferred: ideals builds on this module

        n = table.n
        masks = ideals.ideal_masks(table)
        is_simple = n >= 2 and len(masks) == 2
        if not is_simple and n >= 2:
            nontrivial = [m for m in masks if m != 1 and m != (1 << n) - 1]
            if nontrivial:
                witnesses[AX_SIMPLE] = tuple(
                    i for i in range(n) if nontrivial[0] >> i & 1
                )
    return ClassificationReport(
        is_l=profile.is_l,
        is_kl=profile.is_kl,
        is_ckl=profile.is_ckl,
        is_hilbert=profile.is_hilbert,
        is_linear=profile.is_linear,
        is_bounded=profile.is_bounded,
        is_simple=is_simple,
        witnesses=witnesses,
    )


def require_l(table: AlgebraTable) -> None:
    report = _axiom_profile(table)
    if not report.is_l:
        raise NotAnLAlgebra(f"table violates {sorted(set(report.witnesses) & {AX_UNIT, AX_CYCLOID, AX_ANTISYMMETRY})}")


# -- natural order -------------------------------------------------------


@dataclass(frozen=True)
class OrderStructure:
    """The natural partial order x <= y iff x.y = 1, with derived data."""

    leq: tuple[tuple[bool, ...], ...]
    hasse_edges: tuple[tuple[int, int], ...]  # (lower, upper) covering pairs
    minimal_elements: frozenset
    invariant_elements: frozenset
    prime_elements: frozenset

    def downset(self, x: int) -> frozenset:
        return frozenset(y for y in range(len(self.leq)) if self.leq[y][x])

    def upset(self, x: int) -> frozenset:
        return frozenset(y for y in range(len(self.leq)) if self.leq[x][y])

    def is_chain(self, subset: Iterable[int]) -> bool:
        elems = list(subset)
        return all(
            self.leq[a][b] or self.leq[b][a] for a, b in itertools.combinations(elems, 2)
        )


@lru_cache(maxsize=65536)
def order_structure(table: AlgebraTable) -> OrderStructure:
    require_l(table)
    n = table.n
    t = table.table
    leq = tuple(tuple(t[x][y] == 0 for y in range(n)) for x in range(n))
    for x in range(n):
        for y in range(n):
            if leq[x][y]:
                for z in range(n):
                    if leq[y][z] and not leq[x][z]:
                        raise PropertyFalsified(f"natural order not transitive at ({x},{y},{z})")
    lt = lambda a, b: a != b and leq[a][b]
    covers = []
    for a in range(n):
        for b in range(n):
            if lt(a, b) and not any(lt(a, c) and lt(c, b) for c in range(n)):
                covers.append((a, b))
    minimal = frozenset(a for a in range(n) if not any(lt(b, a) for b in range(n)))
    invariant = frozenset(
        x for x in range(n) if all(t[y][x] == x for y in range(n) if lt(x, y))
    )
    prime = frozenset(
        x
        for x in range(1, n)
        if all(leq[t[y][x]][x] for y in range(n) if lt(x, y))
    )
    return OrderStructure(
        leq=leq,
        hasse_edges=tuple(sorted(covers)),
        minimal_elements=minimal,
        invariant_elements=invariant,
        prime_elements=prime,
    )


def downset(table: AlgebraTable, x: int) -> frozenset:
    table.check_index(x)
    return order_structure(table).downset(x)


def upset(table: AlgebraTable, x: int) -> frozenset:
    table.check_index(x)
    return order_structure(table).upset(x)


# -- morphisms -----------------------------------------------------------


@dataclass(frozen=True)
class Morphism:
    """A unital map with f(x.y) = f(x).f(y)."""

    source: AlgebraTable
    target: AlgebraTable
    map: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "map", tuple(int(v) for v in self.map))
        f = self.map
        if len(f) != self.source.n:
            raise MalformedTable("morphism map has wrong length")
        if any(not 0 <= v < self.target.n for v in f):
            raise IndexOutOfRange("morphism map value out of target range")
        if f[UNIT] != UNIT:
            raise MalformedTable("morphism must send unit to unit")
        s, t = self.source.table, self.target.table
        for x in range(self.source.n):
            for y in range(self.source.n):
                if f[s[x][y]] != t[f[x]][f[y]]:
                    raise MalformedTable(f"map is not multiplicative at ({x},{y})")

    def __call__(self, x: int) -> int:
        return self.map[x]

    def kernel(self) -> frozenset:
        return frozenset(x for x in range(self.source.n) if self.map[x] == UNIT)

    def is_surjective(self) -> bool:
        return len(set(self.map)) == self.target.n


def _endo_ok_prefix(t, f, k: int) -> bool:
    # check f(a.b) = f(a).f(b) on pairs whose inputs and product are all <= k
    for a in range(k + 1):
        ta = t[a]
        for b in range(k + 1):
            v = ta[b]
            if v <= k and f[v] != t[f[a]][f[b]]:
                return False
    return True


@lru_cache(maxsize=8192)
def endomorphisms(table: AlgebraTable) -> tuple[Morphism, ...]:
    """All unital multiplicative self-maps, in lexicographic map order."""
    require_l(table)
    n = table.n
    t = table.table
    found: list[tuple[int, ...]] = []
    f = [0] * n

    def extend(k: int):
        if k == n:
            found.append(tuple(f))
            return
        for v in range(n):
            f[k] = v
            if _endo_ok_prefix(t, f, k):
                extend(k + 1)

    if n == 1:
        found.append((0,))
    else:
        extend(1)
    return tuple(Morphism(table, table, m) for m in found)


# -- canonical forms -----------------------------------------------------


def _invariant_keys(table: AlgebraTable) -> list[tuple]:
    """Per-element isomorphism-invariant keys used to cut the permutation search."""
    order = order_structure(table)
    n = table.n
    indeg = [0] * n
    outdeg = [0] * n
    for a, b in order.hasse_edges:
        outdeg[a] += 1  # edges to elements above
        indeg[b] += 1
    keys = []
    for x in range(n):
        keys.append(
            (
                sum(order.leq[y][x] for y in range(n)),  # |downset|
                sum(order.leq[x][y] for y in range(n)),  # |upset|
                indeg[x],
                outdeg[x],
                x in order.invariant_elements,
                x in order.prime_elements,
                x in order.minimal_elements,
            )
        )
    return keys


def _apply_perm_flat(table: tuple[tuple[int, ...], ...], perm: Sequence[int], n: int) -> tuple[int, ...]:
    flat = [0] * (n * n)
    for i in range(n):
        ti = table[i]
        base = perm[i] * n
        for j in range(n):
            flat[base + perm[j]] = perm[ti[j]]
    return tuple(flat)


@lru_cache(maxsize=65536)
def canonical_form(table: AlgebraTable) -> AlgebraTable:
    """Orbit-canonical relabeling: index 0 fixed, flattened table minimized.

    Elements are first partitioned by order-theoretic invariants; only
    permutations compatible with the (sorted) partition are tried, which keeps
    the brute-force part tiny at the sizes this package enumerates.
    """
    require_l(table)
    n = table.n
    if n <= 2:
        return AlgebraTable(n, table.table)
    keys = _invariant_keys(table)
    groups: dict[tuple, list[int]] = {}
    for x in range(1, n):
        groups.setdefault(keys[x], []).append(x)
    ordered_groups = [groups[k] for k in sorted(groups)]
    best = None
    # perm[old] = new; each group occupies a contiguous block of new indices
    starts = []
    pos = 1
    for g in ordered_groups:
        starts.append(pos)
        pos += len(g)
    for arranges in itertools.product(*(itertools.permutations(g) for g in ordered_groups)):
        perm = [0] * n
        for g_idx, arrangement in enumerate(arranges):
            for offset, old in enumerate(arrangement):
                perm[old] = starts[g_idx] + offset
        flat = _apply_perm_flat(table.table, perm, n)
        if best is None or flat < best:
            best = flat
    rows = tuple(tuple(best[i * n : (i + 1) * n]) for i in range(n))
    return AlgebraTable(n, rows)


def isomorphic(a: AlgebraTable, b: AlgebraTable) -> bool:
    if a.n != b.n:
        return False
    return canonical_form(a).table == canonical_form(b).table
