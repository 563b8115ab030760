"""Ideals of finite L-algebras: predicates, generated ideals, the ideal
lattice as an L-algebra, prime ideals, spectra, quotients and joins.

Subsets are bitmasks internally (bit i = element i); the public surface deals
in :class:`IdealSet` objects carrying frozensets.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

from . import core
from .core import AlgebraTable, Morphism, validate
from .errors import (
    CongruenceUndefined,
    IndexOutOfRange,
    NotAnIdeal,
    NotProper,
    PropertyFalsified,
)


def mask_of(members: Iterable[int], n: int) -> int:
    m = 0
    for x in members:
        if not 0 <= x < n:
            raise IndexOutOfRange(f"element {x} out of range [0,{n})")
        m |= 1 << x
    return m


def members_of(mask: int, n: int) -> frozenset:
    return frozenset(x for x in range(n) if mask >> x & 1)


def _sort_key(mask: int, n: int):
    return (mask.bit_count(), tuple(x for x in range(n) if mask >> x & 1))


# -- closure machinery ----------------------------------------------------


@lru_cache(maxsize=32768)
def _occurrences(table: AlgebraTable) -> tuple[tuple[tuple[int, int], ...], ...]:
    """occurrences[v] = all cells (x, y) with x.y = v (drives (I1) incrementally)."""
    n = table.n
    occ: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for x in range(n):
        row = table.table[x]
        for y in range(n):
            occ[row[y]].append((x, y))
    return tuple(tuple(o) for o in occ)


def _conditions_for(table: AlgebraTable) -> str:
    """Closure conditions sufficient for this table's class.

    For CKL algebras (I1) alone suffices, for KL algebras (I1)+(I3); the
    general case saturates all four.  The equivalence of the reduced
    condition sets is independently cross-checked in :func:`is_ideal`.
    """
    rep = core._axiom_profile(table)
    if rep.is_ckl:
        return "1"
    if rep.is_kl:
        return "13"
    return "1234"


def closure_mask(table: AlgebraTable, seed: int, base: int = 1) -> int:
    """Least ideal containing ``base | seed``; ``base`` must already be closed.

    Worklist closure: only elements not in ``base`` are processed, so
    extending a known ideal by one generator costs little.
    """
    n = table.n
    t = table.table
    conds = _conditions_for(table)
    occ = _occurrences(table)
    mask = base | seed | 1
    queue = [x for x in range(n) if (mask >> x & 1) and not (base >> x & 1) and x != 0]
    seen_queue = set(queue)

    def add(v: int):
        nonlocal mask
        if not mask >> v & 1:
            mask |= 1 << v
            queue.append(v)
            seen_queue.add(v)

    while queue:
        u = queue.pop()
        tu = t[u]
        for y in range(n):
            v = tu[y]
            if mask >> v & 1:  # (I1): u in I and u.y in I => y in I
                add(y)
            if "2" in conds:
                add(t[y][u])  # (I2): y.u
            if "3" in conds:
                add(t[v][y])  # (I3): (u.y).y
            if "4" in conds:
                add(t[y][v])  # (I4): y.(u.y)
        for x, y in occ[u]:  # u just became a product x.y with x in I
            if mask >> x & 1:
                add(y)
    return mask


@lru_cache(maxsize=32768)
def gen_masks(table: AlgebraTable) -> tuple[int, ...]:
    """Principal ideals: gen_masks(X)[x] is the bitmask of <x>."""
    return tuple(closure_mask(table, 1 << x) for x in range(table.n))


@lru_cache(maxsize=32768)
def ideal_masks(table: AlgebraTable) -> tuple[int, ...]:
    """All ideals, as bitmasks sorted by (cardinality, member tuple).

    Breadth-first closure search: start from {1} and repeatedly extend each
    known ideal by one missing generator.  Every ideal is reachable this way
    because adding any of its elements to a smaller sub-ideal closes to an
    ideal still inside it.
    """
    n = table.n
    start = closure_mask(table, 0)
    seen = {start}
    frontier = [start]
    while frontier:
        m = frontier.pop()
        for x in range(n):
            if not m >> x & 1:
                m2 = closure_mask(table, 1 << x, base=m)
                if m2 not in seen:
                    seen.add(m2)
                    frontier.append(m2)
    return tuple(sorted(seen, key=lambda m: _sort_key(m, n)))


# -- public ideal objects -------------------------------------------------


@dataclass(frozen=True)
class IdealSet:
    """A verified ideal of a parent algebra."""

    parent: AlgebraTable
    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(x) for x in self.members))
        check = is_ideal(self.parent, self.members)
        if not check.ok:
            raise NotAnIdeal(
                f"{sorted(self.members)} violates ({check.failed}) with witness {check.witness}"
            )

    @property
    def mask(self) -> int:
        return mask_of(self.members, self.parent.n)

    @property
    def is_proper(self) -> bool:
        return len(self.members) < self.parent.n

    def sorted_members(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))

    def __contains__(self, x: int) -> bool:
        return x in self.members

    def __le__(self, other: "IdealSet") -> bool:
        return self.members <= other.members


@dataclass(frozen=True)
class IdealCheck:
    """Outcome of an ideal test: ``failed`` names the first broken condition."""

    ok: bool
    failed: Optional[str] = None
    witness: Optional[tuple] = None


def _ideal_violation(table: AlgebraTable, mask: int) -> Optional[tuple[str, tuple]]:
    n = table.n
    t = table.table
    if not mask & 1:
        return ("unit", (0,))
    for x in range(n):
        if not mask >> x & 1:
            continue
        tx = t[x]
        for y in range(n):
            if (mask >> tx[y] & 1) and not (mask >> y & 1):
                return ("I1", (x, y))
    for x in range(n):
        if not mask >> x & 1:
            continue
        tx = t[x]
        for y in range(n):
            if not mask >> t[y][x] & 1:
                return ("I2", (x, y))
            if not mask >> t[tx[y]][y] & 1:
                return ("I3", (x, y))
            if not mask >> t[y][tx[y]] & 1:
                return ("I4", (x, y))
    return None


def is_ideal(table: AlgebraTable, subset: Iterable[int]) -> IdealCheck:
    """Test (I1)-(I4) and report the first violated condition with a witness.

    Witness tuples are (x, y) with x in the subset.  On KL tables the verdict
    is cross-checked against the reduced condition set (I1)+(I3), and on CKL
    tables against 1-in-I plus (I1); a mismatch would falsify the reduction
    and raises.
    """
    n = table.n
    mask = subset if isinstance(subset, int) else mask_of(subset, n)
    bad = _ideal_violation(table, mask)
    verdict = bad is None

    rep = validate(table)
    if rep.is_l:
        t = table.table
        if rep.is_kl:
            reduced = bool(mask & 1)
            if reduced:
                for x in range(n):
                    if not mask >> x & 1:
                        continue
                    tx = t[x]
                    for y in range(n):
                        if ((mask >> tx[y] & 1) and not mask >> y & 1) or not mask >> t[tx[y]][y] & 1:
                            reduced = False
                            break
                    if not reduced:
                        break
            if rep.is_ckl:
                ckl_reduced = bool(mask & 1)
                if ckl_reduced:
                    for x in range(n):
                        if not mask >> x & 1:
                            continue
                        tx = t[x]
                        for y in range(n):
                            if (mask >> tx[y] & 1) and not mask >> y & 1:
                                ckl_reduced = False
                                break
                        if not ckl_reduced:
                            break
                if ckl_reduced != verdict:
                    raise PropertyFalsified(
                        f"CKL ideal reduction disagrees on {sorted(members_of(mask, n))}"
                    )
            if reduced != verdict:
                raise PropertyFalsified(
                    f"KL ideal reduction disagrees on {sorted(members_of(mask, n))}"
                )

    if verdict:
        return IdealCheck(True)
    return IdealCheck(False, failed=bad[0], witness=bad[1])


def generated_ideal(table: AlgebraTable, seed: Iterable[int]) -> IdealSet:
    """Least ideal containing the seed elements."""
    mask = closure_mask(table, mask_of(seed, table.n))
    return IdealSet(table, members_of(mask, table.n))


# -- the ideal lattice ----------------------------------------------------


@dataclass(frozen=True)
class IdealLattice:
    """All ideals of an algebra with their L-algebra product and inclusion order.

    ``ideals`` is sorted by (cardinality, member tuple); ``product[i][j]`` is
    the index of ideals[i].ideals[j]; the unit of the ideal L-algebra is the
    whole algebra (the last entry).
    """

    parent: AlgebraTable
    ideals: tuple[IdealSet, ...]
    product: tuple[tuple[int, ...], ...]
    inclusion: tuple[tuple[bool, ...], ...]
    meet_table: tuple[tuple[int, ...], ...]
    join_table: tuple[tuple[int, ...], ...]

    @property
    def masks(self) -> tuple[int, ...]:
        return tuple(i.mask for i in self.ideals)

    def index_of(self, ideal) -> int:
        mask = ideal.mask if isinstance(ideal, IdealSet) else mask_of(ideal, self.parent.n)
        for k, i in enumerate(self.ideals):
            if i.mask == mask:
                return k
        raise NotAnIdeal(f"{ideal} is not an ideal of this algebra")

    def as_algebra(self) -> tuple[AlgebraTable, tuple[int, ...]]:
        """The ideal L-algebra as a table with the unit (= X) moved to index 0.

        Returns the table plus the lattice-index order of its elements.
        """
        k = len(self.ideals)
        order = (k - 1,) + tuple(range(k - 1))  # X first, rest keep their order
        pos = {lat: alg for alg, lat in enumerate(order)}
        rows = tuple(
            tuple(pos[self.product[order[a]][order[b]]] for b in range(k)) for a in range(k)
        )
        return AlgebraTable(k, rows), order

    def to_json_dict(self) -> dict:
        k = len(self.ideals)
        return {
            "n": self.parent.n,
            "ideal_count": k,
            "ideals": [list(i.sorted_members()) for i in self.ideals],
            "product": [list(row) for row in self.product],
            "inclusion": [[bool(v) for v in row] for row in self.inclusion],
        }


def _lattice_tables_python(n, masks, gens):
    k = len(masks)
    index = {m: i for i, m in enumerate(masks)}
    sizes = [m.bit_count() for m in masks]
    product = [[0] * k for _ in range(k)]
    meet = [[0] * k for _ in range(k)]
    join = [[0] * k for _ in range(k)]
    by_size = sorted(range(k), key=lambda i: sizes[i])
    for a in range(k):
        ma = masks[a]
        for b in range(k):
            mb = masks[b]
            pm = 0
            for x in range(n):
                if gens[x] & ma & ~mb == 0:
                    pm |= 1 << x
            if pm not in index:
                raise PropertyFalsified("ideal product left the ideal lattice")
            product[a][b] = index[pm]
            mm = ma & mb
            if mm not in index:
                raise PropertyFalsified("ideal intersection is not an ideal")
            meet[a][b] = index[mm]
            u = ma | mb
            for c in by_size:
                if u & ~masks[c] == 0:
                    join[a][b] = c
                    break
    return product, meet, join


def _lattice_tables_numpy(n, masks, gens):
    k = len(masks)
    M = np.zeros((k, n), dtype=bool)
    for i, m in enumerate(masks):
        for x in range(n):
            if m >> x & 1:
                M[i, x] = True
    G = np.zeros((n, n), dtype=bool)
    for x, g in enumerate(gens):
        for y in range(n):
            if g >> y & 1:
                G[x, y] = True
    notM = (~M).astype(np.uint8)
    # prod_raw[i, x, j] = #y with gen[x,y] & masks[i,y] & ~masks[j,y]
    T1 = (M[:, None, :] & G[None, :, :]).astype(np.uint8)
    prod_raw = T1.reshape(k * n, n) @ notM.T
    prod_vec = (prod_raw.reshape(k, n, k) == 0).transpose(0, 2, 1)  # (k,k,n)

    key_of = {M[i].tobytes(): i for i in range(k)}
    sizes = M.sum(axis=1)

    def lookup(vec3, what):
        out = np.empty((k, k), dtype=np.int64)
        for a in range(k):
            for b in range(k):
                key = vec3[a, b].tobytes()
                if key not in key_of:
                    raise PropertyFalsified(f"ideal {what} left the ideal lattice")
                out[a, b] = key_of[key]
        return out

    product = lookup(prod_vec, "product")
    meet = lookup(M[:, None, :] & M[None, :, :], "intersection")

    U = (M[:, None, :] | M[None, :, :]).astype(np.uint8).reshape(k * k, n)
    not_sup = (U @ notM.T) > 0  # (k*k, k): True where masks[l] misses something
    size_grid = np.where(not_sup, np.int64(n + 1), sizes[None, :].astype(np.int64))
    join = size_grid.argmin(axis=1).reshape(k, k)
    return (
        [[int(product[a][b]) for b in range(k)] for a in range(k)],
        [[int(meet[a][b]) for b in range(k)] for a in range(k)],
        [[int(join[a][b]) for b in range(k)] for a in range(k)],
    )


@lru_cache(maxsize=32768)
def all_ideals(table: AlgebraTable) -> IdealLattice:
    """Compute the full ideal lattice; fails loudly if any structural claim
    (closure of the product, distributivity, L-algebra validation) breaks."""
    core.require_l(table)
    n = table.n
    masks = ideal_masks(table)
    gens = gen_masks(table)
    k = len(masks)
    if k * n >= 1500:
        product, meet, join = _lattice_tables_numpy(n, masks, gens)
    else:
        product, meet, join = _lattice_tables_python(n, masks, gens)

    # the join found by minimal-superset lookup must be the closure of the union
    for a in range(0, k, max(1, k // 8)):
        for b in range(0, k, max(1, k // 8)):
            expect = closure_mask(table, masks[a] | masks[b])
            if masks[join[a][b]] != expect:
                raise PropertyFalsified("lattice join disagrees with ideal closure")

    # distributivity: a ^ (b v c) == (a ^ b) v (a ^ c)
    mt = meet
    jt = join
    for a in range(k):
        for b in range(k):
            for c in range(k):
                if mt[a][jt[b][c]] != jt[mt[a][b]][mt[a][c]]:
                    raise PropertyFalsified(
                        f"ideal lattice is not distributive at ({a},{b},{c})"
                    )

    inclusion = tuple(
        tuple(masks[a] & ~masks[b] == 0 for b in range(k)) for a in range(k)
    )
    ideals = tuple(IdealSet(table, members_of(m, n)) for m in masks)
    lattice = IdealLattice(
        parent=table,
        ideals=ideals,
        product=tuple(tuple(row) for row in product),
        inclusion=inclusion,
        meet_table=tuple(tuple(row) for row in mt),
        join_table=tuple(tuple(row) for row in jt),
    )
    alg, _ = lattice.as_algebra()
    rep = validate(alg)
    if not rep.is_l:
        raise PropertyFalsified("ideal product table is not an L-algebra")
    return lattice


def ideal_product(lattice: IdealLattice, I: IdealSet, J: IdealSet) -> IdealSet:
    """I.J = {x | <x> n I is contained in J} (the containment read non-strictly)."""
    a, b = lattice.index_of(I), lattice.index_of(J)
    result = lattice.ideals[lattice.product[a][b]]
    rm, im, jm = result.mask, I.mask, J.mask
    if rm & im & ~jm != 0:
        raise PropertyFalsified("(I.J) n I not contained in J")
    for km in lattice.masks:
        if km & im & ~jm == 0 and km & ~rm != 0:
            raise PropertyFalsified("I.J is not maximal among K with K n I <= J")
    return result


def ideal_join(lattice: IdealLattice, I: IdealSet, J: IdealSet) -> IdealSet:
    a, b = lattice.index_of(I), lattice.index_of(J)
    return lattice.ideals[lattice.join_table[a][b]]


def is_prime_ideal(lattice: IdealLattice, P: IdealSet) -> bool:
    """P proper is prime iff every ideal I has I <= P or I.P <= P."""
    p = lattice.index_of(P)
    if not P.is_proper:
        raise NotProper("the whole algebra is never a prime ideal")
    for i in range(len(lattice.ideals)):
        if lattice.inclusion[i][p]:
            continue
        if not lattice.inclusion[lattice.product[i][p]][p]:
            return False
    return True


def is_prime_by_meets(lattice: IdealLattice, P: IdealSet) -> bool:
    """Meet characterization: I1 n I2 <= P forces I1 <= P or I2 <= P."""
    p = lattice.index_of(P)
    if not P.is_proper:
        raise NotProper("the whole algebra is never a prime ideal")
    k = len(lattice.ideals)
    incl = lattice.inclusion
    for a in range(k):
        if incl[a][p]:
            continue
        for b in range(a, k):
            if incl[b][p]:
                continue
            if incl[lattice.meet_table[a][b]][p]:
                return False
    return True


@dataclass(frozen=True)
class Spectrum:
    """Prime ideals plus the open-set basis U_I = {P : I not <= P}."""

    lattice: IdealLattice
    primes: tuple[IdealSet, ...]
    basis: tuple[tuple[IdealSet, frozenset], ...]

    def to_json_dict(self) -> dict:
        return {
            "primes": [list(p.sorted_members()) for p in self.primes],
            "basis": [
                {"ideal": list(i.sorted_members()), "open": sorted(open_set)}
                for i, open_set in self.basis
            ],
        }


@lru_cache(maxsize=32768)
def spectrum(table: AlgebraTable) -> Spectrum:
    lattice = all_ideals(table)
    primes = tuple(
        p for p in lattice.ideals if p.is_proper and is_prime_ideal(lattice, p)
    )
    basis = []
    for i in lattice.ideals:
        im = i.mask
        opens = frozenset(
            idx for idx, p in enumerate(primes) if im & ~p.mask != 0
        )
        basis.append((i, opens))
    return Spectrum(lattice=lattice, primes=primes, basis=tuple(basis))


def is_simple(table: AlgebraTable) -> bool:
    core.require_l(table)
    return table.n >= 2 and len(ideal_masks(table)) == 2


# -- quotients ------------------------------------------------------------


@dataclass(frozen=True)
class QuotientResult:
    quotient: AlgebraTable
    projection: Morphism
    classes: tuple[frozenset, ...]


def congruent_mod(table: AlgebraTable, I: int | IdealSet, x: int, y: int) -> bool:
    """x == y (mod I) in the sense x.y in I and y.x in I."""
    mask = I.mask if isinstance(I, IdealSet) else I
    return bool(mask >> table.table[x][y] & 1) and bool(mask >> table.table[y][x] & 1)


def quotient(table: AlgebraTable, I: IdealSet) -> QuotientResult:
    """Quotient by the relation x ~ y iff x.y, y.x in I.

    The relation is verified to be an equivalence and a congruence; failure
    raises :class:`CongruenceUndefined` rather than producing a wrong table.
    """
    if isinstance(I, IdealSet):
        if I.parent != table:
            raise NotAnIdeal("ideal belongs to a different algebra")
        mask = I.mask
    else:
        check = is_ideal(table, I)
        if not check.ok:
            raise NotAnIdeal(f"quotient requires an ideal ({check.failed} fails)")
        mask = mask_of(I, table.n)
    n = table.n
    t = table.table
    rel = [[bool(mask >> t[x][y] & 1) and bool(mask >> t[y][x] & 1) for y in range(n)] for x in range(n)]
    for x in range(n):
        if not rel[x][x]:
            raise CongruenceUndefined(f"relation not reflexive at {x}")
    for x in range(n):
        for y in range(n):
            if rel[x][y]:
                for z in range(n):
                    if rel[y][z] and not rel[x][z]:
                        raise CongruenceUndefined(
                            f"relation mod {sorted(members_of(mask, n))} not transitive at ({x},{y},{z})"
                        )
    # one-sided compatibility plus transitivity gives the two-sided version
    for x in range(n):
        for y in range(n):
            if x < y and rel[x][y]:
                for z in range(n):
                    if not rel[t[x][z]][t[y][z]] or not rel[t[z][x]][t[z][y]]:
                        raise CongruenceUndefined(
                            f"relation mod {sorted(members_of(mask, n))} is not a congruence"
                        )
    reps: list[int] = []
    cls_of = [-1] * n
    for x in range(n):
        for r_idx, r in enumerate(reps):
            if rel[x][r]:
                cls_of[x] = r_idx
                break
        else:
            cls_of[x] = len(reps)
            reps.append(x)
    q = len(reps)
    rows = tuple(tuple(cls_of[t[reps[a]][reps[b]]] for b in range(q)) for a in range(q))
    qtable = AlgebraTable(q, rows)
    rep_q = validate(qtable)
    if not rep_q.is_l:
        raise CongruenceUndefined("quotient table failed L-algebra validation")
    proj = Morphism(table, qtable, tuple(cls_of))
    if proj.kernel() != members_of(mask, n):
        raise PropertyFalsified("projection kernel differs from the dividing ideal")
    classes = tuple(
        frozenset(x for x in range(n) if cls_of[x] == c) for c in range(q)
    )
    return QuotientResult(quotient=qtable, projection=proj, classes=classes)


def verify_join_membership(lattice: IdealLattice, I: IdealSet, J: IdealSet) -> bool:
    """y in I v J iff some x in I has x == y (mod J), for every y.

    The congruence mod J is certified first; an undefined congruence
    propagates as :class:`CongruenceUndefined`.
    """
    table = lattice.parent
    quotient(table, J)  # certify the congruence, or raise
    join = ideal_join(lattice, I, J)
    n = table.n
    for y in range(n):
        has_witness = any(congruent_mod(table, J, x, y) for x in I.sorted_members())
        if has_witness != (y in join.members):
            return False
    return True
