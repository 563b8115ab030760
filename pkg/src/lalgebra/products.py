"""Operations of one L-algebra on another, (symmetric) semidirect products,
and their ideal theory: pair conditions, rho-ideals, kernels, spectra.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Optional

from . import core, ideals
from .core import AlgebraTable, validate
from .errors import (
    ActionClassTooWeak,
    ActionInvalid,
    IndexOutOfRange,
    MalformedTable,
    NotAnIdeal,
    NotRhoIdeal,
    NotProper,
    PropertyFalsified,
    ResourceBound,
)
from .ideals import IdealSet, all_ideals, ideal_masks, mask_of, members_of

CLASS_ORDER = {"L": 0, "KL": 1, "CKL": 2, "Hilbert": 3}


@dataclass(frozen=True)
class OperationCheck:
    ok: bool
    operation_class: Optional[str] = None
    failure: Optional[str] = None
    witness: Optional[tuple] = None


def _is_endo_row(X: AlgebraTable, row: tuple[int, ...]) -> Optional[tuple]:
    t = X.table
    if row[0] != 0:
        return (0,)
    for a in range(X.n):
        for b in range(X.n):
            if row[t[a][b]] != t[row[a]][row[b]]:
                return (a, b)
    return None


def is_operation(base: AlgebraTable, actor: AlgebraTable, rho) -> OperationCheck:
    """Check rho: Y -> End(X) with rho_1 = id and the compatibility law
    rho_{u.v} o rho_u = rho_{v.u} o rho_v, and grade its strongest class."""
    core.require_l(base)
    core.require_l(actor)
    rho = tuple(tuple(int(v) for v in row) for row in rho)
    nX, nY = base.n, actor.n
    if len(rho) != nY or any(len(r) != nX for r in rho):
        return OperationCheck(False, failure="shape")
    for u, row in enumerate(rho):
        if any(not 0 <= v < nX for v in row):
            return OperationCheck(False, failure="range", witness=(u,))
        bad = _is_endo_row(base, row)
        if bad is not None:
            return OperationCheck(False, failure="endomorphism", witness=(u,) + bad)
    if rho[0] != tuple(range(nX)):
        return OperationCheck(False, failure="unit", witness=(0,))
    tY = actor.table
    for u in range(nY):
        for v in range(nY):
            ruv, rvu = rho[tY[u][v]], rho[tY[v][u]]
            ru, rv = rho[u], rho[v]
            for x in range(nX):
                if ruv[ru[x]] != rvu[rv[x]]:
                    return OperationCheck(False, failure="compatibility", witness=(u, v, x))

    repX, repY = validate(base), validate(actor)
    tX = base.table
    level = "L"
    if repX.is_kl and repY.is_kl and all(
        tX[x][rho[u][x]] == 0 for u in range(nY) for x in range(nX)
    ):
        level = "KL"
        if (
            repX.is_ckl
            and repY.is_ckl
            and all(
                rho[u][rho[v][x]] == rho[v][rho[u][x]]
                for u in range(nY)
                for v in range(nY)
                for x in range(nX)
            )
            and all(
                rho[u][tX[x][y]] == tX[x][rho[u][y]]
                for u in range(nY)
                for x in range(nX)
                for y in range(nX)
            )
        ):
            level = "CKL"
            if repX.is_hilbert and repY.is_hilbert and all(
                rho[u][rho[u][x]] == rho[u][x] for u in range(nY) for x in range(nX)
            ):
                level = "Hilbert"
    return OperationCheck(True, operation_class=level)


@dataclass(frozen=True)
class ActionMap:
    """A family {rho_u}_{u in Y} of endomorphisms of X forming an operation.

    ``operation_class`` records the strongest class whose laws hold (and
    whose class both component algebras belong to).
    """

    base: AlgebraTable
    actor: AlgebraTable
    rho: tuple[tuple[int, ...], ...]
    operation_class: str = ""

    def __post_init__(self):
        object.__setattr__(
            self, "rho", tuple(tuple(int(v) for v in row) for row in self.rho)
        )
        check = is_operation(self.base, self.actor, self.rho)
        if not check.ok:
            raise ActionInvalid(f"{check.failure} fails at {check.witness}")
        object.__setattr__(self, "operation_class", check.operation_class)

    def apply(self, u: int, x: int) -> int:
        return self.rho[u][x]

    def at_least(self, klass: str) -> bool:
        return CLASS_ORDER[self.operation_class] >= CLASS_ORDER[klass]

    @staticmethod
    def trivial(base: AlgebraTable, actor: AlgebraTable) -> "ActionMap":
        ident = tuple(range(base.n))
        return ActionMap(base, actor, tuple(ident for _ in range(actor.n)))

    @staticmethod
    def collapse(base: AlgebraTable, actor: AlgebraTable) -> "ActionMap":
        """rho_1 = id and rho_u = (constant 1) for u != 1; always an operation."""
        ident = tuple(range(base.n))
        const = tuple(0 for _ in range(base.n))
        return ActionMap(base, actor, (ident,) + tuple(const for _ in range(actor.n - 1)))

    @staticmethod
    def self_action(table: AlgebraTable) -> "ActionMap":
        """rho_u = sigma_u; a valid operation when left multiplications are
        endomorphisms (e.g. on Hilbert algebras)."""
        return ActionMap(table, table, table.table)

    # -- text / JSON -------------------------------------------------

    def to_text(self) -> str:
        parts = [self.base.to_text(), self.actor.to_text()]
        rows = "\n".join(" ".join(str(v) for v in row) for row in self.rho)
        return "\n".join(parts) + rows + "\n"

    def to_json_dict(self) -> dict:
        return {
            "base": self.base.to_json_dict(),
            "actor": self.actor.to_json_dict(),
            "rho": [list(r) for r in self.rho],
        }

    @staticmethod
    def from_json_dict(d: dict) -> "ActionMap":
        return ActionMap(
            AlgebraTable.from_json_dict(d["base"]),
            AlgebraTable.from_json_dict(d["actor"]),
            tuple(tuple(r) for r in d["rho"]),
        )

    @staticmethod
    def from_text(text: str) -> "ActionMap":
        tokens = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if line:
                try:
                    tokens.extend(int(tok) for tok in line.split())
                except ValueError as exc:
                    raise MalformedTable(f"non-integer token in action file: {raw!r}") from exc
        pos = 0

        def take(k):
            nonlocal pos
            if pos + k > len(tokens):
                raise MalformedTable("action file truncated")
            vals = tokens[pos : pos + k]
            pos += k
            return vals

        nX = take(1)[0]
        base = AlgebraTable(nX, tuple(tuple(take(nX)) for _ in range(nX)))
        nY = take(1)[0]
        actor = AlgebraTable(nY, tuple(tuple(take(nY)) for _ in range(nY)))
        rho = tuple(tuple(take(nX)) for _ in range(nY))
        if pos != len(tokens):
            raise MalformedTable("trailing data in action file")
        return ActionMap(base, actor, rho)


def load_action(path: str) -> ActionMap:
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return ActionMap.from_json_dict(json.loads(text))
    return ActionMap.from_text(text)


def enumerate_operations(
    base: AlgebraTable,
    actor: AlgebraTable,
    min_class: str = "L",
    size_cap: int = 6,
) -> list[ActionMap]:
    """All operations of ``actor`` on ``base``, lexicographically by rho rows.

    Iterates assignments of endomorphisms to the non-unit elements of Y with
    rho_1 = id, pruning on the compatibility identity as soon as all four
    involved rows are assigned.
    """
    if base.n > size_cap or actor.n > size_cap:
        raise ResourceBound(
            f"component size exceeds cap {size_cap}; raise size_cap explicitly"
        )
    endos = [m.map for m in core.endomorphisms(base)]
    nY = actor.n
    tY = actor.table
    ident = tuple(range(base.n))
    assign: list[Optional[tuple[int, ...]]] = [None] * nY
    assign[0] = ident
    out: list[ActionMap] = []

    def compatible_so_far(k: int) -> bool:
        for u in range(k + 1):
            for v in range(k + 1):
                ruv, rvu = assign[tY[u][v]], assign[tY[v][u]]
                if ruv is None or rvu is None:
                    continue
                ru, rv = assign[u], assign[v]
                if any(ruv[ru[x]] != rvu[rv[x]] for x in range(base.n)):
                    return False
        return True

    def extend(k: int):
        if k == nY:
            out.append(ActionMap(base, actor, tuple(assign)))
            return
        for cand in endos:
            assign[k] = cand
            if compatible_so_far(k):
                extend(k + 1)
        assign[k] = None

    extend(1) if nY > 1 else out.append(ActionMap(base, actor, (ident,)))
    return [a for a in out if a.at_least(min_class)]


# -- products -------------------------------------------------------------


@dataclass(frozen=True)
class ProductAlgebra:
    """A (symmetric) semidirect product with its carrier bookkeeping.

    The carrier is ordered x-major so the table layout is reproducible; the
    unit is the pair (1, 1) at position 0.
    """

    kind: str  # "semidirect" | "symmetric"
    action: ActionMap
    carrier: tuple[tuple[int, int], ...]
    algebra: AlgebraTable

    @cached_property
    def pair_index(self) -> dict:
        return {p: i for i, p in enumerate(self.carrier)}

    def index(self, x: int, u: int) -> int:
        try:
            return self.pair_index[(x, u)]
        except KeyError:
            raise IndexOutOfRange(f"({x},{u}) is not in the carrier") from None

    def pair_mask(self, x_members: Iterable[int], u_members: Iterable[int]) -> int:
        xs, us = set(x_members), set(u_members)
        m = 0
        for i, (x, u) in enumerate(self.carrier):
            if x in xs and u in us:
                m |= 1 << i
        return m

    def split_mask(self, mask: int) -> tuple[frozenset, frozenset]:
        """(K_X, K_Y) of a subset: components reached through (x,1) and (1,u)."""
        kx = frozenset(
            x for i, (x, u) in enumerate(self.carrier) if u == 0 and mask >> i & 1
        )
        ky = frozenset(
            u for i, (x, u) in enumerate(self.carrier) if x == 0 and mask >> i & 1
        )
        return kx, ky


def _pair_product(action: ActionMap, p: tuple[int, int], q: tuple[int, int]) -> tuple[int, int]:
    (x, u), (y, v) = p, q
    tY = action.actor.table
    uv, vu = tY[u][v], tY[v][u]
    return action.base.table[action.rho[uv][x]][action.rho[vu][y]], uv


@lru_cache(maxsize=16384)
def semidirect(action: ActionMap) -> ProductAlgebra:
    """The semidirect product on all |X|.|Y| pairs.

    The result is validated as an L-algebra, and the KL criterion (product
    is KL iff both components are KL and x.rho_u(x) = 1) is asserted.
    """
    nX, nY = action.base.n, action.actor.n
    carrier = tuple((x, u) for x in range(nX) for u in range(nY))
    index = {p: i for i, p in enumerate(carrier)}
    rows = tuple(
        tuple(index[_pair_product(action, p, q)] for q in carrier) for p in carrier
    )
    names = tuple(
        f"({action.base.element_name(x)},{action.actor.element_name(u)})"
        for x, u in carrier
    )
    table = AlgebraTable(len(carrier), rows, names)
    rep = validate(table)
    if not rep.is_l:
        raise PropertyFalsified("semidirect product failed L-algebra validation")
    kl_expected = action.at_least("KL")
    if rep.is_kl != kl_expected:
        raise PropertyFalsified(
            f"KL criterion mismatch: product is_kl={rep.is_kl}, action class {action.operation_class}"
        )
    return ProductAlgebra("semidirect", action, carrier, table)


@lru_cache(maxsize=16384)
def symmetric_semidirect(action: ActionMap) -> ProductAlgebra:
    """The fixed-pair subalgebra {(x,u) | rho_u(x) = x} of the semidirect product."""
    if not action.at_least("CKL"):
        raise ActionClassTooWeak(
            f"symmetric semidirect product requires a CKL-class operation, got {action.operation_class}"
        )
    nX, nY = action.base.n, action.actor.n
    carrier = tuple(
        (x, u) for x in range(nX) for u in range(nY) if action.rho[u][x] == x
    )
    index = {p: i for i, p in enumerate(carrier)}
    rows = []
    for p in carrier:
        row = []
        for q in carrier:
            r = _pair_product(action, p, q)
            if r not in index:
                raise PropertyFalsified(
                    f"symmetric carrier not closed: {p}.{q} = {r} escapes"
                )
            row.append(index[r])
        rows.append(tuple(row))
    names = tuple(
        f"({action.base.element_name(x)},{action.actor.element_name(u)})"
        for x, u in carrier
    )
    table = AlgebraTable(len(carrier), tuple(rows), names)
    rep = validate(table)
    expected = "Hilbert" if action.operation_class == "Hilbert" else "CKL"
    if not rep.is_ckl or (expected == "Hilbert" and not rep.is_hilbert):
        raise PropertyFalsified(f"symmetric semidirect product is not {expected}")
    return ProductAlgebra("symmetric", action, carrier, table)


def project_ideal(product: ProductAlgebra, K) -> tuple[IdealSet, IdealSet]:
    """Split an ideal of the product into its X and Y components.

    Asserts the splitting law: K consists exactly of the carrier pairs with
    both components in the projections.
    """
    n = product.algebra.n
    mask = K.mask if isinstance(K, IdealSet) else mask_of(K, n)
    check = ideals.is_ideal(product.algebra, mask)
    if not check.ok:
        raise NotAnIdeal(f"subset is not an ideal of the product ({check.failed})")
    kx, ky = product.split_mask(mask)
    KX = IdealSet(product.action.base, kx)  # raises NotAnIdeal on failure
    KY = IdealSet(product.action.actor, ky)
    if product.pair_mask(kx, ky) != mask:
        raise PropertyFalsified("ideal of product is not the product of its projections")
    return KX, KY


@dataclass(frozen=True)
class PairConditionCheck:
    """Outcome of the (I'1)/(I'2) test for a candidate ideal pair I, U."""

    holds: bool
    failed: Optional[str] = None
    witness: Optional[tuple] = None


def check_pair_conditions(action: ActionMap, I, U, product: Optional[ProductAlgebra] = None) -> PairConditionCheck:
    """(I'1): rho_v(I) <= I for all v in Y; (I'2): (x.rho_u(y)).y and
    y.(x.rho_u(y)) lie in I for u in U, x in I, y in X.

    The verdict is asserted to agree with a direct ideal test of I x U inside
    the semidirect product on every call.
    """
    X, Y = action.base, action.actor
    im = I.mask if isinstance(I, IdealSet) else mask_of(I, X.n)
    um = U.mask if isinstance(U, IdealSet) else mask_of(U, Y.n)
    t = X.table
    rho = action.rho
    result = PairConditionCheck(True)
    for v in range(Y.n):
        rv = rho[v]
        for x in range(X.n):
            if im >> x & 1 and not im >> rv[x] & 1:
                result = PairConditionCheck(False, "I'1", (v, x))
                break
        if not result.holds:
            break
    if result.holds:
        done = False
        for u in range(Y.n):
            if not um >> u & 1:
                continue
            ru = rho[u]
            for x in range(X.n):
                if not im >> x & 1:
                    continue
                for y in range(X.n):
                    w = t[x][ru[y]]
                    if not im >> t[w][y] & 1:
                        result = PairConditionCheck(False, "I'2", (u, x, y, "left"))
                        done = True
                        break
                    if not im >> t[y][w] & 1:
                        result = PairConditionCheck(False, "I'2", (u, x, y, "right"))
                        done = True
                        break
                if done:
                    break
            if done:
                break

    prod = product if product is not None else semidirect(action)
    pair_mask = prod.pair_mask(members_of(im, X.n), members_of(um, Y.n))
    direct = ideals.is_ideal(prod.algebra, pair_mask)
    if direct.ok != result.holds:
        raise PropertyFalsified(
            f"(I'1)/(I'2) disagrees with the direct ideal test for I={sorted(members_of(im, X.n))}, "
            f"U={sorted(members_of(um, Y.n))}"
        )
    return result


# -- rho-ideals and the rho-spectrum --------------------------------------


@lru_cache(maxsize=16384)
def rho_ideal_masks(action: ActionMap) -> tuple[int, ...]:
    X = action.base
    out = []
    for m in ideal_masks(X):
        if all(
            m >> action.rho[v][x] & 1
            for v in range(action.actor.n)
            for x in range(X.n)
            if m >> x & 1
        ):
            out.append(m)
    return tuple(out)


def rho_ideals(action: ActionMap) -> list[IdealSet]:
    """Ideals stable under every rho_v; verified to be a sublattice of the
    ideal lattice (closed under intersections and joins) and distributive."""
    X = action.base
    masks = rho_ideal_masks(action)
    lattice = all_ideals(X)
    idx = [lattice.index_of(members_of(m, X.n)) for m in masks]
    idx_set = set(idx)
    for a in idx:
        for b in idx:
            if lattice.meet_table[a][b] not in idx_set:
                raise PropertyFalsified("rho-ideals not closed under intersection")
            if lattice.join_table[a][b] not in idx_set:
                raise PropertyFalsified("rho-ideals not closed under join")
    for a in idx:
        for b in idx:
            for c in idx:
                if (
                    lattice.meet_table[a][lattice.join_table[b][c]]
                    != lattice.join_table[lattice.meet_table[a][b]][lattice.meet_table[a][c]]
                ):
                    raise PropertyFalsified("rho-ideal sublattice is not distributive")
    return [IdealSet(X, members_of(m, X.n)) for m in masks]


def is_rho_ideal(action: ActionMap, I) -> bool:
    im = I.mask if isinstance(I, IdealSet) else mask_of(I, action.base.n)
    return im in rho_ideal_masks(action)


def is_rho_prime(action: ActionMap, I) -> bool:
    """Proper rho-ideal I with: I1 n I2 <= I forces I1 <= I or I2 <= I,
    quantified over rho-ideals."""
    X = action.base
    im = I.mask if isinstance(I, IdealSet) else mask_of(I, X.n)
    masks = rho_ideal_masks(action)
    if im not in masks:
        raise NotRhoIdeal(f"{sorted(members_of(im, X.n))} is not a rho-ideal")
    if im == (1 << X.n) - 1:
        raise NotProper("the whole algebra is never rho-prime")
    for a in masks:
        if a & ~im == 0:
            continue
        for b in masks:
            if b & ~im == 0:
                continue
            if (a & b) & ~im == 0:
                return False
    return True


@dataclass(frozen=True)
class RhoSpectrum:
    primes: tuple[IdealSet, ...]
    # basis of the subspace topology inherited from Spec(X): U_I n rhoSpec
    basis: tuple[tuple[IdealSet, frozenset], ...]


def rho_spectrum(action: ActionMap) -> RhoSpectrum:
    X = action.base
    full = (1 << X.n) - 1
    primes = tuple(
        IdealSet(X, members_of(m, X.n))
        for m in rho_ideal_masks(action)
        if m != full and is_rho_prime(action, members_of(m, X.n))
    )
    lattice = all_ideals(X)
    basis = tuple(
        (i, frozenset(k for k, p in enumerate(primes) if i.mask & ~p.mask != 0))
        for i in lattice.ideals
    )
    return RhoSpectrum(primes=primes, basis=basis)


def ker_rho_mod(action: ActionMap, I) -> IdealSet:
    """ker(rho^I) = {u in Y | rho_u(x) == x (mod I) for every x}.

    Requires I to be a rho-ideal; the result is verified to be an ideal of Y
    and to make I x ker(rho^I) an ideal of the product.
    """
    X, Y = action.base, action.actor
    im = I.mask if isinstance(I, IdealSet) else mask_of(I, X.n)
    if im not in rho_ideal_masks(action):
        raise NotRhoIdeal(f"{sorted(members_of(im, X.n))} is not a rho-ideal")
    t = X.table
    members = frozenset(
        u
        for u in range(Y.n)
        if all(
            im >> t[x][action.rho[u][x]] & 1 and im >> t[action.rho[u][x]][x] & 1
            for x in range(X.n)
        )
    )
    ker = IdealSet(Y, members)  # NotAnIdeal would falsify the lemma
    check = check_pair_conditions(action, members_of(im, X.n), members)
    if not check.holds:
        raise PropertyFalsified("I x ker(rho^I) failed the ideal pair conditions")
    return ker


def induced_action_mod(action: ActionMap, I) -> tuple[ActionMap, ideals.QuotientResult]:
    """The action rho^I of Y on X/I (requires I to be a rho-ideal)."""
    X, Y = action.base, action.actor
    iset = I if isinstance(I, IdealSet) else IdealSet(X, frozenset(I))
    if not is_rho_ideal(action, iset):
        raise NotRhoIdeal(f"{iset.sorted_members()} is not a rho-ideal")
    q = ideals.quotient(X, iset)
    cls = q.projection.map
    reps = [min(c) for c in q.classes]
    for u in range(Y.n):
        ru = action.rho[u]
        for c in q.classes:
            images = {cls[ru[x]] for x in c}
            if len(images) != 1:
                raise PropertyFalsified(f"rho^I not well-defined for u={u}")
    rho_q = tuple(
        tuple(cls[action.rho[u][reps[a]]] for a in range(q.quotient.n))
        for u in range(Y.n)
    )
    return ActionMap(q.quotient, Y, rho_q), q


def quotient_equivalence(action: ActionMap, K) -> bool:
    """One instance of the quotient characterization of product ideals:
    (X x Y)/K is isomorphic to X/K_X x Y/K_Y under the induced action."""
    prod = semidirect(action)
    KX, KY = project_ideal(prod, K)
    act_mod, qx = induced_action_mod(action, KX)
    # the induced map must be constant on K_Y-classes, giving Y/K_Y -> End(X/K_X)
    qy = ideals.quotient(action.actor, KY)
    clsY = qy.projection.map
    repsY = [min(c) for c in qy.classes]
    for c in qy.classes:
        rows = {act_mod.rho[u] for u in c}
        if len(rows) != 1:
            raise PropertyFalsified("induced action not constant on K_Y-classes")
    tilde = ActionMap(
        act_mod.base, qy.quotient, tuple(act_mod.rho[repsY[b]] for b in range(qy.quotient.n))
    )
    lhs = ideals.quotient(
        prod.algebra, IdealSet(prod.algebra, members_of(
            K.mask if isinstance(K, IdealSet) else mask_of(K, prod.algebra.n),
            prod.algebra.n,
        ))
    ).quotient
    rhs = semidirect(tilde).algebra
    return core.isomorphic(lhs, rhs)


# -- whole-theorem reports -------------------------------------------------


@dataclass(frozen=True)
class SpectrumDecomposition:
    spec_product: tuple[tuple[int, ...], ...]
    rho_spec_base: tuple[tuple[int, ...], ...]
    spec_actor: tuple[tuple[int, ...], ...]
    shapes_ok: bool
    bijection_ok: bool
    open_map_ok: bool
    remark_formula_ok: bool
    witness: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.shapes_ok and self.bijection_ok and self.open_map_ok

    def to_json_dict(self) -> dict:
        return {
            "spec_product": [list(p) for p in self.spec_product],
            "rho_spec_base": [list(p) for p in self.rho_spec_base],
            "spec_actor": [list(p) for p in self.spec_actor],
            "shapes_ok": self.shapes_ok,
            "bijection_ok": self.bijection_ok,
            "open_map_ok": self.open_map_ok,
            "remark_formula_ok": self.remark_formula_ok,
            "witness": self.witness,
        }


def _open_in(s: frozenset, basis: Iterable[frozenset]) -> bool:
    basis = list(basis)
    return all(any(p in b and b <= s for b in basis) for p in s)


def spec_decomposition(action: ActionMap) -> SpectrumDecomposition:
    """Check Spec(X x Y) = rhoSpec(X) + Spec(Y): prime shapes, the counting
    bijection, and openness of the decomposition map on the finite topologies."""
    X, Y = action.base, action.actor
    prod = semidirect(action)
    spec_p = ideals.spectrum(prod.algebra)
    rspec = rho_spectrum(action)
    spec_y = ideals.spectrum(Y)

    full_x = (1 << X.n) - 1
    witness = None
    shapes_ok = True
    mapping: dict[int, tuple[str, int]] = {}  # prime idx -> ("Y", j) | ("X", i)
    rho_prime_masks = [p.mask for p in rspec.primes]
    spec_y_masks = [q.mask for q in spec_y.primes]
    kers = {p.mask: ker_rho_mod(action, p).mask for p in rspec.primes}

    for k, P in enumerate(spec_p.primes):
        KX, KY = project_ideal(prod, P)
        if KX.mask == full_x:
            if KY.mask in spec_y_masks:
                mapping[k] = ("Y", spec_y_masks.index(KY.mask))
            else:
                shapes_ok = False
                witness = f"prime {P.sorted_members()} projects to non-prime of Y"
        elif KX.mask in rho_prime_masks and KY.mask == kers[KX.mask]:
            mapping[k] = ("X", rho_prime_masks.index(KX.mask))
        else:
            shapes_ok = False
            witness = f"prime {P.sorted_members()} has neither predicted shape"

    predicted = {("Y", j) for j in range(len(spec_y.primes))} | {
        ("X", i) for i in range(len(rspec.primes))
    }
    bijection_ok = (
        shapes_ok
        and len(mapping) == len(spec_p.primes)
        and set(mapping.values()) == predicted
        and len(set(mapping.values())) == len(mapping)
    )

    # open-map and remark-formula checks on the finite topologies
    rho_basis = [b for _, b in rspec.basis]
    y_basis = [b for _, b in spec_y.basis]
    open_map_ok = True
    remark_ok = True
    if bijection_ok:
        for ideal_set, opens in spec_p.basis:
            img_x = frozenset(mapping[p][1] for p in opens if mapping[p][0] == "X")
            img_y = frozenset(mapping[p][1] for p in opens if mapping[p][0] == "Y")
            if not (_open_in(img_x, rho_basis) and _open_in(img_y, y_basis)):
                open_map_ok = False
                witness = f"image of U_{ideal_set.sorted_members()} is not open"
                break
            KX, KY = project_ideal(prod, ideal_set)
            if KX.mask != full_x:
                want_x = frozenset(
                    i for i, p in enumerate(rspec.primes) if KX.mask & ~p.mask != 0
                )
            else:
                want_x = frozenset(range(len(rspec.primes)))
            want_y = frozenset(
                j for j, q in enumerate(spec_y.primes) if KY.mask & ~q.mask != 0
            )
            if img_x != want_x or img_y != want_y:
                remark_ok = False
    return SpectrumDecomposition(
        spec_product=tuple(p.sorted_members() for p in spec_p.primes),
        rho_spec_base=tuple(p.sorted_members() for p in rspec.primes),
        spec_actor=tuple(q.sorted_members() for q in spec_y.primes),
        shapes_ok=shapes_ok,
        bijection_ok=bijection_ok,
        open_map_ok=open_map_ok,
        remark_formula_ok=remark_ok,
        witness=witness,
    )


@dataclass(frozen=True)
class IdealCountReport:
    product_count: int
    base_count: int
    actor_count: int
    bound_holds: bool
    is_direct_product: bool
    equality: bool
    equality_iff_direct: bool
    sum_formula_value: int
    sum_formula_holds: bool

    @property
    def ok(self) -> bool:
        return self.bound_holds and self.equality_iff_direct and self.sum_formula_holds

    def to_json_dict(self) -> dict:
        return {
            "product_count": self.product_count,
            "base_count": self.base_count,
            "actor_count": self.actor_count,
            "bound_holds": self.bound_holds,
            "is_direct_product": self.is_direct_product,
            "equality": self.equality,
            "equality_iff_direct": self.equality_iff_direct,
            "sum_formula_value": self.sum_formula_value,
            "sum_formula_holds": self.sum_formula_holds,
        }


def ideal_count_formulas(action: ActionMap) -> IdealCountReport:
    """Evaluate |I(X x Y)| <= |I(X)|.|I(Y)| (equality iff the product is
    direct) and the exact sum over rho-ideals of X."""
    X, Y = action.base, action.actor
    prod = semidirect(action)
    pc = len(ideal_masks(prod.algebra))
    xc, yc = len(ideal_masks(X)), len(ideal_masks(Y))
    ident = tuple(range(X.n))
    direct = all(action.rho[u] == ident for u in range(Y.n))
    y_masks = ideal_masks(Y)
    total = 0
    for im in rho_ideal_masks(action):
        km = ker_rho_mod(action, members_of(im, X.n)).mask
        total += sum(1 for um in y_masks if um & ~km == 0)
    return IdealCountReport(
        product_count=pc,
        base_count=xc,
        actor_count=yc,
        bound_holds=pc <= xc * yc,
        is_direct_product=direct,
        equality=pc == xc * yc,
        equality_iff_direct=(pc == xc * yc) == direct,
        sum_formula_value=total,
        sum_formula_holds=total == pc,
    )


@dataclass(frozen=True)
class SymmetricBijectionReport:
    symmetric_count: int
    semidirect_count: int
    forward_ok: bool
    backward_ok: bool
    mutually_inverse: bool

    @property
    def ok(self) -> bool:
        return (
            self.forward_ok
            and self.backward_ok
            and self.mutually_inverse
            and self.symmetric_count == self.semidirect_count
        )

    def to_json_dict(self) -> dict:
        return {
            "symmetric_count": self.symmetric_count,
            "semidirect_count": self.semidirect_count,
            "forward_ok": self.forward_ok,
            "backward_ok": self.backward_ok,
            "mutually_inverse": self.mutually_inverse,
        }


def symmetric_ideal_bijection(action: ActionMap) -> SymmetricBijectionReport:
    """L -> L_X x L_Y and K -> K n (X sym Y) between the ideal sets of the
    symmetric and plain semidirect products; checked to be inverse bijections."""
    if not action.at_least("CKL"):
        raise ActionClassTooWeak("ideal bijection requires a CKL-class operation")
    sym = symmetric_semidirect(action)
    semi = semidirect(action)
    sym_masks = ideal_masks(sym.algebra)
    semi_masks = set(ideal_masks(semi.algebra))
    forward = {}
    forward_ok = True
    for lm in sym_masks:
        lx, ly = sym.split_mask(lm)
        tilde = semi.pair_mask(lx, ly)
        if tilde not in semi_masks:
            forward_ok = False
            break
        forward[lm] = tilde
    sym_carrier_in_semi = frozenset(semi.pair_index[p] for p in sym.carrier)
    backward = {}
    backward_ok = True
    for km in semi_masks:
        restricted = 0
        for i in range(semi.algebra.n):
            if km >> i & 1 and i in sym_carrier_in_semi:
                x, u = semi.carrier[i]
                restricted |= 1 << sym.pair_index[(x, u)]
        if restricted not in set(sym_masks):
            backward_ok = False
            break
        backward[km] = restricted
    inverse = (
        forward_ok
        and backward_ok
        and all(backward[forward[lm]] == lm for lm in forward)
        and all(forward[backward[km]] == km for km in backward)
    )
    return SymmetricBijectionReport(
        symmetric_count=len(sym_masks),
        semidirect_count=len(semi_masks),
        forward_ok=forward_ok,
        backward_ok=backward_ok,
        mutually_inverse=inverse,
    )
