"""Bounded-word engine for the free monoid over an L-algebra.

Words are finite sequences of element indices.  The algebra operation
extends to words by

    ab . c = a . (b . c)        (left operand split at its first letter)
    a . bc = ((c . a) . b)(a . c)   (right operand split at its first letter)
    1 . a  = a

with single letters multiplied through the table.  Table values equal to the
unit embed as the empty word (the unit of the free monoid); no other
rewriting is ever performed, and the unit-letter word stays a distinct
object whose equivalence with the empty word is observed through contexts,
never assumed.

Equality in the self-similar closure is only semi-decided: two words are
reported Equivalent at a given context depth, or Distinguished by a concrete
context pair.  Budget overruns surface as BudgetExceeded, never as a verdict.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from . import ideals
from .core import AlgebraTable, order_structure, require_l, validate
from .errors import BaseMismatch, BudgetExceeded, IndexOutOfRange
from .products import ActionMap, ProductAlgebra, semidirect

DEFAULT_BUDGET = 12
DEFAULT_DEPTH = 3


@dataclass(frozen=True)
class Word:
    """An element of the free monoid over ``base`` (empty = monoid unit)."""

    base: AlgebraTable
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(v) for v in self.letters))
        for v in self.letters:
            if not 0 <= v < self.base.n:
                raise IndexOutOfRange(f"letter {v} out of range [0,{self.base.n})")

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def is_empty(self) -> bool:
        return not self.letters

    def concat(self, other: "Word") -> "Word":
        if other.base != self.base:
            raise BaseMismatch("cannot concatenate words over different algebras")
        return Word(self.base, self.letters + other.letters)

    def to_text(self) -> str:
        return " ".join(str(v) for v in self.letters)

    @staticmethod
    def from_text(base: AlgebraTable, text: str) -> "Word":
        return Word(base, tuple(int(tok) for tok in text.split()))

    def pretty(self) -> str:
        if self.is_empty:
            return "1"
        return "".join(self.base.element_name(v) for v in self.letters)


def _dot(t, a: tuple, b: tuple, budget: int) -> tuple:
    if len(a) + len(b) > 2 and max(len(a), len(b)) > budget:
        raise BudgetExceeded(length=max(len(a), len(b)), budget=budget)
    if not a:
        return b
    if len(a) > 1:
        return _dot(t, a[:1], _dot(t, a[1:], b, budget), budget)
    if not b:
        return ()
    if len(b) == 1:
        v = t[a[0]][b[0]]
        return () if v == 0 else (v,)
    head, rest = b[:1], b[1:]
    left = _dot(t, _dot(t, rest, a, budget), head, budget)
    right = _dot(t, a, rest, budget)
    out = left + right
    if len(out) > budget:
        raise BudgetExceeded(length=len(out), budget=budget)
    return out


def word_dot(a: Word, b: Word, budget: int = DEFAULT_BUDGET) -> Word:
    """Evaluate a . b in the free-monoid extension of the base operation."""
    if a.base != b.base:
        raise BaseMismatch("cannot multiply words over different algebras")
    return Word(a.base, _dot(a.base.table, a.letters, b.letters, budget))


def all_words(base: AlgebraTable, max_len: int) -> list[Word]:
    """All words of length <= max_len over every element index, ordered by
    (length, lexicographic letters)."""
    out = []
    for k in range(max_len + 1):
        for letters in itertools.product(range(base.n), repeat=k):
            out.append(Word(base, letters))
    return out


@dataclass(frozen=True)
class Equivalent:
    """A bounded certificate: no separating context up to the given depth."""

    depth: int
    budget_exceeded: int = 0

    @property
    def equivalent(self) -> bool:
        return True


@dataclass(frozen=True)
class Distinguished:
    """A concrete separating context: (c.a).d differs from (c.b).d."""

    c: Word
    d: Word
    value_a: Word
    value_b: Word

    @property
    def equivalent(self) -> bool:
        return False


Verdict = Union[Equivalent, Distinguished]


def _strip_unit(letters: tuple) -> tuple:
    return tuple(v for v in letters if v != 0)


def approx_equiv(a: Word, b: Word, depth: int = DEFAULT_DEPTH, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Semi-decide a == b in the self-similar closure by context sweep.

    Tries every context pair (c, d) with len <= depth in lexicographic pair
    order; the first pair with (c.a).d != (c.b).d wins.  Final values are
    compared with unit letters ignored: a unit letter denotes the monoid
    unit, and the only evaluation path that leaves one in a result is the
    verbatim passthrough 1.a = a.  Equivalent is only a certificate at this
    depth, never a proof; pairs whose evaluation blows the budget are
    counted, not decided.
    """
    if a.base != b.base:
        raise BaseMismatch("cannot compare words over different algebras")
    t = a.base.table
    contexts = all_words(a.base, depth)
    blown = 0
    for c in contexts:
        for d in contexts:
            try:
                va = _dot(t, _dot(t, c.letters, a.letters, budget), d.letters, budget)
                vb = _dot(t, _dot(t, c.letters, b.letters, budget), d.letters, budget)
            except BudgetExceeded:
                blown += 1
                continue
            if _strip_unit(va) != _strip_unit(vb):
                return Distinguished(c, d, Word(a.base, va), Word(a.base, vb))
    return Equivalent(depth=depth, budget_exceeded=blown)


def is_self_similar(table: AlgebraTable) -> bool:
    """Whether every left multiplication maps the downset of its element
    bijectively onto the whole algebra (finite: only the trivial algebra)."""
    require_l(table)
    order = order_structure(table)
    n = table.n
    for x in range(n):
        down = order.downset(x)
        image = {table.table[x][y] for y in down}
        if len(down) != n or len(image) != n:
            return False
    return True


# -- word-level actions ---------------------------------------------------


def extend_action_to_words(action: ActionMap, u_word: Word, x: int) -> int:
    """Apply the word-extended action: letters act right-to-left, so the
    word u1 u2 ... uk acts as rho_{u1} o rho_{u2} o ... o rho_{uk}."""
    if u_word.base != action.actor:
        raise BaseMismatch("action word must live over the actor algebra")
    action.base.check_index(x)
    for u in reversed(u_word.letters):
        x = action.rho[u][x]
    return x


@dataclass(frozen=True)
class WordActionReport:
    pairs_checked: int
    failures: tuple
    budget_exceeded: int

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_word_action_compatibility(
    action: ActionMap, max_len: int = 3, budget: int = DEFAULT_BUDGET
) -> WordActionReport:
    """Check rho'_{a.b} o rho'_a = rho'_{b.a} o rho'_b on all word pairs over
    the actor up to max_len, with a.b computed by the word engine."""
    Y = action.actor
    nX = action.base.n
    words = all_words(Y, max_len)
    failures = []
    blown = 0
    checked = 0
    for a in words:
        for b in words:
            try:
                ab = word_dot(a, b, budget)
                ba = word_dot(b, a, budget)
            except BudgetExceeded:
                blown += 1
                continue
            checked += 1
            for x in range(nX):
                lhs = extend_action_to_words(action, ab, extend_action_to_words(action, a, x))
                rhs = extend_action_to_words(action, ba, extend_action_to_words(action, b, x))
                if lhs != rhs:
                    failures.append((a.letters, b.letters, x, lhs, rhs))
                    break
    return WordActionReport(pairs_checked=checked, failures=tuple(failures), budget_exceeded=blown)


# -- words over semidirect products ---------------------------------------


def _monoid_pair_of(product: ProductAlgebra, w: Word) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Fold a word over the product into its (word over X, word over Y) pair
    using the self-similar monoid law (z,t)(x,u) = (z rho'_t(x), t u)."""
    action = product.action
    a: tuple[int, ...] = ()
    b: tuple[int, ...] = ()
    for idx in w.letters:
        x, u = product.carrier[idx]
        img = x
        for t in reversed(b):
            img = action.rho[t][img]
        if img != 0:
            a = a + (img,)
        if u != 0:
            b = b + (u,)
    return a, b


@dataclass(frozen=True)
class ProductWordReport:
    words_checked: int
    factorization_ok: bool
    distinguished: tuple
    budget_exceeded: int

    @property
    def ok(self) -> bool:
        return self.factorization_ok and not self.distinguished


def semidirect_word_product_check(
    action: ActionMap,
    max_len: int = 2,
    depth: int = 2,
    budget: int = DEFAULT_BUDGET,
) -> ProductWordReport:
    """Bounded check that words over X x Y match their (word, word) pairs.

    Every product word W of length <= max_len is refolded through the monoid
    law into a pair (a, b) and compared, by context sweep, against the
    regrouped product word (a_1,1)...(a_k,1)(1,b_1)...(1,b_m); a separating
    context would falsify the factorization at this depth.  Also checks the
    table-level identity (1,u).(x,u) = (x,1) behind the regrouping.
    """
    prod = semidirect(action)
    alg = prod.algebra
    fact_ok = True
    for x in range(action.base.n):
        for u in range(action.actor.n):
            lhs = alg.table[prod.index(0, u)][prod.index(x, u)]
            if lhs != prod.index(x, 0):
                fact_ok = False
    distinguished = []
    blown = 0
    checked = 0
    for w in all_words(alg, max_len):
        a, b = _monoid_pair_of(prod, w)
        regrouped = Word(
            alg,
            tuple(prod.index(x, 0) for x in a) + tuple(prod.index(0, u) for u in b),
        )
        verdict = approx_equiv(w, regrouped, depth=depth, budget=budget)
        checked += 1
        if isinstance(verdict, Distinguished):
            distinguished.append((w.letters, regrouped.letters, verdict.c.letters, verdict.d.letters))
        else:
            blown += verdict.budget_exceeded
    return ProductWordReport(
        words_checked=checked,
        factorization_ok=fact_ok,
        distinguished=tuple(distinguished),
        budget_exceeded=blown,
    )


# -- the closure counterexample -------------------------------------------


@dataclass(frozen=True)
class CounterexampleReport:
    base: AlgebraTable
    lhs: Word
    rhs: Word
    base_flags: dict

    @property
    def ok(self) -> bool:
        return self.lhs.letters == () and self.rhs.letters == (1,)


def reproduce_sx_counterexample() -> CounterexampleReport:
    """Evaluate x.(y.x^2) and y.(x.x^2) over the three-element algebra with
    x.y = y.x = x; the values 1 and x show the closure fails the commutation
    law x.(y.z) = y.(x.z) even though it identifies no new base elements."""
    base = AlgebraTable(3, ((0, 1, 2), (0, 0, 1), (0, 1, 0)), names=("1", "x", "y"))
    x = Word(base, (1,))
    y = Word(base, (2,))
    xx = Word(base, (1, 1))
    lhs = word_dot(x, word_dot(y, xx))
    rhs = word_dot(y, word_dot(x, xx))
    return CounterexampleReport(
        base=base, lhs=lhs, rhs=rhs, base_flags=validate(base).flags()
    )


def bounded_closure_classes(
    base: AlgebraTable, max_len: int = 2, depth: int = DEFAULT_DEPTH, budget: int = DEFAULT_BUDGET
) -> tuple[list[list[Word]], int]:
    """Partition all words up to max_len into bounded equivalence classes.

    Classes merge words that no context up to the given depth separates, so
    the partition is an over-merging approximation of the self-similar
    closure restricted to short words.  Returns (classes, budget overruns).
    """
    require_l(base)
    words = all_words(base, max_len)
    classes: list[list[Word]] = []
    blown = 0
    for w in words:
        placed = False
        for cls in classes:
            verdict = approx_equiv(w, cls[0], depth=depth, budget=budget)
            if isinstance(verdict, Equivalent):
                blown += verdict.budget_exceeded
                cls.append(w)
                placed = True
                break
        if not placed:
            classes.append([w])
    return classes, blown
