"""Small named algebras and actions used by the demos and the test corpus."""

from __future__ import annotations

from .core import AlgebraTable
from .families import make_A, make_LH
from .products import ActionMap


def three_element_example() -> AlgebraTable:
    """{1, x, y} with x.y = y.x = x: two incomparable atoms, two ideals."""
    return AlgebraTable(3, ((0, 1, 2), (0, 0, 1), (0, 1, 0)), names=("1", "x", "y"))


def two_chain() -> AlgebraTable:
    """The unique two-element L-algebra."""
    return AlgebraTable(2, ((0, 1), (0, 0)), names=("1", "u"))


def four_element_ckl_example() -> AlgebraTable:
    """CKL algebra ordered 1 > y and 1 > x > z; its tails are {1,x,z} and {1,y}."""
    return AlgebraTable(
        4,
        ((0, 1, 2, 3), (0, 0, 2, 1), (0, 1, 0, 3), (0, 0, 2, 0)),
        names=("1", "x", "y", "z"),
    )


def seven_element_ckl_example() -> AlgebraTable:
    """CKL algebra whose Hasse diagram branches below x1; the upset of x5 is
    a tail (hence an ideal) while the upset of x6 is not an ideal."""
    return AlgebraTable(
        7,
        (
            (0, 1, 2, 3, 4, 5, 6),
            (0, 0, 2, 3, 4, 5, 6),
            (0, 0, 0, 3, 4, 5, 6),
            (0, 0, 2, 0, 4, 3, 4),
            (0, 0, 0, 3, 0, 5, 3),
            (0, 0, 2, 0, 4, 0, 4),
            (0, 0, 0, 0, 0, 3, 0),
        ),
        names=("1", "x1", "x2", "x3", "x4", "x5", "x6"),
    )


def collapse_action_example() -> ActionMap:
    """The two-chain acting on the three-element example by collapsing
    everything to the unit; its semidirect product has three ideals."""
    return ActionMap.collapse(three_element_example(), two_chain())


def corpus() -> list[AlgebraTable]:
    """The algebras exercised by the word-engine and quotient test sweeps."""
    return [
        three_element_example(),
        two_chain(),
        four_element_ckl_example(),
        seven_element_ckl_example(),
        make_A(3),
        make_A(4),
        make_LH(3),
        make_LH(4),
    ]
