"""Signalling relations read off the type expression alone.

For an input A and output B, the minimal enclosing subterm decides the
relation: A an input of that subterm means full signalling from A to B,
A an output means no signalling.  The structural algorithm never builds
word sets, so it stays polynomial in the length of the type; the word-set
route is kept as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .strings import build_D, critical_set
from .type_core import (
    Label,
    TypeExpr,
    bar,
    io_partition,
    k_value,
    minimal_enclosing,
    render_type,
)


class Relation(str, Enum):
    NO_SIGNALLING = "no-signalling"
    SIGNALLING = "signalling"
    FULL_SIGNALLING = "full-signalling"

    # The structural algorithm only ever yields the two extremes; the plain
    # middle value exists for numerically-derived relations.


@dataclass(frozen=True)
class SignallingVerdict:
    source: Label
    target: Label
    relation: Relation
    enclosing: TypeExpr

    def to_json(self) -> dict:
        return {
            "from": self.source.name,
            "to": self.target.name,
            "relation": self.relation.value,
            "enclosing": render_type(self.enclosing, sugar=True),
        }


def _resolve_pair(x: TypeExpr, a: Label | str, b: Label | str) -> tuple[Label, Label]:
    analysis = io_partition(x)
    by_name = {lbl.name: lbl for lbl in analysis.elementary}
    name_a = a.name if isinstance(a, Label) else a
    name_b = b.name if isinstance(b, Label) else b
    if name_a not in by_name or by_name[name_a] not in analysis.inputs:
        raise ValueError(f"{name_a!r} is not an input system of the type")
    if name_b not in by_name or by_name[name_b] not in analysis.outputs:
        raise ValueError(f"{name_b!r} is not an output system of the type")
    return by_name[name_a], by_name[name_b]


def signals(x: TypeExpr, a: Label | str, b: Label | str) -> SignallingVerdict:
    """Relation from input a to output b, decided structurally.

    Inside the minimal enclosing subterm, a keeping its input role means
    the type signals (fully) from a to b; a flipping to an output role
    means no signalling.
    """
    la, lb = _resolve_pair(x, a, b)
    enclosing = minimal_enclosing(x, la, lb)
    if k_value(enclosing, la) == 1:
        relation = Relation.FULL_SIGNALLING
    else:
        relation = Relation.NO_SIGNALLING
    return SignallingVerdict(la, lb, relation, enclosing)


def full_signalling(x: TypeExpr, a: Label | str, b: Label | str) -> bool:
    """Word-set test for full signalling from input a to output b: the
    reversed contraction on the dual type must be admissible."""
    la, lb = _resolve_pair(x, a, b)
    dual = bar(x)
    return not build_D(dual).intersection(critical_set(dual, lb, la)).masks


def signalling_matrix(x: TypeExpr) -> list[SignallingVerdict]:
    """One verdict per (input, output) pair, inputs then outputs in textual
    order."""
    analysis = io_partition(x)
    return [
        signals(x, a, b)
        for a in analysis.inputs_ordered()
        for b in analysis.outputs_ordered()
    ]


def crosscheck(x: TypeExpr) -> bool:
    """Structural verdicts against critical-set admissibility, pair by pair:
    no signalling must coincide exactly with an admissible contraction."""
    d = build_D(x)
    for row in signalling_matrix(x):
        admissible = not d.intersection(critical_set(x, row.source, row.target)).masks
        if admissible != (row.relation is Relation.NO_SIGNALLING):
            return False
    return True
