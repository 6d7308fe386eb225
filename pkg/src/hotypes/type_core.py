"""Type expressions for higher-order maps: grammar, parsing, and structural analysis.

A type is either an elementary system label, the trivial one-dimensional
type ``I``, or an arrow ``(x -> y)``.  Bar and tensor are surface sugar:
``~x`` stores as ``x -> I`` and ``x * y`` as ``~(x -> ~y)``, so the core
representation is arrows all the way down.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

TRIVIAL_NAME = "I"


class TypeSyntaxError(ValueError):
    """Raised on malformed type text; carries the offending position."""

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.message = message
        self.text = text
        self.position = position

    def caret_diagram(self) -> str:
        return f"{self.text}\n{' ' * self.position}^"


class DuplicateLabelError(ValueError):
    """A non-trivial label occurs more than once; relabel_unique was skipped."""


@dataclass(frozen=True, order=True)
class Label:
    """An elementary system: a name and its Hilbert-space dimension."""

    name: str
    dimension: int = 2

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"dimension of {self.name!r} must be >= 1, got {self.dimension}")
        if self.name == TRIVIAL_NAME and self.dimension != 1:
            raise ValueError(f"label {TRIVIAL_NAME!r} is reserved for the trivial type")
        if self.name != TRIVIAL_NAME and self.dimension == 1:
            raise ValueError(
                f"label {self.name!r} cannot have dimension 1; use {TRIVIAL_NAME} for the trivial type"
            )

    def __str__(self) -> str:
        return self.name


class TypeExpr:
    """Base class for type expressions.  All variants are immutable."""

    def __str__(self) -> str:
        return render_type(self)

    def walk(self) -> Iterator["TypeExpr"]:
        """Yield this expression and all subterms, left to right."""
        yield self
        if isinstance(self, Arrow):
            yield from self.left.walk()
            yield from self.right.walk()


@dataclass(frozen=True)
class Elementary(TypeExpr):
    label: Label


@dataclass(frozen=True)
class Trivial(TypeExpr):
    pass


@dataclass(frozen=True)
class Arrow(TypeExpr):
    left: TypeExpr
    right: TypeExpr


TRIVIAL = Trivial()


def bar(x: TypeExpr) -> TypeExpr:
    """The dual type: ~x stores as x -> I."""
    return Arrow(x, TRIVIAL)


def tensor(x: TypeExpr, y: TypeExpr) -> TypeExpr:
    """The tensor type: x * y stores as ~(x -> ~y)."""
    return bar(Arrow(x, bar(y)))


def as_bar(x: TypeExpr) -> TypeExpr | None:
    """Return y when x is structurally y -> I, else None."""
    if isinstance(x, Arrow) and isinstance(x.right, Trivial):
        return x.left
    return None


def as_tensor(x: TypeExpr) -> tuple[TypeExpr, TypeExpr] | None:
    """Return (a, b) when x is structurally ~(a -> ~b), else None."""
    inner = as_bar(x)
    if inner is not None and isinstance(inner, Arrow):
        b = as_bar(inner.right)
        if b is not None:
            return inner.left, b
    return None


# --- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(->|[*~()]|[A-Z][A-Za-z0-9_]*|\S)")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            break
        lexeme = m.group(1)
        start = m.end(1) - len(lexeme)
        if lexeme in ("->", "*", "~", "(", ")"):
            tokens.append((lexeme, lexeme, start))
        elif lexeme == TRIVIAL_NAME:
            tokens.append(("I", lexeme, start))
        elif re.fullmatch(r"[A-Z][A-Za-z0-9_]*", lexeme):
            tokens.append(("NAME", lexeme, start))
        else:
            raise TypeSyntaxError(f"unexpected character {lexeme!r}", text, start)
        pos = m.end()
    tokens.append(("END", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent over the grammar: ~ binds tightest, then *, then ->.

    ``*`` is left-associative, ``->`` right-associative.
    """

    def __init__(self, text: str, system_table: Mapping[str, int]):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0
        self.system_table = system_table

    @property
    def current(self) -> tuple[str, str, int]:
        return self.tokens[self.index]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def fail(self, message: str) -> TypeSyntaxError:
        return TypeSyntaxError(message, self.text, self.current[2])

    def parse(self) -> TypeExpr:
        expr = self.parse_arrow()
        if self.current[0] != "END":
            raise self.fail(f"unexpected {self.current[1]!r}")
        return expr

    def parse_arrow(self) -> TypeExpr:
        left = self.parse_star()
        if self.current[0] == "->":
            self.advance()
            right = self.parse_arrow()
            return Arrow(left, right)
        return left

    def parse_star(self) -> TypeExpr:
        expr = self.parse_unary()
        while self.current[0] == "*":
            self.advance()
            expr = tensor(expr, self.parse_unary())
        return expr

    def parse_unary(self) -> TypeExpr:
        if self.current[0] == "~":
            self.advance()
            return bar(self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> TypeExpr:
        kind, lexeme, pos = self.current
        if kind == "(":
            self.advance()
            expr = self.parse_arrow()
            if self.current[0] != ")":
                raise self.fail("expected ')'")
            self.advance()
            return expr
        if kind == "I":
            self.advance()
            return TRIVIAL
        if kind == "NAME":
            self.advance()
            dim = self.system_table.get(lexeme, 2)
            try:
                return Elementary(Label(lexeme, dim))
            except ValueError as exc:
                raise TypeSyntaxError(str(exc), self.text, pos) from None
        raise self.fail(f"expected a type, found {lexeme or 'end of input'!r}")


def parse_type(text: str, system_table: Mapping[str, int] | None = None) -> TypeExpr:
    """Parse type text into core form, desugaring ~ and *.

    Labels absent from ``system_table`` default to dimension 2.  ``I`` is
    the trivial type and cannot carry a non-unit dimension.
    """
    table = dict(system_table or {})
    if table.get(TRIVIAL_NAME, 1) != 1:
        raise TypeSyntaxError(
            f"label {TRIVIAL_NAME!r} is the trivial system and must have dimension 1",
            text,
            0,
        )
    return _Parser(text, table).parse()


# --- rendering -------------------------------------------------------------

def render_type(x: TypeExpr, sugar: bool = False) -> str:
    """Canonical text for x.  With ``sugar`` on, bar/tensor patterns print
    as ``~``/``*`` instead of their arrow encodings.
    """
    if isinstance(x, Trivial):
        return TRIVIAL_NAME
    if isinstance(x, Elementary):
        return x.label.name
    if sugar:
        pair = as_tensor(x)
        if pair is not None:
            left, right = pair
            lhs = render_type(left, sugar=True)
            if as_tensor(right) is not None:
                rhs = f"({render_type(right, sugar=True)})"
            else:
                rhs = render_type(right, sugar=True)
            return f"{lhs}*{rhs}"
        operand = as_bar(x)
        if operand is not None:
            body = render_type(operand, sugar=True)
            if as_tensor(operand) is not None:
                body = f"({body})"
            return f"~{body}"
    assert isinstance(x, Arrow)
    return f"({render_type(x.left, sugar)}->{render_type(x.right, sugar)})"


# --- relabeling and label structure -----------------------------------------

def elementary_systems(x: TypeExpr) -> tuple[Label, ...]:
    """Non-trivial elementary labels of x in left-to-right textual order.

    Requires x to be relabeled: a duplicate label raises.
    """
    labels: list[Label] = []
    seen: set[str] = set()
    for node in x.walk():
        if isinstance(node, Elementary):
            if node.label.name in seen:
                raise DuplicateLabelError(
                    f"label {node.label.name!r} occurs more than once; apply relabel_unique first"
                )
            seen.add(node.label.name)
            labels.append(node.label)
    return tuple(labels)


def relabel_unique(x: TypeExpr) -> tuple[TypeExpr, dict[str, str]]:
    """Rename repeated labels left to right so each occurs exactly once.

    The k-th repeat of name N becomes N1, N2, ... (skipping names already
    in use).  Fresh labels keep the original dimension.  The returned map
    sends each fresh name back to the name it replaced.
    """
    in_use = {node.label.name for node in x.walk() if isinstance(node, Elementary)}
    seen: set[str] = set()
    provenance: dict[str, str] = {}

    def fresh(base: str) -> str:
        counter = 1
        while f"{base}{counter}" in in_use or f"{base}{counter}" in seen:
            counter += 1
        return f"{base}{counter}"

    def rebuild(node: TypeExpr) -> TypeExpr:
        if isinstance(node, Elementary):
            name = node.label.name
            if name in seen:
                new_name = fresh(name)
                provenance[new_name] = name
                seen.add(new_name)
                return Elementary(Label(new_name, node.label.dimension))
            seen.add(name)
            return node
        if isinstance(node, Arrow):
            return Arrow(rebuild(node.left), rebuild(node.right))
        return node

    return rebuild(x), provenance


# --- the K parity function and the input/output partition -------------------

def _mark_count(x: TypeExpr) -> int:
    """Arrows plus open brackets in the canonical rendering of x."""
    if isinstance(x, Arrow):
        return 2 + _mark_count(x.left) + _mark_count(x.right)
    return 0


def _contains(x: TypeExpr, name: str) -> bool:
    return any(isinstance(n, Elementary) and n.label.name == name for n in x.walk())


def k_value(x: TypeExpr, label: Label | str) -> int:
    """Parity of arrows and open brackets strictly to the right of the label
    in the canonical fully parenthesized rendering of x.

    Value 1 marks an input system, 0 an output system.
    """
    name = label.name if isinstance(label, Label) else label
    count = 0
    node = x
    while isinstance(node, Arrow):
        if _contains(node.left, name):
            # this node's own arrow plus everything rendered on its right
            count += 1 + _mark_count(node.right)
            node = node.left
        elif _contains(node.right, name):
            node = node.right
        else:
            raise ValueError(f"label {name!r} does not occur in the type")
    if not (isinstance(node, Elementary) and node.label.name == name):
        raise ValueError(f"label {name!r} does not occur in the type")
    return count % 2


@dataclass(frozen=True)
class IoAnalysis:
    """Per-type record: elementary systems, input/output split, K map,
    and the identity-normalization scalar lambda (exact rational)."""

    elementary: tuple[Label, ...]
    inputs: frozenset[Label]
    outputs: frozenset[Label]
    k: Mapping[Label, int]
    lam: Fraction

    def inputs_ordered(self) -> tuple[Label, ...]:
        return tuple(a for a in self.elementary if a in self.inputs)

    def outputs_ordered(self) -> tuple[Label, ...]:
        return tuple(a for a in self.elementary if a in self.outputs)


def _total_dimension(x: TypeExpr) -> int:
    out = 1
    for node in x.walk():
        if isinstance(node, Elementary):
            out *= node.label.dimension
    return out


def _lambda_rec(x: TypeExpr) -> Fraction:
    if isinstance(x, Trivial):
        return Fraction(1)
    if isinstance(x, Elementary):
        return Fraction(1, x.label.dimension)
    assert isinstance(x, Arrow)
    return _lambda_rec(x.right) / (_total_dimension(x.left) * _lambda_rec(x.left))


def io_partition(x: TypeExpr) -> IoAnalysis:
    """Split Ele_x into inputs (K = 1) and outputs (K = 0) and compute lambda
    by the recursion lambda_E = 1/d_E, lambda_I = 1,
    lambda_{x->y} = lambda_y / (d_x lambda_x)."""
    elementary = elementary_systems(x)
    k = {a: k_value(x, a) for a in elementary}
    inputs = frozenset(a for a in elementary if k[a] == 1)
    outputs = frozenset(a for a in elementary if k[a] == 0)
    return IoAnalysis(elementary, inputs, outputs, k, _lambda_rec(x))


# --- the subterm partial order ----------------------------------------------

def is_subtype(y: TypeExpr, x: TypeExpr) -> bool:
    """True iff y appears as a subterm of x (reflexive)."""
    return any(node == y for node in x.walk())


def minimal_enclosing(x: TypeExpr, a: Label | str, b: Label | str) -> TypeExpr:
    """The unique smallest subterm of x containing both labels.

    For distinct labels in core form this is always an arrow with the two
    labels split across its sides.
    """
    name_a = a.name if isinstance(a, Label) else a
    name_b = b.name if isinstance(b, Label) else b
    if not _contains(x, name_a):
        raise ValueError(f"label {name_a!r} does not occur in the type")
    if not _contains(x, name_b):
        raise ValueError(f"label {name_b!r} does not occur in the type")
    node = x
    while isinstance(node, Arrow):
        if _contains(node.left, name_a) and _contains(node.left, name_b):
            node = node.left
        elif _contains(node.right, name_a) and _contains(node.right, name_b):
            node = node.right
        else:
            return node
    return node
