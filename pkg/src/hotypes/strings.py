"""Exact calculus of labeled binary strings.

Words are bitmasks over a canonically sorted label universe (bit i holds
the value at the i-th label).  Word sets are plain frozensets of masks, so
every operation here is exact and exhaustive; universes are capped at 63
labels to keep single-machine-word encoding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator, Sequence

from .type_core import (
    Arrow,
    Elementary,
    Label,
    Trivial,
    TypeExpr,
    elementary_systems,
    io_partition,
)

MAX_UNIVERSE = 63


class UniverseTooLargeError(ValueError):
    pass


class _Annihilated:
    """Outcome of contracting a word whose two bits disagree."""

    def __repr__(self) -> str:
        return "ANNIHILATED"


ANNIHILATED = _Annihilated()


def canonical_universe(labels: Iterable[Label]) -> tuple[Label, ...]:
    """Sort labels by name and reject duplicates and oversized universes."""
    ordered = tuple(sorted(labels, key=lambda a: a.name))
    names = [a.name for a in ordered]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate labels in universe: {names}")
    if len(ordered) > MAX_UNIVERSE:
        raise UniverseTooLargeError(f"universe has {len(ordered)} labels; the cap is {MAX_UNIVERSE}")
    return ordered


@dataclass(frozen=True)
class BitWord:
    """One bit per label of the universe; the empty-universe word is the
    null string, distinct from the absence of any word."""

    universe: tuple[Label, ...]
    bits: int

    def __post_init__(self):
        if not 0 <= self.bits < (1 << len(self.universe)):
            raise ValueError(f"bits {self.bits} out of range for {len(self.universe)} labels")

    def bit(self, label: Label | str) -> int:
        name = label.name if isinstance(label, Label) else label
        for i, a in enumerate(self.universe):
            if a.name == name:
                return (self.bits >> i) & 1
        raise ValueError(f"label {name!r} not in universe")

    def as_tuple(self) -> tuple[int, ...]:
        return tuple((self.bits >> i) & 1 for i in range(len(self.universe)))

    def render(self) -> str:
        if not self.universe:
            return "ε"
        return "".join(f"{(self.bits >> i) & 1}_{a.name}" for i, a in enumerate(self.universe))

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class WordSet:
    """A finite set of words over one universe.

    ``annihilated`` records whether a contraction mapped some member to the
    null string by hitting mismatched bits; such words contribute nothing
    to the surviving set.
    """

    universe: tuple[Label, ...]
    masks: frozenset[int] = field(default_factory=frozenset)
    annihilated: bool = False

    def __len__(self) -> int:
        return len(self.masks)

    def __iter__(self) -> Iterator[BitWord]:
        order = sorted(self.masks, key=self._lex_key)
        return iter(BitWord(self.universe, m) for m in order)

    def _lex_key(self, mask: int) -> tuple[int, ...]:
        return tuple((mask >> i) & 1 for i in range(len(self.universe)))

    def __contains__(self, word: BitWord) -> bool:
        return word.universe == self.universe and word.bits in self.masks

    def word(self, bits_by_name: dict[str, int]) -> BitWord:
        """Build a member-shaped word from {label name: bit}."""
        if set(bits_by_name) != {a.name for a in self.universe}:
            raise ValueError("bit assignment does not cover the universe exactly")
        mask = 0
        for i, a in enumerate(self.universe):
            if bits_by_name[a.name]:
                mask |= 1 << i
        return BitWord(self.universe, mask)

    def _check_same_universe(self, other: "WordSet") -> None:
        if self.universe != other.universe:
            raise ValueError("word sets live over different universes")

    def union(self, other: "WordSet") -> "WordSet":
        self._check_same_universe(other)
        return WordSet(self.universe, self.masks | other.masks, self.annihilated or other.annihilated)

    def intersection(self, other: "WordSet") -> "WordSet":
        self._check_same_universe(other)
        return WordSet(self.universe, self.masks & other.masks)

    def difference(self, other: "WordSet") -> "WordSet":
        self._check_same_universe(other)
        return WordSet(self.universe, self.masks - other.masks)

    def is_subset(self, other: "WordSet") -> bool:
        self._check_same_universe(other)
        return self.masks <= other.masks

    def min_word(self) -> BitWord:
        """Lexicographically smallest member (canonical label order, 0 < 1)."""
        if not self.masks:
            raise ValueError("empty word set has no smallest word")
        return BitWord(self.universe, min(self.masks, key=self._lex_key))

    def render(self) -> list[str]:
        return [w.render() for w in self]


# --- constructors -----------------------------------------------------------

def full_set(universe: Iterable[Label]) -> WordSet:
    """W: every word over the universe.  Over the empty universe this is
    the singleton holding the null string."""
    ordered = canonical_universe(universe)
    return WordSet(ordered, frozenset(range(1 << len(ordered))))


def all_ones(universe: Iterable[Label]) -> BitWord:
    """e: the all-ones word."""
    ordered = canonical_universe(universe)
    return BitWord(ordered, (1 << len(ordered)) - 1)


def traceless_set(universe: Iterable[Label]) -> WordSet:
    """T = W minus the all-ones word; empty over the empty universe."""
    w = full_set(universe)
    return WordSet(w.universe, w.masks - {all_ones(w.universe).bits})


def complement_perp(j: WordSet) -> WordSet:
    """W \\ J."""
    return WordSet(j.universe, full_set(j.universe).masks - j.masks)


def complement_bar(j: WordSet) -> WordSet:
    """T \\ J."""
    return WordSet(j.universe, traceless_set(j.universe).masks - j.masks)


# --- concatenation and contraction -------------------------------------------

def concat(j1: WordSet, j2: WordSet) -> WordSet:
    """All pairwise joins of words over the disjoint union of universes.

    The null-string set {ε} is the identity and the empty set annihilates.
    """
    names1 = {a.name for a in j1.universe}
    names2 = {a.name for a in j2.universe}
    if names1 & names2:
        raise ValueError(f"universes overlap on {sorted(names1 & names2)}")
    universe = canonical_universe(j1.universe + j2.universe)
    position = {a.name: i for i, a in enumerate(universe)}

    def rebase(mask: int, source: tuple[Label, ...]) -> int:
        out = 0
        for i, a in enumerate(source):
            if (mask >> i) & 1:
                out |= 1 << position[a.name]
        return out

    masks = frozenset(
        rebase(m1, j1.universe) | rebase(m2, j2.universe)
        for m1 in j1.masks
        for m2 in j2.masks
    )
    return WordSet(universe, masks, j1.annihilated or j2.annihilated)


def _positions(universe: tuple[Label, ...], labels: Sequence[Label | str]) -> list[int]:
    index = {a.name: i for i, a in enumerate(universe)}
    out = []
    for label in labels:
        name = label.name if isinstance(label, Label) else label
        if name not in index:
            raise ValueError(f"label {name!r} not in universe")
        out.append(index[name])
    return out


def contract_word(word: BitWord, a: Label | str, b: Label | str) -> BitWord | _Annihilated:
    """Drop the two positions when their bits agree; ANNIHILATED otherwise."""
    pa, pb = _positions(word.universe, [a, b])
    if pa == pb:
        raise ValueError("cannot contract a label with itself")
    if ((word.bits >> pa) & 1) != ((word.bits >> pb) & 1):
        return ANNIHILATED
    keep = tuple(lbl for i, lbl in enumerate(word.universe) if i not in (pa, pb))
    mask = 0
    shift = 0
    for i in range(len(word.universe)):
        if i in (pa, pb):
            continue
        mask |= ((word.bits >> i) & 1) << shift
        shift += 1
    return BitWord(keep, mask)


def contract_set(s: WordSet, pairs: Sequence[tuple[Label | str, Label | str]]) -> WordSet:
    """Contract every pair on every word; annihilated words are dropped from
    the result and recorded on the flag.  Pair order is immaterial.
    """
    flat: list[str] = []
    for a, b in pairs:
        flat.append(a.name if isinstance(a, Label) else a)
        flat.append(b.name if isinstance(b, Label) else b)
    if len(set(flat)) != len(flat):
        raise ValueError(f"contraction pairs overlap: {flat}")
    positions = _positions(s.universe, flat)
    pair_positions = [(positions[2 * i], positions[2 * i + 1]) for i in range(len(pairs))]
    dropped = {p for pq in pair_positions for p in pq}
    keep = tuple(lbl for i, lbl in enumerate(s.universe) if i not in dropped)

    survivors = set()
    hit = False
    for mask in s.masks:
        if any(((mask >> pa) & 1) != ((mask >> pb) & 1) for pa, pb in pair_positions):
            hit = True
            continue
        out = 0
        shift = 0
        for i in range(len(s.universe)):
            if i in dropped:
                continue
            out |= ((mask >> i) & 1) << shift
            shift += 1
        survivors.add(out)
    return WordSet(keep, frozenset(survivors), s.annihilated or hit)


def compose_sets(
    j1: WordSet, j2: WordSet, pairs: Sequence[tuple[Label | str, Label | str]]
) -> WordSet:
    """Concatenate, then contract the pairing: J1 *_H J2."""
    return contract_set(concat(j1, j2), pairs)


# --- the recursive word-set builder ------------------------------------------

@lru_cache(maxsize=None)
def build_D(x: TypeExpr) -> WordSet:
    """The word set spanning the traceless part of deterministic maps of x.

    Base cases: a single label contributes {0}; the trivial type the empty
    set.  For an arrow, D_{x->y} = W_x D_y ∪ bar(D_x) perp(D_y).  Memoized
    per subterm, so shared subterms (desugared tensors) are built once.
    """
    if isinstance(x, Trivial):
        return WordSet((), frozenset())
    if isinstance(x, Elementary):
        return WordSet((x.label,), frozenset({0}))
    assert isinstance(x, Arrow)
    elementary_systems(x)  # reject duplicate labels before building
    left, right = build_D(x.left), build_D(x.right)
    w_left = full_set(left.universe)
    return concat(w_left, right).union(concat(complement_bar(left), complement_perp(right)))


def tensor_D_closed_form(x: TypeExpr, y: TypeExpr) -> WordSet:
    """D of the tensor without desugaring: e_x D_y ∪ D_x e_y ∪ D_x D_y."""
    dx, dy = build_D(x), build_D(y)
    ex = WordSet(dx.universe, frozenset({all_ones(dx.universe).bits}))
    ey = WordSet(dy.universe, frozenset({all_ones(dy.universe).bits}))
    return concat(ex, dy).union(concat(dx, ey)).union(concat(dx, dy))


# --- critical sets -----------------------------------------------------------

def _resolve(x_labels: Iterable[Label], label: Label | str) -> Label:
    name = label.name if isinstance(label, Label) else label
    for a in x_labels:
        if a.name == name:
            return a
    raise ValueError(f"label {name!r} does not occur in the type")


def critical_set(x: TypeExpr, a: Label | str, b: Label | str) -> WordSet:
    """Obstruction set for contracting input a with output b: bit 0 at both,
    1 on every other output, free on the other inputs.  The contraction is
    admissible exactly when D_x misses this set."""
    return critical_set_multi(x, [(a, b)])


def critical_set_multi(
    x: TypeExpr, pairs: Sequence[tuple[Label | str, Label | str]]
) -> WordSet:
    """Obstruction set for a set of disjoint (input, output) contractions.

    Members carry equal bits on the two labels of each pair (not all pairs
    one), ones on the untouched outputs, anything on the untouched inputs.
    """
    analysis = io_partition(x)
    universe = canonical_universe(analysis.elementary)
    resolved: list[tuple[Label, Label]] = []
    used: set[str] = set()
    for a, b in pairs:
        la = _resolve(analysis.elementary, a)
        lb = _resolve(analysis.elementary, b)
        if la not in analysis.inputs:
            raise ValueError(f"{la.name} is not an input system")
        if lb not in analysis.outputs:
            raise ValueError(f"{lb.name} is not an output system")
        if la.name in used or lb.name in used:
            raise ValueError("contraction pairs overlap")
        used.update((la.name, lb.name))
        resolved.append((la, lb))
    if not resolved:
        raise ValueError("at least one contraction pair is required")

    position = {lbl.name: i for i, lbl in enumerate(universe)}
    free_inputs = [position[a.name] for a in analysis.inputs if a.name not in used]
    fixed_outputs = [position[b.name] for b in analysis.outputs if b.name not in used]
    base = 0
    for p in fixed_outputs:
        base |= 1 << p

    masks = set()
    for pair_bits in product((0, 1), repeat=len(resolved)):
        if all(pair_bits):
            continue  # all-ones on the contracted block never meets D_x
        pattern = base
        for (la, lb), bit in zip(resolved, pair_bits):
            if bit:
                pattern |= (1 << position[la.name]) | (1 << position[lb.name])
        for free_bits in product((0, 1), repeat=len(free_inputs)):
            mask = pattern
            for p, bit in zip(free_inputs, free_bits):
                if bit:
                    mask |= 1 << p
            masks.add(mask)
    return WordSet(universe, frozenset(masks))
