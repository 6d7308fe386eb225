"""Shared test helpers: seeded random type generation."""

from __future__ import annotations

import random
from typing import Sequence

import hypothesis
from hypothesis import strategies as st

from hotypes import (
    Arrow,
    Elementary,
    Label,
    TRIVIAL,
    TypeExpr,
    bar,
    io_partition,
    tensor,
)

hypothesis.settings.register_profile(
    "hotypes", deadline=None, max_examples=60, derandomize=True
)
hypothesis.settings.load_profile("hotypes")

# fresh-name pool; 'I' is reserved for the trivial type
_NAMES = [c for c in "ABCDEFGHJKLMNOPQRSTUVWXYZ"]


def random_type(
    rng: random.Random,
    max_systems: int = 6,
    dims: Sequence[int] = (2,),
    min_systems: int = 1,
) -> TypeExpr:
    """A random relabeled type with between min and max non-trivial systems.

    Mixes raw arrows, bars, tensors, and occasional trivial-typed sides so
    the whole grammar gets exercised.
    """
    budget = rng.randint(min_systems, max_systems)
    counter = 0

    def fresh() -> Label:
        nonlocal counter
        name = _NAMES[counter] if counter < len(_NAMES) else f"Z{counter}"
        counter += 1
        return Label(name, rng.choice(list(dims)))

    def build(n: int) -> TypeExpr:
        roll = rng.random()
        if n == 1:
            if roll < 0.55:
                return Elementary(fresh())
            if roll < 0.75:
                return bar(build(1))
            if roll < 0.85:
                return Arrow(TRIVIAL, build(1))
            return Arrow(build(1), TRIVIAL)
        split = rng.randint(1, n - 1)
        left, right = build(split), build(n - split)
        if roll < 0.55:
            return Arrow(left, right)
        if roll < 0.85:
            return tensor(left, right)
        return bar(Arrow(left, right))

    return build(budget)


def random_type_with_io(
    rng: random.Random,
    max_systems: int = 6,
    dims: Sequence[int] = (2,),
    min_inputs: int = 1,
    min_outputs: int = 1,
) -> TypeExpr:
    """Random type that has at least the requested inputs and outputs."""
    while True:
        x = random_type(rng, max_systems=max_systems, dims=dims, min_systems=min_inputs + min_outputs)
        analysis = io_partition(x)
        if len(analysis.inputs) >= min_inputs and len(analysis.outputs) >= min_outputs:
            return x


@st.composite
def type_exprs(draw, max_systems: int = 5, dims: Sequence[int] = (2,)) -> TypeExpr:
    seed = draw(st.integers(0, 2**32 - 1))
    return random_type(random.Random(seed), max_systems=max_systems, dims=dims)


@st.composite
def type_exprs_with_io(draw, max_systems: int = 5, dims: Sequence[int] = (2,)) -> TypeExpr:
    seed = draw(st.integers(0, 2**32 - 1))
    return random_type_with_io(random.Random(seed), max_systems=max_systems, dims=dims)
