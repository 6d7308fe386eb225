"""Decision procedures over the string calculus.

Every check reduces to exact word-set computations: type inclusion to a
subset test on D sets, contraction and composition admissibility to
emptiness of the intersection with a critical set.  Verdicts carry a
machine-checkable witness whenever they reject.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .strings import BitWord, build_D, critical_set_multi
from .type_core import (
    Arrow,
    Elementary,
    Label,
    TRIVIAL,
    TypeExpr,
    elementary_systems,
    io_partition,
    tensor,
)


class Reason(str, Enum):
    OK = "ok"
    INPUT_INPUT = "input-input"
    OUTPUT_OUTPUT = "output-output"
    CRITICAL_SET = "critical-set-hit"
    LABEL_MISMATCH = "label-mismatch"
    LAMBDA_MISMATCH = "lambda-mismatch"
    NOT_INCLUDED = "not-included"


@dataclass(frozen=True)
class Verdict:
    """Outcome of a decision procedure.

    ``witness`` is present exactly when the rejection came from a word-level
    counterexample; ``result_in``/``result_out`` are present exactly when the
    check passes and has a resulting channel type.
    """

    admissible: bool
    reason: Reason
    witness: BitWord | None = None
    result_in: tuple[Label, ...] | None = None
    result_out: tuple[Label, ...] | None = None

    def to_json(self) -> dict:
        return {
            "admissible": self.admissible,
            "reason": self.reason.value,
            "witness": self.witness.render() if self.witness is not None else None,
            "result_in": [a.name for a in self.result_in] if self.result_in is not None else None,
            "result_out": [a.name for a in self.result_out] if self.result_out is not None else None,
        }


@dataclass(frozen=True)
class ContractionSpec:
    """Disjoint (input-label, output-label) pairs to contract, each pair on
    systems of equal dimension."""

    pairs: tuple[tuple[Label, Label], ...]

    def __post_init__(self):
        names = [name for a, b in self.pairs for name in (a.name, b.name)]
        if len(set(names)) != len(names):
            raise ValueError(f"contraction pairs overlap: {sorted(names)}")
        for a, b in self.pairs:
            if a.dimension != b.dimension:
                raise ValueError(
                    f"contracted pair ({a.name}, {b.name}) has unequal dimensions "
                    f"{a.dimension} != {b.dimension}"
                )

    @staticmethod
    def of(pairs: Iterable[tuple[Label, Label]]) -> "ContractionSpec":
        return ContractionSpec(tuple(sorted(pairs, key=lambda p: (p[0].name, p[1].name))))

    @staticmethod
    def from_text(text: str, x: TypeExpr) -> "ContractionSpec":
        """Parse pair syntax ``A:B,C:D`` against the labels of x."""
        by_name = {a.name: a for a in elementary_systems(x)}
        pairs = []
        for chunk in text.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            if ":" not in chunk:
                raise ValueError(f"bad pair {chunk!r}; expected Input:Output")
            left, right = (part.strip() for part in chunk.split(":", 1))
            for name in (left, right):
                if name not in by_name:
                    raise ValueError(f"label {name!r} does not occur in the type")
            pairs.append((by_name[left], by_name[right]))
        return ContractionSpec.of(pairs)


# --- type inclusion -----------------------------------------------------------

def check_inclusion(x: TypeExpr, y: TypeExpr) -> Verdict:
    """Is every deterministic map of x also one of y?

    Holds exactly when the label sets agree, the normalization scalars
    agree, and D_x is a subset of D_y; otherwise the verdict carries a word
    of D_x that falls outside D_y (or the mismatch reason).
    """
    ax, ay = io_partition(x), io_partition(y)
    if set(ax.elementary) != set(ay.elementary):
        return Verdict(False, Reason.LABEL_MISMATCH)
    if ax.lam != ay.lam:
        return Verdict(False, Reason.LAMBDA_MISMATCH)
    dx, dy = build_D(x), build_D(y)
    extra = dx.difference(dy)
    if extra.masks:
        return Verdict(False, Reason.NOT_INCLUDED, witness=extra.min_word())
    return Verdict(
        True,
        Reason.OK,
        result_in=ax.inputs_ordered(),
        result_out=ax.outputs_ordered(),
    )


def check_equivalence(x: TypeExpr, y: TypeExpr) -> Verdict:
    """Inclusion both ways."""
    forward = check_inclusion(x, y)
    if not forward.admissible:
        return forward
    backward = check_inclusion(y, x)
    if not backward.admissible:
        return backward
    return forward


# --- contraction admissibility --------------------------------------------------

def _resolve_pairs(analysis, spec: ContractionSpec) -> list[tuple[Label, Label]]:
    """Bind pair labels by name to the type's own systems; the two systems
    of one pair must share a dimension."""
    by_name = {a.name: a for a in analysis.elementary}
    resolved = []
    for a, b in spec.pairs:
        for lbl in (a, b):
            if lbl.name not in by_name:
                raise ValueError(f"label {lbl.name!r} does not occur in the type")
        ra, rb = by_name[a.name], by_name[b.name]
        if ra.dimension != rb.dimension:
            raise ValueError(
                f"contracted pair ({ra.name}, {rb.name}) has unequal dimensions "
                f"{ra.dimension} != {rb.dimension}"
            )
        resolved.append((ra, rb))
    return resolved


def _orient_pairs(
    analysis, pairs: list[tuple[Label, Label]]
) -> tuple[Verdict | None, list[tuple[Label, Label]]]:
    """Normalize each pair to (input, output); reject in-in and out-out."""
    oriented = []
    for a, b in pairs:
        a_in, b_in = a in analysis.inputs, b in analysis.inputs
        if a_in and b_in:
            return Verdict(False, Reason.INPUT_INPUT), []
        if not a_in and not b_in:
            return Verdict(False, Reason.OUTPUT_OUTPUT), []
        oriented.append((a, b) if a_in else (b, a))
    return None, oriented


def check_contraction(x: TypeExpr, spec: ContractionSpec) -> Verdict:
    """Can these loops be closed on every deterministic map of x?

    Pairs joining two inputs or two outputs are rejected outright; the rest
    reduce to an emptiness test of D_x against the critical set of the
    oriented pairs.
    """
    analysis = io_partition(x)
    rejection, oriented = _orient_pairs(analysis, _resolve_pairs(analysis, spec))
    if rejection is not None:
        return rejection
    if not oriented:
        return Verdict(
            True,
            Reason.OK,
            result_in=analysis.inputs_ordered(),
            result_out=analysis.outputs_ordered(),
        )
    obstruction = critical_set_multi(x, oriented)
    hits = build_D(x).intersection(obstruction)
    if hits.masks:
        return Verdict(False, Reason.CRITICAL_SET, witness=hits.min_word())
    contracted = {name for pair in oriented for name in (pair[0].name, pair[1].name)}
    return Verdict(
        True,
        Reason.OK,
        result_in=tuple(a for a in analysis.inputs_ordered() if a.name not in contracted),
        result_out=tuple(a for a in analysis.outputs_ordered() if a.name not in contracted),
    )


# --- composition -----------------------------------------------------------------

def _prime(name: str, taken: set[str]) -> str:
    candidate = name + "'"
    while candidate in taken:
        candidate += "'"
    return candidate


def _rename_labels(x: TypeExpr, mapping: dict[str, str]) -> TypeExpr:
    if isinstance(x, Elementary) and x.label.name in mapping:
        return Elementary(Label(mapping[x.label.name], x.label.dimension))
    if isinstance(x, Arrow):
        return Arrow(_rename_labels(x.left, mapping), _rename_labels(x.right, mapping))
    return x


def check_composition(x: TypeExpr, y: TypeExpr) -> Verdict:
    """Is connecting x and y along their shared labels always meaningful?

    Reduces to a contraction check on the tensor of the two types, with
    the shared labels of y renamed apart first.  No shared labels means a
    plain tensor, which is always admissible.
    """
    ax, ay = io_partition(x), io_partition(y)
    dims_x = {a.name: a.dimension for a in ax.elementary}
    dims_y = {a.name: a.dimension for a in ay.elementary}
    shared = sorted(set(dims_x) & set(dims_y))
    for name in shared:
        if dims_x[name] != dims_y[name]:
            raise ValueError(
                f"shared label {name!r} has dimension {dims_x[name]} in one type "
                f"and {dims_y[name]} in the other"
            )
    inputs_x = {a.name for a in ax.inputs}
    inputs_y = {a.name for a in ay.inputs}
    result_in = tuple(
        a for a in ax.inputs_ordered() + ay.inputs_ordered() if a.name not in shared
    )
    result_out = tuple(
        a for a in ax.outputs_ordered() + ay.outputs_ordered() if a.name not in shared
    )
    if not shared:
        return Verdict(True, Reason.OK, result_in=result_in, result_out=result_out)

    for name in shared:
        if name in inputs_x and name in inputs_y:
            return Verdict(False, Reason.INPUT_INPUT)
        if name not in inputs_x and name not in inputs_y:
            return Verdict(False, Reason.OUTPUT_OUTPUT)

    taken = set(dims_x) | set(dims_y)
    renaming = {name: _prime(name, taken) for name in shared}
    y_primed = _rename_labels(y, renaming)
    pairs = []
    for name in shared:
        original = Label(name, dims_x[name])
        primed = Label(renaming[name], dims_y[name])
        # orient (input, output): the input side is whichever copy feeds in
        pairs.append((original, primed) if name in inputs_x else (primed, original))
    verdict = check_contraction(tensor(x, y_primed), ContractionSpec.of(pairs))
    if not verdict.admissible:
        return verdict
    return Verdict(True, Reason.OK, result_in=result_in, result_out=result_out)


# --- derived checks ----------------------------------------------------------------

def check_monotonicity(x: TypeExpr, h: ContractionSpec, k: ContractionSpec) -> bool:
    """With H a subset of K: an inadmissible C_H must force C_K inadmissible.
    Returns whether that implication holds on this instance."""
    if not set(h.pairs) <= set(k.pairs):
        raise ValueError("H must be a subset of K")
    vh = check_contraction(x, h)
    vk = check_contraction(x, k)
    return vh.admissible or not vk.admissible


def _tensor_fold(parts: Sequence[TypeExpr]) -> TypeExpr:
    if not parts:
        return TRIVIAL
    out = parts[0]
    for part in parts[1:]:
        out = tensor(out, part)
    return out


def supermap_inclusion_form(x: TypeExpr, spec: ContractionSpec) -> Verdict:
    """Decide the contraction by the equivalent type inclusion.

    Builds (tensor of (B_i -> A_i)) -> (remaining inputs -> remaining
    outputs) for the oriented pairs (A_i input, B_i output) and runs
    check_inclusion against it.  Agrees with check_contraction.
    """
    analysis = io_partition(x)
    rejection, oriented = _orient_pairs(analysis, _resolve_pairs(analysis, spec))
    if rejection is not None:
        raise ValueError(f"pairs must join inputs with outputs ({rejection.reason.value})")
    if not oriented:
        raise ValueError("at least one contraction pair is required")
    contracted = {name for pair in oriented for name in (pair[0].name, pair[1].name)}
    plugs = _tensor_fold([Arrow(Elementary(b), Elementary(a)) for a, b in oriented])
    rest_in = _tensor_fold(
        [Elementary(a) for a in analysis.inputs_ordered() if a.name not in contracted]
    )
    rest_out = _tensor_fold(
        [Elementary(a) for a in analysis.outputs_ordered() if a.name not in contracted]
    )
    target = Arrow(plugs, Arrow(rest_in, rest_out))
    return check_inclusion(x, target)
