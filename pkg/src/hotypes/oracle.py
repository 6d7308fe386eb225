"""Dense Choi-operator ground truth for the combinatorial calculus.

Operators live on the tensor product of their labels' Hilbert spaces in
canonical (sorted) label order.  Everything here is exact linear algebra
at desk scale: orthonormal operator bases for the word subspaces, seeded
sampling of deterministic maps, the link product, and the channel and
no-signalling tests used to validate combinatorial verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .admissibility import ContractionSpec, check_contraction
from .strings import WordSet, build_D, canonical_universe
from .type_core import Label, TypeExpr, io_partition

DIMENSION_GUARD = 256


def _dims(labels: Sequence[Label]) -> tuple[int, ...]:
    return tuple(a.dimension for a in labels)


def _side(labels: Sequence[Label]) -> int:
    side = 1
    for a in labels:
        side *= a.dimension
    return side


@dataclass(frozen=True)
class OperatorMatrix:
    """A square complex matrix on the tensor product of its labels' spaces."""

    labels: tuple[Label, ...]
    data: np.ndarray
    tol: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if canonical_universe(self.labels) != self.labels:
            # the data layout is tied to the axis order, so reordering here
            # would silently permute the matrix
            raise ValueError("labels must be given in canonical (sorted) order")
        side = _side(self.labels)
        if self.data.shape != (side, side):
            raise ValueError(f"matrix side {self.data.shape} does not match labels (need {side})")

    @property
    def side(self) -> int:
        return self.data.shape[0]

    def tensor_view(self) -> np.ndarray:
        dims = _dims(self.labels)
        return self.data.reshape(dims + dims)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.data)[0])

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def hermiticity_defect(self) -> float:
        return float(np.linalg.norm(self.data - self.data.conj().T, 2))


def identity_operator(labels: Iterable[Label]) -> OperatorMatrix:
    ordered = canonical_universe(labels)
    return OperatorMatrix(ordered, np.eye(_side(ordered), dtype=complex))


def _names(labels: Iterable[Label | str]) -> set[str]:
    return {a.name if isinstance(a, Label) else a for a in labels}


def partial_trace(op: OperatorMatrix, drop: Iterable[Label | str]) -> OperatorMatrix:
    """Trace out the listed labels; the rest keep canonical order."""
    names = _names(drop)
    unknown = names - {a.name for a in op.labels}
    if unknown:
        raise ValueError(f"labels {sorted(unknown)} not present")
    keep = tuple(a for a in op.labels if a.name not in names)
    n = len(op.labels)
    # dropped labels share one id between ket and bra (trace); kept labels
    # get separate ids (einsum integer ids must stay below 52)
    ket_ids = list(range(n))
    bra_ids = [i if op.labels[i].name in names else n + i for i in range(n)]
    subs = ket_ids + bra_ids
    out_subs = [i for i in ket_ids if op.labels[i].name not in names] + [
        n + i for i in range(n) if op.labels[i].name not in names
    ]
    reduced = np.einsum(op.tensor_view(), subs, out_subs)
    side = _side(keep)
    return OperatorMatrix(keep, reduced.reshape(side, side))


def partial_transpose(op: OperatorMatrix, labels: Iterable[Label | str]) -> OperatorMatrix:
    """Transpose the ket/bra axes of the listed labels."""
    names = _names(labels)
    n = len(op.labels)
    t = op.tensor_view()
    axes = list(range(2 * n))
    for i, a in enumerate(op.labels):
        if a.name in names:
            axes[i], axes[n + i] = axes[n + i], axes[i]
    return OperatorMatrix(op.labels, t.transpose(axes).reshape(op.side, op.side))


def _insert_identity(op: OperatorMatrix, label: Label, scale: float = 1.0) -> OperatorMatrix:
    """Tensor an identity factor on ``label`` into canonical position."""
    out_labels = canonical_universe(op.labels + (label,))
    pos = out_labels.index(label)
    n = len(op.labels)
    op_subs = list(range(n)) + list(range(n, 2 * n))
    eye_subs = [2 * n, 2 * n + 1]
    kets = list(range(n))
    bras = list(range(n, 2 * n))
    kets.insert(pos, 2 * n)
    bras.insert(pos, 2 * n + 1)
    tensor = np.einsum(op.tensor_view(), op_subs, np.eye(label.dimension), eye_subs, kets + bras)
    side = _side(out_labels)
    return OperatorMatrix(out_labels, scale * tensor.reshape(side, side))


# --- the link product ---------------------------------------------------------

def link_product(r: OperatorMatrix, s: OperatorMatrix) -> OperatorMatrix:
    """Compose Choi operators over their shared labels.

    Partial transpose on the shared systems, multiply, and trace them out;
    with no shared labels this is the tensor product in canonical order.
    """
    shared = {a.name for a in r.labels} & {a.name for a in s.labels}
    dims_r = {a.name: a.dimension for a in r.labels}
    dims_s = {a.name: a.dimension for a in s.labels}
    for name in shared:
        if dims_r[name] != dims_s[name]:
            raise ValueError(f"shared label {name!r} has mismatched dimensions")
    out_labels = canonical_universe(
        tuple(a for a in r.labels if a.name not in shared)
        + tuple(a for a in s.labels if a.name not in shared)
    )
    # Contracting ket with ket and bra with bra across the two operators is
    # the transpose-multiply-trace composite in one step.
    ids: dict[tuple[str, str], int] = {}
    counter = 0

    def sub(name: str, side: str) -> int:
        nonlocal counter
        key = (name, side)
        if key not in ids:
            ids[key] = counter
            counter += 1
        return ids[key]

    r_subs = [sub(a.name, "ket") for a in r.labels] + [sub(a.name, "bra") for a in r.labels]
    s_subs = [sub(a.name, "ket") for a in s.labels] + [sub(a.name, "bra") for a in s.labels]
    out_subs = [sub(a.name, "ket") for a in out_labels] + [sub(a.name, "bra") for a in out_labels]
    result = np.einsum(r.tensor_view(), r_subs, s.tensor_view(), s_subs, out_subs)
    side = _side(out_labels)
    return OperatorMatrix(out_labels, result.reshape(side, side))


def phi_operator(a: Label, b: Label) -> OperatorMatrix:
    """Unnormalized maximally entangled operator sum_ij |ii><jj| on (a, b),
    with the computational-basis identification of the two spaces."""
    if a.dimension != b.dimension:
        raise ValueError(f"{a.name} and {b.name} must have equal dimensions")
    d = a.dimension
    data = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            data[i * d + i, j * d + j] = 1.0
    return OperatorMatrix(canonical_universe((a, b)), data)


def numeric_contraction(op: OperatorMatrix, a: Label | str, b: Label | str) -> OperatorMatrix:
    """Close the loop from output b into input a: link with the entangled
    pair operator on (a, b)."""
    by_name = {lbl.name: lbl for lbl in op.labels}
    la = by_name[a.name if isinstance(a, Label) else a]
    lb = by_name[b.name if isinstance(b, Label) else b]
    return link_product(op, phi_operator(la, lb))


# --- operator bases -----------------------------------------------------------

@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal Hermitian elements under the Hilbert-Schmidt product."""

    labels: tuple[Label, ...]
    elements: tuple[np.ndarray, ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.elements)

    def gram_matrix(self) -> np.ndarray:
        flat = [e.reshape(-1) for e in self.elements]
        out = np.empty((len(flat), len(flat)), dtype=complex)
        for i, u in enumerate(flat):
            for j, v in enumerate(flat):
                out[i, j] = np.vdot(u, v)
        return out


def _gellmann_traceless(d: int) -> list[np.ndarray]:
    """The d^2 - 1 orthonormal traceless Hermitian matrices: symmetric and
    antisymmetric off-diagonal pairs, then the diagonal ladder."""
    out: list[np.ndarray] = []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1 / np.sqrt(2)
            out.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1j / np.sqrt(2)
            m[k, j] = 1j / np.sqrt(2)
            out.append(m)
    for l in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        for i in range(l):
            m[i, i] = 1
        m[l, l] = -l
        out.append(m / np.sqrt(l * (l + 1)))
    return out


def herm_basis(d: int) -> SubspaceBasis:
    """Orthonormal basis of Hermitian operators on one d-dimensional factor:
    the normalized identity followed by the traceless elements."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    elements = [np.eye(d, dtype=complex) / np.sqrt(d)] + _gellmann_traceless(d)
    return SubspaceBasis((), tuple(elements))


def _guard(labels: Sequence[Label]) -> None:
    if _side(labels) > DIMENSION_GUARD:
        raise ValueError(
            f"total Hilbert dimension {_side(labels)} exceeds the dense guard {DIMENSION_GUARD}"
        )


@lru_cache(maxsize=256)
def basis_for_words(words: WordSet) -> SubspaceBasis:
    """Orthonormal basis of the subspace spanned by the word set: traceless
    factors where a bit is 0, the normalized identity where it is 1.

    Cached per word set; callers must treat the elements as read-only.
    """
    labels = words.universe
    _guard(labels)
    factor_options: dict[tuple[str, int], list[np.ndarray]] = {}
    for a in labels:
        factor_options[(a.name, 0)] = _gellmann_traceless(a.dimension)
        factor_options[(a.name, 1)] = [np.eye(a.dimension, dtype=complex) / np.sqrt(a.dimension)]
    elements: list[np.ndarray] = []
    for word in words:
        bits = word.as_tuple()
        pools = [factor_options[(a.name, bits[i])] for i, a in enumerate(labels)]
        for combo in product(*pools):
            m = np.array([[1.0 + 0j]])
            for factor in combo:
                m = np.kron(m, factor)
            elements.append(m)
    return SubspaceBasis(labels, tuple(elements))


def delta_basis(x: TypeExpr) -> SubspaceBasis:
    """Basis of the traceless deviation subspace attached to a type."""
    return basis_for_words(build_D(x))


# --- deterministic-map sampling -------------------------------------------------

def sample_deterministic(x: TypeExpr, seed: int = 0, magnitude: float = 1.0) -> OperatorMatrix:
    """A reproducible deterministic map of type x.

    Starts from the normalization-scalar multiple of the identity, adds a
    seeded random combination of the deviation basis, and halves the
    deviation until the operator is positive.  Magnitude 0 gives the exact
    identity-proportional map.
    """
    analysis = io_partition(x)
    labels = canonical_universe(analysis.elementary)
    _guard(labels)
    lam = float(analysis.lam)
    side = _side(labels)
    base = lam * np.eye(side, dtype=complex)
    if magnitude == 0:
        return OperatorMatrix(labels, base)
    basis = delta_basis(x)
    rng = np.random.default_rng(seed)
    coeffs = magnitude * rng.standard_normal(len(basis))
    deviation = np.zeros((side, side), dtype=complex)
    for c, element in zip(coeffs, basis.elements):
        deviation += c * element
    for _ in range(60):
        data = base + deviation
        if float(np.linalg.eigvalsh(data)[0]) >= 0:
            return OperatorMatrix(labels, data)
        deviation /= 2
    return OperatorMatrix(labels, base + deviation)


# --- validation predicates -------------------------------------------------------

def _as_label_tuple(op: OperatorMatrix, labels: Iterable[Label | str]) -> tuple[Label, ...]:
    by_name = {a.name: a for a in op.labels}
    out = []
    for a in labels:
        name = a.name if isinstance(a, Label) else a
        if name not in by_name:
            raise ValueError(f"label {name!r} not present")
        out.append(by_name[name])
    return tuple(out)


def channel_defects(
    op: OperatorMatrix, in_labels: Iterable[Label | str], out_labels: Iterable[Label | str]
) -> tuple[float, float]:
    """(negativity, marginal deviation) for reading op as a channel."""
    ins = _as_label_tuple(op, in_labels)
    outs = _as_label_tuple(op, out_labels)
    if {a.name for a in ins} | {a.name for a in outs} != {a.name for a in op.labels}:
        raise ValueError("in/out labels must partition the operator's labels")
    negativity = max(0.0, -op.min_eigenvalue())
    marginal = partial_trace(op, outs)
    deviation = float(np.linalg.norm(marginal.data - np.eye(marginal.side), 2))
    return negativity, deviation


def is_channel(
    op: OperatorMatrix,
    in_labels: Iterable[Label | str],
    out_labels: Iterable[Label | str],
    tol: float = 1e-9,
) -> bool:
    negativity, deviation = channel_defects(op, in_labels, out_labels)
    return negativity <= tol and deviation <= tol


def channel_violation_margin(
    op: OperatorMatrix, in_labels: Iterable[Label | str], out_labels: Iterable[Label | str]
) -> float:
    """How badly the channel conditions fail (zero for a valid channel)."""
    negativity, deviation = channel_defects(op, in_labels, out_labels)
    return max(negativity, deviation)


def nosignalling_defect(
    op: OperatorMatrix,
    in_labels: Iterable[Label | str],
    out_labels: Iterable[Label | str],
    a: Label | str,
    b: Label | str,
) -> float:
    """Norm of Tr_{out minus b}[R] minus I_a/d_a (x) Tr_{a,out minus b}[R]."""
    ins = _as_label_tuple(op, in_labels)
    outs = _as_label_tuple(op, out_labels)
    (la,) = _as_label_tuple(op, [a])
    (lb,) = _as_label_tuple(op, [b])
    if la not in ins or lb not in outs:
        raise ValueError("a must be an input label and b an output label")
    reduced = partial_trace(op, [o for o in outs if o.name != lb.name])
    rest = partial_trace(reduced, [la])
    target = _insert_identity(rest, la, scale=1.0 / la.dimension)
    return float(np.linalg.norm(reduced.data - target.data, 2))


def is_nosignalling(
    op: OperatorMatrix,
    in_labels: Iterable[Label | str],
    out_labels: Iterable[Label | str],
    a: Label | str,
    b: Label | str,
    tol: float = 1e-9,
) -> bool:
    return nosignalling_defect(op, in_labels, out_labels, a, b) <= tol


def membership_defects(x: TypeExpr, op: OperatorMatrix) -> dict[str, float]:
    """Deviation of op from the deterministic set of x, component by component:
    hermiticity, negativity, identity coefficient, and the residual outside
    the type's deviation subspace."""
    analysis = io_partition(x)
    labels = canonical_universe(analysis.elementary)
    if labels != op.labels:
        raise ValueError("operator labels do not match the type's systems")
    lam = float(analysis.lam)
    herm = op.hermiticity_defect()
    negativity = max(0.0, -op.min_eigenvalue())
    coeff = op.trace().real / op.side
    deviation = op.data - lam * np.eye(op.side)
    basis = delta_basis(x)
    projected = np.zeros_like(deviation)
    for element in basis.elements:
        weight = np.vdot(element.reshape(-1), deviation.reshape(-1))
        projected += weight * element
    residual = float(np.linalg.norm(deviation - projected))
    return {
        "hermiticity": herm,
        "negativity": negativity,
        "lambda_deviation": abs(coeff - lam),
        "subspace_residual": residual,
    }


def membership(x: TypeExpr, op: OperatorMatrix, tol: float = 1e-9) -> bool:
    """Is op a deterministic map of type x, to tolerance?"""
    defects = membership_defects(x, op)
    return all(value <= tol for value in defects.values())


# --- explicit violations -----------------------------------------------------------

def _diag_traceless(d: int) -> np.ndarray:
    m = np.zeros((d, d), dtype=complex)
    m[0, 0] = 1
    m[1, 1] = -1
    return m


def violation_witness(x: TypeExpr, a: Label | str, b: Label | str) -> OperatorMatrix:
    """A deterministic map of x whose (a, b) contraction is not a channel.

    Requires the contraction to be combinatorially inadmissible; the map is
    the identity-proportional point plus a small deviation along the witness
    word (diagonal traceless factors at 0 bits, identities at 1 bits).
    """
    analysis = io_partition(x)
    by_name = {lbl.name: lbl for lbl in analysis.elementary}
    la = by_name[a.name if isinstance(a, Label) else a]
    lb = by_name[b.name if isinstance(b, Label) else b]
    verdict = check_contraction(x, ContractionSpec.of([(la, lb)]))
    if verdict.admissible:
        raise ValueError(f"contraction ({la.name}, {lb.name}) is admissible; nothing to violate")
    if verdict.witness is None:
        raise ValueError(f"no word-level witness for reason {verdict.reason.value!r}")
    labels = canonical_universe(analysis.elementary)
    _guard(labels)
    word = verdict.witness
    factor = np.array([[1.0 + 0j]])
    for i, lbl in enumerate(labels):
        bit = (word.bits >> i) & 1
        block = np.eye(lbl.dimension, dtype=complex) if bit else _diag_traceless(lbl.dimension)
        factor = np.kron(factor, block)
    lam = float(analysis.lam)
    side = _side(labels)
    epsilon = lam / 2
    data = lam * np.eye(side) + epsilon * factor
    while float(np.linalg.eigvalsh(data)[0]) < 0:
        epsilon /= 2
        data = lam * np.eye(side) + epsilon * factor
    return OperatorMatrix(labels, data)


# --- plain-text dump ----------------------------------------------------------------

def dump_operator(op: OperatorMatrix) -> str:
    """Side then row-major real/imaginary pairs, one row per line."""
    lines = [str(op.side)]
    for row in op.data:
        lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))
    return "\n".join(lines)
