"""Type calculus for higher-order quantum maps.

Parse type expressions, compute their combinatorial invariants (word sets,
io partitions, normalization scalars), decide inclusion, contraction, and
composition admissibility, read off signalling relations, and cross-check
everything against dense Choi-operator numerics.
"""

from .type_core import (
    Arrow,
    DuplicateLabelError,
    Elementary,
    IoAnalysis,
    Label,
    TRIVIAL,
    Trivial,
    TypeExpr,
    TypeSyntaxError,
    bar,
    elementary_systems,
    io_partition,
    is_subtype,
    k_value,
    minimal_enclosing,
    parse_type,
    relabel_unique,
    render_type,
    tensor,
)
from .strings import (
    ANNIHILATED,
    BitWord,
    WordSet,
    all_ones,
    build_D,
    complement_bar,
    complement_perp,
    compose_sets,
    concat,
    contract_set,
    contract_word,
    critical_set,
    critical_set_multi,
    full_set,
    tensor_D_closed_form,
    traceless_set,
)
from .admissibility import (
    ContractionSpec,
    Reason,
    Verdict,
    check_composition,
    check_contraction,
    check_equivalence,
    check_inclusion,
    check_monotonicity,
    supermap_inclusion_form,
)
from .signalling import (
    Relation,
    SignallingVerdict,
    crosscheck,
    full_signalling,
    signalling_matrix,
    signals,
)
from .oracle import (
    OperatorMatrix,
    SubspaceBasis,
    channel_violation_margin,
    delta_basis,
    dump_operator,
    herm_basis,
    is_channel,
    is_nosignalling,
    link_product,
    membership,
    numeric_contraction,
    phi_operator,
    sample_deterministic,
    violation_witness,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
