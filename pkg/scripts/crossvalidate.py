"""Randomized cross-validation of the combinatorial calculus against the
dense operator oracle.

For each random type, every (input, output) contraction is decided three
ways: by the signalling algorithm, by the critical-set test, and by brute
numerics (sampled maps must contract to channels, or an explicit witness
map must break the channel law).  Any disagreement is a bug.
"""

from __future__ import annotations

import argparse
import random
import sys

from hotypes import (
    Arrow,
    ContractionSpec,
    Elementary,
    Label,
    Relation,
    bar,
    check_contraction,
    io_partition,
    numeric_contraction,
    sample_deterministic,
    signals,
    tensor,
    violation_witness,
)
from hotypes.oracle import channel_violation_margin, is_channel

NAMES = [c for c in "ABCDEFGHJKLMNOPQRSTUVWXYZ"]


def random_type_with_io(rng: random.Random, max_systems: int, dims):
    """Random relabeled type with at least one input and one output."""

    def build(n: int, fresh) -> object:
        roll = rng.random()
        if n == 1:
            if roll < 0.6:
                return Elementary(fresh())
            return bar(build(1, fresh))
        split = rng.randint(1, n - 1)
        left, right = build(split, fresh), build(n - split, fresh)
        if roll < 0.6:
            return Arrow(left, right)
        return tensor(left, right)

    while True:
        counter = iter(NAMES)

        def fresh() -> Label:
            return Label(next(counter), rng.choice(list(dims)))

        x = build(rng.randint(2, max_systems), fresh)
        analysis = io_partition(x)
        if analysis.inputs and analysis.outputs:
            return x


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--types", type=int, default=20)
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-systems", type=int, default=4)
    parser.add_argument("--tol", type=float, default=1e-9)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    pairs_checked = 0
    disagreements = 0
    for index in range(args.types):
        x = random_type_with_io(rng, args.max_systems, (2,))
        analysis = io_partition(x)
        samples = [
            sample_deterministic(x, seed=args.seed + 1000 * index + t)
            for t in range(args.trials)
        ]
        for a in analysis.inputs_ordered():
            for b in analysis.outputs_ordered():
                pairs_checked += 1
                verdict = check_contraction(x, ContractionSpec.of([(a, b)]))
                relation = signals(x, a, b).relation
                if verdict.admissible != (relation is Relation.NO_SIGNALLING):
                    disagreements += 1
                    print(f"DISAGREE (structural) {x} {a.name}:{b.name}")
                    continue
                if verdict.admissible:
                    ins = [s.name for s in verdict.result_in]
                    outs = [s.name for s in verdict.result_out]
                    for sample in samples:
                        contracted = numeric_contraction(sample, a, b)
                        if not is_channel(contracted, ins, outs, args.tol):
                            disagreements += 1
                            print(f"DISAGREE (numeric) {x} {a.name}:{b.name}")
                            break
                else:
                    witness = violation_witness(x, a, b)
                    contracted = numeric_contraction(witness, a, b)
                    ins = [s.name for s in analysis.inputs_ordered() if s != a]
                    outs = [s.name for s in analysis.outputs_ordered() if s != b]
                    if channel_violation_margin(contracted, ins, outs) < 10 * args.tol:
                        disagreements += 1
                        print(f"DISAGREE (no violation) {x} {a.name}:{b.name}")

    print(
        f"{args.types} types, {pairs_checked} contractions, "
        f"{args.trials} samples each: {disagreements} disagreements"
    )
    return 0 if disagreements == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
