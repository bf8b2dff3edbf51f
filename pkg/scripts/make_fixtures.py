#!/usr/bin/env python3
"""Regenerate the committed fixtures: the well-formed corpus under corpus/
and the golden diagram files under docs/diagram-format/.

Run from the repository root:

    python scripts/make_fixtures.py
"""

import argparse
import random
from pathlib import Path

from reasongraph.mermaid import emit
from reasongraph.model import ReasoningMethod
from reasongraph.synth import golden_samples, make_sample

ROOT = Path(__file__).resolve().parent.parent


def write_corpus(per_method: int, seed: int) -> None:
    rng = random.Random(seed)
    for method in ReasoningMethod:
        directory = ROOT / "corpus" / method.value
        directory.mkdir(parents=True, exist_ok=True)
        for index in range(per_method):
            sample = make_sample(method, rng)
            (directory / f"sample_{index:03d}.txt").write_text(sample.text + "\n", "utf-8")
        print(f"corpus/{method.value}: {per_method} files")


def write_golden() -> None:
    directory = ROOT / "docs" / "diagram-format"
    directory.mkdir(parents=True, exist_ok=True)
    for name, trace, config in golden_samples():
        target = directory / f"{name}.mmd"
        target.write_text(emit(trace, config).text, "utf-8")
        print(f"wrote {target.relative_to(ROOT)}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--per-method", type=int, default=25)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    write_corpus(args.per_method, args.seed)
    write_golden()


if __name__ == "__main__":
    main()
