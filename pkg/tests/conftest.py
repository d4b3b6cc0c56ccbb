import numpy as np
import pytest

from backbone_assign import (
    GeneratorConfig,
    ProteinSequence,
    default_reference_stats,
    generate_dataset,
    random_sequence,
)
from backbone_assign.residue_typing import find_anchor_subsets

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def stats():
    return default_reference_stats()


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def synthetic_instance(seed, length, stats, noise=0.0, missing=0.0, need_anchor=True):
    """Seeded (sequence, spins, truth); ``length`` may be an int or a [lo, hi) pair."""
    rng = np.random.default_rng(seed)
    while True:
        n = length if isinstance(length, int) else int(rng.integers(*length))
        seq = random_sequence(n, rng)
        if not need_anchor or find_anchor_subsets(seq, stats):
            break
    spins, truth = generate_dataset(seq, stats, GeneratorConfig(noise, missing, seed))
    return seq, spins, truth


def small_instance(seed, stats, max_len=8):
    """A small, often messy instance for oracle comparisons (≤ max_len items)."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_len + 1))
    seq = ProteinSequence(tuple(rng.choice(list("ACDEFGHIKLMNPQRSTVWY"), size=n)))
    noise = float(rng.choice([0.0, 0.05, 0.3]))
    missing = float(rng.choice([0.0, 0.1, 0.3]))
    spins, truth = generate_dataset(seq, stats, GeneratorConfig(noise, missing, seed))
    return seq, spins, truth
