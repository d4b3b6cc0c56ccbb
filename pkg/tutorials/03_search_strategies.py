"""
Greedy, A* and exhaustive search on the same small problems
===========================================================

A* is exact, so it should always match the brute-force oracle; the greedy
search can only tie or lose.
"""

import time

import numpy as np

from backbone_assign import (
    AssemblyProblem,
    GeneratorConfig,
    ScoringConfig,
    astar_assemble,
    build_items,
    default_reference_stats,
    exhaustive_oracle,
    generate_dataset,
    multi_start_greedy,
    random_sequence,
)

stats = default_reference_stats()
cfg = ScoringConfig()
rows = []
for seed in range(40):
    rng = np.random.default_rng(seed)
    seq = random_sequence(int(rng.integers(5, 9)), rng)
    spins, _ = generate_dataset(seq, stats, GeneratorConfig(0.3, 0.2, seed))
    if not spins:
        continue
    prob = AssemblyProblem(build_items(spins), seq, cfg, stats)
    costs = []
    for search in (exhaustive_oracle, astar_assemble, multi_start_greedy):
        t0 = time.perf_counter()
        costs.append((search(prob).total_error, time.perf_counter() - t0))
    rows.append(costs)

oracle, astar, greedy = (np.array([r[k][0] for r in rows]) for k in range(3))
print("instances:", len(rows))
print("A* equals oracle on all:", bool(np.allclose(astar, oracle)))
print("greedy worse than oracle on", int((greedy > oracle + 1e-9).sum()))
print("mean greedy excess:", float((greedy - oracle).mean()))
for k, name in enumerate(("oracle", "A*", "greedy")):
    print(f"{name:7s} mean time {np.mean([r[k][1] for r in rows]) * 1e3:.1f} ms")

# A* also handles bigger problems, up to 20 items by default
seq = random_sequence(18, np.random.default_rng(1))
spins, _ = generate_dataset(seq, stats, GeneratorConfig(0.1, 0.05, 1))
prob = AssemblyProblem(build_items(spins), seq, cfg, stats)
t0 = time.perf_counter()
a = astar_assemble(prob)
print(f"A* on {prob.m} items: {a.total_error:.2f} in {time.perf_counter() - t0:.2f} s, "
      f"greedy {multi_start_greedy(prob).total_error:.2f}")
