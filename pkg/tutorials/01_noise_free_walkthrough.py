"""
Assigning a simulated protein, one stage at a time
==================================================

Simulate a clean dataset, then run anchor detection, anchor matching and
assembly by hand before calling the one-shot ``assign``.
"""

import numpy as np

from backbone_assign import (
    AssemblyProblem,
    GeneratorConfig,
    ScoringConfig,
    assign,
    build_items,
    default_reference_stats,
    evaluate_assignment,
    finalize_assignment,
    find_anchor_subsets,
    generate_dataset,
    match_anchors,
    multi_start_greedy,
    random_sequence,
)

stats = default_reference_stats()
rng = np.random.default_rng(3)
seq = random_sequence(45, rng)
print("sequence:", "".join(seq))

# one spin system per non-proline residue, ids shuffled
spins, truth = generate_dataset(seq, stats, GeneratorConfig(seed=3))
print(len(spins), "spin systems, first one:", spins[0])

# runs of easily typed residues (G, A, S, T...) become anchor subsets
subsets = find_anchor_subsets(seq, stats)
for s in subsets:
    print(f"  subset at {s.start_pos + 1}: {''.join(s.residues)} (uniqueness {s.uniqueness_score:.2f})")

# each subset is pinned to the one chain of spins that fits it
anchors = match_anchors(subsets, spins, stats, seq=seq)
for p in anchors.pseudoresidues:
    print(f"  pinned {'+'.join(p.members)} at position {p.anchor_pos + 1}")

# the rest is assembled around the anchors
items = build_items(spins, anchors.pseudoresidues)
prob = AssemblyProblem(items, seq, ScoringConfig(), stats)
result = multi_start_greedy(prob)
assignment = finalize_assignment(result, seq)
print("total error:", round(result.total_error, 3))
print("accuracy:", evaluate_assignment(assignment, truth).accuracy)

# the same thing in one call
run = assign(seq, spins, stats)
assert run.assignment.mapping == assignment.mapping
