"""
How accuracy falls off with measurement noise
=============================================

Twenty length-40 proteins per noise level, 5% of the shifts dropped.
With dropped shifts even sigma 0 is not error free. Takes a minute or so.
"""

import numpy as np

from backbone_assign import (
    GeneratorConfig,
    PipelineConfig,
    ScoringConfig,
    assign,
    default_reference_stats,
    evaluate_assignment,
    find_anchor_subsets,
    generate_dataset,
    random_sequence,
)

stats = default_reference_stats()


def instance(seed, sigma):
    rng = np.random.default_rng(seed)
    seq = random_sequence(40, rng)
    while not find_anchor_subsets(seq, stats):
        seq = random_sequence(40, rng)
    spins, truth = generate_dataset(seq, stats, GeneratorConfig(sigma, 0.05, seed))
    return seq, spins, truth


def mean_accuracy(sigma, config=PipelineConfig(), seeds=range(20)):
    accs = []
    for seed in seeds:
        seq, spins, truth = instance(seed, sigma)
        accs.append(evaluate_assignment(assign(seq, spins, stats, config).assignment,
                                        truth).accuracy)
    return np.mean(accs), np.min(accs)


for sigma in (0.0, 0.02, 0.05, 0.1):
    mean, worst = mean_accuracy(sigma)
    print(f"sigma {sigma:4.2f} ppm: mean accuracy {mean:.3f}, worst {worst:.3f}")

# the link width is a tunable; see how it trades off at the noisiest level
for width in (0.15, 0.2, 0.3):
    config = PipelineConfig(scoring=ScoringConfig(sigma_link=width))
    mean, worst = mean_accuracy(0.1, config)
    print(f"sigma 0.10 ppm, sigma_link {width}: mean accuracy {mean:.3f}, worst {worst:.3f}")
