import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from backbone_assign import (
    AnchorSubset,
    GeneratorConfig,
    ProteinSequence,
    SpinSystem,
    ToleranceSchedule,
    build_pseudoresidue,
    enumerate_links,
    find_anchor_subsets,
    generate_dataset,
    link_error,
    match_anchors,
    random_sequence,
)
from backbone_assign.linking import link_gate_matrix


def test_link_error_examples():
    a = SpinSystem("a", 58.0, 32.0)
    b = SpinSystem("b", 50.0, 30.0, 58.0, 32.0)
    assert link_error(a, b) == (0.0, 2)
    a1 = SpinSystem("a", 58.0, None)
    b1 = SpinSystem("b", 50.0, 30.0, 58.0 + 0.2, 40.0)
    value, dims = link_error(a1, b1, 0.2)
    assert dims == 1 and value == pytest.approx(1.0)
    c = SpinSystem("c", 50.0, 30.0, None, None)
    assert link_error(a, c) == (math.inf, 0)


def test_link_error_is_directional():
    a = SpinSystem("a", 58.0, 32.0, 40.0, 20.0)
    b = SpinSystem("b", 50.0, 30.0, 58.0, 32.0)
    assert link_error(a, b).value == 0.0
    assert link_error(b, a).value > 100


def test_gate_matrix_matches_pairwise_max():
    spins = [SpinSystem("a", 58.0, None, 50.0, 31.0), SpinSystem("b", 50.1, 31.3, 58.2, 40.0),
             SpinSystem("c", 45.0, None, None, None)]
    worst = link_gate_matrix(spins)
    assert worst[0, 1] == pytest.approx(0.2)          # only Cα shared
    assert worst[1, 0] == pytest.approx(0.3)
    assert math.isinf(worst[0, 2]) and math.isinf(worst[1, 1])


def test_enumerate_links_recovers_true_chain(stats):
    seq = ProteinSequence(tuple("MKVLE"))
    spins, truth = generate_dataset(seq, stats, GeneratorConfig(seed=4))
    expected = {(truth.mapping[i], truth.mapping[i + 1]) for i in range(4)}
    assert enumerate_links(spins, 0.1) == expected


def test_enumerate_links_zero_tolerance_on_noisy_data(stats):
    seq = ProteinSequence(tuple("MKVLEAGS"))
    spins, _ = generate_dataset(seq, stats, GeneratorConfig(noise_sigma=0.03, seed=2))
    assert enumerate_links(spins, 0.0) == set()
    assert enumerate_links([], 0.3) == set()


shift = st.one_of(st.none(), st.floats(40, 70))


@st.composite
def spin_lists(draw):
    n = draw(st.integers(0, 8))
    out = []
    for k in range(n):
        vals = draw(st.lists(shift, min_size=4, max_size=4).filter(
            lambda v: any(x is not None for x in v)))
        out.append(SpinSystem(f"s{k}", *vals))
    return out


@given(spin_lists(), st.floats(0, 5), st.floats(0, 5))
def test_enumerate_links_monotone(spins, t1, t2):
    lo, hi = sorted((t1, t2))
    assert enumerate_links(spins, lo) <= enumerate_links(spins, hi)


# -- pseudoresidues -----------------------------------------------------------

def test_pseudoresidue_single_member():
    s = SpinSystem("s", 58.0, 32.0, 50.0, 20.0)
    p = build_pseudoresidue(["s"], [s], anchor_pos=3)
    assert (p.front_ca_prev, p.front_cb_prev, p.back_ca_i, p.back_cb_i) == (50.0, 20.0, 58.0, 32.0)
    assert p.anchor_pos == 3 and p.members == ("s",)


def test_pseudoresidue_two_members():
    a = SpinSystem("a", 58.0, 32.0, 50.0, 20.0)
    b = SpinSystem("b", 45.0, None, 58.0, 32.0)
    p = build_pseudoresidue(["a", "b"], [a, b])
    assert (p.front_ca_prev, p.front_cb_prev) == (50.0, 20.0)
    assert (p.back_ca_i, p.back_cb_i) == (45.0, None)
    with pytest.raises(ValueError):
        build_pseudoresidue(["a", "a"], [a, b])
    lonely = SpinSystem("c", 45.0, None, None, None)
    with pytest.raises(ValueError, match="no comparable"):
        build_pseudoresidue(["a", "c"], [a, lonely])


def test_pseudoresidue_chain_of_four_matches_truth(stats):
    seq = ProteinSequence(tuple("MKVLEAGS"))
    spins, truth = generate_dataset(seq, stats, GeneratorConfig(seed=7))
    members = [truth.mapping[i] for i in range(2, 6)]
    p = build_pseudoresidue(members, spins, anchor_pos=2)
    assert (p.front_ca_prev, p.front_cb_prev) == truth.shifts[1]
    assert (p.back_ca_i, p.back_cb_i) == truth.shifts[5]


# -- anchor matching ----------------------------------------------------------

def test_unique_spin_matches_at_first_tolerance(stats):
    spins = [SpinSystem("g1", 45.4, None, 57.0, 30.0), SpinSystem("k1", 56.9, 32.8, 45.4, None),
             SpinSystem("l1", 55.7, 42.3, 56.9, 32.8)]
    sub = AnchorSubset(1, ("G",), 7.6)
    res = match_anchors([sub], spins, stats)
    assert [p.members for p in res.pseudoresidues] == [("g1",)]
    assert res.matched == {1: 0.05} and res.consumed == {"g1"} and res.unmatched == []
    pseudos, consumed = res
    assert consumed == {"g1"}


def test_ambiguous_subset_stays_unmatched(stats):
    spins = [SpinSystem("g1", 45.4, None, 57.0, 30.0), SpinSystem("g2", 45.3, None, 55.0, 40.0)]
    sub = AnchorSubset(0, ("G",), 7.6)
    res = match_anchors([sub], spins, stats)
    assert res.pseudoresidues == [] and res.unmatched == [sub]


def test_ambiguity_resolved_by_links(stats):
    # two glycines, but only one is followed by an alanine-like spin
    spins = [SpinSystem("g1", 45.4, None, 57.0, 30.0), SpinSystem("g2", 45.0, None, 55.0, 40.0),
             SpinSystem("a1", 53.1, 19.0, 45.4, None), SpinSystem("k1", 57.0, 32.0, 52.0, 25.0)]
    sub = AnchorSubset(4, ("G", "A"), 11.0)
    res = match_anchors([sub], spins, stats)
    assert [p.members for p in res.pseudoresidues] == [("g1", "a1")]
    assert res.pseudoresidues[0].anchor_pos == 4


def test_rising_tolerance(stats):
    # the G->A link is 0.12 ppm off, so it is found only at the third step
    spins = [SpinSystem("g1", 45.4, None, 57.0, 30.0), SpinSystem("a1", 53.1, 19.0, 45.52, None)]
    sub = AnchorSubset(0, ("G", "A"), 11.0)
    res = match_anchors([sub], spins, stats, ToleranceSchedule(0.05, 0.05, 0.5))
    assert res.matched[0] == pytest.approx(0.15)


@pytest.mark.parametrize("seed", range(3))
def test_noise_free_anchors_sit_at_truth(stats, seed):
    rng = np.random.default_rng(seed)
    seq = random_sequence(148, rng)
    spins, truth = generate_dataset(seq, stats, GeneratorConfig(seed=seed))
    res = match_anchors(find_anchor_subsets(seq, stats), spins, stats)
    assert res.pseudoresidues
    for p in res.pseudoresidues:
        for q, sid in enumerate(p.members):
            assert truth.mapping[p.anchor_pos + q] == sid
    assert len(res.consumed) == sum(p.span for p in res.pseudoresidues)


def test_repeated_pattern_is_not_guessed(stats):
    # one glycine spin, but the sequence has glycines at 1 and 3
    seq = ProteinSequence(tuple("AGKGL"))
    spins = [SpinSystem("g1", 45.4, None, 53.0, 19.0)]
    sub = AnchorSubset(1, ("G",), 7.6)
    assert [p.members for p in match_anchors([sub], spins, stats).pseudoresidues] == [("g1",)]
    res = match_anchors([sub], spins, stats, seq=seq)
    assert res.pseudoresidues == [] and res.unmatched == [sub]
    # once the other glycine is claimed, the pattern is unique again
    res = match_anchors([sub], spins, stats, seq=seq, claimed=[3])
    assert [p.members for p in res.pseudoresidues] == [("g1",)]
