from __future__ import annotations

import itertools
import random
from collections import Counter
from fractions import Fraction

import math

import pytest
from hypothesis import given, strategies as st

from altfolner.errors import ResourceLimitError
from altfolner.folner import (
    FolnerProfile,
    FolnerSampler,
    brute_force_ratio,
    calibrate,
    cardinalities,
    closed_form_size,
    delta_sequence,
    folner_function_bound,
    is_interior,
    is_member,
    lemma_check,
    next_ratio,
    profile_from_json,
    profile_mul_generator,
    profile_to_json,
    profile_to_word,
    recognize_word,
    sample_profile,
)
from altfolner.folner import _exact_step
from altfolner.mother import BElement
from altfolner.perm import Permutation, alternating_group, alternating_table, identity
from altfolner.words import GroupWord, ValencySequence, act

V5 = ValencySequence.constant(5)


def test_delta_values():
    ds = delta_sequence(5, 3)
    assert ds[0] == Fraction(4, 5)
    assert ds[1] == Fraction(1476, 2101)
    assert all(ds[k + 1] < ds[k] for k in range(3))
    assert [delta_sequence(2, 20)[k] for k in range(21)] == [Fraction(1, k + 2) for k in range(21)]


@given(st.integers(1, 10 ** 6), st.integers(1, 10 ** 6), st.integers(2, 7))
def test_exact_step_is_reduced(p, extra, deg):
    q = p + extra
    g = math.gcd(p, q)
    p, q = p // g, q // g
    num, den = _exact_step(p, q, deg)
    assert math.gcd(num, den) == 1
    assert Fraction(num, den) == next_ratio(Fraction(p, q), deg)


def test_delta_switches_to_floats():
    ds = delta_sequence(5, 20)
    assert 0 < ds.exact_upto < 20
    assert isinstance(ds[20], float)
    with pytest.raises(ValueError):
        ds.exact(20)
    short = delta_sequence(5, 5, exact_index=2)
    assert short.exact_upto == 2
    assert abs(short[5] - float(ds[5])) < 1e-15


def test_brute_force_oracle_values():
    assert brute_force_ratio(2, 1) == Fraction(2, 3)
    assert brute_force_ratio(2, 2) == Fraction(3, 4)
    assert brute_force_ratio(3, 1) == Fraction(9, 19)
    assert brute_force_ratio(3, 0) == Fraction(1, 3)
    assert brute_force_ratio([2, 3]) == Fraction(3, 5)
    with pytest.raises(ResourceLimitError):
        brute_force_ratio(2, 4)


def test_cardinalities():
    c = cardinalities(5, 3)
    assert c[0].total == 12 * 60 ** 9
    assert c[0].interior * 5 == c[0].total
    ds = delta_sequence(5, 3)
    assert all(c[k].interior_ratio() == 1 - ds[k] for k in range(4))
    assert c[0].total == closed_form_size(5, 0)
    assert all(c[k].total < closed_form_size(5, k) for k in (1, 2, 3))
    with pytest.raises(ResourceLimitError):
        cardinalities(5, 12, max_bits=1 << 16)
    with pytest.raises(ValueError):
        cardinalities(2, 1)


def _leaves(d: int, prefix=()):
    e = identity(d)
    leaves = {prefix + (1,): BElement.identity(d)}
    leaves.update({prefix + (t,): e for t in range(2, d + 1)})
    return leaves


def test_handmade_profiles():
    d = 5
    e = identity(d)
    to_two = Permutation.from_cycles("(1 2 3)", d)   # sends 2 -> 3, so sigma^-1(1) = 3
    p = FolnerProfile.build(d, 0, {(): e}, _leaves(d))
    assert is_member(p) and is_interior(p)
    q = FolnerProfile.build(d, 0, {(): to_two}, _leaves(d))
    assert is_member(q) and not is_interior(q)
    # depth one: every child closed -> no open child at the root
    internal = {(): e, **{(t,): to_two for t in range(1, 6)}}
    leaves = {}
    for t in range(1, 6):
        leaves.update(_leaves(d, (t,)))
    r = FolnerProfile.build(d, 1, internal, leaves)
    assert not is_member(r)
    with pytest.raises(ValueError):
        is_interior(r)
    internal[(4,)] = e
    s = FolnerProfile.build(d, 1, internal, leaves)
    assert is_member(s) and not is_interior(s)
    assert s.open_sets()[()] == frozenset({4})


def test_direction_skeletons():
    # d = 2, k = 1, directions keyed by vertex
    assert not is_member(FolnerProfile.from_directions((2, 2), {(1,): 2, (2,): 2}))
    p = FolnerProfile.from_directions((2, 2), {(): 1, (1,): 2, (2,): 1})
    assert is_member(p) and not is_interior(p)
    q = FolnerProfile.from_directions((2, 2), {(): 2, (1,): 1, (2,): 1})
    assert is_member(q) and is_interior(q)
    r = FolnerProfile.from_directions((5, 5), {(): 4, (4,): 1, (2,): 3})
    assert r.direction(()) == 4 and r.direction((2,)) == 3
    assert all(s.is_even() for s in r.internal.values())


def test_single_generators_recognized():
    c = Permutation.from_cycles("(1 2 3)", 5)
    p = recognize_word(GroupWord.of(c, valency=V5), 0)
    assert p is not None and not is_interior(p)
    fixes = Permutation.from_cycles("(2 3 4)", 5)
    assert is_interior(recognize_word(GroupWord.of(fixes, valency=V5), 0))
    b = BElement.random(5, random.Random(3))
    assert is_interior(recognize_word(GroupWord.of(b.to_spec(), valency=V5), 0))
    w = GroupWord.of(c, valency=V5) * GroupWord.of(b.to_spec(), valency=V5)
    assert _same(recognize_word(w, 0), profile_mul_generator(p, b))


def _random_skeleton_profile(rng):
    tab = alternating_table(5)
    internal = {(): rng.choice(tab.elements)}
    internal.update({(t,): rng.choice(tab.elements) for t in range(1, 6)})
    leaves = {}
    for t in range(1, 6):
        leaves[(t, 1)] = BElement.random(5, rng)
        leaves.update({(t, s): rng.choice(tab.elements) for s in range(2, 6)})
    return FolnerProfile(1, (5, 5), internal, leaves)


def test_cross_representation():
    rng = random.Random(11)
    seen = Counter()
    for _ in range(100):
        p = _random_skeleton_profile(rng)
        q = recognize_word(profile_to_word(p), 1)
        member = is_member(p)
        assert (q is not None) == member
        if member:
            assert _same(q, p) and is_interior(q) == is_interior(p)
            seen["interior" if is_interior(p) else "boundary"] += 1
        else:
            seen["outside"] += 1
    assert len(seen) == 3


def test_build_rejects_bad_leaves():
    d = 5
    leaves = _leaves(d)
    leaves[(1,)] = identity(d)
    with pytest.raises(ValueError):
        FolnerProfile.build(d, 0, {(): identity(d)}, leaves)
    with pytest.raises(ValueError):
        FolnerProfile.build(d, 0, {(): Permutation.from_cycles("(1 2)", d)}, _leaves(d))


@pytest.mark.parametrize("stratum", ["interior", "boundary"])
def test_sampler_strata(stratum, rng):
    sampler = FolnerSampler(5, 2)
    for _ in range(200):
        p = sampler.sample(stratum, rng)
        p.validate()
        assert is_member(p)
        assert is_interior(p) == (stratum == "interior")


def test_sampler_exactly_uniform_small_case():
    # d = 3, k = 1: 3^4 label choices, the members must be hit uniformly
    members = []
    a3 = alternating_group(3)
    for labels in itertools.product(a3, repeat=4):
        internal = {(): labels[0], (1,): labels[1], (2,): labels[2], (3,): labels[3]}
        p = FolnerProfile(1, (3, 3), internal)
        if is_member(p):
            members.append(tuple(sorted(internal.items())))
    sampler = FolnerSampler(3, 1, leaves=False)
    rng = random.Random(11)
    n = 30_000
    counts = Counter(tuple(sorted(sampler.sample("member", rng).internal.items())) for _ in range(n))
    assert set(counts) == set(members)
    exp = n / len(members)
    chi2 = sum((counts[m] - exp) ** 2 / exp for m in members)
    df = len(members) - 1
    assert chi2 < df + 5 * (2 * df) ** 0.5


def test_spine_maps_to_ones(rng):
    for _ in range(5):
        p = sample_profile(5, 1, "member", rng)
        w = profile_to_word(p)
        assert act(w, p.spine()) == (1, 1)


def test_json_round_trip(rng):
    p = sample_profile(5, 1, "boundary", rng)
    q = profile_from_json(profile_to_json(p))
    assert q.internal == p.internal and q.leaves == p.leaves


def _same(p, q):
    if p is None or q is None:
        return p is None and q is None
    return p.internal == q.internal and p.leaves == q.leaves


def test_multiplication_matches_words(rng):
    tab = alternating_table(5)
    cases = [(0, s) for s in ("member", "interior", "boundary") for _ in range(4)]
    cases += [(1, "member"), (1, "boundary")]
    for k, stratum in cases:
        p = sample_profile(5, k, stratum, rng)
        w = profile_to_word(p)
        assert _same(recognize_word(w, k), p)
        a = rng.choice(tab.elements)
        b = BElement.random(5, rng)
        for gen, word in ((a, a), (b, b.to_spec())):
            ws = w * GroupWord.of(word, valency=w.valency)
            assert _same(profile_mul_generator(p, gen), recognize_word(ws, k))


def test_identity_b_keeps_boundary(rng):
    p = sample_profile(5, 1, "boundary", rng)
    assert profile_mul_generator(p, BElement.identity(5)) is not None
    b = BElement.slot(Permutation.from_cycles("(1 2 3)", 5))
    assert profile_mul_generator(p, b) is None


def test_lemma_suite_small():
    r = lemma_check(5, 1, 300, seed=2)
    assert all(v == 0 for v in r["violations"].values())
    assert 0 < r["interior_samples"] < 300


def test_calibrate_independent_of_jobs():
    one = calibrate(5, 1, 25_000, seed=4, jobs=1)
    two = calibrate(5, 1, 25_000, seed=4, jobs=2)
    assert one == two
    assert abs(one["z"]) < 4


def test_folner_function_bound():
    r = folner_function_bound(2, 10)
    assert r.k_star == 8 and r.delta == Fraction(1, 10)
    r = folner_function_bound(3, 3)
    ds = delta_sequence(3, r.k_star)
    assert ds[r.k_star] <= Fraction(1, 3) < ds[r.k_star - 1]
    assert r.size == cardinalities(3, r.k_star)[r.k_star].total
    assert abs(r.log2_size - r.size.bit_length()) < 1
    big = folner_function_bound(5, 5)
    assert big.k_star == 211 and big.size is None and big.loglog2_size >= big.k_star
    one = folner_function_bound(5, 1)
    assert one.k_star == 0 and one.size == cardinalities(5, 0)[0].total
    with pytest.raises(ValueError):
        folner_function_bound(5, 0)
