"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import math
import random
import sys
import time
from fractions import Fraction

import pytest

from altfolner.dp import decay_report, epsilon_sequence
from altfolner.folner import (
    brute_force_ratio,
    calibrate,
    cardinalities,
    delta_sequence,
    lemma_check,
)
from altfolner.mother import BElement, embedding_check, level_orbit, perfect1_witness, rooted
from altfolner.perm import random_alternating
from altfolner.words import GroupWord, ValencySequence, commutator, decompose, equal, is_identity
from conftest import ACCEPTANCE_LINES

SEED = 20240601


def report(number: int, title: str, ok: bool, detail: str, elapsed: float) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail}; {elapsed:.1f}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def test_1_oracle_equivalence():
    with Timer() as t:
        mismatches = []
        for d, k_top in ((2, 3), (3, 2)):
            ds = delta_sequence(d, k_top)
            for k in range(k_top + 1):
                brute = brute_force_ratio(d, k)
                if brute != 1 - ds[k]:
                    mismatches.append((d, k, brute, 1 - ds[k]))
        frozen = (brute_force_ratio(2, 1) == Fraction(2, 3) and brute_force_ratio(2, 2) == Fraction(3, 4)
                  and brute_force_ratio(3, 1) == Fraction(9, 19))
    ok = not mismatches and frozen and t.elapsed < 60
    report(1, "brute force = 1 - delta_k", ok, f"mismatches={mismatches}, frozen values ok={frozen}", t.elapsed)
    assert ok


def test_2_delta_table():
    with Timer() as t:
        ds = delta_sequence(5, 10 ** 5)
        head = ds[0] == Fraction(4, 5) and ds[1] == Fraction(1476, 2101)
        dec_bad = next((k for k in range(1, 10 ** 4 + 1) if not ds[k] < ds[k - 1]), None)
        floats = ds.floats()
        norm = [floats[k] * k ** 0.24 for k in range(1, 10 ** 5 + 1)]
        sup = max(norm)
        tail = norm[99:]
        tail_bad = next((i + 100 for i in range(1, len(tail)) if tail[i] > tail[i - 1]), None)
    ok = head and dec_bad is None and sup <= 1 and tail_bad is None and t.elapsed < 10
    report(2, "delta table and decay", ok,
           f"delta_1={ds[1]}, strictly decreasing to 1e4: {dec_bad is None}, sup delta_k*k^0.24={sup:.4f}, "
           f"non-increasing on [100,1e5]: {tail_bad is None}", t.elapsed)
    assert ok


def test_3_monte_carlo_calibration():
    with Timer() as t:
        results = [calibrate(5, k, 10 ** 5, SEED) for k in (1, 2)]
        again = calibrate(5, 1, 10 ** 4, SEED)
        repro = again == calibrate(5, 1, 10 ** 4, SEED)
    ok = all(abs(r["z"]) <= 4 for r in results) and repro and t.elapsed < 60
    detail = ", ".join(f"k={r['k']}: {r['fraction']:.4f} vs {float(r['expected']):.4f} (z={r['z']:+.2f})"
                       for r in results)
    report(3, "interior fraction within 4 SE", ok, f"{detail}, reproducible={repro}", t.elapsed)
    assert ok


def test_4_right_multiplication_suite():
    with Timer() as t:
        runs = [lemma_check(5, k, 1000, SEED + k) for k in (0, 1, 2)]
    total = sum(sum(r["violations"].values()) for r in runs)
    interior = [r["interior_samples"] for r in runs]
    ok = total == 0
    report(4, "right multiplication suite", ok,
           f"3000 triples at k=0,1,2, violations={total}, interior samples={interior}", t.elapsed)
    assert ok


def _random_word(rng, length=6):
    letters = []
    for _ in range(length):
        sym = random_alternating(5, rng=rng) if rng.random() < 0.5 else BElement.random(5, rng).to_spec()
        letters.append((sym, rng.choice((1, -1))))
    return GroupWord(letters, ValencySequence.constant(5))


def test_5_word_problem_and_witnesses():
    rng = random.Random(SEED)
    with Timer() as t:
        failed_relations = 0
        for i in range(1000):
            kind = i % 3
            if kind == 0:
                x = _random_word(rng)
                ok = is_identity(x * x.inverse())
            elif kind == 1:
                bx, by = BElement.random(5, rng), BElement.random(5, rng)
                ok = equal((bx * by).to_word(), bx.to_word() * by.to_word())
            else:
                x, y = _random_word(rng, 3), _random_word(rng, 3)
                ok = is_identity(commutator(x, y) * commutator(y, x))
            failed_relations += not ok
        failed_targets, slowest = 0, 0.0
        for i in range(100):
            target = BElement.random(5, rng) if i % 2 == 0 else random_alternating(5, rng=rng)
            t0 = time.perf_counter()
            w = perfect1_witness(target)
            dec = decompose(w)
            want = target.to_word() if isinstance(target, BElement) else rooted(target)
            good = (dec.root.is_identity() and equal(dec.sections[0], want)
                    and all(is_identity(s) for s in dec.sections[1:]))
            slowest = max(slowest, time.perf_counter() - t0)
            failed_targets += not good
    ok = failed_relations == 0 and failed_targets == 0 and slowest < 1
    report(5, "word problem and slot-one witnesses", ok,
           f"relation failures={failed_relations}/1000, witness failures={failed_targets}/100, "
           f"slowest witness {slowest:.3f}s", t.elapsed)
    assert ok


def test_6_level_transitivity():
    with Timer() as t:
        sizes = {j: len(level_orbit(5, j)) for j in (1, 2, 3)}
    ok = all(sizes[j] == 5 ** j for j in sizes)
    report(6, "transitive on levels 1..3", ok, f"orbit sizes {sizes}", t.elapsed)
    assert ok


def test_7_doubling_embedding():
    with Timer() as t:
        r = embedding_check(100, SEED, d=3, depth=3)
    ok = all(v == 0 for v in r["violations"].values())
    report(7, "doubling embedding", ok, f"100 elements, violations={r['violations']}", t.elapsed)
    assert ok


def test_8_epsilon_recursion():
    with Timer() as t:
        mismatch = []
        exact_upto = {}
        for d in (2, 3, 5):
            ds = delta_sequence(d, 50)
            exact_upto[d] = ds.exact_upto
            for K in range(51):
                e = epsilon_sequence(d, K)[K]
                if e != ds[K] or type(e) is not type(ds[K]):
                    mismatch.append((d, K))
        formula = ValencySequence(formula="5+floor(sqrt(log(k+2)))")
        eps = [r.eps for r in decay_report(formula, 2000)]
        plateau = next(K for K in range(1, 2001) if eps[K] < eps[K - 1])
        rises = [K for K in range(plateau, 2001) if eps[K] > eps[K - 1]]
    ok = not mismatch and eps[2000] < eps[200] and not rises and t.elapsed < 60
    report(8, "eps recursion", ok,
           f"constant d: eps_K^K = delta_K for K<=50 (exact through K={exact_upto}), mismatches={mismatch}; "
           f"eps_200={eps[200]:.6f} > eps_2000={eps[2000]:.6f}, rises after K={plateau}: {len(rises)}", t.elapsed)
    assert ok


def test_9_cardinalities():
    with Timer() as t:
        counts = cardinalities(5, 6)
        ds = delta_sequence(5, 6)
        integral = all(isinstance(c.total, int) and isinstance(c.interior, int) for c in counts)
        ratios = all(counts[k].interior_ratio() == 1 - ds[k] for k in range(7) if isinstance(ds[k], Fraction))
        l0 = counts[0].total == 12 * 60 ** 9
        growth = all(counts[k].total >= 2 ** (2 ** k) for k in range(6))
    ok = integral and ratios and l0 and growth
    digits = [math.ceil(c.total.bit_length() * math.log10(2)) for c in counts]
    report(9, "exact cardinalities", ok,
           f"|L_0| = 12*60^9: {l0}, about {digits} digits, ratios match delta: {ratios}", t.elapsed)
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
