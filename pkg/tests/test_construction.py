"""Density evolution against independent oracles, set design, protection math."""

import itertools

import numpy as np
import pytest

from faultypolar import (
    CodeConstruction,
    FaultSpec,
    ResourceLimitError,
    construct_code,
    design_code,
    erasure_floor,
    evolve_all,
    evolve_path,
    expected_epsilon,
    index_to_path,
    pe_counts,
    rate_loss,
)


def oracle_z(n, p, delta=0.0, n_u=None):
    """Per-index path walk with inline formulas; independent of evolve_all.

    A faulty step erases the surviving fraction: T(e) + (1 - T(e)) * delta.
    """
    faulty = n if n_u is None else min(n_u, n)
    out = []
    for i0 in range(2**n):
        e = p
        for j in range(n):
            bit = (i0 >> (n - 1 - j)) & 1
            e = e * e if bit else 2 * e - e * e
            if j < faulty:
                e = e + (1 - e) * delta
        out.append(e)
    return np.array(out)


def test_index_to_path_examples():
    assert index_to_path(1, 2).transforms == ("check", "check")
    assert index_to_path(4, 2).transforms == ("variable", "variable")
    assert index_to_path(1, 0).bits == ()
    assert index_to_path(2, 2).bits == (0, 1)


def test_index_to_path_bijection():
    n = 5
    seen = set()
    for i in range(1, 2**n + 1):
        path = index_to_path(i, n)
        assert len(path) == n
        rebuilt = 1 + sum(b << (n - 1 - j) for j, b in enumerate(path.bits))
        assert rebuilt == i
        seen.add(path.bits)
    assert len(seen) == 2**n


def test_index_to_path_rejects_out_of_range():
    with pytest.raises(ValueError):
        index_to_path(0, 3)
    with pytest.raises(ValueError):
        index_to_path(9, 3)


def test_evolve_path_examples():
    assert evolve_path((1,), 0.5, FaultSpec(delta=0.1)) == pytest.approx(0.325, abs=1e-12)
    assert evolve_path((0, 0), 0.5, FaultSpec()) == pytest.approx(0.9375, abs=1e-12)
    for bits in itertools.product((0, 1), repeat=4):
        assert evolve_path(bits, 1.0, FaultSpec(delta=0.3, unprotected_steps=2)) == 1.0


def test_evolve_all_examples():
    assert np.allclose(evolve_all(1, 0.5, FaultSpec()), [0.75, 0.25], atol=1e-12)
    assert np.allclose(evolve_all(2, 0.5, FaultSpec()),
                       [0.9375, 0.5625, 0.4375, 0.0625], atol=1e-12)
    assert np.allclose(evolve_all(1, 0.5, FaultSpec(delta=0.1)),
                       [0.775, 0.325], atol=1e-12)


def test_evolve_all_matches_oracle_nonfaulty():
    for n in (0, 1, 3, 6, 10):
        z = evolve_all(n, 0.5, FaultSpec())
        assert np.max(np.abs(z - oracle_z(n, 0.5))) <= 1e-12
        assert abs(z.mean() - 0.5) <= 1e-12  # martingale conservation


def test_evolve_all_matches_oracle_faulty_and_protected():
    for n, delta, n_u in [(4, 0.1, None), (5, 1e-3, 2), (6, 0.02, 0), (6, 0.3, 6)]:
        fault = FaultSpec(delta=delta, unprotected_steps=n_u)
        z = evolve_all(n, 0.37, fault)
        assert np.max(np.abs(z - oracle_z(n, 0.37, delta, n_u))) <= 1e-12


def test_evolve_all_consistent_with_evolve_path():
    for n in range(0, 9):
        fault = FaultSpec(delta=1e-3, unprotected_steps=max(n - 2, 0))
        z = evolve_all(n, 0.41, fault)
        for i in sorted({1, min(2, 2**n), 2**n // 2 + 1, 2**n}):
            assert z[i - 1] == evolve_path(index_to_path(i, n), 0.41, fault)


def test_evolve_all_path_consistency_exhaustive_n12():
    fault = FaultSpec(delta=1e-6)
    n = 12
    z = evolve_all(n, 0.5, fault)
    rng = np.random.default_rng(5)
    for i in rng.choice(2**n, size=200, replace=False):
        assert z[i] == evolve_path(index_to_path(int(i) + 1, n), 0.5, fault)


def test_faulty_mean_identity():
    for n in (4, 10, 16):
        for n_u in (None, 3, n):
            fault = FaultSpec(delta=1e-6, unprotected_steps=n_u)
            z = evolve_all(n, 0.5, fault)
            target = 1 - 0.5 * (1 - 1e-6) ** fault.effective_steps(n)
            assert abs(z.mean() - target) <= 1e-10


def test_reliability_floor():
    fault = FaultSpec(delta=1e-6)
    floor = erasure_floor(1e-6)
    for n in (6, 10, 14):
        z = evolve_all(n, 0.5, fault)
        assert z.min() >= floor


def test_all_faulty_paths_stay_above_delta():
    rng = np.random.default_rng(11)
    from faultypolar import t_minus_faulty, t_plus_faulty

    for delta in (1e-6, 1e-3, 0.1):
        floor = erasure_floor(delta)
        for _ in range(100):
            eps = float(rng.random())
            above = eps >= floor
            for _ in range(200):
                step = t_plus_faulty if rng.random() < 0.5 else t_minus_faulty
                eps = step(eps, delta)
                assert eps >= delta
                if above:
                    assert eps >= floor
                above = above or eps >= floor


def test_evolve_all_resource_error():
    with pytest.raises(ResourceLimitError):
        evolve_all(25, 0.5, FaultSpec())
    with pytest.raises(ResourceLimitError):
        evolve_all(9, 0.5, FaultSpec(), max_exponent=8)


def test_design_code_examples():
    info, frozen = design_code([0.9375, 0.5625, 0.4375, 0.0625], 2)
    assert info == {3, 4} and frozen == {1, 2}
    info, frozen = design_code([0.75, 0.25], 1)
    assert info == {2}
    info, _ = design_code([0.5, 0.5], 1)
    assert info == {1}  # tie toward the smaller index


def test_design_code_random_vectors():
    rng = np.random.default_rng(3)
    for _ in range(50):
        z = rng.random(64)
        k = int(rng.integers(1, 64))
        info, frozen = design_code(z, k)
        assert len(info) == k and len(frozen) == 64 - k
        assert not info & frozen
        assert max(z[i - 1] for i in info) <= min(z[i - 1] for i in frozen)
    with pytest.raises(ValueError):
        design_code(z, 0)
    with pytest.raises(ValueError):
        design_code(z, 64)


def test_expected_epsilon_against_explicit_enumeration():
    def enumerate_mean(p, delta, steps):
        total = 0.0
        for bits in itertools.product((0, 1), repeat=steps):
            e = p
            for b in bits:
                t = e * e if b else 2 * e - e * e
                e = t + (1 - t) * delta
            total += e
        return total / 2**steps

    for p, delta, steps in [(0.5, 0.0, 7), (0.5, 0.1, 1), (0.3, 0.02, 5), (0.5, 1e-3, 10)]:
        val = expected_epsilon(p, delta, steps, method="enumerate")
        assert val == pytest.approx(enumerate_mean(p, delta, steps), abs=1e-12)
        closed = expected_epsilon(p, delta, steps, method="closed-form")
        assert val == pytest.approx(closed, abs=1e-12)


def test_expected_epsilon_examples():
    assert expected_epsilon(0.5, 0.0, 7) == pytest.approx(0.5, abs=1e-12)
    assert expected_epsilon(0.5, 0.1, 1) == pytest.approx(0.55, abs=1e-12)
    assert expected_epsilon(0.5, 1e-3, 10) == pytest.approx(
        1 - 0.5 * 0.999**10, abs=1e-12)


def test_expected_epsilon_cap_behavior():
    # auto falls back to the (exact) closed form above the cap
    value = expected_epsilon(0.5, 1e-4, 30)
    assert value == expected_epsilon(0.5, 1e-4, 30, method="closed-form")
    with pytest.raises(ResourceLimitError):
        expected_epsilon(0.5, 1e-4, 30, method="enumerate")
    with pytest.raises(ValueError):
        expected_epsilon(0.5, 1e-4, -1)
    with pytest.raises(ValueError):
        expected_epsilon(0.5, 1e-4, 5, method="guess")


def test_rate_loss_examples():
    assert rate_loss(0.5, 0.0, 10) == 0.0
    assert rate_loss(0.5, 1e-3, 10) == pytest.approx(0.5 * (1 - 0.999**10), abs=1e-12)
    assert rate_loss(0.5, 1e-5, 1) == pytest.approx(5e-6, abs=1e-15)
    assert rate_loss(0.3, 0.05, 4) >= 0.0


def test_pe_counts():
    assert pe_counts(10, 5) == (2047, 31, pytest.approx(31 / 2047))
    assert pe_counts(10, 0) == (2047, 0, 0.0)
    assert pe_counts(2, 3) == (7, 7, 1.0)
    # fixed n_u: protected fraction tends to 2**-n_u
    n_u = 5
    fractions = [pe_counts(n, (n + 1) - n_u).fraction for n in (10, 14, 18, 22)]
    assert abs(fractions[-1] - 2.0**-n_u) < 1e-6
    assert all(abs(f - 2.0**-n_u) >= abs(g - 2.0**-n_u) - 1e-18
               for f, g in zip(fractions, fractions[1:]))
    with pytest.raises(ValueError):
        pe_counts(4, 6)


def test_code_construction_invariants():
    fault = FaultSpec(delta=1e-6)
    code = construct_code(6, 0.5, fault, 32)
    assert code.N == 64 and code.k == 32 and code.rate == 0.5
    assert len(code.info_set | code.frozen_set) == 64
    assert max(code.reliabilities[i - 1] for i in code.info_set) <= \
        min(code.reliabilities[i - 1] for i in code.frozen_set)
    mask = code.frozen_mask
    assert mask.sum() == 32
    assert not mask[code.info_indices - 1].any()


def test_code_construction_rejects_bad_sets():
    z = evolve_all(2, 0.5, FaultSpec())
    with pytest.raises(ValueError):
        CodeConstruction(n=2, channel_erasure=0.5, fault=FaultSpec(),
                         reliabilities=z, info_set=frozenset({1, 2}),
                         frozen_set=frozenset({3, 4}))
    with pytest.raises(ValueError):
        CodeConstruction(n=2, channel_erasure=0.5, fault=FaultSpec(),
                         reliabilities=z, info_set=frozenset({3, 4}),
                         frozen_set=frozenset({1, 2, 4}))
